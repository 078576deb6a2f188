#include "gsrast/precision.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace gsrast {

const char* format_name(StorageFormat f) {
    switch (f) {
        case StorageFormat::float32: return "f32";
        case StorageFormat::float16: return "f16";
        case StorageFormat::unorm16: return "unorm16";
        case StorageFormat::unorm8: return "unorm8";
    }
    return "?";
}

std::optional<StorageFormat> parse_format(const std::string& name) {
    if (name == "f32" || name == "float32") return StorageFormat::float32;
    if (name == "f16" || name == "float16") return StorageFormat::float16;
    if (name == "unorm16") return StorageFormat::unorm16;
    if (name == "unorm8") return StorageFormat::unorm8;
    return std::nullopt;
}

std::uint16_t float_to_half(float value) {
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(value);
    const std::uint32_t sign = (bits >> 16) & 0x8000u;
    const std::uint32_t exp = (bits >> 23) & 0xFFu;
    std::uint32_t mant = bits & 0x7FFFFFu;

    if (exp == 0xFF) {  // inf / nan
        return static_cast<std::uint16_t>(sign | 0x7C00u | (mant ? 0x200u : 0u));
    }
    const int unbiased = static_cast<int>(exp) - 127;
    if (unbiased > 15) {  // overflow -> inf
        return static_cast<std::uint16_t>(sign | 0x7C00u);
    }
    if (unbiased >= -14) {  // normal half
        std::uint32_t half = (static_cast<std::uint32_t>(unbiased + 15) << 10) | (mant >> 13);
        const std::uint32_t rem = mant & 0x1FFFu;
        if (rem > 0x1000u || (rem == 0x1000u && (half & 1u))) ++half;  // round to nearest even
        return static_cast<std::uint16_t>(sign | half);
    }
    if (unbiased >= -25) {  // subnormal half
        mant |= 0x800000u;  // implicit leading one
        const int shift = 14 - unbiased;  // in [15, 25] -> mantissa shift of 13 + (shift - 14)
        std::uint32_t half = mant >> (shift + 9);
        const std::uint32_t rem_mask = (1u << (shift + 9)) - 1u;
        const std::uint32_t rem = mant & rem_mask;
        const std::uint32_t halfway = 1u << (shift + 8);
        if (rem > halfway || (rem == halfway && (half & 1u))) ++half;
        return static_cast<std::uint16_t>(sign | half);
    }
    return static_cast<std::uint16_t>(sign);  // underflow to signed zero
}

float half_to_float(std::uint16_t half) {
    const std::uint32_t sign = (static_cast<std::uint32_t>(half) & 0x8000u) << 16;
    const std::uint32_t exp = (half >> 10) & 0x1Fu;
    const std::uint32_t mant = half & 0x3FFu;
    std::uint32_t bits;
    if (exp == 0) {
        if (mant == 0) {
            bits = sign;
        } else {  // subnormal: renormalize
            int e = -1;
            std::uint32_t m = mant;
            while (!(m & 0x400u)) {
                m <<= 1;
                ++e;
            }
            bits = sign | (static_cast<std::uint32_t>(113 - e) << 23) | ((m & 0x3FFu) << 13);
        }
    } else if (exp == 0x1F) {
        bits = sign | 0x7F800000u | (mant << 13);
    } else {
        bits = sign | ((exp + 112) << 23) | (mant << 13);
    }
    return std::bit_cast<float>(bits);
}

namespace {

double quantize_unorm(double value, int bits) {
    if (std::isnan(value)) return 0.0;
    const double steps = static_cast<double>((1u << bits) - 1u);
    double v = value;
    if (v < 0.0) v = 0.0;
    if (v > 1.0) v = 1.0;
    // round half away from zero; v >= 0 here so this is round half up
    return std::floor(v * steps + 0.5) / steps;
}

}  // namespace

double quantize(double value, StorageFormat format) {
    switch (format) {
        case StorageFormat::float32:
            return static_cast<double>(static_cast<float>(value));
        case StorageFormat::float16:
            return static_cast<double>(half_to_float(float_to_half(static_cast<float>(value))));
        case StorageFormat::unorm16:
            return quantize_unorm(value, 16);
        case StorageFormat::unorm8:
            return quantize_unorm(value, 8);
    }
    throw std::logic_error("unknown storage format");
}

ErrorReport gradient_error_report(const std::vector<double>& reference,
                                  const std::vector<double>& test) {
    if (reference.size() != test.size())
        throw std::invalid_argument("gradient_error_report: buffer size mismatch");
    ErrorReport report;
    report.count = reference.size();
    double sq_sum = 0.0;
    double sum_large = 0.0, sum_mid = 0.0, sum_small = 0.0;
    std::size_t n_large = 0, n_mid = 0, n_small = 0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double ref = reference[i];
        const double diff = test[i] - ref;
        sq_sum += diff * diff;
        const double mag = std::abs(ref);
        if (mag >= 10.0) {
            sum_large += std::abs(diff) / mag;
            ++n_large;
        } else if (mag >= 0.1) {
            sum_mid += std::abs(diff) / mag;
            ++n_mid;
        } else if (mag >= 1e-3) {
            sum_small += std::abs(diff) / mag;
            ++n_small;
        }
    }
    report.rmse = reference.empty() ? 0.0 : std::sqrt(sq_sum / static_cast<double>(reference.size()));
    if (n_large) report.mre_large = sum_large / static_cast<double>(n_large);
    if (n_mid) report.mre_mid = sum_mid / static_cast<double>(n_mid);
    if (n_small) report.mre_small = sum_small / static_cast<double>(n_small);
    return report;
}

}  // namespace gsrast
