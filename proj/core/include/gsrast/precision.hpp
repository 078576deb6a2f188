#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gsrast {

/// Render-target / state-texture storage formats. Arithmetic is always done
/// in full precision; these only describe how values round when stored.
enum class StorageFormat : std::uint8_t {
    float32,
    float16,
    unorm16,
    unorm8,
};

const char* format_name(StorageFormat f);
std::optional<StorageFormat> parse_format(const std::string& name);

/// Round a value through one store in the given format.
///   float32 : double -> float -> double
///   float16 : IEEE binary16, round to nearest even
///   unormN  : clamp to [0,1], round half away from zero to N-bit steps
/// NaN propagates for float kinds and maps to 0 for unorm kinds.
double quantize(double value, StorageFormat format);

/// binary16 round trip exposed for tests (bit-level round to nearest even).
std::uint16_t float_to_half(float value);
float half_to_float(std::uint16_t half);

/// Gradient error metrics of a reduced-precision run against the float32
/// reference, per magnitude bin of the reference values.
struct ErrorReport {
    double rmse = 0.0;
    // Bins partition by |reference|: [10, inf), [0.1, 10), [1e-3, 0.1).
    std::optional<double> mre_large;
    std::optional<double> mre_mid;
    std::optional<double> mre_small;
    std::size_t count = 0;
};

ErrorReport gradient_error_report(const std::vector<double>& reference,
                                  const std::vector<double>& test);

}  // namespace gsrast
