#include "gsrast/forward.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>

#include "gsrast/parallel.hpp"

namespace gsrast {

RenderTarget::RenderTarget(int w, int h, StorageFormat f)
    : format(f), width(w), height(h), data(static_cast<std::size_t>(w) * h * 4, 0.0) {
    // background: color 0, T = 1 (both exact in every format)
    for (std::size_t i = 0; i < static_cast<std::size_t>(w) * h; ++i) data[i * 4 + 3] = 1.0;
}

void RenderTarget::store(int x, int y, const Vec3& c, double t) {
    double* p = &data[(static_cast<std::size_t>(y) * width + x) * 4];
    const double vals[4] = {c.x, c.y, c.z, t};
    for (int i = 0; i < 4; ++i) {
        if (std::isnan(vals[i]) &&
            (format == StorageFormat::unorm8 || format == StorageFormat::unorm16))
            std::atomic_ref<std::uint64_t>(nan_stores).fetch_add(1, std::memory_order_relaxed);
        p[i] = quantize(vals[i], format);
    }
}

double eval_alpha(const ProjectedSplat& splat, int px, int py) {
    const Vec2 d{px + 0.5 - splat.mean2d.x, py + 0.5 - splat.mean2d.y};
    const double q = std::max(splat.conic.quad(d), 0.0);
    return std::min(splat.opacity * std::exp(-0.5 * q), 0.999);
}

void blend_under(const Vec3& color, double t, double alpha, const Vec3& c_sat, Vec3& color_out,
                 double& t_out) {
    color_out = color + c_sat * (t * alpha);
    t_out = t * (1.0 - alpha);
}

Vec3 saturate_color(const Vec3& c, StorageFormat format) {
    if (format != StorageFormat::unorm8 && format != StorageFormat::unorm16) return c;
    auto sat = [](double v) { return std::clamp(v, 0.0, 1.0); };
    return {sat(c.x), sat(c.y), sat(c.z)};
}

ForwardResult render_forward(const ProjectedFrame& frame, const Camera& cam, StorageFormat format,
                             int threads) {
    const auto t0 = std::chrono::steady_clock::now();
    ForwardResult result;
    result.target = RenderTarget(cam.width, cam.height, format);
    result.stats.cull = frame.cull;

    std::atomic<std::size_t> fragments{0}, blended{0}, boundary_culled{0};
    const int workers = resolve_threads(threads);

    // Each worker owns a row subset and walks splats in depth order, so the
    // per-pixel blend order matches the global sort for any worker count.
    parallel_for(0, static_cast<std::size_t>(workers), workers, [&](std::size_t w) {
        std::size_t local_frag = 0, local_blend = 0, local_cull = 0;
        for (std::size_t rank = 0; rank < frame.sorted.order.size(); ++rank) {
            const ProjectedSplat& splat = frame.splats[frame.sorted.order[rank]];
            const double ext_x = std::abs(splat.axis_major.x) + std::abs(splat.axis_minor.x);
            const double ext_y = std::abs(splat.axis_major.y) + std::abs(splat.axis_minor.y);
            int x0 = std::max(static_cast<int>(std::ceil(splat.mean2d.x - ext_x - 0.5)), 0);
            int x1 = std::min(static_cast<int>(std::floor(splat.mean2d.x + ext_x - 0.5)),
                              cam.width - 1);
            int y0 = std::max(static_cast<int>(std::ceil(splat.mean2d.y - ext_y - 0.5)), 0);
            int y1 = std::min(static_cast<int>(std::floor(splat.mean2d.y + ext_y - 0.5)),
                              cam.height - 1);
            for (int py = y0; py <= y1; ++py) {
                if (static_cast<std::size_t>(py) % workers != w) continue;
                for (int px = x0; px <= x1; ++px) {
                    if (!covers_pixel(splat, px, py)) continue;
                    ++local_frag;
                    const double alpha = eval_alpha(splat, px, py);
                    if (alpha < kAlphaCullThreshold) {
                        ++local_cull;
                        continue;
                    }
                    ++local_blend;
                    const Vec3 c_sat = saturate_color(splat.color, format);
                    Vec3 color;
                    double t;
                    blend_under(result.target.color(px, py),
                                result.target.transmittance(px, py), alpha, c_sat, color, t);
                    result.target.store(px, py, color, t);
                }
            }
        }
        fragments += local_frag;
        blended += local_blend;
        boundary_culled += local_cull;
    });

    result.stats.fragments = fragments;
    result.stats.blended = blended;
    result.stats.boundary_culled = boundary_culled;
    result.stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

}  // namespace gsrast
