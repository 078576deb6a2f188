#pragma once

#include <cstdint>
#include <vector>

#include "gsrast/gpu_sim.hpp"
#include "gsrast/precision.hpp"
#include "gsrast/projection.hpp"

namespace gsrast {

/// Full-precision RGB image (gradient inputs, oracle outputs).
struct Image3 {
    int width = 0, height = 0;
    std::vector<Vec3> pixels;

    Image3() = default;
    Image3(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h) {}
    Vec3& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    const Vec3& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Full-precision scalar image (transmittance maps).
struct Image1 {
    int width = 0, height = 0;
    std::vector<double> pixels;

    Image1() = default;
    Image1(int w, int h, double fill = 0.0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}
    double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Format-quantized 4-channel texture holding (color, T) per pixel. Serves
/// both as the forward render target and as the backward pass state texture;
/// every store rounds through the declared format.
struct RenderTarget {
    StorageFormat format = StorageFormat::float32;
    int width = 0, height = 0;
    std::vector<double> data;  // r, g, b, t interleaved, already quantized
    std::uint64_t nan_stores = 0;

    RenderTarget() = default;
    RenderTarget(int w, int h, StorageFormat f);

    Vec3 color(int x, int y) const {
        const double* p = &data[(static_cast<std::size_t>(y) * width + x) * 4];
        return {p[0], p[1], p[2]};
    }
    double transmittance(int x, int y) const {
        return data[(static_cast<std::size_t>(y) * width + x) * 4 + 3];
    }
    void store(int x, int y, const Vec3& c, double t);
};

/// Gaussian density at a pixel center, clamped to 0.999 so 1/(1-alpha)
/// stays finite.
double eval_alpha(const ProjectedSplat& splat, int px, int py);

/// Front-to-back "under" blend step in full precision; the caller stores the
/// result (which is where quantization happens).
void blend_under(const Vec3& color, double t, double alpha, const Vec3& c_sat, Vec3& color_out,
                 double& t_out);

/// Clamp splat color to [0,1] for unorm formats; identity otherwise.
Vec3 saturate_color(const Vec3& c, StorageFormat format);

struct ForwardStats {
    CullStats cull;
    std::size_t fragments = 0;       // covered pixels over all splats
    std::size_t blended = 0;         // fragments with alpha >= 1/255
    std::size_t boundary_culled = 0;
    double seconds = 0.0;
};

struct ForwardResult {
    RenderTarget target;
    ForwardStats stats;
};

/// Fixed-function forward pass: depth order per pixel, boundary cull at
/// 1/255, no T-culling, transparent background.
ForwardResult render_forward(const ProjectedFrame& frame, const Camera& cam, StorageFormat format,
                             int threads = 1);

}  // namespace gsrast
