#pragma once

#include <cstdint>
#include <vector>

#include "gsrast/forward.hpp"
#include "gsrast/gpu_sim.hpp"
#include "gsrast/precision.hpp"
#include "gsrast/projection.hpp"
#include "gsrast/reduction.hpp"

namespace gsrast {

/// T-culling threshold: fragments reading a transmittance below this are
/// skipped in the backward pass.
constexpr double kTCullThreshold = 1e-4;

/// Per-fragment screen-space gradients plus the culling decision of the
/// critical section.
struct IntermediateGradients {
    Vec3 d_color;
    double d_alpha = 0.0;
    LaneGradients screen;  // opacity / mean2d / conic after the alpha chain
    bool culled = true;
};

struct BackwardOptions {
    StorageFormat format = StorageFormat::float32;
    ReductionConfig reduction;
    PackingPolicy packing;
    bool t_culling = true;
    bool early_quad_termination = true;
    int threads = 1;
    int sh_degree = 3;
    InterlockSchedule schedule = InterlockSchedule::sequential;
    std::uint64_t fuzz_seed = 0;  // only read by the fuzzed schedule
};

struct BackwardStats {
    std::size_t fragments = 0;        // occupied non-helper lanes
    std::size_t helper_lanes = 0;
    std::size_t boundary_culled = 0;  // alpha < 1/255
    std::size_t t_culled = 0;         // read T below threshold
    std::size_t active = 0;
    std::size_t subgroups = 0;
    std::size_t quads = 0;
    std::size_t quads_terminated_early = 0;
    std::uint64_t atomic_adds = 0;
    std::uint64_t naive_atomic_equiv = 0;
    double atomic_rate = 0.0;
    double t_cull_rate = 0.0;
    double seconds = 0.0;
};

struct BackwardResult {
    SplatGradientBuffer gradients;
    BackwardStats stats;
};

/// d(alpha)/d(opacity, mean2d, conic) chained with d_alpha. `d` is the pixel
/// center minus the 2D mean.
LaneGradients backprop_alpha_to_screen_params(double d_alpha, double alpha, const Vec2& d,
                                              const Sym2& conic, double opacity);

/// Per-splat pass: accumulated screen-space gradients to gradients w.r.t.
/// the activated 3D parameters (mean, rotation, scale, opacity, SH).
void backprop_to_3d(const double* screen_slot, const ProjectedSplat& projected,
                    const GaussianSplat& splat, const Camera& cam, StorageFormat format,
                    int sh_degree, double* param_slot);

/// Algorithm-1 backward pass: per-fragment (C', T) recurrence inside the
/// per-pixel ordered critical section, gradient computation, Algorithm-2
/// reduction, then the per-splat 3D pass.
BackwardResult render_backward(const std::vector<GaussianSplat>& scene,
                               const ProjectedFrame& frame, const Camera& cam,
                               const RenderTarget& forward_target, const Image3& grad_image,
                               const BackwardOptions& options);

}  // namespace gsrast
