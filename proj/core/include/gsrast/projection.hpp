#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gsrast/math.hpp"
#include "gsrast/scene.hpp"

namespace gsrast {

/// Covariance dilation added after projection; keeps the 2D footprint at
/// least one pixel wide.
constexpr double kCovarianceDilation = 0.3;
/// Quad half-extent in standard deviations. exp(-k^2/2) < 1/255 for k = 3.33,
/// so everything outside the quad is below the boundary-cull threshold.
constexpr double kQuadExtentSigma = 3.33;
/// Contributions below this alpha are discarded in both passes.
constexpr double kAlphaCullThreshold = 1.0 / 255.0;

struct ProjectedSplat {
    std::uint32_t splat_id = 0;  // index into the input list
    Vec2 mean2d;                 // pixels
    Sym2 cov2d;                  // pixels^2, dilation included
    Sym2 conic;                  // inverse of cov2d
    double depth = 0.0;          // view-space z
    Vec3 color;                  // from eval_sh_color at this view
    Vec2 axis_major;             // oriented quad half-extent axes (pixels)
    Vec2 axis_minor;
    double opacity = 0.0;
};

struct SortedSplatList {
    std::vector<std::uint32_t> order;  // indices into the projected list, depth ascending
    std::size_t visible_count = 0;
};

struct CullStats {
    std::size_t input = 0;
    std::size_t culled_near_far = 0;
    std::size_t culled_frustum = 0;
    std::size_t culled_degenerate = 0;  // near-singular or non-finite
    std::size_t visible = 0;
};

/// Exact inverse of a 2x2 symmetric matrix. Returns nothing if the
/// determinant falls below 1e-12 (splat is rejected, not clamped).
std::optional<Sym2> compute_conic(const Sym2& cov2d);

/// Oriented half-extent axes: kQuadExtentSigma * sqrt(lambda_i) * q_i.
void compute_quad_extent(const Sym2& cov2d, Vec2& axis_major, Vec2& axis_minor);

/// EWA projection of one splat. Returns nothing when culled; the reason is
/// recorded in stats.
std::optional<ProjectedSplat> project_splat(const GaussianSplat& splat, std::uint32_t splat_id,
                                            const Camera& cam, CullStats* stats = nullptr,
                                            int sh_degree = 3);

/// Stable ascending depth sort via an order-preserving float32 key and an
/// LSD radix pass; ties keep ascending input order.
SortedSplatList depth_sort(const std::vector<ProjectedSplat>& projected);

/// Projection + sort for a whole scene.
struct ProjectedFrame {
    std::vector<ProjectedSplat> splats;  // visible only
    SortedSplatList sorted;
    CullStats cull;
    std::size_t scene_size = 0;  // original splat count (gradient buffer extent)
};
ProjectedFrame project_scene(const std::vector<GaussianSplat>& scene, const Camera& cam,
                             int threads = 1, int sh_degree = 3);

/// Sorting-stage memory accounting: the hardware path keeps one
/// (key32, index32) pair per splat, the tile path one (key64, index32) pair
/// per splat-tile intersection, both double-buffered.
struct SortingMemoryReport {
    std::size_t splat_count = 0;
    std::size_t tile_pair_count = 0;
    std::size_t hardware_bytes = 0;
    std::size_t tile_bytes = 0;
    double tile_over_hardware = 0.0;
};
SortingMemoryReport sorting_memory_report(std::size_t n_splats, std::size_t tile_oracle_pairs);

/// Analytic splat-tile pair count: 16x16 tiles intersected by each visible
/// splat's quad AABB, summed.
std::size_t count_tile_pairs(const ProjectedFrame& frame, const Camera& cam);

}  // namespace gsrast
