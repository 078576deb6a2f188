#include "gsrast/projection.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <mutex>

#include "gsrast/parallel.hpp"

namespace gsrast {

std::optional<Sym2> compute_conic(const Sym2& cov2d) {
    const double det = cov2d.det();
    if (!(det > 1e-12)) return std::nullopt;
    return Sym2{cov2d.yy / det, -cov2d.xy / det, cov2d.xx / det};
}

void compute_quad_extent(const Sym2& cov2d, Vec2& axis_major, Vec2& axis_minor) {
    const Eigen2 e = eigen_sym2(cov2d);
    axis_major = e.axis_major * (kQuadExtentSigma * std::sqrt(std::max(e.lambda_major, 0.0)));
    axis_minor = e.axis_minor * (kQuadExtentSigma * std::sqrt(std::max(e.lambda_minor, 0.0)));
}

std::optional<ProjectedSplat> project_splat(const GaussianSplat& splat, std::uint32_t splat_id,
                                            const Camera& cam, CullStats* stats, int sh_degree) {
    const Vec3 p = cam.world_to_view.transform_point(splat.mean);
    if (!(p.z > cam.znear) || !(p.z < cam.zfar)) {
        if (stats) ++stats->culled_near_far;
        return std::nullopt;
    }

    ProjectedSplat out;
    out.splat_id = splat_id;
    out.depth = p.z;
    out.mean2d = {cam.fx * p.x / p.z + cam.cx, cam.fy * p.y / p.z + cam.cy};

    Mat23 jacobian;
    const double inv_z = 1.0 / p.z;
    jacobian.m[0] = {cam.fx * inv_z, 0.0, -cam.fx * p.x * inv_z * inv_z};
    jacobian.m[1] = {0.0, cam.fy * inv_z, -cam.fy * p.y * inv_z * inv_z};

    const Mat3 rot = rotation_matrix(splat.rotation);
    const Mat3 cov3d = rot * Mat3::diagonal({splat.scale.x * splat.scale.x,
                                             splat.scale.y * splat.scale.y,
                                             splat.scale.z * splat.scale.z}) *
                       rot.transposed();
    const Mat23 screen_from_world = jacobian * cam.world_to_view.rotation_part();
    Sym2 cov2d = congruence_2x3(screen_from_world, cov3d);
    cov2d.xx += kCovarianceDilation;
    cov2d.yy += kCovarianceDilation;
    out.cov2d = cov2d;

    if (!std::isfinite(cov2d.xx) || !std::isfinite(cov2d.xy) || !std::isfinite(cov2d.yy) ||
        !std::isfinite(out.mean2d.x) || !std::isfinite(out.mean2d.y)) {
        if (stats) ++stats->culled_degenerate;
        return std::nullopt;
    }
    const auto conic = compute_conic(cov2d);
    if (!conic) {
        if (stats) ++stats->culled_degenerate;
        return std::nullopt;
    }
    out.conic = *conic;
    compute_quad_extent(cov2d, out.axis_major, out.axis_minor);

    // Conservative frustum test: quad AABB against the image rectangle.
    const double ext_x = std::abs(out.axis_major.x) + std::abs(out.axis_minor.x);
    const double ext_y = std::abs(out.axis_major.y) + std::abs(out.axis_minor.y);
    if (out.mean2d.x + ext_x < 0.0 || out.mean2d.x - ext_x > cam.width ||
        out.mean2d.y + ext_y < 0.0 || out.mean2d.y - ext_y > cam.height) {
        if (stats) ++stats->culled_frustum;
        return std::nullopt;
    }

    out.color = eval_sh_color(splat, cam.position(), sh_degree).color;
    out.opacity = splat.opacity;
    return out;
}

namespace {

/// Order-preserving float -> uint32 key transform.
std::uint32_t depth_key(double depth) {
    const float f = static_cast<float>(depth);
    const std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
    return (bits & 0x80000000u) ? ~bits : bits | 0x80000000u;
}

}  // namespace

SortedSplatList depth_sort(const std::vector<ProjectedSplat>& projected) {
    const std::size_t n = projected.size();
    std::vector<std::uint32_t> keys(n);
    SortedSplatList out;
    out.order.resize(n);
    out.visible_count = n;
    for (std::size_t i = 0; i < n; ++i) {
        keys[i] = depth_key(projected[i].depth);
        out.order[i] = static_cast<std::uint32_t>(i);
    }

    // LSD radix over 4 byte digits; stable, so equal keys keep input order.
    std::vector<std::uint32_t> scratch_keys(n), scratch_order(n);
    for (int pass = 0; pass < 4; ++pass) {
        const int shift = pass * 8;
        std::size_t counts[256] = {};
        for (std::size_t i = 0; i < n; ++i) ++counts[(keys[i] >> shift) & 0xFF];
        std::size_t offsets[256];
        std::size_t running = 0;
        for (int d = 0; d < 256; ++d) {
            offsets[d] = running;
            running += counts[d];
        }
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t dst = offsets[(keys[i] >> shift) & 0xFF]++;
            scratch_keys[dst] = keys[i];
            scratch_order[dst] = out.order[i];
        }
        keys.swap(scratch_keys);
        out.order.swap(scratch_order);
    }
    return out;
}

ProjectedFrame project_scene(const std::vector<GaussianSplat>& scene, const Camera& cam,
                             int threads, int sh_degree) {
    cam.validate();
    ProjectedFrame frame;
    frame.scene_size = scene.size();
    frame.cull.input = scene.size();

    std::vector<std::optional<ProjectedSplat>> slots(scene.size());
    std::atomic<std::size_t> near_far{0}, frustum{0}, degenerate{0};
    parallel_for(0, scene.size(), threads, [&](std::size_t i) {
        CullStats local;
        slots[i] = project_splat(scene[i], static_cast<std::uint32_t>(i), cam, &local, sh_degree);
        near_far += local.culled_near_far;
        frustum += local.culled_frustum;
        degenerate += local.culled_degenerate;
    });
    frame.cull.culled_near_far = near_far;
    frame.cull.culled_frustum = frustum;
    frame.cull.culled_degenerate = degenerate;
    for (auto& s : slots)
        if (s) frame.splats.push_back(*s);
    frame.cull.visible = frame.splats.size();
    frame.sorted = depth_sort(frame.splats);
    return frame;
}

SortingMemoryReport sorting_memory_report(std::size_t n_splats, std::size_t tile_oracle_pairs) {
    SortingMemoryReport r;
    r.splat_count = n_splats;
    r.tile_pair_count = tile_oracle_pairs;
    constexpr std::size_t kKey32 = 4, kKey64 = 8, kIndex = 4, kDoubleBuffer = 2;
    r.hardware_bytes = n_splats * (kKey32 + kIndex) * kDoubleBuffer;
    r.tile_bytes = tile_oracle_pairs * (kKey64 + kIndex) * kDoubleBuffer;
    r.tile_over_hardware =
        r.hardware_bytes ? static_cast<double>(r.tile_bytes) / static_cast<double>(r.hardware_bytes)
                         : 0.0;
    return r;
}

std::size_t count_tile_pairs(const ProjectedFrame& frame, const Camera& cam) {
    constexpr int kTile = 16;
    const int tiles_x = (cam.width + kTile - 1) / kTile;
    const int tiles_y = (cam.height + kTile - 1) / kTile;
    std::size_t pairs = 0;
    for (const auto& p : frame.splats) {
        const double ext_x = std::abs(p.axis_major.x) + std::abs(p.axis_minor.x);
        const double ext_y = std::abs(p.axis_major.y) + std::abs(p.axis_minor.y);
        const int tx0 = std::clamp(static_cast<int>(std::floor((p.mean2d.x - ext_x) / kTile)), 0,
                                   tiles_x - 1);
        const int tx1 = std::clamp(static_cast<int>(std::floor((p.mean2d.x + ext_x) / kTile)), 0,
                                   tiles_x - 1);
        const int ty0 = std::clamp(static_cast<int>(std::floor((p.mean2d.y - ext_y) / kTile)), 0,
                                   tiles_y - 1);
        const int ty1 = std::clamp(static_cast<int>(std::floor((p.mean2d.y + ext_y) / kTile)), 0,
                                   tiles_y - 1);
        pairs += static_cast<std::size_t>(tx1 - tx0 + 1) * static_cast<std::size_t>(ty1 - ty0 + 1);
    }
    return pairs;
}

}  // namespace gsrast
