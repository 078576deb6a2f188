#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gsrast/gpu_sim.hpp"
#include "gsrast/math.hpp"

namespace gsrast {

enum class ReductionStrategy : std::uint8_t { naive, quad, subgroup, hybrid };

const char* strategy_name(ReductionStrategy s);
std::optional<ReductionStrategy> parse_strategy(const std::string& name);

struct ReductionConfig {
    ReductionStrategy strategy = ReductionStrategy::hybrid;
    int threshold_x = 8;  // minimum active lanes for the subgroup branch
};

/// Screen-space gradients of one fragment: what the reduction aggregates
/// before a single thread commits them with atomic adds.
struct LaneGradients {
    Vec3 d_color;
    double d_opacity = 0.0;
    Vec2 d_mean2d;
    Sym2 d_conic;  // gradient w.r.t. the three unique conic entries
};

constexpr int kScreenSlots = 9;   // color(3) opacity(1) mean2d(2) conic(3)
constexpr int kParamGroups = 4;   // color | opacity | mean2d | conic
constexpr int kParamSlots = 59;   // mean(3) rot(4) scale(3) opacity(1) sh(48)

// Offsets into the per-splat parameter gradient block.
constexpr int kParamMean = 0;
constexpr int kParamRotation = 3;
constexpr int kParamScale = 7;
constexpr int kParamOpacity = 10;
constexpr int kParamSh = 11;

/// Per-splat gradient accumulator. `screen` holds the atomically-updated
/// fragment-phase slots; `params` holds the final per-parameter gradients
/// filled by the dedicated per-splat pass.
struct SplatGradientBuffer {
    std::size_t splat_count = 0;
    std::vector<double> screen;  // kScreenSlots per splat
    std::vector<double> params;  // kParamSlots per splat

    std::uint64_t atomic_add_count = 0;     // one per issued atomic per group
    std::uint64_t naive_atomic_count = 0;   // what the naive strategy would issue
    std::uint64_t fragment_count = 0;       // occupied non-helper lanes seen
    std::uint64_t active_fragment_count = 0;

    explicit SplatGradientBuffer(std::size_t count = 0) { resize(count); }
    void resize(std::size_t count) {
        splat_count = count;
        screen.assign(count * kScreenSlots, 0.0);
        params.assign(count * kParamSlots, 0.0);
    }

    double* screen_slot(std::uint32_t splat_id) { return &screen[splat_id * kScreenSlots]; }
    const double* screen_slot(std::uint32_t splat_id) const {
        return &screen[splat_id * kScreenSlots];
    }
    double* param_slot(std::uint32_t splat_id) { return &params[splat_id * kParamSlots]; }
    const double* param_slot(std::uint32_t splat_id) const {
        return &params[splat_id * kParamSlots];
    }
};

/// One subgroup's worth of Algorithm-2 reduction. Lanes with a culling flag
/// or helper status never contribute, whatever value sits in their slot.
/// Atomic counters move once per issued atomic per parameter group.
void reduce_gradient(const Subgroup& sg, std::span<const LaneGradients> grads,
                     std::span<const bool> culling_flags, const ReductionConfig& config,
                     SplatGradientBuffer& buffer);

/// atomic adds issued / what the naive strategy would issue on this frame.
double atomic_add_rate(const SplatGradientBuffer& buffer);

}  // namespace gsrast
