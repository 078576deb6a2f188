#include "gsrast/reduction.hpp"

#include <array>
#include <atomic>

#include "gsrast/parallel.hpp"

namespace gsrast {

const char* strategy_name(ReductionStrategy s) {
    switch (s) {
        case ReductionStrategy::naive: return "naive";
        case ReductionStrategy::quad: return "quad";
        case ReductionStrategy::subgroup: return "subgroup";
        case ReductionStrategy::hybrid: return "hybrid";
    }
    return "?";
}

std::optional<ReductionStrategy> parse_strategy(const std::string& name) {
    if (name == "naive") return ReductionStrategy::naive;
    if (name == "quad") return ReductionStrategy::quad;
    if (name == "subgroup") return ReductionStrategy::subgroup;
    if (name == "hybrid") return ReductionStrategy::hybrid;
    return std::nullopt;
}

namespace {

inline void bump(std::uint64_t& counter, std::uint64_t n) {
    std::atomic_ref<std::uint64_t>(counter).fetch_add(n, std::memory_order_relaxed);
}

/// Commit one lane's worth of (already reduced) values to the splat's slots.
void issue_atomic(SplatGradientBuffer& buffer, std::uint32_t splat_id,
                  const std::array<double, kScreenSlots>& values) {
    double* slot = buffer.screen_slot(splat_id);
    for (int i = 0; i < kScreenSlots; ++i)
        if (values[i] != 0.0) atomic_add(slot[i], values[i]);
    bump(buffer.atomic_add_count, kParamGroups);
}

std::array<double, kScreenSlots> lane_values(const LaneGradients& g) {
    return {g.d_color.x, g.d_color.y, g.d_color.z, g.d_opacity,
            g.d_mean2d.x, g.d_mean2d.y, g.d_conic.xx, g.d_conic.xy, g.d_conic.yy};
}

}  // namespace

void reduce_gradient(const Subgroup& sg, std::span<const LaneGradients> grads,
                     std::span<const bool> culling_flags, const ReductionConfig& config,
                     SplatGradientBuffer& buffer) {
    // reduceFlag = not (cullingFlag or helper); padding lanes never participate.
    std::array<bool, kMaxSubgroupSize> reduce_flag{};
    std::size_t non_helper = 0;
    for (int l = 0; l < sg.size; ++l) {
        if (!sg.occupied(l)) continue;
        if (!sg.lanes[l].helper) ++non_helper;
        reduce_flag[l] = !sg.lanes[l].helper && !culling_flags[l];
    }
    const LaneMask reduce_mask = ballot(sg, std::span<const bool>(reduce_flag.data(), sg.size));
    const int active = ballot_bit_count(reduce_mask);
    bump(buffer.fragment_count, non_helper);
    bump(buffer.active_fragment_count, active);
    bump(buffer.naive_atomic_count, static_cast<std::uint64_t>(active) * kParamGroups);
    if (active == 0) return;

    // Masked copy: excluded lanes contribute exact zeros to every sum.
    std::array<std::array<double, kMaxSubgroupSize>, kScreenSlots> values{};
    for (int l = 0; l < sg.size; ++l) {
        if (!reduce_flag[l]) continue;
        const auto v = lane_values(grads[l]);
        for (int i = 0; i < kScreenSlots; ++i) values[i][l] = v[i];
    }

    const bool subgroup_branch =
        (config.strategy == ReductionStrategy::subgroup ||
         config.strategy == ReductionStrategy::hybrid) &&
        all_equal_splat(sg) && active >= config.threshold_x;

    if (config.strategy == ReductionStrategy::naive ||
        (config.strategy == ReductionStrategy::subgroup && !subgroup_branch)) {
        // One atomic per active lane; the standalone subgroup strategy has no
        // quad fallback.
        for (int l = 0; l < sg.size; ++l) {
            if (!reduce_flag[l]) continue;
            issue_atomic(buffer, sg.lanes[l].splat_id, lane_values(grads[l]));
        }
        return;
    }

    if (subgroup_branch) {
        std::array<double, kScreenSlots> sums;
        for (int i = 0; i < kScreenSlots; ++i)
            sums[i] = subgroup_add(sg, std::span<const double>(values[i].data(), sg.size));
        const int lsb = ballot_find_lsb(reduce_mask);
        issue_atomic(buffer, sg.lanes[lsb].splat_id, sums);
        return;
    }

    // Quad path: swap-add within each quad, then the least-significant active
    // lane of the quad commits.
    for (int i = 0; i < kScreenSlots; ++i)
        quad_add(sg, std::span<double>(values[i].data(), sg.size));
    for (int l = 0; l < sg.size; ++l) {
        if (!reduce_flag[l]) continue;
        const LaneMask quad_mask = reduce_mask & (0xFull << (l & ~3));
        if (ballot_find_lsb(quad_mask) != l) continue;
        std::array<double, kScreenSlots> sums;
        for (int i = 0; i < kScreenSlots; ++i) sums[i] = values[i][l];
        issue_atomic(buffer, sg.lanes[l].splat_id, sums);
    }
}

double atomic_add_rate(const SplatGradientBuffer& buffer) {
    if (buffer.naive_atomic_count == 0) return 0.0;
    return static_cast<double>(buffer.atomic_add_count) /
           static_cast<double>(buffer.naive_atomic_count);
}

}  // namespace gsrast
