#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "gsrast/projection.hpp"

namespace gsrast {

constexpr int kMaxSubgroupSize = 64;

/// One simulated fragment-shader thread.
struct FragmentLane {
    int px = 0, py = 0;                // pixel coordinate
    std::uint32_t splat_id = 0;        // original scene index
    std::uint32_t projected_index = 0; // index into ProjectedFrame::splats
    double alpha = 0.0;                // Gaussian density at the pixel center
    bool helper = false;               // outside primitive coverage
    std::uint8_t lane = 0;             // index within the subgroup
};

/// 2x2 fragment block; lanes cover (2x,2y), (2x+1,2y), (2x,2y+1), (2x+1,2y+1).
struct FragmentQuad {
    std::array<FragmentLane, 4> lanes{};
    int covered = 0;  // non-helper lane count
};

/// Minimal schedulable thread block. Quads are lane-aligned: lanes 4k..4k+3
/// form one quad. Unoccupied lanes (padding) have no bit in the mask.
struct Subgroup {
    std::array<FragmentLane, kMaxSubgroupSize> lanes{};
    std::uint64_t occupancy = 0;
    int size = 32;

    bool occupied(int lane) const { return (occupancy >> lane) & 1u; }
    int quad_count() const;
    bool single_splat() const;  // all occupied lanes share one splat id
};

enum class PackingMode : std::uint8_t {
    primitive_exclusive,  // never mixes splats; pads at primitive boundaries
    greedy_shared,        // fills across primitive boundaries (default model)
};

struct PackingPolicy {
    PackingMode mode = PackingMode::greedy_shared;
    int subgroup_size = 32;  // multiple of 4, <= kMaxSubgroupSize
};

const char* packing_name(PackingMode m);

/// Every 2x2 block overlapping the splat's oriented quad, clipped to the
/// image, in row-major order. Lanes outside coverage are helpers; alpha is
/// evaluated for all four lanes so quad swaps see real values.
std::vector<FragmentQuad> rasterize_primitive(const ProjectedSplat& splat, int width, int height);

/// Pixel-center-in-oriented-quad coverage test (the rasterization rule).
bool covers_pixel(const ProjectedSplat& splat, int px, int py);

/// Pack a frame's quads, splat by splat in sorted order, into subgroups.
std::vector<Subgroup> pack_subgroups(const ProjectedFrame& frame, const Camera& cam,
                                     const PackingPolicy& policy);

/// Streaming variant; subgroups are built and handed out one at a time.
void for_each_subgroup(const ProjectedFrame& frame, const Camera& cam,
                       const PackingPolicy& policy,
                       const std::function<void(const Subgroup&)>& fn);

// --- subgroup/quad intrinsics -------------------------------------------
// Value arrays are indexed by lane; only occupied lanes are read.

using LaneMask = std::uint64_t;

LaneMask ballot(const Subgroup& sg, std::span<const bool> flags);
int ballot_bit_count(LaneMask mask);
int ballot_find_lsb(LaneMask mask);  // -1 when mask is empty
bool all_equal_splat(const Subgroup& sg);  // splat id uniform over occupied non-helper lanes
/// Broadcast sum over occupied lanes, in lane order.
double subgroup_add(const Subgroup& sg, std::span<const double> values);
/// Neighbor exchange within each quad: horizontal is lane^1, vertical lane^2.
void quad_swap_horizontal(const Subgroup& sg, std::span<const double> in, std::span<double> out);
void quad_swap_vertical(const Subgroup& sg, std::span<const double> in, std::span<double> out);
/// Two-step swap-add; every lane of a quad ends with the quad's sum.
void quad_add(const Subgroup& sg, std::span<double> values);
LaneMask quad_or(const Subgroup& sg, std::span<const LaneMask> in, std::span<LaneMask> out);
/// AND of a flag over the four lanes of the quad containing `lane`.
bool quad_all(const Subgroup& sg, std::span<const bool> flags, int lane);

// --- rasterization-ordered critical section ------------------------------

enum class InterlockSchedule : std::uint8_t {
    sequential,      // submission order, single thread
    fuzzed,          // random interleaving that respects per-pixel order
    pixel_parallel,  // pixels partitioned across worker threads
};

struct InterlockConfig {
    InterlockSchedule schedule = InterlockSchedule::sequential;
    std::uint64_t fuzz_seed = 0;
    int threads = 1;
    bool check_order = false;  // assert per-pixel monotonicity (debug)
};

/// Executes `critical(subgroup_index, lane)` once per occupied non-helper
/// lane. Whatever the schedule, lanes touching the same pixel run in
/// submission order; any conforming schedule must produce identical state.
void interlocked_pixel_section(std::span<const Subgroup> stream, int width, int height,
                               const InterlockConfig& config,
                               const std::function<void(std::size_t, int)>& critical);

// --- cohesion -------------------------------------------------------------

struct CohesionStats {
    std::size_t cohesive_fragments = 0;  // non-helper lanes in single-splat subgroups
    std::size_t total_fragments = 0;     // all non-helper lanes
    std::size_t subgroup_count = 0;
    std::size_t mixed_subgroup_count = 0;
    double rate = 0.0;
    std::vector<std::uint8_t> incoherent_mask;  // width*height, 1 = touched by a mixed subgroup
};

CohesionStats measure_cohesion(const ProjectedFrame& frame, const Camera& cam,
                               const PackingPolicy& policy);

/// Line-delimited trace for test inspection.
void dump_subgroup_trace(std::ostream& out, std::span<const Subgroup> stream);

}  // namespace gsrast
