#include "gsrast/gpu_sim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

#include "gsrast/forward.hpp"

namespace gsrast {

int Subgroup::quad_count() const {
    int quads = 0;
    for (int q = 0; q * 4 < size; ++q)
        if ((occupancy >> (q * 4)) & 0xFull) ++quads;
    return quads;
}

bool Subgroup::single_splat() const {
    bool seen = false;
    std::uint32_t id = 0;
    for (int l = 0; l < size; ++l) {
        if (!occupied(l)) continue;
        if (!seen) {
            id = lanes[l].splat_id;
            seen = true;
        } else if (lanes[l].splat_id != id) {
            return false;
        }
    }
    return true;
}

const char* packing_name(PackingMode m) {
    return m == PackingMode::greedy_shared ? "shared" : "exclusive";
}

bool covers_pixel(const ProjectedSplat& splat, int px, int py) {
    const Vec2 d{px + 0.5 - splat.mean2d.x, py + 0.5 - splat.mean2d.y};
    const double len_major = splat.axis_major.norm();
    const double len_minor = splat.axis_minor.norm();
    if (len_major <= 0.0 || len_minor <= 0.0) return false;
    const Vec2 u{splat.axis_major.x / len_major, splat.axis_major.y / len_major};
    return std::abs(d.dot(u)) <= len_major && std::abs(d.x * -u.y + d.y * u.x) <= len_minor;
}

std::vector<FragmentQuad> rasterize_primitive(const ProjectedSplat& splat, int width, int height) {
    std::vector<FragmentQuad> quads;
    const double ext_x = std::abs(splat.axis_major.x) + std::abs(splat.axis_minor.x);
    const double ext_y = std::abs(splat.axis_major.y) + std::abs(splat.axis_minor.y);
    // Pixels whose centers can lie inside the quad AABB.
    int x0 = static_cast<int>(std::ceil(splat.mean2d.x - ext_x - 0.5));
    int x1 = static_cast<int>(std::floor(splat.mean2d.x + ext_x - 0.5));
    int y0 = static_cast<int>(std::ceil(splat.mean2d.y - ext_y - 0.5));
    int y1 = static_cast<int>(std::floor(splat.mean2d.y + ext_y - 0.5));
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    x1 = std::min(x1, width - 1);
    y1 = std::min(y1, height - 1);
    if (x0 > x1 || y0 > y1) return quads;

    const int bx0 = x0 / 2, bx1 = x1 / 2;
    const int by0 = y0 / 2, by1 = y1 / 2;
    for (int by = by0; by <= by1; ++by) {
        for (int bx = bx0; bx <= bx1; ++bx) {
            FragmentQuad quad;
            int covered = 0;
            for (int l = 0; l < 4; ++l) {
                const int px = bx * 2 + (l & 1);
                const int py = by * 2 + (l >> 1);
                FragmentLane& lane = quad.lanes[l];
                lane.px = px;
                lane.py = py;
                lane.splat_id = splat.splat_id;
                lane.alpha = eval_alpha(splat, px, py);
                lane.helper = !covers_pixel(splat, px, py);
                lane.lane = static_cast<std::uint8_t>(l);
                if (!lane.helper) ++covered;
            }
            if (covered == 0) continue;
            quad.covered = covered;
            quads.push_back(quad);
        }
    }
    return quads;
}

namespace {

class SubgroupPacker {
public:
    SubgroupPacker(const PackingPolicy& policy, const std::function<void(const Subgroup&)>& sink)
        : policy_(policy), sink_(sink) {
        if (policy.subgroup_size % 4 != 0 || policy.subgroup_size < 4 ||
            policy.subgroup_size > kMaxSubgroupSize)
            throw std::invalid_argument("subgroup size must be a multiple of 4 in [4, 64]");
        current_.size = policy.subgroup_size;
    }

    void push(const FragmentQuad& quad, std::uint32_t projected_index) {
        const int base = quad_cursor_ * 4;
        for (int l = 0; l < 4; ++l) {
            FragmentLane lane = quad.lanes[l];
            lane.projected_index = projected_index;
            lane.lane = static_cast<std::uint8_t>(base + l);
            current_.lanes[base + l] = lane;
            current_.occupancy |= 1ull << (base + l);
        }
        ++quad_cursor_;
        if (quad_cursor_ * 4 >= policy_.subgroup_size) flush();
    }

    void primitive_boundary() {
        if (policy_.mode == PackingMode::primitive_exclusive) flush();
    }

    void flush() {
        if (quad_cursor_ == 0) return;
        sink_(current_);
        current_ = Subgroup{};
        current_.size = policy_.subgroup_size;
        quad_cursor_ = 0;
    }

private:
    PackingPolicy policy_;
    const std::function<void(const Subgroup&)>& sink_;
    Subgroup current_;
    int quad_cursor_ = 0;
};

}  // namespace

void for_each_subgroup(const ProjectedFrame& frame, const Camera& cam,
                       const PackingPolicy& policy,
                       const std::function<void(const Subgroup&)>& fn) {
    SubgroupPacker packer(policy, fn);
    for (std::size_t rank = 0; rank < frame.sorted.order.size(); ++rank) {
        const std::uint32_t pi = frame.sorted.order[rank];
        const auto quads = rasterize_primitive(frame.splats[pi], cam.width, cam.height);
        for (const auto& q : quads) packer.push(q, pi);
        packer.primitive_boundary();
    }
    packer.flush();
}

std::vector<Subgroup> pack_subgroups(const ProjectedFrame& frame, const Camera& cam,
                                     const PackingPolicy& policy) {
    std::vector<Subgroup> out;
    for_each_subgroup(frame, cam, policy, [&](const Subgroup& sg) { out.push_back(sg); });
    return out;
}

// --- intrinsics -----------------------------------------------------------

LaneMask ballot(const Subgroup& sg, std::span<const bool> flags) {
    LaneMask mask = 0;
    for (int l = 0; l < sg.size; ++l)
        if (sg.occupied(l) && flags[l]) mask |= 1ull << l;
    return mask;
}

int ballot_bit_count(LaneMask mask) { return std::popcount(mask); }

int ballot_find_lsb(LaneMask mask) {
    return mask ? std::countr_zero(mask) : -1;
}

bool all_equal_splat(const Subgroup& sg) {
    bool seen = false;
    std::uint32_t id = 0;
    for (int l = 0; l < sg.size; ++l) {
        if (!sg.occupied(l) || sg.lanes[l].helper) continue;
        if (!seen) {
            id = sg.lanes[l].splat_id;
            seen = true;
        } else if (sg.lanes[l].splat_id != id) {
            return false;
        }
    }
    return true;
}

double subgroup_add(const Subgroup& sg, std::span<const double> values) {
    double sum = 0.0;
    for (int l = 0; l < sg.size; ++l)
        if (sg.occupied(l)) sum += values[l];
    return sum;
}

void quad_swap_horizontal(const Subgroup& sg, std::span<const double> in, std::span<double> out) {
    for (int l = 0; l < sg.size; ++l) out[l] = in[l ^ 1];
}

void quad_swap_vertical(const Subgroup& sg, std::span<const double> in, std::span<double> out) {
    for (int l = 0; l < sg.size; ++l) out[l] = in[l ^ 2];
}

void quad_add(const Subgroup& sg, std::span<double> values) {
    std::array<double, kMaxSubgroupSize> tmp{};
    quad_swap_horizontal(sg, values, tmp);
    for (int l = 0; l < sg.size; ++l) values[l] += tmp[l];
    quad_swap_vertical(sg, values, tmp);
    for (int l = 0; l < sg.size; ++l) values[l] += tmp[l];
}

LaneMask quad_or(const Subgroup& sg, std::span<const LaneMask> in, std::span<LaneMask> out) {
    for (int l = 0; l < sg.size; ++l) out[l] = in[l] | in[l ^ 1];
    for (int l = 0; l < sg.size; ++l) out[l] |= out[l ^ 2] | in[(l ^ 2) ^ 1];
    // Equivalent to the two-step swap-or; recompute directly for clarity.
    for (int l = 0; l < sg.size; ++l) {
        const int q = l & ~3;
        out[l] = in[q] | in[q + 1] | in[q + 2] | in[q + 3];
    }
    return out.empty() ? 0 : out[0];
}

bool quad_all(const Subgroup& sg, std::span<const bool> flags, int lane) {
    const int q = lane & ~3;
    for (int l = q; l < q + 4; ++l)
        if (sg.occupied(l) && !flags[l]) return false;
    return true;
}

// --- interlock ------------------------------------------------------------

namespace {

struct LaneRef {
    std::uint32_t subgroup = 0;
    std::uint8_t lane = 0;
};

}  // namespace

void interlocked_pixel_section(std::span<const Subgroup> stream, int width, int height,
                               const InterlockConfig& config,
                               const std::function<void(std::size_t, int)>& critical) {
    switch (config.schedule) {
        case InterlockSchedule::sequential: {
            for (std::size_t s = 0; s < stream.size(); ++s) {
                const Subgroup& sg = stream[s];
                for (int l = 0; l < sg.size; ++l)
                    if (sg.occupied(l) && !sg.lanes[l].helper) critical(s, l);
            }
            return;
        }
        case InterlockSchedule::fuzzed: {
            // Per-pixel queues in submission order; drain in random global order.
            std::vector<std::vector<LaneRef>> queues(static_cast<std::size_t>(width) * height);
            for (std::size_t s = 0; s < stream.size(); ++s) {
                const Subgroup& sg = stream[s];
                for (int l = 0; l < sg.size; ++l) {
                    if (!sg.occupied(l) || sg.lanes[l].helper) continue;
                    const auto& lane = sg.lanes[l];
                    queues[static_cast<std::size_t>(lane.py) * width + lane.px].push_back(
                        {static_cast<std::uint32_t>(s), static_cast<std::uint8_t>(l)});
                }
            }
            std::vector<std::uint32_t> ready;
            std::vector<std::uint32_t> cursor(queues.size(), 0);
            for (std::uint32_t p = 0; p < queues.size(); ++p)
                if (!queues[p].empty()) ready.push_back(p);
            std::mt19937_64 rng(config.fuzz_seed);
            while (!ready.empty()) {
                const std::size_t pick = rng() % ready.size();
                const std::uint32_t pixel = ready[pick];
                const LaneRef ref = queues[pixel][cursor[pixel]++];
                critical(ref.subgroup, ref.lane);
                if (cursor[pixel] == queues[pixel].size()) {
                    ready[pick] = ready.back();
                    ready.pop_back();
                }
            }
            return;
        }
        case InterlockSchedule::pixel_parallel: {
            const int workers = std::max(1, config.threads);
            if (workers == 1) {
                InterlockConfig seq = config;
                seq.schedule = InterlockSchedule::sequential;
                interlocked_pixel_section(stream, width, height, seq, critical);
                return;
            }
            // Each worker owns a pixel subset and walks the whole stream, so
            // per-pixel submission order holds trivially.
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (int w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    for (std::size_t s = 0; s < stream.size(); ++s) {
                        const Subgroup& sg = stream[s];
                        for (int l = 0; l < sg.size; ++l) {
                            if (!sg.occupied(l) || sg.lanes[l].helper) continue;
                            const auto& lane = sg.lanes[l];
                            if ((static_cast<std::size_t>(lane.py) * width + lane.px) % workers !=
                                static_cast<std::size_t>(w))
                                continue;
                            critical(s, l);
                        }
                    }
                });
            }
            for (auto& t : pool) t.join();
            return;
        }
    }
}

// --- cohesion ---------------------------------------------------------------

CohesionStats measure_cohesion(const ProjectedFrame& frame, const Camera& cam,
                               const PackingPolicy& policy) {
    CohesionStats stats;
    stats.incoherent_mask.assign(static_cast<std::size_t>(cam.width) * cam.height, 0);
    for_each_subgroup(frame, cam, policy, [&](const Subgroup& sg) {
        ++stats.subgroup_count;
        const bool cohesive = sg.single_splat();
        if (!cohesive) ++stats.mixed_subgroup_count;
        for (int l = 0; l < sg.size; ++l) {
            if (!sg.occupied(l) || sg.lanes[l].helper) continue;
            ++stats.total_fragments;
            if (cohesive) {
                ++stats.cohesive_fragments;
            } else {
                stats.incoherent_mask[static_cast<std::size_t>(sg.lanes[l].py) * cam.width +
                                      sg.lanes[l].px] = 1;
            }
        }
    });
    stats.rate = stats.total_fragments
                     ? static_cast<double>(stats.cohesive_fragments) /
                           static_cast<double>(stats.total_fragments)
                     : 1.0;
    return stats;
}

void dump_subgroup_trace(std::ostream& out, std::span<const Subgroup> stream) {
    for (std::size_t s = 0; s < stream.size(); ++s) {
        const Subgroup& sg = stream[s];
        out << "subgroup " << s << " quads " << sg.quad_count() << " splats";
        std::uint32_t last = 0;
        bool any = false;
        for (int l = 0; l < sg.size; ++l) {
            if (!sg.occupied(l)) continue;
            if (!any || sg.lanes[l].splat_id != last) {
                out << ' ' << sg.lanes[l].splat_id;
                last = sg.lanes[l].splat_id;
                any = true;
            }
        }
        LaneMask helpers = 0;
        for (int l = 0; l < sg.size; ++l)
            if (sg.occupied(l) && sg.lanes[l].helper) helpers |= 1ull << l;
        out << " occupancy 0x" << std::hex << sg.occupancy << " helpers 0x" << helpers << std::dec
            << '\n';
    }
}

}  // namespace gsrast
