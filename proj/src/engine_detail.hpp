#pragma once

#include <map>
#include <span>
#include <vector>

#include "swarmer/engine.hpp"

namespace swarmer::detail {

// Random streams of one run, forked from the run seed in a fixed order.
struct Streams {
    Rng deploy;
    Rng motion;
    Rng policy;
    Rng measure;
    Rng observer;
    Rng network;
    Rng timing;
    Rng failures;

    explicit Streams(std::uint64_t seed);
};

std::vector<std::size_t> nearest_indices(std::span<const FlsState> fls, std::size_t i, std::size_t k);

std::map<SwarmId, std::vector<std::size_t>> swarm_members(std::span<const FlsState> fls,
                                                          const std::vector<bool>* alive = nullptr);

// HD of the live FLSs against the ground-truth points they illuminate.
double observe_hd(std::span<const FlsState> fls, const std::vector<bool>* alive, TranslationMethod method,
                  std::size_t sample_size, Rng& rng);

std::vector<ObservedNeighbor> observe_neighbors(std::span<const FlsState> fls, const FlsState& self,
                                                const std::vector<std::size_t>& fid_index,
                                                const std::vector<bool>* alive = nullptr);

// Per-interval accumulation of the localization-related columns.
struct RowAccumulator {
    std::vector<std::size_t> localizing_sizes;
    std::map<Fid, std::size_t> per_anchor;
    double dist_localizing = 0.0;
    double dist_swarm_follow = 0.0;
    std::uint64_t bytes_tx = 0;
    std::size_t anchors_served = 0;
    std::size_t thawed = 0;
    std::size_t leases_expired = 0;

    void fill(RoundMetrics& row) const;
    void add_to(RunTotals& totals) const;
};

std::vector<Vec3> live_positions(std::span<const FlsState> fls, const std::vector<bool>* alive);

}  // namespace swarmer::detail
