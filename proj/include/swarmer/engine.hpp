#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "swarmer/config.hpp"
#include "swarmer/geometry.hpp"
#include "swarmer/protocol.hpp"

namespace swarmer {

struct RoundMetrics {
    double round_or_time = 0.0;
    double hd = 0.0;
    std::size_t swarm_count = 0;
    std::size_t localizing_min = 0;
    double localizing_avg = 0.0;
    std::size_t localizing_max = 0;
    std::size_t anchor_count = 0;
    std::size_t merged_swarms_per_anchor_min = 0;
    double merged_swarms_per_anchor_avg = 0.0;
    std::size_t merged_swarms_per_anchor_max = 0;
    double dist_localizing = 0.0;
    double dist_swarm_follow = 0.0;
    double dist_total = 0.0;
    std::uint64_t bytes_tx = 0;
    std::size_t localizations = 0;
    std::size_t anchors_served = 0;
    std::size_t thawed_swarms = 0;
    std::size_t leases_expired = 0;
};

struct Snapshot {
    std::size_t index = 0;
    double round_or_time = 0.0;
    std::vector<Vec3> points;
};

struct KillRecord {
    double time_s = 0.0;
    Fid fid = 0;
    bool was_localizing = false;  // held a lease when it died
    Fid replacement = 0;
    double hd_before = 0.0;      // last sample before the failure
    double arrival_s = 0.0;      // replacement reached the point
    double hd_on_arrival = 0.0;  // observed the moment it arrived
};

struct RunTotals {
    double dist_localizing = 0.0;
    double dist_swarm_follow = 0.0;
    std::uint64_t bytes_tx = 0;
    std::size_t localizations = 0;
    std::size_t anchors_served = 0;
    std::size_t thawed_swarms = 0;
    std::size_t leases_granted = 0;
    std::size_t leases_expired = 0;
    std::size_t failures = 0;
    std::size_t replacements = 0;
    std::size_t thaws = 0;  // thaw epochs (rounds) or Thaw broadcasts (events)

    double dist_total() const { return dist_localizing + dist_swarm_follow; }
};

struct RunResult {
    RunMode mode = RunMode::rounds;
    std::vector<RoundMetrics> trace;
    std::vector<Snapshot> snapshots;
    std::string status;
    bool reached_threshold = false;
    std::optional<double> threshold_at;     // round index or seconds
    std::optional<double> single_swarm_at;  // first time one swarm existed
    double final_hd = 0.0;
    std::size_t final_swarm_count = 0;
    std::size_t rounds = 0;
    double simulated_s = 0.0;
    RunTotals totals;
    std::vector<Vec3> deployed;  // est positions right after deployment, by FID - 1
    std::vector<Vec3> final_est;  // live FLSs' positions, ordered by ground-truth index
    std::optional<Fid> oracle_fid;
    std::vector<KillRecord> kills;
};

struct Deployment {
    std::vector<FlsState> fls;        // index fid - 1
    std::vector<double> deploy_legs;  // flight length of each FLS
    std::optional<Fid> oracle_fid;
    int dim = 3;
};

// FIDs are 1..F in cloud order.
Deployment deploy(const PointCloud& gt, const RunConfig& config, Rng& rng);

// Seconds to cover distance_cells with an accelerate-cruise-decelerate
// profile that starts and ends at rest.
double travel_time(double distance_cells, const VelocityProfile& profile, double cell_size_m);

// Observation points for tests. Any of them may be empty.
struct EngineHooks {
    // Every change of an FLS's estimated position.
    std::function<void(Fid fid, const Vec3& from, const Vec3& to, bool localizing)> on_move;
    // After each round (round mode) or HD sample (event mode).
    std::function<void(const RoundMetrics&, std::span<const FlsState>)> on_row;
};

RunResult run_rounds(const PointCloud& gt, const RunConfig& config, const EngineHooks& hooks = {});
RunResult run_events(const PointCloud& gt, const RunConfig& config, const EngineHooks& hooks = {});
RunResult run(const PointCloud& gt, const RunConfig& config, const EngineHooks& hooks = {});

// One method of a side-by-side comparison. trace holds HD per round
// (SwarMer) or per solver step (baselines), starting at deployment.
struct MethodOutcome {
    std::string name;
    std::vector<double> trace;
    double final_hd = 0.0;
    std::size_t steps = 0;
    std::size_t failures = 0;
    std::size_t skipped_fls = 0;
    bool reached_threshold = false;
};

// SwarMer with SS in round mode, triangulation and trilateration, all from
// the deployment the run seed produces.
std::vector<MethodOutcome> compare_methods(const PointCloud& gt, const RunConfig& config);
std::string render_comparison(std::span<const MethodOutcome> outcomes);

void write_metrics(std::ostream& out, std::span<const RoundMetrics> trace);
void emit_metrics(std::span<const RoundMetrics> trace, const std::filesystem::path& path);
std::filesystem::path emit_snapshot(std::span<const Vec3> points, std::size_t index, const std::filesystem::path& dir);
std::string render_summary(const RunResult& result, const RunConfig& config);

extern const char* const kMetricsHeader;

}  // namespace swarmer
