#include "swarmer/engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "engine_detail.hpp"
#include "swarmer/point_cloud_io.hpp"

namespace swarmer {

namespace detail {

Streams::Streams(std::uint64_t seed)
    : deploy(seed), motion(0), policy(0), measure(0), observer(0), network(0), timing(0), failures(0) {
    Rng master(seed);
    deploy = master.fork(1);
    motion = master.fork(2);
    policy = master.fork(3);
    measure = master.fork(4);
    observer = master.fork(5);
    network = master.fork(6);
    timing = master.fork(7);
    failures = master.fork(8);
}

std::vector<std::size_t> nearest_indices(std::span<const FlsState> fls, std::size_t i, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(fls.size());
    for (std::size_t j = 0; j < fls.size(); ++j) {
        if (j != i) {
            order.emplace_back(distance_squared(fls[i].gt_coord, fls[j].gt_coord), j);
        }
    }
    const std::size_t take = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end());
    std::vector<std::size_t> out;
    for (std::size_t t = 0; t < take; ++t) {
        out.push_back(order[t].second);
    }
    return out;
}

std::map<SwarmId, std::vector<std::size_t>> swarm_members(std::span<const FlsState> fls,
                                                          const std::vector<bool>* alive) {
    std::map<SwarmId, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < fls.size(); ++i) {
        if (!alive || (*alive)[i]) {
            out[fls[i].swarm_id].push_back(i);
        }
    }
    return out;
}

std::vector<Vec3> live_positions(std::span<const FlsState> fls, const std::vector<bool>* alive) {
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < fls.size(); ++i) {
        if (!alive || (*alive)[i]) {
            out.push_back(fls[i].est_coord);
        }
    }
    return out;
}

double observe_hd(std::span<const FlsState> fls, const std::vector<bool>* alive, TranslationMethod method,
                  std::size_t sample_size, Rng& rng) {
    std::vector<Vec3> e;
    std::vector<Vec3> g;
    for (std::size_t i = 0; i < fls.size(); ++i) {
        if (!alive || (*alive)[i]) {
            e.push_back(fls[i].est_coord);
            g.push_back(fls[i].gt_coord);
        }
    }
    if (e.empty()) {
        return 0.0;
    }
    return hd(e, g, method, rng, sample_size);
}

std::vector<ObservedNeighbor> observe_neighbors(std::span<const FlsState> fls, const FlsState& self,
                                                const std::vector<std::size_t>& fid_index,
                                                const std::vector<bool>* alive) {
    std::vector<ObservedNeighbor> out;
    for (const KnownNeighbor& k : self.known_neighbors) {
        if (k.fid >= fid_index.size()) {
            continue;
        }
        const std::size_t j = fid_index[k.fid];
        if (j >= fls.size() || (alive && !(*alive)[j])) {
            continue;
        }
        const FlsState& n = fls[j];
        out.push_back({n.fid, n.swarm_id, n.status, n.est_coord, n.gt_coord});
    }
    return out;
}

void RowAccumulator::fill(RoundMetrics& row) const {
    if (!localizing_sizes.empty()) {
        row.localizing_min = *std::min_element(localizing_sizes.begin(), localizing_sizes.end());
        row.localizing_max = *std::max_element(localizing_sizes.begin(), localizing_sizes.end());
        row.localizing_avg = static_cast<double>(std::accumulate(localizing_sizes.begin(), localizing_sizes.end(),
                                                                 std::size_t{0})) /
                             static_cast<double>(localizing_sizes.size());
    }
    row.anchor_count = per_anchor.size();
    if (!per_anchor.empty()) {
        std::size_t lo = std::numeric_limits<std::size_t>::max();
        std::size_t hi = 0;
        std::size_t sum = 0;
        for (const auto& [fid, count] : per_anchor) {
            lo = std::min(lo, count);
            hi = std::max(hi, count);
            sum += count;
        }
        row.merged_swarms_per_anchor_min = lo;
        row.merged_swarms_per_anchor_max = hi;
        row.merged_swarms_per_anchor_avg = static_cast<double>(sum) / static_cast<double>(per_anchor.size());
    }
    row.dist_localizing = dist_localizing;
    row.dist_swarm_follow = dist_swarm_follow;
    row.dist_total = dist_localizing + dist_swarm_follow;
    row.bytes_tx = bytes_tx;
    row.localizations = localizing_sizes.size();
    row.anchors_served = anchors_served;
    row.thawed_swarms = thawed;
    row.leases_expired = leases_expired;
}

void RowAccumulator::add_to(RunTotals& totals) const {
    totals.dist_localizing += dist_localizing;
    totals.dist_swarm_follow += dist_swarm_follow;
    totals.bytes_tx += bytes_tx;
    totals.localizations += localizing_sizes.size();
    totals.anchors_served += anchors_served;
    totals.thawed_swarms += thawed;
    totals.leases_expired += leases_expired;
}

}  // namespace detail

Deployment deploy(const PointCloud& gt, const RunConfig& config, Rng& rng) {
    Deployment out;
    out.dim = gt.dim();
    const std::size_t n = gt.size();
    DeadReckoningModel model(config.epsilon_deg, rng.fork(11));
    Rng placement = rng.fork(12);
    ProtocolConfig pc = config.protocol();
    const auto [lo, hi] = gt.bounding_box();
    out.fls.resize(n);
    out.deploy_legs.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        FlsState& f = out.fls[i];
        f.fid = static_cast<Fid>(i + 1);
        f.gt_coord = gt[i];
        if (config.placement == Placement::deploy) {
            Vec3 origin = config.dispatcher_origin;
            if (out.dim == 2) {
                origin.d = 0.0;
            }
            f.est_coord = dead_reckon(origin, gt[i], model, out.dim);
            out.deploy_legs[i] = distance(origin, gt[i]);
        } else {
            f.est_coord = {placement.uniform(lo.l, hi.l), placement.uniform(lo.h, hi.h),
                           out.dim == 3 ? placement.uniform(lo.d, hi.d) : 0.0};
            out.deploy_legs[i] = distance(config.dispatcher_origin, f.est_coord);
        }
    }
    if (config.oracle_mode) {
        const Vec3 c = gt.centroid();
        std::size_t best = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (distance_squared(gt[i], c) < distance_squared(gt[best], c)) {
                best = i;
            }
        }
        out.oracle_fid = out.fls[best].fid;
        pc.oracle_fid = out.oracle_fid;
    }
    const auto k = static_cast<std::size_t>(config.known_neighbor_count());
    for (std::size_t i = 0; i < n; ++i) {
        on_deploy(out.fls[i], pc);
        for (std::size_t j : detail::nearest_indices(out.fls, i, k)) {
            out.fls[i].known_neighbors.push_back({out.fls[j].fid, out.fls[j].gt_coord});
        }
    }
    return out;
}

double travel_time(double distance_cells, const VelocityProfile& profile, double cell_size_m) {
    const double d = distance_cells * cell_size_m;
    if (!(d > 0.0)) {
        return 0.0;
    }
    const double v = profile.v_max;
    const double a = profile.a_max;
    const double ramp = v * v / a;  // accelerate plus decelerate distance
    if (d >= ramp) {
        return 2.0 * v / a + (d - ramp) / v;
    }
    return 2.0 * std::sqrt(d / a);
}

RunResult run(const PointCloud& gt, const RunConfig& config, const EngineHooks& hooks) {
    return config.mode == RunMode::rounds ? run_rounds(gt, config, hooks) : run_events(gt, config, hooks);
}

std::vector<MethodOutcome> compare_methods(const PointCloud& gt, const RunConfig& config) {
    std::vector<MethodOutcome> out;
    RunConfig swarmer_config = config;
    swarmer_config.mode = RunMode::rounds;
    swarmer_config.localizer = LocalizerKind::ss;
    const RunResult r = run_rounds(gt, swarmer_config);
    MethodOutcome s;
    s.name = "swarmer_ss";
    for (const RoundMetrics& row : r.trace) {
        s.trace.push_back(row.hd);
    }
    s.final_hd = r.final_hd;
    s.steps = r.rounds;
    s.reached_threshold = r.reached_threshold;
    out.push_back(s);

    detail::Streams streams(config.seed);
    const Deployment dep = deploy(gt, config, streams.deploy);
    std::vector<Vec3> est;
    for (const FlsState& f : dep.fls) {
        est.push_back(f.est_coord);
    }
    for (BaselineMethod method : {BaselineMethod::triangulation, BaselineMethod::trilateration}) {
        Rng rng = streams.measure.fork(static_cast<std::uint64_t>(method) + 1);
        const BaselineResult b = run_baseline(gt.points(), est, dep.deploy_legs, dep.dim, config.baseline(method), rng);
        MethodOutcome m;
        m.name = std::string(to_string(method));
        for (const BaselineIteration& it : b.trace) {
            m.trace.push_back(it.hd);
        }
        m.final_hd = b.final_hd;
        m.steps = b.iterations;
        m.failures = b.failures;
        m.skipped_fls = b.skipped_fls;
        m.reached_threshold = b.reached_threshold;
        out.push_back(m);
    }
    return out;
}

std::string render_comparison(std::span<const MethodOutcome> outcomes) {
    std::string out;
    for (const MethodOutcome& m : outcomes) {
        out += fmt::format("{}.final_hd = {}\n", m.name, m.final_hd);
        out += fmt::format("{}.steps = {}\n", m.name, m.steps);
        out += fmt::format("{}.failures = {}\n", m.name, m.failures);
        out += fmt::format("{}.skipped_fls = {}\n", m.name, m.skipped_fls);
        out += fmt::format("{}.reached_threshold = {}\n", m.name, m.reached_threshold ? "yes" : "no");
    }
    std::string best;
    double best_hd = std::numeric_limits<double>::infinity();
    for (const MethodOutcome& m : outcomes) {
        if (m.final_hd < best_hd) {
            best_hd = m.final_hd;
            best = m.name;
        }
    }
    out += fmt::format("lowest_final_hd = {}\n", best);
    return out;
}

const char* const kMetricsHeader =
    "round_or_time,hd,swarm_count,localizing_min,localizing_avg,localizing_max,anchor_count,"
    "merged_swarms_per_anchor_min,merged_swarms_per_anchor_avg,merged_swarms_per_anchor_max,"
    "dist_localizing,dist_swarm_follow,dist_total,bytes_tx,localizations,anchors_served,thawed_swarms,"
    "leases_expired";

void write_metrics(std::ostream& out, std::span<const RoundMetrics> trace) {
    out << kMetricsHeader << "\r\n";
    for (const RoundMetrics& r : trace) {
        out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\r\n", r.round_or_time, r.hd,
                           r.swarm_count, r.localizing_min, r.localizing_avg, r.localizing_max, r.anchor_count,
                           r.merged_swarms_per_anchor_min, r.merged_swarms_per_anchor_avg,
                           r.merged_swarms_per_anchor_max, r.dist_localizing, r.dist_swarm_follow, r.dist_total,
                           r.bytes_tx, r.localizations, r.anchors_served, r.thawed_swarms, r.leases_expired);
    }
}

void emit_metrics(std::span<const RoundMetrics> trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError(fmt::format("cannot write '{}'", path.string()));
    }
    write_metrics(out, trace);
    if (!out) {
        throw IoError(fmt::format("write failed for '{}'", path.string()));
    }
}

std::filesystem::path emit_snapshot(std::span<const Vec3> points, std::size_t index, const std::filesystem::path& dir) {
    const auto path = dir / fmt::format("snap_{}.xyz", index);
    write_point_cloud_file(path, points);
    return path;
}

std::string render_summary(const RunResult& r, const RunConfig& config) {
    const char* unit = r.mode == RunMode::rounds ? "rounds" : "seconds";
    std::string out;
    out += fmt::format("mode = {}\n", to_string(r.mode));
    out += fmt::format("status = {}\n", r.status);
    out += fmt::format("final_hd = {}\n", r.final_hd);
    out += fmt::format("converged = {}\n", r.final_hd < 0.001 ? "yes" : "no");
    out += fmt::format("hd_stop_threshold = {}\n", config.hd_stop_threshold);
    out += fmt::format("reached_threshold = {}\n", r.reached_threshold ? "yes" : "no");
    out += fmt::format("{}_to_threshold = {}\n", unit, r.threshold_at ? fmt::format("{}", *r.threshold_at) : "none");
    out += fmt::format("{}_to_single_swarm = {}\n", unit,
                       r.single_swarm_at ? fmt::format("{}", *r.single_swarm_at) : "none");
    if (r.mode == RunMode::rounds) {
        out += fmt::format("rounds = {}\n", r.rounds);
    } else {
        out += fmt::format("simulated_s = {}\n", r.simulated_s);
    }
    out += fmt::format("final_swarm_count = {}\n", r.final_swarm_count);
    out += fmt::format("dist_localizing = {}\n", r.totals.dist_localizing);
    out += fmt::format("dist_swarm_follow = {}\n", r.totals.dist_swarm_follow);
    out += fmt::format("dist_total = {}\n", r.totals.dist_total());
    out += fmt::format("bytes_tx = {}\n", r.totals.bytes_tx);
    out += fmt::format("localizations = {}\n", r.totals.localizations);
    out += fmt::format("anchors_served = {}\n", r.totals.anchors_served);
    out += fmt::format("thawed_swarms = {}\n", r.totals.thawed_swarms);
    out += fmt::format("thaws = {}\n", r.totals.thaws);
    out += fmt::format("leases_granted = {}\n", r.totals.leases_granted);
    out += fmt::format("leases_expired = {}\n", r.totals.leases_expired);
    out += fmt::format("failures = {}\n", r.totals.failures);
    out += fmt::format("replacements = {}\n", r.totals.replacements);
    if (r.oracle_fid) {
        out += fmt::format("oracle_fid = {}\n", *r.oracle_fid);
    }
    return out;
}

}  // namespace swarmer
