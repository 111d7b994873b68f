#include <algorithm>
#include <cmath>
#include <map>

#include "engine_detail.hpp"
#include "swarmer/localization.hpp"
#include "swarmer/wire.hpp"

namespace swarmer {

namespace {

std::size_t wire(MessageKind kind) { return kWireHeaderSize + body_size(kind); }

enum class SwarmRole { none, anchor, localizing };

struct Localization {
    std::size_t localizer;
    std::size_t anchor;
};

class RoundEngine {
public:
    RoundEngine(const PointCloud& gt, const RunConfig& config, const EngineHooks& hooks)
        : config_(config),
          hooks_(hooks),
          streams_(config.seed),
          model_(config.epsilon_deg, Rng(0)),
          localizer_(config.localizer_plugin()),
          radio_(config.radio()),
          method_(config.translation_method()) {
        config.validate();
        deployment_ = deploy(gt, config, streams_.deploy);
        model_ = DeadReckoningModel(config.epsilon_deg, streams_.motion);
        pc_ = config.protocol();
        pc_.oracle_fid = deployment_.oracle_fid;
        fid_index_.resize(deployment_.fls.size() + 1);
        for (std::size_t i = 0; i < deployment_.fls.size(); ++i) {
            fid_index_[deployment_.fls[i].fid] = i;
        }
    }

    RunResult run() {
        auto& fls = deployment_.fls;
        RunResult res;
        res.mode = RunMode::rounds;
        res.oracle_fid = deployment_.oracle_fid;
        for (const FlsState& f : fls) {
            res.deployed.push_back(f.est_coord);
        }
        RoundMetrics row0;
        row0.hd = hd_now();
        row0.swarm_count = detail::swarm_members(fls).size();
        record(res, row0, 0);
        if (row0.swarm_count == 1) {
            res.single_swarm_at = 0.0;
        }
        res.status = "limit reached";
        if (row0.hd < config_.hd_stop_threshold) {
            res.reached_threshold = true;
            res.threshold_at = 0.0;
            res.status = "threshold reached";
        }
        for (int round = 1; round <= config_.round_limit && !res.reached_threshold; ++round) {
            detail::RowAccumulator acc;
            const std::size_t formed = play_round(acc);
            RoundMetrics row;
            row.round_or_time = round;
            row.swarm_count = detail::swarm_members(fls).size();
            if (row.swarm_count == 1 && !res.single_swarm_at) {
                res.single_swarm_at = round;
            }
            if (row.swarm_count == 1 || (formed == 0 && row.swarm_count > 1)) {
                for (FlsState& f : fls) {
                    on_thaw(f, Thaw{f.swarm_id}, pc_);
                }
                acc.thawed += fls.size();
                ++res.totals.thaws;
            }
            row.hd = hd_now();
            acc.fill(row);
            acc.add_to(res.totals);
            res.rounds = static_cast<std::size_t>(round);
            record(res, row, static_cast<std::size_t>(round));
            if (row.hd < config_.hd_stop_threshold) {
                res.reached_threshold = true;
                res.threshold_at = round;
                res.status = "threshold reached";
            }
        }
        res.final_hd = res.trace.back().hd;
        res.final_swarm_count = res.trace.back().swarm_count;
        res.totals.leases_granted = res.totals.localizations;
        res.final_est = detail::live_positions(fls, nullptr);
        if (res.snapshots.empty() || res.snapshots.back().round_or_time != res.trace.back().round_or_time) {
            res.snapshots.push_back({res.snapshots.size(), res.trace.back().round_or_time, res.final_est});
        }
        return res;
    }

private:
    double hd_now() {
        return detail::observe_hd(deployment_.fls, nullptr, method_, config_.stochastic_r, streams_.observer);
    }

    void record(RunResult& res, const RoundMetrics& row, std::size_t round) {
        res.trace.push_back(row);
        if (hooks_.on_row) {
            hooks_.on_row(row, deployment_.fls);
        }
        if (round == 0 || (config_.snapshot_every && round % config_.snapshot_every == 0)) {
            res.snapshots.push_back(
                {res.snapshots.size(), row.round_or_time, detail::live_positions(deployment_.fls, nullptr)});
        }
    }

    std::size_t play_round(detail::RowAccumulator& acc) {
        auto& fls = deployment_.fls;
        const std::size_t n = fls.size();
        members_ = detail::swarm_members(fls);
        role_.clear();
        partners_.clear();
        std::vector<Localization> order;
        for (FlsState& f : fls) {
            f.status = Status::available;
            f.role = Role::none;
            f.leases_granted.clear();
            f.lease_held.reset();
            const auto observed = detail::observe_neighbors(fls, f, fid_index_);
            update_r_complete(f, observed, pc_);
        }
        std::size_t groups = 0;
        for (std::size_t i = 0; i < n; ++i) {
            FlsState& c = fls[i];
            if (role_.count(c.swarm_id) || c.r_complete) {
                continue;
            }
            if (challenge(i, order, acc)) {
                ++groups;
            }
        }
        for (const Localization& l : order) {
            resolve(l, acc);
        }
        return groups;
    }

    // One FLS's radio expansion. Returns true when it formed or joined a merge.
    bool challenge(std::size_t i, std::vector<Localization>& order, detail::RowAccumulator& acc) {
        auto& fls = deployment_.fls;
        FlsState& c = fls[i];
        for (double range : radio_.expand_schedule) {
            acc.bytes_tx += wire(MessageKind::challenge);
            std::vector<std::size_t> busy_anchors;
            std::vector<Discovered> available;
            for (std::size_t j = 0; j < fls.size(); ++j) {
                const double dist = distance(c.gt_coord, fls[j].gt_coord);
                if (j == i || dist > range || fls[j].swarm_id == c.swarm_id) {
                    continue;
                }
                const ChallengeDecision d = on_challenge(fls[j], c.swarm_id, pc_);
                acc.bytes_tx += wire(d.accept ? MessageKind::challenge_accept : MessageKind::challenge_decline);
                if (!d.accept) {
                    continue;
                }
                if (fls[j].status == Status::busy) {
                    if (partners_[fls[j].swarm_id] < pc_.max_partners()) {
                        busy_anchors.push_back(j);
                    }
                } else {
                    available.push_back({fls[j].fid, fls[j].swarm_id, members_[fls[j].swarm_id].size(), dist});
                }
            }
            if (!busy_anchors.empty()) {
                const std::size_t a = *std::min_element(busy_anchors.begin(), busy_anchors.end(), [&](auto x, auto y) {
                    const auto kx = std::tuple(fls[x].swarm_id, distance(c.gt_coord, fls[x].gt_coord), fls[x].fid);
                    const auto ky = std::tuple(fls[y].swarm_id, distance(c.gt_coord, fls[y].gt_coord), fls[y].fid);
                    return kx < ky;
                });
                join(i, a, order, acc);
                return true;
            }
            if (!available.empty()) {
                const ChallengeTargets targets = issue_challenge(c, available, pc_, config_.anchor_policy,
                                                                 streams_.policy);
                std::vector<std::size_t> group{i};
                for (std::size_t t = 0; t < targets.ordered.size() && t < targets.max_partners; ++t) {
                    group.push_back(fid_index_[targets.ordered[t].fid]);
                }
                std::vector<AnchorCandidate> candidates;
                for (std::size_t g : group) {
                    candidates.push_back({fls[g].fid, fls[g].swarm_id, members_[fls[g].swarm_id].size(),
                                          pc_.is_oracle_swarm(fls[g].swarm_id), g == i});
                }
                const std::size_t a = fid_index_[select_anchor(candidates, config_.anchor_policy, streams_.policy)];
                mark_anchor(a, acc);
                for (std::size_t g : group) {
                    if (g != a) {
                        join(g, a, order, acc);
                    }
                }
                return true;
            }
        }
        // Nobody accepted even at full power: a lone FLS next to a busy
        // anchor swarm joins it.
        if (members_[c.swarm_id].size() == 1 && !pc_.is_oracle_swarm(c.swarm_id)) {
            std::vector<ObservedNeighbor> observed;
            for (const auto& o : detail::observe_neighbors(fls, c, fid_index_)) {
                if (o.status == Status::busy && fls[fid_index_[o.fid]].role == Role::anchor) {
                    observed.push_back(o);
                }
            }
            if (const auto target = busy_neighbor_join(c, observed)) {
                join(i, fid_index_[*target], order, acc);
                return true;
            }
        }
        return false;
    }

    void mark_anchor(std::size_t a, detail::RowAccumulator& acc) {
        auto& fls = deployment_.fls;
        const SwarmId s = fls[a].swarm_id;
        if (role_.count(s)) {
            return;
        }
        role_[s] = SwarmRole::anchor;
        acc.bytes_tx += wire(MessageKind::set_busy);
        for (std::size_t m : members_[s]) {
            on_set_busy(fls[m], SetBusy{Role::anchor});
        }
    }

    void join(std::size_t l, std::size_t a, std::vector<Localization>& order, detail::RowAccumulator& acc) {
        auto& fls = deployment_.fls;
        const SwarmId s = fls[l].swarm_id;
        mark_anchor(a, acc);
        grant_anchor(fls[a], fls[l].fid, 0, pc_);
        begin_localizing(fls[l], fls[a].fid, 0, pc_);
        role_[s] = SwarmRole::localizing;
        ++partners_[fls[a].swarm_id];
        acc.bytes_tx += wire(MessageKind::set_busy);
        for (std::size_t m : members_[s]) {
            if (m != l) {
                on_set_busy(fls[m], SetBusy{Role::localizing});
            }
        }
        order.push_back({l, a});
    }

    void moved(std::size_t i, const Vec3& from, const Vec3& to, bool localizing, detail::RowAccumulator& acc) {
        const double d = distance(from, to);
        (localizing ? acc.dist_localizing : acc.dist_swarm_follow) += d;
        if (hooks_.on_move && d > 0.0) {
            hooks_.on_move(deployment_.fls[i].fid, from, to, localizing);
        }
    }

    void resolve(const Localization& l, detail::RowAccumulator& acc) {
        auto& fls = deployment_.fls;
        FlsState& loc = fls[l.localizer];
        FlsState& anchor = fls[l.anchor];
        const SwarmId old_swarm = loc.swarm_id;
        const std::size_t swarm_size = members_[old_swarm].size();
        const LocalizationPlan plan = localizer_.plan(loc.est_coord, anchor.est_coord, loc.gt_coord,
                                                      anchor.gt_coord, model_, deployment_.dim, streams_.measure);
        if (plan.approach_end) {
            moved(l.localizer, loc.est_coord, *plan.approach_end, true, acc);
            loc.est_coord = *plan.approach_end;
        }
        const double phi = bearing_yaw(loc.gt_coord, anchor.gt_coord);
        const Completion done = complete_localization(loc, anchor.fid, anchor.swarm_id, plan.vector, phi, model_,
                                                      deployment_.dim, pc_);
        moved(l.localizer, done.self.start, done.self.endpoint, true, acc);
        MoveAndRejoin follow = done.broadcast;
        follow.vector = plan.net_vector;
        acc.bytes_tx += wire(MessageKind::move_and_rejoin) + wire(MessageKind::unanchor);
        for (std::size_t m : members_[old_swarm]) {
            if (m == l.localizer) {
                continue;
            }
            const RejoinOutcome r = apply_move_and_rejoin(fls[m], follow, model_, deployment_.dim, pc_);
            if (r.moved) {
                moved(m, r.start, r.endpoint, false, acc);
            }
        }
        on_unanchor(anchor, loc.fid);
        acc.localizing_sizes.push_back(swarm_size);
        ++acc.per_anchor[anchor.fid];
        ++acc.anchors_served;
    }

    const RunConfig& config_;
    const EngineHooks& hooks_;
    detail::Streams streams_;
    Deployment deployment_;
    DeadReckoningModel model_;
    Localizer localizer_;
    RadioConfig radio_;
    TranslationMethod method_;
    ProtocolConfig pc_;
    std::vector<std::size_t> fid_index_;
    std::map<SwarmId, std::vector<std::size_t>> members_;
    std::map<SwarmId, SwarmRole> role_;
    std::map<SwarmId, std::size_t> partners_;
};

}  // namespace

RunResult run_rounds(const PointCloud& gt, const RunConfig& config, const EngineHooks& hooks) {
    RoundEngine engine(gt, config, hooks);
    return engine.run();
}

}  // namespace swarmer
