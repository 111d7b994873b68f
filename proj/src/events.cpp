#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "engine_detail.hpp"
#include "swarmer/localization.hpp"
#include "swarmer/netsim.hpp"

namespace swarmer {

namespace {

enum class Phase { idle, challenging, awaiting_grant, approaching, localizing };

struct Offer {
    Fid fid = 0;
    SwarmId swarm = 0;
    Role role = Role::none;
    double distance = 0.0;
};

struct Agent {
    Phase phase = Phase::idle;
    SimTime moving_until = 0;
    std::size_t range_index = 0;
    std::uint64_t next_id = 1;
    std::uint64_t phase_token = 0;
    std::uint64_t thaw_token = 0;
    std::uint64_t busy_token = 0;
    std::uint64_t kill_token = 0;
    std::vector<Offer> offers;
    SwarmId attempt_swarm = 0;
    Fid partner = 0;  // pending or current anchor
    SwarmId partner_swarm = 0;
    bool leased = false;  // renews a lease with partner until arrival
    LocalizationPlan plan;
    std::size_t old_swarm_size = 0;
    std::size_t slot = 0;  // ground-truth point index
};

enum class TimerKind {
    tick,
    window,
    grant_timeout,
    approach_done,
    arrival,
    lease_renew,
    lease_check,
    busy_timeout,
    thaw,
    failures,
    kill,
    replacement,
    sample,
};

struct Timer {
    TimerKind kind;
    std::size_t agent = 0;
    std::uint64_t token = 0;
};

constexpr SimTime kNever = std::numeric_limits<SimTime>::max();

class EventEngine {
public:
    EventEngine(const PointCloud& gt, const RunConfig& config, const EngineHooks& hooks)
        : config_(config),
          hooks_(hooks),
          streams_((config.validate(), config.seed)),
          model_(config.epsilon_deg, Rng(0)),
          localizer_(config.localizer_plugin()),
          medium_(config.radio(), LossModel{config.loss_mode, config.loss_rate, streams_.network.next()},
                  seconds_to_sim(config.latency_ms / 1000.0)),
          method_(config.translation_method()) {
        Deployment dep = deploy(gt, config, streams_.deploy);
        dim_ = dep.dim;
        oracle_fid_ = dep.oracle_fid;
        model_ = DeadReckoningModel(config.epsilon_deg, streams_.motion);
        pc_ = config.protocol();
        pc_.oracle_fid = dep.oracle_fid;
        states_ = std::move(dep.fls);
        horizon_s_ = config.thaw_s ? *config.thaw_s : thaw_horizon_s(states_.size());
        lambda_ = seconds_to_sim(config.lambda_ms / 1000.0);
        end_ = seconds_to_sim(config.duration_s);
        max_range_ = medium_.radio().max_range;
        fid_index_.assign(states_.size() + 1, 0);
        slot_agent_.resize(states_.size());
        for (std::size_t i = 0; i < states_.size(); ++i) {
            fid_index_[states_[i].fid] = i;
            slot_agent_[i] = i;
            neighbor_slots_.emplace_back();
            for (const KnownNeighbor& k : states_[i].known_neighbors) {
                neighbor_slots_[i].push_back(k.fid - 1);
            }
        }
        next_fid_ = static_cast<Fid>(states_.size() + 1);
    }

    RunResult run() {
        RunResult res;
        res.mode = RunMode::events;
        res.oracle_fid = oracle_fid_;
        for (const FlsState& f : states_) {
            res.deployed.push_back(f.est_coord);
        }
        for (std::size_t i = 0; i < states_.size(); ++i) {
            Agent a;
            a.slot = i;
            agents_.push_back(a);
            alive_.push_back(true);
            medium_.add_node(states_[i].fid, states_[i].gt_coord);
        }
        for (std::size_t i = 0; i < states_.size(); ++i) {
            start_agent(i);
        }
        const SimTime sample = seconds_to_sim(config_.hd_sample_ms / 1000.0);
        for (SimTime t = 0; t <= end_; t += sample) {
            schedule(t, TimerKind::sample);
            if (t + sample > end_ && t != end_) {
                schedule(end_, TimerKind::sample);
            }
        }
        if (config_.failure_rate_per_fls_per_s > 0.0) {
            schedule(0, TimerKind::failures);
        }
        res_ = &res;
        while (true) {
            const SimTime net = medium_.next_time().value_or(kNever);
            const SimTime tim = timers_.empty() ? kNever : timers_.begin()->first.first;
            const SimTime t = std::min(net, tim);
            if (t == kNever || t > end_) {
                break;
            }
            now_ = t;
            if (net == t) {
                deliver(*medium_.pop_due(now_));
                continue;
            }
            const Timer timer = timers_.begin()->second;
            timers_.erase(timers_.begin());
            fire(timer);
        }
        res.status = res.reached_threshold ? "threshold reached" : "limit reached";
        res.simulated_s = config_.duration_s;
        res.final_hd = res.trace.back().hd;
        res.final_swarm_count = res.trace.back().swarm_count;
        res.final_est = final_positions();
        if (res.snapshots.empty() || res.snapshots.back().round_or_time != res.trace.back().round_or_time) {
            res.snapshots.push_back({res.snapshots.size(), res.trace.back().round_or_time, res.final_est});
        }
        return res;
    }

private:
    // --- plumbing -----------------------------------------------------------

    void schedule(SimTime at, TimerKind kind, std::size_t agent = 0, std::uint64_t token = 0) {
        timers_.emplace(std::pair(at, timer_seq_++), Timer{kind, agent, token});
    }

    void send(std::size_t i, Payload payload, std::optional<double> range = std::nullopt) {
        FlsState& s = states_[i];
        const Message msg{s.fid, s.swarm_id, agents_[i].next_id++, std::move(payload)};
        const std::uint64_t before = medium_.bytes_tx();
        medium_.broadcast(msg, range.value_or(max_range_), now_, msg.addressee());
        acc_.bytes_tx += medium_.bytes_tx() - before;
    }

    double challenge_range(std::size_t i) const {
        const auto& schedule = medium_.radio().expand_schedule;
        return schedule[std::min(agents_[i].range_index, schedule.size() - 1)];
    }

    bool moving(std::size_t i) const { return agents_[i].moving_until > now_; }

    std::size_t swarm_size(SwarmId swarm) const {
        std::size_t n = 0;
        for (std::size_t i = 0; i < states_.size(); ++i) {
            n += alive_[i] && states_[i].swarm_id == swarm;
        }
        return n;
    }

    void move(std::size_t i, const Vec3& from, const Vec3& to, bool localizing) {
        const double d = distance(from, to);
        if (d == 0.0) {
            return;
        }
        (localizing ? acc_.dist_localizing : acc_.dist_swarm_follow) += d;
        if (hooks_.on_move) {
            hooks_.on_move(states_[i].fid, from, to, localizing);
        }
        agents_[i].moving_until =
            std::max(agents_[i].moving_until,
                     now_ + seconds_to_sim(travel_time(d, config_.velocity, config_.cell_size_m)));
    }

    void rearm_thaw(std::size_t i) {
        arm_thaw_timer(states_[i], now_, horizon_s_, streams_.timing);
        schedule(states_[i].thaw_deadline, TimerKind::thaw, i, ++agents_[i].thaw_token);
    }

    void start_agent(std::size_t i) {
        schedule(now_ + static_cast<SimTime>(streams_.timing.uniform() * static_cast<double>(lambda_)),
                 TimerKind::tick, i);
        rearm_thaw(i);
    }

    // Drops whatever negotiation or localization the agent was running.
    void reset_phase(std::size_t i) {
        Agent& a = agents_[i];
        ++a.phase_token;
        a.phase = Phase::idle;
        a.leased = false;
        a.offers.clear();
        a.range_index = 0;
    }

    void release_offers(std::size_t i) {
        for (const Offer& o : agents_[i].offers) {
            if (o.role == Role::anchor) {
                send(i, Unanchor{o.fid});
            } else {
                send(i, ChallengeDecline{o.fid});
            }
        }
        agents_[i].offers.clear();
    }

    void announce(std::size_t i, Role role) {
        send(i, SetBusy{role});
        if (role != Role::none) {
            ++agents_[i].busy_token;
        }
    }

    // --- timers -------------------------------------------------------------

    void fire(const Timer& t) {
        const std::size_t i = t.agent;
        switch (t.kind) {
            case TimerKind::sample:
                take_sample();
                return;
            case TimerKind::failures:
                inject_failures();
                return;
            case TimerKind::replacement:
                replace(i);
                return;
            case TimerKind::kill:
                if (alive_[i] && t.token == agents_[i].kill_token) {
                    kill(i);
                }
                return;
            default:
                break;
        }
        if (!alive_[i]) {
            return;
        }
        Agent& a = agents_[i];
        switch (t.kind) {
            case TimerKind::tick: {
                const double jitter = streams_.timing.uniform(0.9, 1.1);
                schedule(now_ + static_cast<SimTime>(jitter * static_cast<double>(lambda_)), TimerKind::tick, i);
                if (a.phase == Phase::idle && !moving(i) && states_[i].status == Status::available) {
                    a.range_index = 0;
                    attempt(i);
                }
                break;
            }
            case TimerKind::window:
                if (t.token == a.phase_token && a.phase == Phase::challenging) {
                    close_window(i);
                }
                break;
            case TimerKind::grant_timeout:
                if (t.token == a.phase_token && a.phase == Phase::awaiting_grant) {
                    reset_phase(i);
                }
                break;
            case TimerKind::approach_done:
                if (t.token == a.phase_token && a.phase == Phase::approaching) {
                    finish(i);
                }
                break;
            case TimerKind::arrival:
                if (t.token == a.phase_token && a.phase == Phase::localizing) {
                    if (a.leased) {
                        send(i, Unanchor{a.partner});
                    }
                    reset_phase(i);
                }
                break;
            case TimerKind::lease_renew:
                if (t.token == a.phase_token && a.leased) {
                    send(i, LeaseRenew{a.partner});
                    schedule(now_ + renew_interval(), TimerKind::lease_renew, i, a.phase_token);
                }
                break;
            case TimerKind::lease_check: {
                const LeaseTickOutcome out = lease_tick(states_[i], now_, pc_);
                acc_.leases_expired += out.expired.size();
                if (out.released) {
                    announce(i, Role::none);
                }
                break;
            }
            case TimerKind::busy_timeout: {
                FlsState& s = states_[i];
                if (t.token == a.busy_token && s.status == Status::busy && s.leases_granted.empty() &&
                    !s.lease_held && a.phase == Phase::idle) {
                    s.status = Status::available;
                    s.role = Role::none;
                }
                break;
            }
            case TimerKind::thaw:
                if (t.token == a.thaw_token) {
                    if (const auto thaw = thaw_tick(states_[i], now_)) {
                        ++res_->totals.thaws;
                        send(i, *thaw);
                        thaw_self(i, *thaw);
                    }
                }
                break;
            default:
                break;
        }
    }

    SimTime renew_interval() const {
        return std::max<SimTime>(1, seconds_to_sim(config_.lease_renew_fraction * config_.lease_delta_s));
    }

    void attempt(std::size_t i) {
        FlsState& s = states_[i];
        Agent& a = agents_[i];
        const auto observed = detail::observe_neighbors(states_, s, fid_index_, &alive_);
        if (update_r_complete(s, observed, pc_)) {
            return;
        }
        ++a.phase_token;
        a.phase = Phase::challenging;
        a.offers.clear();
        a.attempt_swarm = s.swarm_id;
        send(i, Challenge{}, challenge_range(i));
        schedule(now_ + 2 * medium_.latency() + 1, TimerKind::window, i, a.phase_token);
    }

    void close_window(std::size_t i) {
        FlsState& s = states_[i];
        Agent& a = agents_[i];
        if (s.status != Status::available || s.swarm_id != a.attempt_swarm || moving(i)) {
            release_offers(i);
            reset_phase(i);
            return;
        }
        std::vector<AnchorCandidate> anchors;
        std::vector<Discovered> localizers;
        for (const Offer& o : a.offers) {
            if (o.role == Role::anchor) {
                anchors.push_back({o.fid, o.swarm, swarm_size(o.swarm), pc_.is_oracle_swarm(o.swarm), false});
            } else {
                localizers.push_back({o.fid, o.swarm, swarm_size(o.swarm), o.distance});
            }
        }
        if (!anchors.empty()) {
            const Fid chosen = select_anchor(anchors, config_.anchor_policy, streams_.policy);
            SwarmId chosen_swarm = 0;
            for (const Offer& o : a.offers) {
                if (o.fid == chosen) {
                    chosen_swarm = o.swarm;
                } else if (o.role == Role::anchor) {
                    send(i, Unanchor{o.fid});
                } else {
                    send(i, ChallengeDecline{o.fid});
                }
            }
            a.offers.clear();
            begin_localizing(s, chosen, now_, pc_);
            localize(i, chosen, chosen_swarm, true);
            return;
        }
        if (!localizers.empty()) {
            const ChallengeTargets targets = issue_challenge(s, localizers, pc_, config_.anchor_policy,
                                                             streams_.policy);
            std::vector<Fid> granted;
            for (const Discovered& d : targets.ordered) {
                if (granted.size() >= targets.max_partners || s.leases_granted.size() >= pc_.max_partners()) {
                    break;
                }
                granted.push_back(d.fid);
            }
            for (const Offer& o : a.offers) {
                if (std::find(granted.begin(), granted.end(), o.fid) == granted.end()) {
                    send(i, ChallengeDecline{o.fid});
                    continue;
                }
                if (grant_anchor(s, o.fid, now_, pc_)) {
                    announce(i, Role::anchor);
                }
                ++acc_.anchors_served;
                ++res_->totals.leases_granted;
                send(i, ChallengeAccept{o.fid, Role::anchor});
                schedule(now_ + pc_.lease.delta() + 1, TimerKind::lease_check, i);
            }
            reset_phase(i);
            rearm_thaw(i);
            return;
        }
        const auto& schedule_ranges = medium_.radio().expand_schedule;
        if (a.range_index + 1 < schedule_ranges.size()) {
            ++a.range_index;
            attempt(i);
            return;
        }
        reset_phase(i);
        if (swarm_size(s.swarm_id) == 1 && !pc_.is_oracle_swarm(s.swarm_id)) {
            std::vector<ObservedNeighbor> busy;
            for (const auto& o : detail::observe_neighbors(states_, s, fid_index_, &alive_)) {
                if (o.status == Status::busy && states_[fid_index_[o.fid]].role == Role::anchor) {
                    busy.push_back(o);
                }
            }
            if (const auto target = busy_neighbor_join(s, busy)) {
                s.status = Status::busy;
                s.role = Role::localizing;
                localize(i, *target, states_[fid_index_[*target]].swarm_id, false);
            }
        }
    }

    void localize(std::size_t i, Fid anchor, SwarmId anchor_swarm, bool leased) {
        FlsState& s = states_[i];
        Agent& a = agents_[i];
        ++a.phase_token;
        a.partner = anchor;
        a.partner_swarm = anchor_swarm;
        a.leased = leased;
        a.old_swarm_size = swarm_size(s.swarm_id);
        announce(i, Role::localizing);
        rearm_thaw(i);
        if (leased) {
            schedule(now_ + renew_interval(), TimerKind::lease_renew, i, a.phase_token);
        }
        const FlsState& anc = states_[fid_index_[anchor]];
        a.plan = localizer_.plan(s.est_coord, anc.est_coord, s.gt_coord, anc.gt_coord, model_, dim_,
                                 streams_.measure);
        if (a.plan.approach_end) {
            a.phase = Phase::approaching;
            const Vec3 from = s.est_coord;
            s.est_coord = *a.plan.approach_end;
            move(i, from, s.est_coord, true);
            schedule(std::max(a.moving_until, now_), TimerKind::approach_done, i, a.phase_token);
            return;
        }
        finish(i);
    }

    void finish(std::size_t i) {
        FlsState& s = states_[i];
        Agent& a = agents_[i];
        if (a.partner_swarm == s.swarm_id) {
            // The anchor's swarm was absorbed into ours meanwhile.
            s.status = Status::available;
            s.role = Role::none;
            s.lease_held.reset();
            if (a.leased) {
                send(i, Unanchor{a.partner});
            }
            reset_phase(i);
            return;
        }
        const FlsState& anc = states_[fid_index_[a.partner]];
        const double phi = bearing_yaw(s.gt_coord, anc.gt_coord);
        const Completion done =
            complete_localization(s, a.partner, a.partner_swarm, a.plan.vector, phi, model_, dim_, pc_, now_);
        MoveAndRejoin follow = done.broadcast;
        follow.vector = a.plan.net_vector;
        send(i, follow);
        move(i, done.self.start, done.self.endpoint, true);
        acc_.localizing_sizes.push_back(a.old_swarm_size);
        ++acc_.per_anchor[a.partner];
        a.phase = Phase::localizing;
        schedule(std::max(a.moving_until, now_), TimerKind::arrival, i, a.phase_token);
    }

    void thaw_self(std::size_t i, const Thaw& thaw) {
        on_thaw(states_[i], thaw, pc_);
        reset_phase(i);
        rearm_thaw(i);
        ++acc_.thawed;
    }

    // --- messages -----------------------------------------------------------

    void deliver(const Delivery& d) {
        const std::size_t r = fid_index_[d.recipient];
        if (!alive_[r]) {
            return;
        }
        FlsState& s = states_[r];
        if (!wrapper_filter(s, d.msg) || !dedup_filter(s, d.msg)) {
            return;
        }
        std::visit([&](const auto& body) { handle(r, d.msg, body); }, d.msg.payload);
    }

    void handle(std::size_t r, const Message& msg, const Challenge&) {
        FlsState& s = states_[r];
        Agent& a = agents_[r];
        rearm_thaw(r);
        if (moving(r) || a.phase != Phase::idle) {
            send(r, ChallengeDecline{msg.sender});
            return;
        }
        const ChallengeDecision decision = on_challenge(s, msg.sender_swarm, pc_);
        if (!decision.accept) {
            send(r, ChallengeDecline{msg.sender});
            return;
        }
        if (decision.receiver_role == Role::anchor) {
            if (grant_anchor(s, msg.sender, now_, pc_)) {
                announce(r, Role::anchor);
            }
            ++acc_.anchors_served;
            ++res_->totals.leases_granted;
            send(r, ChallengeAccept{msg.sender, Role::anchor});
            schedule(now_ + pc_.lease.delta() + 1, TimerKind::lease_check, r);
            return;
        }
        ++a.phase_token;
        a.phase = Phase::awaiting_grant;
        a.partner = msg.sender;
        a.partner_swarm = msg.sender_swarm;
        send(r, ChallengeAccept{msg.sender, Role::localizing});
        schedule(now_ + 4 * medium_.latency() + 2, TimerKind::grant_timeout, r, a.phase_token);
    }

    void handle(std::size_t r, const Message& msg, const ChallengeAccept& body) {
        if (body.to != states_[r].fid) {
            return;
        }
        FlsState& s = states_[r];
        Agent& a = agents_[r];
        if (a.phase == Phase::awaiting_grant && msg.sender == a.partner && body.role == Role::anchor) {
            // The challenger grants us a lease and anchors.
            if (s.status != Status::available || moving(r) || msg.sender_swarm == s.swarm_id) {
                send(r, Unanchor{msg.sender});
                reset_phase(r);
                return;
            }
            begin_localizing(s, msg.sender, now_, pc_);
            localize(r, msg.sender, msg.sender_swarm, true);
            return;
        }
        if (a.phase == Phase::challenging) {
            a.offers.push_back({msg.sender, msg.sender_swarm, body.role,
                                distance(s.gt_coord, states_[fid_index_[msg.sender]].gt_coord)});
            return;
        }
        if (body.role == Role::anchor) {
            send(r, Unanchor{msg.sender});
        } else {
            send(r, ChallengeDecline{msg.sender});
        }
    }

    void handle(std::size_t r, const Message& msg, const ChallengeDecline& body) {
        Agent& a = agents_[r];
        if (body.to == states_[r].fid && a.phase == Phase::awaiting_grant && msg.sender == a.partner) {
            reset_phase(r);
        }
    }

    void handle(std::size_t r, const Message& msg, const SetBusy& body) {
        FlsState& s = states_[r];
        if (msg.sender_swarm != s.swarm_id) {
            return;
        }
        on_set_busy(s, body);
        if (body.role != Role::none && s.status == Status::busy && s.leases_granted.empty() && !s.lease_held) {
            Agent& a = agents_[r];
            schedule(now_ + 2 * pc_.lease.delta(), TimerKind::busy_timeout, r, ++a.busy_token);
        }
    }

    void handle(std::size_t r, const Message&, const MoveAndRejoin& body) {
        FlsState& s = states_[r];
        const RejoinOutcome out = apply_move_and_rejoin(s, body, model_, dim_, pc_);
        if (!out.applied) {
            return;
        }
        if (out.moved) {
            move(r, out.start, out.endpoint, false);
        }
        Agent& a = agents_[r];
        if (a.phase == Phase::awaiting_grant || a.phase == Phase::challenging) {
            release_offers(r);
            reset_phase(r);
        }
        a.range_index = 0;
        rearm_thaw(r);
    }

    void handle(std::size_t r, const Message& msg, const Unanchor& body) {
        if (body.to == states_[r].fid && on_unanchor(states_[r], msg.sender)) {
            announce(r, Role::none);
        }
    }

    void handle(std::size_t r, const Message& msg, const LeaseRenew& body) {
        if (body.to != states_[r].fid) {
            return;
        }
        on_lease_renew(states_[r], msg.sender, now_, pc_);
        schedule(now_ + pc_.lease.delta() + 1, TimerKind::lease_check, r);
    }

    void handle(std::size_t r, const Message&, const Thaw& body) { thaw_self(r, body); }

    void handle(std::size_t r, const Message& msg, const ReplacementArrived& body) {
        for (KnownNeighbor& k : states_[r].known_neighbors) {
            if (k.gt == body.gt) {
                k.fid = msg.sender;
            }
        }
    }

    // --- failures -----------------------------------------------------------

    void inject_failures() {
        schedule(now_ + kMicrosPerSecond, TimerKind::failures);
        const std::size_t n = states_.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (!alive_[i] || (oracle_fid_ && states_[i].fid == *oracle_fid_)) {
                continue;
            }
            if (streams_.failures.bernoulli(config_.failure_rate_per_fls_per_s)) {
                const auto offset = static_cast<SimTime>(streams_.failures.uniform() * kMicrosPerSecond);
                schedule(now_ + offset, TimerKind::kill, i, ++agents_[i].kill_token);
            }
        }
    }

    Vec3 origin() const {
        Vec3 o = config_.dispatcher_origin;
        if (dim_ == 2) {
            o.d = 0.0;
        }
        return o;
    }

    void kill(std::size_t i) {
        const Agent& a = agents_[i];
        const bool localizing = (a.phase == Phase::approaching || a.phase == Phase::localizing) && a.leased;
        alive_[i] = false;
        medium_.set_alive(states_[i].fid, false);
        medium_.drop_pending_for(states_[i].fid);
        ++res_->totals.failures;
        KillRecord k;
        k.time_s = sim_to_seconds(now_);
        k.fid = states_[i].fid;
        k.was_localizing = localizing;
        k.hd_before = res_->trace.empty() ? 0.0 : res_->trace.back().hd;
        res_->kills.push_back(k);
        kill_index_[i] = res_->kills.size() - 1;
        const double flight = travel_time(distance(origin(), states_[i].gt_coord), config_.velocity, config_.cell_size_m);
        schedule(now_ + seconds_to_sim(config_.replacement_delay_s + flight), TimerKind::replacement, i);
    }

    void replace(std::size_t dead) {
        const std::size_t slot = agents_[dead].slot;
        FlsState s;
        s.fid = next_fid_++;
        s.gt_coord = states_[dead].gt_coord;
        s.est_coord = dead_reckon(origin(), s.gt_coord, model_, dim_);
        on_deploy(s, pc_);
        for (std::size_t n : neighbor_slots_[slot]) {
            const FlsState& k = states_[slot_agent_[n]];
            s.known_neighbors.push_back({k.fid, k.gt_coord});
        }
        const std::size_t i = states_.size();
        states_.push_back(std::move(s));
        Agent a;
        a.slot = slot;
        agents_.push_back(a);
        alive_.push_back(true);
        fid_index_.resize(states_[i].fid + 1, 0);
        fid_index_[states_[i].fid] = i;
        slot_agent_[slot] = i;
        medium_.add_node(states_[i].fid, states_[i].gt_coord);
        KillRecord& k = res_->kills[kill_index_[dead]];
        k.replacement = states_[i].fid;
        k.arrival_s = sim_to_seconds(now_);
        Rng observer = streams_.observer.fork(states_[i].fid);
        k.hd_on_arrival = detail::observe_hd(states_, &alive_, method_, config_.stochastic_r, observer);
        ++res_->totals.replacements;
        send(i, ReplacementArrived{states_[i].gt_coord});
        start_agent(i);
    }

    // --- observation --------------------------------------------------------

    void take_sample() {
        RunResult& res = *res_;
        RoundMetrics row;
        row.round_or_time = sim_to_seconds(now_);
        row.hd = detail::observe_hd(states_, &alive_, method_, config_.stochastic_r, streams_.observer);
        row.swarm_count = detail::swarm_members(states_, &alive_).size();
        acc_.fill(row);
        acc_.add_to(res.totals);
        acc_ = {};
        res.trace.push_back(row);
        if (row.swarm_count == 1 && !res.single_swarm_at) {
            res.single_swarm_at = row.round_or_time;
        }
        if (row.hd < config_.hd_stop_threshold && !res.reached_threshold) {
            res.reached_threshold = true;
            res.threshold_at = row.round_or_time;
        }
        if (hooks_.on_row) {
            hooks_.on_row(row, states_);
        }
        const std::size_t k = res.trace.size() - 1;
        if (k == 0 || (config_.snapshot_every && k % config_.snapshot_every == 0)) {
            res.snapshots.push_back({res.snapshots.size(), row.round_or_time, final_positions()});
        }
    }

    std::vector<Vec3> final_positions() const {
        std::vector<Vec3> out;
        for (std::size_t slot = 0; slot < slot_agent_.size(); ++slot) {
            if (alive_[slot_agent_[slot]]) {
                out.push_back(states_[slot_agent_[slot]].est_coord);
            }
        }
        return out;
    }

    const RunConfig& config_;
    const EngineHooks& hooks_;
    detail::Streams streams_;
    DeadReckoningModel model_;
    Localizer localizer_;
    Medium medium_;
    TranslationMethod method_;
    ProtocolConfig pc_;
    int dim_ = 3;
    std::optional<Fid> oracle_fid_;
    double horizon_s_ = 1.0;
    SimTime lambda_ = 0;
    SimTime end_ = 0;
    SimTime now_ = 0;
    double max_range_ = 0.0;

    std::vector<FlsState> states_;
    std::vector<Agent> agents_;
    std::vector<bool> alive_;
    std::vector<std::size_t> fid_index_;
    std::vector<std::size_t> slot_agent_;
    std::vector<std::vector<std::size_t>> neighbor_slots_;
    std::map<std::size_t, std::size_t> kill_index_;
    Fid next_fid_ = 1;

    std::map<std::pair<SimTime, std::uint64_t>, Timer> timers_;
    std::uint64_t timer_seq_ = 0;
    detail::RowAccumulator acc_;
    RunResult* res_ = nullptr;
};

}  // namespace

RunResult run_events(const PointCloud& gt, const RunConfig& config, const EngineHooks& hooks) {
    EventEngine engine(gt, config, hooks);
    return engine.run();
}

}  // namespace swarmer
