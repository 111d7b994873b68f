#include "swarmer/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace swarmer {

std::string_view to_string(Role role) {
    switch (role) {
        case Role::none:
            return "none";
        case Role::anchor:
            return "anchor";
        case Role::localizing:
            return "localizing";
    }
    return "?";
}

std::string_view to_string(AnchorPolicy policy) {
    switch (policy) {
        case AnchorPolicy::random:
            return "random";
        case AnchorPolicy::challenger:
            return "challenger";
        case AnchorPolicy::lowest_swarm_id:
            return "lowest_swarm_id";
        case AnchorPolicy::largest_swarm:
            return "largest_swarm";
        case AnchorPolicy::smallest_swarm:
            return "smallest_swarm";
    }
    return "?";
}

std::optional<AnchorPolicy> parse_anchor_policy(std::string_view text) {
    for (auto p : {AnchorPolicy::random, AnchorPolicy::challenger, AnchorPolicy::lowest_swarm_id,
                   AnchorPolicy::largest_swarm, AnchorPolicy::smallest_swarm}) {
        if (to_string(p) == text) {
            return p;
        }
    }
    return std::nullopt;
}

std::string_view to_string(MessageKind kind) {
    switch (kind) {
        case MessageKind::challenge:
            return "Challenge";
        case MessageKind::challenge_accept:
            return "ChallengeAccept";
        case MessageKind::challenge_decline:
            return "ChallengeDecline";
        case MessageKind::set_busy:
            return "SetBusy";
        case MessageKind::move_and_rejoin:
            return "MoveAndRejoin";
        case MessageKind::unanchor:
            return "Unanchor";
        case MessageKind::lease_renew:
            return "LeaseRenew";
        case MessageKind::thaw:
            return "Thaw";
        case MessageKind::replacement_arrived:
            return "ReplacementArrived";
    }
    return "?";
}

MessageKind Message::kind() const {
    // Variant alternatives are declared in MessageKind order.
    return static_cast<MessageKind>(payload.index() + 1);
}

std::optional<Fid> Message::addressee() const {
    return std::visit(
        [](const auto& body) -> std::optional<Fid> {
            if constexpr (requires { body.to; }) {
                return body.to;
            } else {
                return std::nullopt;
            }
        },
        payload);
}

void LeaseConfig::validate() const {
    if (!(delta_s > 0.0)) {
        throw std::invalid_argument(fmt::format("lease duration must be positive, got {}", delta_s));
    }
    if (!(renew_fraction > 0.0 && renew_fraction < 1.0)) {
        throw std::invalid_argument(fmt::format("lease renew fraction must be in (0, 1), got {}", renew_fraction));
    }
}

std::size_t ProtocolConfig::max_partners() const {
    if (max_merge == kUnboundedMerge) {
        return std::numeric_limits<std::size_t>::max();
    }
    return static_cast<std::size_t>(std::max(1, max_merge - 1));
}

void on_deploy(FlsState& fls, const ProtocolConfig& config) {
    fls.swarm_id = fls.fid;
    fls.status = Status::available;
    fls.role = Role::none;
    fls.r_complete = false;
    fls.eta = config.eta;
    fls.leases_granted.clear();
    fls.lease_held.reset();
    fls.oracle = config.oracle_fid && *config.oracle_fid == fls.fid;
}

ChallengeTargets issue_challenge(const FlsState& challenger, std::span<const Discovered> discovered,
                                 const ProtocolConfig& config, AnchorPolicy policy, Rng& rng) {
    ChallengeTargets out;
    out.max_partners = config.max_partners();
    if (challenger.status != Status::available || challenger.r_complete) {
        return out;
    }
    std::map<SwarmId, Discovered> reps;
    for (const Discovered& d : discovered) {
        if (d.swarm_id == challenger.swarm_id) {
            continue;
        }
        auto [it, inserted] = reps.emplace(d.swarm_id, d);
        if (!inserted && (d.distance < it->second.distance ||
                          (d.distance == it->second.distance && d.fid < it->second.fid))) {
            it->second = d;
        }
    }
    for (const auto& [swarm, rep] : reps) {
        out.ordered.push_back(rep);
    }
    auto& v = out.ordered;
    switch (policy) {
        case AnchorPolicy::lowest_swarm_id:
            break;  // map order is ascending swarm id
        case AnchorPolicy::largest_swarm:
            std::stable_sort(v.begin(), v.end(),
                             [](const Discovered& a, const Discovered& b) { return a.swarm_size > b.swarm_size; });
            break;
        case AnchorPolicy::smallest_swarm:
            std::stable_sort(v.begin(), v.end(),
                             [](const Discovered& a, const Discovered& b) { return a.swarm_size < b.swarm_size; });
            break;
        case AnchorPolicy::challenger:
            std::stable_sort(v.begin(), v.end(), [](const Discovered& a, const Discovered& b) {
                return a.distance < b.distance || (a.distance == b.distance && a.fid < b.fid);
            });
            break;
        case AnchorPolicy::random:
            for (std::size_t i = v.size(); i > 1; --i) {
                std::swap(v[i - 1], v[rng.below(i)]);
            }
            break;
    }
    return out;
}

ChallengeDecision on_challenge(const FlsState& receiver, SwarmId challenger_swarm, const ProtocolConfig& config) {
    if (challenger_swarm == receiver.swarm_id) {
        throw ProtocolViolation(
            fmt::format("FLS {} challenged by a member of its own swarm {}", receiver.fid, challenger_swarm));
    }
    const bool receiver_oracle = receiver.oracle || config.is_oracle_swarm(receiver.swarm_id);
    const bool challenger_oracle = config.is_oracle_swarm(challenger_swarm);
    Role role;
    if (receiver_oracle) {
        role = Role::anchor;
    } else if (challenger_oracle) {
        role = Role::localizing;
    } else {
        role = receiver.swarm_id < challenger_swarm ? Role::anchor : Role::localizing;
    }
    if (receiver.status == Status::available) {
        return {true, role};
    }
    // Busy: only an anchor with room for another localizer accepts, and only
    // when it stays the anchor.
    if (receiver.role == Role::anchor && role == Role::anchor &&
        receiver.leases_granted.size() < config.max_partners()) {
        return {true, Role::anchor};
    }
    return {false, Role::none};
}

bool grant_anchor(FlsState& anchor, Fid localizer, SimTime now, const ProtocolConfig& config) {
    const bool newly_busy = anchor.status == Status::available;
    anchor.status = Status::busy;
    anchor.role = Role::anchor;
    anchor.leases_granted[localizer] = now + config.lease.delta();
    return newly_busy;
}

bool begin_localizing(FlsState& localizer, Fid anchor, SimTime now, const ProtocolConfig& config) {
    localizer.status = Status::busy;
    localizer.role = Role::localizing;
    const SimTime delta = config.lease.delta();
    localizer.lease_held =
        HeldLease{anchor, now + delta, now + seconds_to_sim(config.lease.renew_fraction * config.lease.delta_s)};
    return true;
}

void on_set_busy(FlsState& member, const SetBusy& msg) {
    if (msg.role == Role::none) {
        if (member.leases_granted.empty() && !member.lease_held) {
            member.status = Status::available;
            member.role = Role::none;
        }
        return;
    }
    if (!member.leases_granted.empty() || member.lease_held) {
        return;  // already committed in its own right
    }
    member.status = Status::busy;
    member.role = msg.role;
}

RejoinOutcome apply_move_and_rejoin(FlsState& member, const MoveAndRejoin& msg, DeadReckoningModel& model, int dim,
                                    const ProtocolConfig& config) {
    RejoinOutcome out;
    out.start = member.est_coord;
    out.endpoint = member.est_coord;
    if (member.swarm_id != msg.old_swarm) {
        return out;
    }
    if (!member.leases_granted.empty()) {
        // An anchor with live leases stays put; it keeps the old id and
        // the swarm fragments.
        return out;
    }
    if (member.lease_held) {
        return out;  // a racing localizer follows only its own vector
    }
    out.applied = true;
    member.swarm_id = msg.new_swarm;
    member.oracle = config.is_oracle_swarm(msg.new_swarm) || (config.oracle_fid && *config.oracle_fid == member.fid);
    member.orientation = msg.orientation;
    member.status = Status::available;
    member.role = Role::none;
    if (msg.vector.norm() > config.move_threshold) {
        out.endpoint = dead_reckon(member.est_coord, member.est_coord + msg.vector, model, dim);
        out.moved = true;
        member.est_coord = out.endpoint;
    }
    return out;
}

Completion complete_localization(FlsState& localizer, Fid anchor_fid, SwarmId anchor_swarm, const Vec3& vector,
                                 double orientation, DeadReckoningModel& model, int dim, const ProtocolConfig& config,
                                 SimTime now) {
    if (localizer.role != Role::localizing) {
        throw ProtocolViolation(fmt::format("FLS {} completes a localization it is not running", localizer.fid));
    }
    if (anchor_swarm == localizer.swarm_id) {
        throw ProtocolViolation(fmt::format("FLS {} localizes against its own swarm {}", localizer.fid, anchor_swarm));
    }
    Completion out;
    out.lease_expired = localizer.lease_held && localizer.lease_held->expiry < now;
    out.broadcast = MoveAndRejoin{localizer.swarm_id, anchor_swarm, vector, orientation};
    out.unanchor = Unanchor{anchor_fid};
    localizer.lease_held.reset();
    out.self = apply_move_and_rejoin(localizer, out.broadcast, model, dim, config);
    localizer.status = Status::available;
    localizer.role = Role::none;
    return out;
}

bool update_r_complete(FlsState& fls, std::span<const ObservedNeighbor> observed, const ProtocolConfig& config) {
    int matches = 0;
    for (const ObservedNeighbor& n : observed) {
        if (n.fid == fls.fid || n.swarm_id != fls.swarm_id) {
            continue;
        }
        const Vec3 est_rel = n.est - fls.est_coord;
        const Vec3 gt_rel = n.gt - fls.gt_coord;
        if ((est_rel - gt_rel).norm() <= config.match_tolerance) {
            ++matches;
        }
    }
    fls.r_complete = matches >= fls.eta;
    return fls.r_complete;
}

std::optional<Fid> busy_neighbor_join(const FlsState& fls, std::span<const ObservedNeighbor> observed) {
    if (fls.status != Status::available) {
        return std::nullopt;
    }
    std::optional<Fid> best;
    for (const ObservedNeighbor& n : observed) {
        if (n.status == Status::busy && n.swarm_id != fls.swarm_id && (!best || n.fid < *best)) {
            best = n.fid;
        }
    }
    return best;
}

LeaseTickOutcome lease_tick(FlsState& fls, SimTime now, const ProtocolConfig& config) {
    LeaseTickOutcome out;
    if (fls.lease_held && fls.role == Role::localizing && now >= fls.lease_held->next_renewal) {
        out.renew = LeaseRenew{fls.lease_held->anchor};
        fls.lease_held->expiry = now + config.lease.delta();
        fls.lease_held->next_renewal = now + seconds_to_sim(config.lease.renew_fraction * config.lease.delta_s);
    }
    for (auto it = fls.leases_granted.begin(); it != fls.leases_granted.end();) {
        if (it->second < now) {
            out.expired.push_back(it->first);
            it = fls.leases_granted.erase(it);
        } else {
            ++it;
        }
    }
    if (!out.expired.empty() && fls.leases_granted.empty() && fls.role == Role::anchor) {
        fls.status = Status::available;
        fls.role = Role::none;
        out.released = true;
    }
    return out;
}

void on_lease_renew(FlsState& anchor, Fid localizer, SimTime now, const ProtocolConfig& config) {
    auto it = anchor.leases_granted.find(localizer);
    if (it != anchor.leases_granted.end()) {
        it->second = now + config.lease.delta();
    }
}

bool on_unanchor(FlsState& anchor, Fid localizer) {
    if (anchor.leases_granted.erase(localizer) == 0) {
        return false;
    }
    if (anchor.leases_granted.empty() && anchor.role == Role::anchor) {
        anchor.status = Status::available;
        anchor.role = Role::none;
        return true;
    }
    return false;
}

double thaw_horizon_s(std::size_t fls_count) {
    // A lone FLS would otherwise re-arm at the same instant forever.
    return std::max(1.0, std::log2(static_cast<double>(std::max<std::size_t>(fls_count, 1))));
}

void arm_thaw_timer(FlsState& fls, SimTime now, double horizon_s, Rng& rng) {
    fls.thaw_deadline = now + seconds_to_sim(rng.uniform(horizon_s, 2.0 * horizon_s));
}

std::optional<Thaw> thaw_tick(FlsState& fls, SimTime now) {
    if (now < fls.thaw_deadline) {
        return std::nullopt;
    }
    fls.thaw_deadline = std::numeric_limits<SimTime>::max();
    return Thaw{fls.swarm_id};
}

void on_thaw(FlsState& fls, const Thaw&, const ProtocolConfig& config) {
    fls.swarm_id = fls.fid;
    fls.status = Status::available;
    fls.role = Role::none;
    fls.r_complete = false;
    fls.leases_granted.clear();
    fls.lease_held.reset();
    fls.oracle = config.oracle_fid && *config.oracle_fid == fls.fid;
}

Fid select_anchor(std::span<const AnchorCandidate> candidates, AnchorPolicy policy, Rng& rng) {
    if (candidates.empty()) {
        throw std::invalid_argument("select_anchor: no candidates");
    }
    const AnchorCandidate* oracle = nullptr;
    for (const auto& c : candidates) {
        if (c.oracle && (!oracle || c.fid < oracle->fid)) {
            oracle = &c;
        }
    }
    if (oracle) {
        return oracle->fid;
    }
    auto lowest_swarm = [](const AnchorCandidate& a, const AnchorCandidate& b) {
        return a.swarm_id < b.swarm_id || (a.swarm_id == b.swarm_id && a.fid < b.fid);
    };
    switch (policy) {
        case AnchorPolicy::random:
            return candidates[rng.below(candidates.size())].fid;
        case AnchorPolicy::challenger:
            for (const auto& c : candidates) {
                if (c.challenger) {
                    return c.fid;
                }
            }
            break;
        case AnchorPolicy::lowest_swarm_id:
            break;
        case AnchorPolicy::largest_swarm:
            return std::min_element(candidates.begin(), candidates.end(),
                                    [&](const AnchorCandidate& a, const AnchorCandidate& b) {
                                        if (a.swarm_size != b.swarm_size) {
                                            return a.swarm_size > b.swarm_size;
                                        }
                                        return lowest_swarm(a, b);
                                    })
                ->fid;
        case AnchorPolicy::smallest_swarm:
            return std::min_element(candidates.begin(), candidates.end(),
                                    [&](const AnchorCandidate& a, const AnchorCandidate& b) {
                                        if (a.swarm_size != b.swarm_size) {
                                            return a.swarm_size < b.swarm_size;
                                        }
                                        return lowest_swarm(a, b);
                                    })
                ->fid;
    }
    return std::min_element(candidates.begin(), candidates.end(), lowest_swarm)->fid;
}

MergeDirection oracle_merge_rule(bool anchor_swarm_oracle, bool localizer_swarm_oracle) {
    if (anchor_swarm_oracle && localizer_swarm_oracle) {
        throw ProtocolViolation("two oracle swarms cannot merge");
    }
    return localizer_swarm_oracle ? MergeDirection::swapped : MergeDirection::as_proposed;
}

double bearing_yaw(const Vec3& from_gt, const Vec3& to_gt) {
    const Vec3 v = to_gt - from_gt;
    return std::atan2(v.h, v.l);
}

}  // namespace swarmer
