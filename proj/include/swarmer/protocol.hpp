#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <variant>
#include <vector>

#include "swarmer/geometry.hpp"
#include "swarmer/rng.hpp"

namespace swarmer {

using Fid = std::uint32_t;
using SwarmId = std::uint32_t;

// Simulated time in microseconds.
using SimTime = std::int64_t;
inline constexpr SimTime kMicrosPerSecond = 1'000'000;
inline SimTime seconds_to_sim(double s) { return static_cast<SimTime>(std::llround(s * kMicrosPerSecond)); }
inline double sim_to_seconds(SimTime t) { return static_cast<double>(t) / kMicrosPerSecond; }

class ProtocolViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class Status : std::uint8_t { available, busy };
enum class Role : std::uint8_t { none = 0, anchor = 1, localizing = 2 };

std::string_view to_string(Role role);

enum class AnchorPolicy { random, challenger, lowest_swarm_id, largest_swarm, smallest_swarm };

std::string_view to_string(AnchorPolicy policy);
std::optional<AnchorPolicy> parse_anchor_policy(std::string_view text);

// --- messages ---------------------------------------------------------------

enum class MessageKind : std::uint8_t {
    challenge = 1,
    challenge_accept = 2,
    challenge_decline = 3,
    set_busy = 4,
    move_and_rejoin = 5,
    unanchor = 6,
    lease_renew = 7,
    thaw = 8,
    replacement_arrived = 9,
};

std::string_view to_string(MessageKind kind);

struct Challenge {
    bool operator==(const Challenge&) const = default;
};
// Sent to the challenger. role is the role the sender takes in the merge; an
// accept carrying Role::anchor also grants the addressee a lease.
struct ChallengeAccept {
    Fid to = 0;
    Role role = Role::none;
    bool operator==(const ChallengeAccept&) const = default;
};
struct ChallengeDecline {
    Fid to = 0;
    bool operator==(const ChallengeDecline&) const = default;
};
// Role::none tells the swarm to return to available.
struct SetBusy {
    Role role = Role::none;
    bool operator==(const SetBusy&) const = default;
};
struct MoveAndRejoin {
    SwarmId old_swarm = 0;
    SwarmId new_swarm = 0;
    Vec3 vector;
    double orientation = 0.0;
    bool operator==(const MoveAndRejoin&) const = default;
};
struct Unanchor {
    Fid to = 0;
    bool operator==(const Unanchor&) const = default;
};
struct LeaseRenew {
    Fid to = 0;
    bool operator==(const LeaseRenew&) const = default;
};
struct Thaw {
    SwarmId swarm_id = 0;
    bool operator==(const Thaw&) const = default;
};
// A standby has taken over the ground-truth point gt.
struct ReplacementArrived {
    Vec3 gt;
    bool operator==(const ReplacementArrived&) const = default;
};

using Payload = std::variant<Challenge, ChallengeAccept, ChallengeDecline, SetBusy, MoveAndRejoin, Unanchor, LeaseRenew,
                             Thaw, ReplacementArrived>;

struct Message {
    Fid sender = 0;
    SwarmId sender_swarm = 0;
    std::uint64_t id = 0;
    Payload payload;

    MessageKind kind() const;
    // Addressee of directed kinds, nullopt for broadcasts.
    std::optional<Fid> addressee() const;
    bool operator==(const Message&) const = default;
};

// --- per-FLS state ----------------------------------------------------------

struct KnownNeighbor {
    Fid fid = 0;
    Vec3 gt;
};

struct HeldLease {
    Fid anchor = 0;
    SimTime expiry = 0;
    SimTime next_renewal = 0;
};

struct FlsState {
    Fid fid = 0;
    SwarmId swarm_id = 0;
    Status status = Status::available;
    Role role = Role::none;
    Vec3 gt_coord;
    Vec3 est_coord;
    double orientation = 0.0;
    bool r_complete = false;
    int eta = 5;
    std::vector<KnownNeighbor> known_neighbors;
    std::map<Fid, SimTime> leases_granted;
    std::optional<HeldLease> lease_held;
    std::map<Fid, std::uint64_t> last_msg_id_seen;
    bool oracle = false;
    SimTime thaw_deadline = std::numeric_limits<SimTime>::max();
};

struct LeaseConfig {
    double delta_s = 1.0;
    double renew_fraction = 0.5;

    void validate() const;
    SimTime delta() const { return seconds_to_sim(delta_s); }
};

// Unbounded merge width.
inline constexpr int kUnboundedMerge = 0;

struct ProtocolConfig {
    int eta = 5;
    int max_merge = kUnboundedMerge;  // M; kUnboundedMerge means no limit
    double move_threshold = 0.01;
    double match_tolerance = 0.25;
    LeaseConfig lease;
    std::optional<Fid> oracle_fid;

    // Foreign swarms one merge may absorb besides the initiator's own.
    std::size_t max_partners() const;
    bool is_oracle_swarm(SwarmId swarm) const { return oracle_fid && *oracle_fid == swarm; }
};

// --- operations -------------------------------------------------------------

// Fresh arrival: a swarm of one identified by the FLS's own id.
void on_deploy(FlsState& fls, const ProtocolConfig& config);

struct Discovered {
    Fid fid = 0;
    SwarmId swarm_id = 0;
    std::size_t swarm_size = 1;
    double distance = 0.0;
};

struct ChallengeTargets {
    // One representative per foreign swarm (nearest member, then lowest FID),
    // in the order the policy prefers them as merge partners.
    std::vector<Discovered> ordered;
    // At most this many of them may join the merge.
    std::size_t max_partners = 0;
};

ChallengeTargets issue_challenge(const FlsState& challenger, std::span<const Discovered> discovered,
                                 const ProtocolConfig& config, AnchorPolicy policy, Rng& rng);

struct ChallengeDecision {
    bool accept = false;
    Role receiver_role = Role::none;  // meaningful when accept
};

// Decides how receiver answers a challenge from challenger_swarm. Throws
// ProtocolViolation for a same-swarm challenge.
ChallengeDecision on_challenge(const FlsState& receiver, SwarmId challenger_swarm, const ProtocolConfig& config);

// Receiver side of an accepted challenge in which it anchors: goes busy and
// grants challenger a lease. Returns true when the FLS was not busy before
// (its swarm must be told).
bool grant_anchor(FlsState& anchor, Fid localizer, SimTime now, const ProtocolConfig& config);

// Localizer side: goes busy holding a lease from anchor. Returns true when
// the swarm must be told.
bool begin_localizing(FlsState& localizer, Fid anchor, SimTime now, const ProtocolConfig& config);

void on_set_busy(FlsState& member, const SetBusy& msg);

struct RejoinOutcome {
    bool applied = false;
    bool moved = false;
    Vec3 start;
    Vec3 endpoint;
};

// Swarm member's handling of a localizer's vector. Applied only when the
// member still belongs to old_swarm; moves by dead reckoning unless the
// vector is below the movement threshold.
RejoinOutcome apply_move_and_rejoin(FlsState& member, const MoveAndRejoin& msg, DeadReckoningModel& model, int dim,
                                    const ProtocolConfig& config);

struct Completion {
    MoveAndRejoin broadcast;  // for the localizer's old swarm
    Unanchor unanchor;        // for the anchor
    RejoinOutcome self;
    bool lease_expired = false;
};

// The localizer applies its own vector, re-homes to the anchor's swarm and
// releases the anchor.
Completion complete_localization(FlsState& localizer, Fid anchor_fid, SwarmId anchor_swarm, const Vec3& vector,
                                 double orientation, DeadReckoningModel& model, int dim, const ProtocolConfig& config,
                                 SimTime now = 0);

struct ObservedNeighbor {
    Fid fid = 0;
    SwarmId swarm_id = 0;
    Status status = Status::available;
    Vec3 est;
    Vec3 gt;
};

bool update_r_complete(FlsState& fls, std::span<const ObservedNeighbor> observed, const ProtocolConfig& config);

// The busy foreign neighbor (lowest FID) an available FLS must localize
// against, if any.
std::optional<Fid> busy_neighbor_join(const FlsState& fls, std::span<const ObservedNeighbor> observed);

struct LeaseTickOutcome {
    std::optional<LeaseRenew> renew;
    std::vector<Fid> expired;
    bool released = false;  // anchor returned to available
};

LeaseTickOutcome lease_tick(FlsState& fls, SimTime now, const ProtocolConfig& config);
void on_lease_renew(FlsState& anchor, Fid localizer, SimTime now, const ProtocolConfig& config);
// Returns true when the anchor released its last lease.
bool on_unanchor(FlsState& anchor, Fid localizer);

// Thaw horizon H = log2(F) seconds.
double thaw_horizon_s(std::size_t fls_count);
void arm_thaw_timer(FlsState& fls, SimTime now, double horizon_s, Rng& rng);
std::optional<Thaw> thaw_tick(FlsState& fls, SimTime now);
void on_thaw(FlsState& fls, const Thaw& msg, const ProtocolConfig& config);

struct AnchorCandidate {
    Fid fid = 0;
    SwarmId swarm_id = 0;
    std::size_t swarm_size = 1;
    bool oracle = false;
    bool challenger = false;
};

// Throws std::invalid_argument on an empty candidate list.
Fid select_anchor(std::span<const AnchorCandidate> candidates, AnchorPolicy policy, Rng& rng);

enum class MergeDirection { as_proposed, swapped };

// Keeps an oracle swarm on the anchor side. Throws ProtocolViolation when
// both sides claim the oracle property.
MergeDirection oracle_merge_rule(bool anchor_swarm_oracle, bool localizer_swarm_oracle);

// Yaw that points the FLS along its ground-truth bearing to the anchor.
double bearing_yaw(const Vec3& from_gt, const Vec3& to_gt);

}  // namespace swarmer
