#include <gtest/gtest.h>

#include <vector>

#include "support/race_harness.hpp"
#include "swarmer/protocol.hpp"

namespace swarmer {
namespace {

FlsState deployed(Fid fid, const ProtocolConfig& pc = {}) {
    FlsState f;
    f.fid = fid;
    on_deploy(f, pc);
    return f;
}

TEST(Deploy, SwarmIdIsFid) {
    const FlsState f = deployed(17);
    EXPECT_EQ(f.swarm_id, 17u);
    EXPECT_EQ(f.status, Status::available);
    EXPECT_EQ(f.role, Role::none);
    EXPECT_FALSE(f.r_complete);
}

TEST(OnChallenge, LowerSwarmAnchors) {
    const ProtocolConfig pc;
    const FlsState low = deployed(3);
    const FlsState high = deployed(9);
    EXPECT_EQ(on_challenge(low, 9, pc).receiver_role, Role::anchor);
    EXPECT_EQ(on_challenge(high, 3, pc).receiver_role, Role::localizing);
    EXPECT_TRUE(on_challenge(low, 9, pc).accept);
}

TEST(OnChallenge, SameSwarmIsViolation) {
    const FlsState f = deployed(4);
    EXPECT_THROW(on_challenge(f, 4, {}), ProtocolViolation);
}

TEST(OnChallenge, OracleSwarmAlwaysAnchors) {
    ProtocolConfig pc;
    pc.oracle_fid = 50;
    const FlsState oracle = deployed(50, pc);
    EXPECT_TRUE(oracle.oracle);
    EXPECT_EQ(on_challenge(oracle, 2, pc).receiver_role, Role::anchor);
    const FlsState other = deployed(2, pc);
    EXPECT_EQ(on_challenge(other, 50, pc).receiver_role, Role::localizing);
}

TEST(OnChallenge, BusyAnchorAcceptsWhileRoomRemains) {
    ProtocolConfig pc;
    pc.max_merge = 3;  // two partners
    FlsState a = deployed(1, pc);
    grant_anchor(a, 20, 0, pc);
    EXPECT_TRUE(on_challenge(a, 21, pc).accept);
    grant_anchor(a, 21, 0, pc);
    EXPECT_FALSE(on_challenge(a, 22, pc).accept);
}

TEST(OnChallenge, BusyNonAnchorDeclines) {
    const ProtocolConfig pc;
    FlsState loc = deployed(9);
    begin_localizing(loc, 1, 0, pc);
    EXPECT_FALSE(on_challenge(loc, 12, pc).accept);
    FlsState anchor = deployed(9);
    grant_anchor(anchor, 30, 0, pc);
    // It would have to localize against swarm 2, so it declines.
    EXPECT_FALSE(on_challenge(anchor, 2, pc).accept);
}

TEST(MaxPartners, FollowsM) {
    ProtocolConfig pc;
    EXPECT_EQ(pc.max_partners(), std::numeric_limits<std::size_t>::max());
    pc.max_merge = 2;
    EXPECT_EQ(pc.max_partners(), 1u);
    pc.max_merge = 5;
    EXPECT_EQ(pc.max_partners(), 4u);
}

TEST(IssueChallenge, OneRepresentativePerForeignSwarm) {
    const ProtocolConfig pc;
    FlsState c = deployed(5);
    const std::vector<Discovered> found{
        {7, 7, 1, 2.0}, {8, 3, 4, 1.5}, {9, 3, 4, 1.0}, {10, 5, 1, 0.5}, {11, 3, 4, 1.0},
    };
    Rng rng(1);
    const auto t = issue_challenge(c, found, pc, AnchorPolicy::lowest_swarm_id, rng);
    ASSERT_EQ(t.ordered.size(), 2u);
    EXPECT_EQ(t.ordered[0].swarm_id, 3u);
    EXPECT_EQ(t.ordered[0].fid, 9u);  // nearest, then lowest FID
    EXPECT_EQ(t.ordered[1].swarm_id, 7u);
}

TEST(IssueChallenge, PolicyOrdering) {
    const ProtocolConfig pc;
    FlsState c = deployed(1);
    const std::vector<Discovered> found{{2, 2, 5, 3.0}, {3, 3, 9, 1.0}, {4, 4, 1, 2.0}};
    Rng rng(1);
    EXPECT_EQ(issue_challenge(c, found, pc, AnchorPolicy::largest_swarm, rng).ordered[0].swarm_id, 3u);
    EXPECT_EQ(issue_challenge(c, found, pc, AnchorPolicy::smallest_swarm, rng).ordered[0].swarm_id, 4u);
    EXPECT_EQ(issue_challenge(c, found, pc, AnchorPolicy::challenger, rng).ordered[0].swarm_id, 3u);
    EXPECT_EQ(issue_challenge(c, found, pc, AnchorPolicy::random, rng).ordered.size(), 3u);
}

TEST(IssueChallenge, BusyOrCompleteChallengerStaysQuiet) {
    const ProtocolConfig pc;
    const std::vector<Discovered> found{{2, 2, 1, 1.0}};
    Rng rng(1);
    FlsState done = deployed(1);
    done.r_complete = true;
    EXPECT_TRUE(issue_challenge(done, found, pc, AnchorPolicy::random, rng).ordered.empty());
    FlsState busy = deployed(1);
    busy.status = Status::busy;
    EXPECT_TRUE(issue_challenge(busy, found, pc, AnchorPolicy::random, rng).ordered.empty());
}

TEST(SelectAnchor, Policies) {
    Rng rng(3);
    const std::vector<AnchorCandidate> c{
        {10, 4, 3, false, false}, {11, 2, 7, false, true}, {12, 6, 1, false, false}};
    EXPECT_EQ(select_anchor(c, AnchorPolicy::lowest_swarm_id, rng), 11u);
    EXPECT_EQ(select_anchor(c, AnchorPolicy::largest_swarm, rng), 11u);
    EXPECT_EQ(select_anchor(c, AnchorPolicy::smallest_swarm, rng), 12u);
    EXPECT_EQ(select_anchor(c, AnchorPolicy::challenger, rng), 11u);
    for (int i = 0; i < 20; ++i) {
        const Fid f = select_anchor(c, AnchorPolicy::random, rng);
        EXPECT_TRUE(f == 10 || f == 11 || f == 12);
    }
}

TEST(SelectAnchor, OracleOverridesPolicy) {
    Rng rng(3);
    const std::vector<AnchorCandidate> c{{10, 4, 30, false, true}, {11, 9, 1, true, false}};
    for (auto p : {AnchorPolicy::random, AnchorPolicy::challenger, AnchorPolicy::lowest_swarm_id,
                   AnchorPolicy::largest_swarm, AnchorPolicy::smallest_swarm}) {
        EXPECT_EQ(select_anchor(c, p, rng), 11u);
    }
}

TEST(SelectAnchor, EmptyThrows) {
    Rng rng(1);
    EXPECT_THROW(select_anchor({}, AnchorPolicy::random, rng), std::invalid_argument);
}

TEST(OracleRule, Directions) {
    EXPECT_EQ(oracle_merge_rule(false, false), MergeDirection::as_proposed);
    EXPECT_EQ(oracle_merge_rule(true, false), MergeDirection::as_proposed);
    EXPECT_EQ(oracle_merge_rule(false, true), MergeDirection::swapped);
    EXPECT_THROW(oracle_merge_rule(true, true), ProtocolViolation);
}

TEST(Lease, RenewalAtHalfDelta) {
    ProtocolConfig pc;
    pc.lease.delta_s = 2.0;
    FlsState loc = deployed(5);
    begin_localizing(loc, 1, 0, pc);
    ASSERT_TRUE(loc.lease_held);
    EXPECT_EQ(loc.lease_held->expiry, 2 * kMicrosPerSecond);
    EXPECT_FALSE(lease_tick(loc, kMicrosPerSecond - 1, pc).renew);
    const auto out = lease_tick(loc, kMicrosPerSecond, pc);
    ASSERT_TRUE(out.renew);
    EXPECT_EQ(out.renew->to, 1u);
    EXPECT_EQ(loc.lease_held->expiry, 3 * kMicrosPerSecond);
}

TEST(Lease, ExpiryReleasesAnchor) {
    ProtocolConfig pc;
    pc.lease.delta_s = 1.0;
    FlsState a = deployed(1);
    EXPECT_TRUE(grant_anchor(a, 7, 0, pc));
    EXPECT_FALSE(grant_anchor(a, 8, 0, pc));
    on_lease_renew(a, 8, kMicrosPerSecond / 2, pc);
    auto out = lease_tick(a, kMicrosPerSecond + 1, pc);
    EXPECT_EQ(out.expired, std::vector<Fid>{7});
    EXPECT_FALSE(out.released);
    EXPECT_EQ(a.status, Status::busy);
    out = lease_tick(a, kMicrosPerSecond * 3 / 2 + 1, pc);
    EXPECT_EQ(out.expired, std::vector<Fid>{8});
    EXPECT_TRUE(out.released);
    EXPECT_EQ(a.status, Status::available);
    EXPECT_EQ(a.role, Role::none);
}

TEST(Lease, UnanchorReleasesLastLease) {
    const ProtocolConfig pc;
    FlsState a = deployed(1);
    grant_anchor(a, 7, 0, pc);
    grant_anchor(a, 8, 0, pc);
    EXPECT_FALSE(on_unanchor(a, 7));
    EXPECT_FALSE(on_unanchor(a, 99));
    EXPECT_TRUE(on_unanchor(a, 8));
    EXPECT_EQ(a.status, Status::available);
}

TEST(Lease, ConfigValidation) {
    EXPECT_THROW((LeaseConfig{0.0, 0.5}.validate()), std::invalid_argument);
    EXPECT_THROW((LeaseConfig{1.0, 1.0}.validate()), std::invalid_argument);
    EXPECT_NO_THROW((LeaseConfig{1.0, 0.5}.validate()));
}

TEST(Thaw, HorizonIsLog2Clamped) {
    EXPECT_DOUBLE_EQ(thaw_horizon_s(1), 1.0);
    EXPECT_DOUBLE_EQ(thaw_horizon_s(2), 1.0);
    EXPECT_DOUBLE_EQ(thaw_horizon_s(256), 8.0);
}

TEST(Thaw, TimerDrawnInHTo2H) {
    Rng rng(4);
    FlsState f = deployed(1);
    for (int i = 0; i < 1000; ++i) {
        arm_thaw_timer(f, 10, 6.0, rng);
        ASSERT_GE(f.thaw_deadline, 10 + 6 * kMicrosPerSecond);
        ASSERT_LE(f.thaw_deadline, 10 + 12 * kMicrosPerSecond);
    }
}

TEST(Thaw, TickFiresOnceThenResets) {
    Rng rng(4);
    FlsState f = deployed(3);
    f.swarm_id = 1;
    arm_thaw_timer(f, 0, 1.0, rng);
    EXPECT_FALSE(thaw_tick(f, 0));
    const auto t = thaw_tick(f, 2 * kMicrosPerSecond);
    ASSERT_TRUE(t);
    EXPECT_EQ(t->swarm_id, 1u);
    EXPECT_FALSE(thaw_tick(f, 3 * kMicrosPerSecond));
}

TEST(Thaw, ResetsToSingleton) {
    const ProtocolConfig pc;
    FlsState f = deployed(6);
    f.swarm_id = 1;
    f.r_complete = true;
    grant_anchor(f, 2, 0, pc);
    on_thaw(f, Thaw{1}, pc);
    EXPECT_EQ(f.swarm_id, 6u);
    EXPECT_EQ(f.status, Status::available);
    EXPECT_FALSE(f.r_complete);
    EXPECT_TRUE(f.leases_granted.empty());
}

TEST(Rejoin, AppliedOnlyForOldSwarm) {
    const ProtocolConfig pc;
    DeadReckoningModel model(0.0, 1);
    FlsState m = deployed(4);
    m.swarm_id = 9;
    m.est_coord = {1, 1, 0};
    const MoveAndRejoin stale{8, 2, {3, 0, 0}, 0.0};
    EXPECT_FALSE(apply_move_and_rejoin(m, stale, model, 2, pc).applied);
    EXPECT_EQ(m.swarm_id, 9u);
    const auto out = apply_move_and_rejoin(m, MoveAndRejoin{9, 2, {3, 0, 0}, 0.5}, model, 2, pc);
    EXPECT_TRUE(out.applied);
    EXPECT_TRUE(out.moved);
    EXPECT_EQ(m.swarm_id, 2u);
    EXPECT_EQ(m.est_coord, (Vec3{4, 1, 0}));
    EXPECT_EQ(m.orientation, 0.5);
}

TEST(Rejoin, BelowThresholdRehomesWithoutMoving) {
    const ProtocolConfig pc;
    DeadReckoningModel model(5.0, 1);
    FlsState m = deployed(4);
    m.swarm_id = 9;
    const auto out = apply_move_and_rejoin(m, MoveAndRejoin{9, 2, {0.005, 0, 0}, 0.0}, model, 2, pc);
    EXPECT_TRUE(out.applied);
    EXPECT_FALSE(out.moved);
    EXPECT_EQ(m.swarm_id, 2u);
}

TEST(Rejoin, AnchorWithLeasesStays) {
    const ProtocolConfig pc;
    DeadReckoningModel model(0.0, 1);
    FlsState a = deployed(4);
    a.swarm_id = 9;
    grant_anchor(a, 30, 0, pc);
    EXPECT_FALSE(apply_move_and_rejoin(a, MoveAndRejoin{9, 2, {3, 0, 0}, 0.0}, model, 2, pc).applied);
    EXPECT_EQ(a.swarm_id, 9u);
}

TEST(Completion, LocalizerRehomesAndReleases) {
    const ProtocolConfig pc;
    DeadReckoningModel model(0.0, 1);
    FlsState loc = deployed(8);
    loc.est_coord = {0, 0, 0};
    begin_localizing(loc, 2, 0, pc);
    const auto c = complete_localization(loc, 2, 2, {1, 2, 0}, 0.25, model, 2, pc, 10);
    EXPECT_EQ(c.broadcast.old_swarm, 8u);
    EXPECT_EQ(c.broadcast.new_swarm, 2u);
    EXPECT_EQ(c.unanchor.to, 2u);
    EXPECT_FALSE(c.lease_expired);
    EXPECT_EQ(loc.swarm_id, 2u);
    EXPECT_EQ(loc.est_coord, (Vec3{1, 2, 0}));
    EXPECT_EQ(loc.status, Status::available);
    EXPECT_FALSE(loc.lease_held);
}

TEST(Completion, NotLocalizingIsViolation) {
    const ProtocolConfig pc;
    DeadReckoningModel model(0.0, 1);
    FlsState f = deployed(8);
    EXPECT_THROW(complete_localization(f, 2, 2, {}, 0, model, 2, pc), ProtocolViolation);
}

TEST(RComplete, CountsMatchingSwarmMembers) {
    ProtocolConfig pc;
    pc.eta = 2;
    FlsState f = deployed(1, pc);
    f.swarm_id = 1;
    f.gt_coord = {0, 0, 0};
    f.est_coord = {5, 5, 0};
    std::vector<ObservedNeighbor> obs{
        {2, 1, Status::available, {6, 5, 0}, {1, 0, 0}},
        {3, 1, Status::available, {5, 6.2, 0}, {0, 1, 0}},  // within 0.25
        {4, 7, Status::available, {5, 4, 0}, {0, -1, 0}},   // other swarm
        {5, 1, Status::available, {9, 9, 0}, {1, 1, 0}},    // mismatched
    };
    EXPECT_TRUE(update_r_complete(f, obs, pc));
    obs.pop_back();
    obs.erase(obs.begin());
    EXPECT_FALSE(update_r_complete(f, obs, pc));
}

TEST(BusyJoin, PicksLowestBusyForeignFid) {
    FlsState f = deployed(1);
    const std::vector<ObservedNeighbor> obs{
        {9, 4, Status::busy, {}, {}},
        {6, 4, Status::busy, {}, {}},
        {3, 4, Status::available, {}, {}},
        {2, 1, Status::busy, {}, {}},
    };
    EXPECT_EQ(busy_neighbor_join(f, obs), std::optional<Fid>{6});
    f.status = Status::busy;
    EXPECT_FALSE(busy_neighbor_join(f, obs));
}

TEST(SetBusy, MembersFollowUnlessCommitted) {
    const ProtocolConfig pc;
    FlsState m = deployed(2);
    on_set_busy(m, SetBusy{Role::localizing});
    EXPECT_EQ(m.status, Status::busy);
    on_set_busy(m, SetBusy{Role::none});
    EXPECT_EQ(m.status, Status::available);
    FlsState a = deployed(3);
    grant_anchor(a, 9, 0, pc);
    on_set_busy(a, SetBusy{Role::none});
    EXPECT_EQ(a.status, Status::busy);
    EXPECT_EQ(a.role, Role::anchor);
}

TEST(Messages, KindAndAddressee) {
    EXPECT_EQ((Message{1, 1, 1, Challenge{}}).kind(), MessageKind::challenge);
    EXPECT_FALSE((Message{1, 1, 1, Challenge{}}).addressee());
    EXPECT_EQ((Message{1, 1, 1, Unanchor{4}}).addressee(), std::optional<Fid>{4});
    EXPECT_EQ((Message{1, 1, 1, ReplacementArrived{}}).kind(), MessageKind::replacement_arrived);
}

TEST(Race, ConcurrentLocalizersFragmentIntoMuSwarms) {
    for (std::size_t mu : {2, 3, 4}) {
        Rng rng(40 + mu);
        for (int trial = 0; trial < 200; ++trial) {
            const auto out = testing::run_race(mu, rng);
            EXPECT_EQ(out.resulting.size(), mu);
            EXPECT_TRUE(out.all_left_origin);
            std::size_t covered = 0;
            for (const auto& [swarm, members] : out.groups) {
                EXPECT_TRUE(out.anchor_swarms.contains(swarm));
                covered += members.size();
            }
            EXPECT_EQ(covered, out.members);
            for (const auto& [fid, n] : out.applied) {
                EXPECT_LE(n, 1u) << "FLS " << fid;
            }
        }
    }
}

TEST(Bearing, YawAlongGroundTruth) {
    EXPECT_DOUBLE_EQ(bearing_yaw({0, 0, 0}, {0, 1, 0}), kPi / 2);
    EXPECT_DOUBLE_EQ(bearing_yaw({1, 1, 0}, {2, 1, 5}), 0.0);
}

}  // namespace
}  // namespace swarmer
