#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string_view>
#include <tuple>
#include <vector>

#include "swarmer/geometry.hpp"
#include "swarmer/protocol.hpp"
#include "swarmer/rng.hpp"

namespace swarmer {

class NetworkError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RadioConfig {
    double default_range = 1.0;
    double max_range = 1024.0;
    std::vector<double> expand_schedule;  // strictly increasing, ends at max_range

    // default, 2*default, 4*default, ... capped at max.
    static RadioConfig doubling(double default_range, double max_range);
    void validate() const;
};

enum class LossMode { none, tx, rx, both };

std::string_view to_string(LossMode mode);
std::optional<LossMode> parse_loss_mode(std::string_view text);

struct LossModel {
    LossMode mode = LossMode::none;
    double rate = 0.0;
    std::uint64_t seed = 1;

    void validate() const;
};

struct Delivery {
    SimTime deliver_at = 0;
    Fid recipient = 0;
    Message msg;
};

// Broadcast channel. Reach is decided by ground-truth distance between
// sender and receiver; deliveries come out ordered by
// (deliver_at, recipient, sender, msg_id).
class Medium {
public:
    Medium(RadioConfig radio, LossModel loss, SimTime latency);

    void add_node(Fid fid, const Vec3& gt);
    void set_alive(Fid fid, bool alive);
    bool alive(Fid fid) const;
    const RadioConfig& radio() const { return radio_; }
    SimTime latency() const { return latency_; }

    // Live nodes within range of sender (excluding it), ascending FID.
    std::vector<Fid> in_range(Fid sender, double range) const;

    // Queues copies for every reachable recipient (only the addressee when
    // given). Returns the number of copies queued. Throws NetworkError when
    // range exceeds the maximum.
    std::size_t broadcast(const Message& msg, double range, SimTime now, std::optional<Fid> addressee = std::nullopt);

    bool idle() const { return queue_.empty(); }
    std::optional<SimTime> next_time() const;
    // Earliest pending delivery with deliver_at <= now.
    std::optional<Delivery> pop_due(SimTime now);
    // Drops queued copies addressed to fid (a node that died).
    void drop_pending_for(Fid fid);

    std::uint64_t bytes_tx() const { return bytes_tx_; }
    std::uint64_t messages_tx() const { return messages_tx_; }
    std::uint64_t copies_dropped() const { return copies_dropped_; }

private:
    using Key = std::tuple<SimTime, Fid, Fid, std::uint64_t, std::uint64_t>;

    struct Node {
        Vec3 gt;
        bool alive = true;
    };

    RadioConfig radio_;
    LossModel loss_;
    SimTime latency_;
    Rng rng_;
    std::map<Fid, Node> nodes_;
    std::map<Key, Message> queue_;
    std::uint64_t seq_ = 0;
    std::uint64_t bytes_tx_ = 0;
    std::uint64_t messages_tx_ = 0;
    std::uint64_t copies_dropped_ = 0;
};

// Accepts only ids above the receiver's watermark for the sender, then
// raises the watermark.
bool dedup_filter(FlsState& receiver, const Message& msg);

// Drops a Challenge from the receiver's own swarm.
bool wrapper_filter(const FlsState& receiver, const Message& msg);

}  // namespace swarmer
