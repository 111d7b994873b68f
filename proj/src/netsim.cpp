#include "swarmer/netsim.hpp"

#include <fmt/format.h>

#include "swarmer/wire.hpp"

namespace swarmer {

RadioConfig RadioConfig::doubling(double default_range, double max_range) {
    RadioConfig c;
    c.default_range = default_range;
    c.max_range = max_range;
    for (double r = default_range; r < max_range; r *= 2.0) {
        c.expand_schedule.push_back(r);
    }
    c.expand_schedule.push_back(max_range);
    c.validate();
    return c;
}

void RadioConfig::validate() const {
    if (!(default_range > 0.0 && default_range <= max_range)) {
        throw std::invalid_argument(
            fmt::format("radio range needs 0 < default ({}) <= max ({})", default_range, max_range));
    }
    if (expand_schedule.empty() || expand_schedule.back() != max_range) {
        throw std::invalid_argument("radio schedule must end at the maximum range");
    }
    for (std::size_t i = 1; i < expand_schedule.size(); ++i) {
        if (!(expand_schedule[i] > expand_schedule[i - 1])) {
            throw std::invalid_argument("radio schedule must be strictly increasing");
        }
    }
}

std::string_view to_string(LossMode mode) {
    switch (mode) {
        case LossMode::none:
            return "none";
        case LossMode::tx:
            return "tx";
        case LossMode::rx:
            return "rx";
        case LossMode::both:
            return "both";
    }
    return "?";
}

std::optional<LossMode> parse_loss_mode(std::string_view text) {
    for (auto m : {LossMode::none, LossMode::tx, LossMode::rx, LossMode::both}) {
        if (to_string(m) == text) {
            return m;
        }
    }
    return std::nullopt;
}

void LossModel::validate() const {
    if (!(rate >= 0.0 && rate <= 1.0)) {
        throw std::invalid_argument(fmt::format("loss rate must be in [0, 1], got {}", rate));
    }
}

Medium::Medium(RadioConfig radio, LossModel loss, SimTime latency)
    : radio_(std::move(radio)), loss_(loss), latency_(latency), rng_(loss.seed) {
    radio_.validate();
    loss_.validate();
    if (latency_ < 0) {
        throw std::invalid_argument("latency must be non-negative");
    }
}

void Medium::add_node(Fid fid, const Vec3& gt) { nodes_[fid] = Node{gt, true}; }

void Medium::set_alive(Fid fid, bool alive) {
    auto it = nodes_.find(fid);
    if (it == nodes_.end()) {
        throw NetworkError(fmt::format("unknown node {}", fid));
    }
    it->second.alive = alive;
}

bool Medium::alive(Fid fid) const {
    auto it = nodes_.find(fid);
    return it != nodes_.end() && it->second.alive;
}

std::vector<Fid> Medium::in_range(Fid sender, double range) const {
    std::vector<Fid> out;
    auto self = nodes_.find(sender);
    if (self == nodes_.end()) {
        throw NetworkError(fmt::format("unknown sender {}", sender));
    }
    const double r2 = range * range;
    for (const auto& [fid, node] : nodes_) {
        if (fid != sender && node.alive && distance_squared(node.gt, self->second.gt) <= r2) {
            out.push_back(fid);
        }
    }
    return out;
}

std::size_t Medium::broadcast(const Message& msg, double range, SimTime now, std::optional<Fid> addressee) {
    if (range > radio_.max_range) {
        throw NetworkError(fmt::format("range {} exceeds transmitter power (max {})", range, radio_.max_range));
    }
    ++messages_tx_;
    bytes_tx_ += encoded_size(msg);
    const bool tx_loss = loss_.mode == LossMode::tx || loss_.mode == LossMode::both;
    const bool rx_loss = loss_.mode == LossMode::rx || loss_.mode == LossMode::both;
    if (tx_loss && rng_.bernoulli(loss_.rate)) {
        ++copies_dropped_;
        return 0;
    }
    std::size_t queued = 0;
    for (Fid r : in_range(msg.sender, range)) {
        if (addressee && r != *addressee) {
            continue;
        }
        if (rx_loss && rng_.bernoulli(loss_.rate)) {
            ++copies_dropped_;
            continue;
        }
        queue_.emplace(Key{now + latency_, r, msg.sender, msg.id, seq_++}, msg);
        ++queued;
    }
    return queued;
}

std::optional<SimTime> Medium::next_time() const {
    if (queue_.empty()) {
        return std::nullopt;
    }
    return std::get<0>(queue_.begin()->first);
}

std::optional<Delivery> Medium::pop_due(SimTime now) {
    if (queue_.empty() || std::get<0>(queue_.begin()->first) > now) {
        return std::nullopt;
    }
    auto node = queue_.extract(queue_.begin());
    return Delivery{std::get<0>(node.key()), std::get<1>(node.key()), std::move(node.mapped())};
}

void Medium::drop_pending_for(Fid fid) {
    std::erase_if(queue_, [fid](const auto& entry) { return std::get<1>(entry.first) == fid; });
}

bool dedup_filter(FlsState& receiver, const Message& msg) {
    auto [it, inserted] = receiver.last_msg_id_seen.emplace(msg.sender, msg.id);
    if (inserted) {
        return true;
    }
    if (msg.id <= it->second) {
        return false;
    }
    it->second = msg.id;
    return true;
}

bool wrapper_filter(const FlsState& receiver, const Message& msg) {
    return !(msg.kind() == MessageKind::challenge && msg.sender_swarm == receiver.swarm_id);
}

}  // namespace swarmer
