#include "swarmer/wire.hpp"

#include <bit>
#include <cstring>

#include <fmt/format.h>

namespace swarmer {

namespace {

class Writer {
public:
    explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

    template <typename T>
    void integer(T v) {
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            out_.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
        }
    }
    void real(double v) { integer(std::bit_cast<std::uint64_t>(v)); }
    void vec(const Vec3& v) {
        real(v.l);
        real(v.h);
        real(v.d);
    }

private:
    std::vector<std::uint8_t>& out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    template <typename T>
    T integer() {
        if (pos_ + sizeof(T) > in_.size()) {
            throw WireError(fmt::format("truncated message at byte {}", pos_));
        }
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
        }
        pos_ += sizeof(T);
        return static_cast<T>(v);
    }
    double real() { return std::bit_cast<double>(integer<std::uint64_t>()); }
    Vec3 vec() {
        const double l = real();
        const double h = real();
        const double d = real();
        return {l, h, d};
    }
    Role role() {
        const auto r = integer<std::uint8_t>();
        if (r > 2) {
            throw WireError(fmt::format("bad role {}", r));
        }
        return static_cast<Role>(r);
    }
    std::size_t remaining() const { return in_.size() - pos_; }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

}  // namespace

std::size_t body_size(MessageKind kind) {
    switch (kind) {
        case MessageKind::challenge:
            return 0;
        case MessageKind::challenge_accept:
            return 5;
        case MessageKind::challenge_decline:
        case MessageKind::unanchor:
        case MessageKind::lease_renew:
        case MessageKind::thaw:
            return 4;
        case MessageKind::set_busy:
            return 1;
        case MessageKind::move_and_rejoin:
            return 40;
        case MessageKind::replacement_arrived:
            return 24;
    }
    throw WireError("unknown message kind");
}

std::size_t encoded_size(const Message& msg) { return kWireHeaderSize + body_size(msg.kind()); }

std::vector<std::uint8_t> encode(const Message& msg) {
    std::vector<std::uint8_t> out;
    out.reserve(encoded_size(msg));
    Writer w(out);
    w.integer(static_cast<std::uint8_t>(msg.kind()));
    w.integer(msg.sender);
    w.integer(msg.sender_swarm);
    w.integer(msg.id);
    std::visit(
        [&](const auto& body) {
            using T = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<T, ChallengeAccept>) {
                w.integer(body.to);
                w.integer(static_cast<std::uint8_t>(body.role));
            } else if constexpr (std::is_same_v<T, ChallengeDecline> || std::is_same_v<T, Unanchor> ||
                                 std::is_same_v<T, LeaseRenew>) {
                w.integer(body.to);
            } else if constexpr (std::is_same_v<T, SetBusy>) {
                w.integer(static_cast<std::uint8_t>(body.role));
            } else if constexpr (std::is_same_v<T, MoveAndRejoin>) {
                w.integer(body.old_swarm);
                w.integer(body.new_swarm);
                w.vec(body.vector);
                w.real(body.orientation);
            } else if constexpr (std::is_same_v<T, Thaw>) {
                w.integer(body.swarm_id);
            } else if constexpr (std::is_same_v<T, ReplacementArrived>) {
                w.vec(body.gt);
            }
        },
        msg.payload);
    return out;
}

Message decode(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    Message msg;
    const auto kind = r.integer<std::uint8_t>();
    msg.sender = r.integer<std::uint32_t>();
    msg.sender_swarm = r.integer<std::uint32_t>();
    msg.id = r.integer<std::uint64_t>();
    switch (static_cast<MessageKind>(kind)) {
        case MessageKind::challenge:
            msg.payload = Challenge{};
            break;
        case MessageKind::challenge_accept: {
            ChallengeAccept a;
            a.to = r.integer<std::uint32_t>();
            a.role = r.role();
            msg.payload = a;
            break;
        }
        case MessageKind::challenge_decline:
            msg.payload = ChallengeDecline{r.integer<std::uint32_t>()};
            break;
        case MessageKind::set_busy:
            msg.payload = SetBusy{r.role()};
            break;
        case MessageKind::move_and_rejoin: {
            MoveAndRejoin m;
            m.old_swarm = r.integer<std::uint32_t>();
            m.new_swarm = r.integer<std::uint32_t>();
            m.vector = r.vec();
            m.orientation = r.real();
            msg.payload = m;
            break;
        }
        case MessageKind::unanchor:
            msg.payload = Unanchor{r.integer<std::uint32_t>()};
            break;
        case MessageKind::lease_renew:
            msg.payload = LeaseRenew{r.integer<std::uint32_t>()};
            break;
        case MessageKind::thaw:
            msg.payload = Thaw{r.integer<std::uint32_t>()};
            break;
        case MessageKind::replacement_arrived:
            msg.payload = ReplacementArrived{r.vec()};
            break;
        default:
            throw WireError(fmt::format("unknown message kind {}", kind));
    }
    if (r.remaining() != 0) {
        throw WireError(fmt::format("{} trailing bytes", r.remaining()));
    }
    return msg;
}

}  // namespace swarmer
