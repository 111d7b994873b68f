#include "swarmer/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <vector>

#include <fmt/format.h>

#include "swarmer/point_cloud_io.hpp"

namespace swarmer {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

struct BadValue {
    std::string reason;
};

double to_double(std::string_view v) {
    double out = 0.0;
    const char* first = v.data();
    if (!v.empty() && v.front() == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
        throw BadValue{fmt::format("'{}' is not a finite number", v)};
    }
    return out;
}

template <typename Int>
Int to_int(std::string_view v) {
    Int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw BadValue{fmt::format("'{}' is not an integer", v)};
    }
    return out;
}

bool to_bool(std::string_view v) {
    if (v == "true" || v == "1" || v == "on" || v == "yes") {
        return true;
    }
    if (v == "false" || v == "0" || v == "off" || v == "no") {
        return false;
    }
    throw BadValue{fmt::format("'{}' is not a boolean", v)};
}

Vec3 to_vec(std::string_view v) {
    std::vector<double> parts;
    std::string text(v);
    std::replace(text.begin(), text.end(), ',', ' ');
    std::string_view rest(text);
    while (!(rest = trim(rest)).empty()) {
        const auto sp = rest.find(' ');
        parts.push_back(to_double(rest.substr(0, sp)));
        rest = sp == std::string_view::npos ? std::string_view{} : rest.substr(sp);
    }
    if (parts.size() < 2 || parts.size() > 3) {
        throw BadValue{fmt::format("'{}' is not a 2 or 3 component vector", v)};
    }
    return {parts[0], parts[1], parts.size() == 3 ? parts[2] : 0.0};
}

template <typename Enum>
Enum pick(std::string_view v, std::initializer_list<std::pair<std::string_view, Enum>> options) {
    std::string names;
    for (const auto& [name, value] : options) {
        if (name == v) {
            return value;
        }
        names += names.empty() ? std::string(name) : fmt::format("|{}", name);
    }
    throw BadValue{fmt::format("'{}' is not one of {}", v, names)};
}

std::string num(double v) { return fmt::format("{}", v); }

struct Key {
    std::string_view name;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
};

const std::vector<Key>& keys() {
    static const std::vector<Key> table = {
        {"cloud_path", [](RunConfig& c, std::string_view v) { c.cloud_path = std::string(v); },
         [](const RunConfig& c) { return c.cloud_path; }},
        {"epsilon_deg", [](RunConfig& c, std::string_view v) { c.epsilon_deg = to_double(v); },
         [](const RunConfig& c) { return num(c.epsilon_deg); }},
        {"M",
         [](RunConfig& c, std::string_view v) {
             c.M = (v == "inf" || v == "infinity") ? kUnboundedMerge : to_int<int>(v);
             if (c.M == kUnboundedMerge && v != "inf" && v != "infinity") {
                 throw BadValue{"M must be at least 2 or inf"};
             }
         },
         [](const RunConfig& c) { return c.M == kUnboundedMerge ? std::string("inf") : std::to_string(c.M); }},
        {"eta", [](RunConfig& c, std::string_view v) { c.eta = to_int<int>(v); },
         [](const RunConfig& c) { return std::to_string(c.eta); }},
        {"anchor_policy",
         [](RunConfig& c, std::string_view v) {
             const auto p = parse_anchor_policy(v);
             if (!p) {
                 throw BadValue{fmt::format(
                     "'{}' is not one of random|challenger|lowest_swarm_id|largest_swarm|smallest_swarm", v)};
             }
             c.anchor_policy = *p;
         },
         [](const RunConfig& c) { return std::string(to_string(c.anchor_policy)); }},
        {"localizer",
         [](RunConfig& c, std::string_view v) {
             c.localizer = pick(v, {std::pair{std::string_view("ss"), LocalizerKind::ss}, {"pm", LocalizerKind::pm}});
         },
         [](const RunConfig& c) { return std::string(to_string(c.localizer)); }},
        {"translation",
         [](RunConfig& c, std::string_view v) {
             c.translation = pick(v, {std::pair{std::string_view("auto"), TranslationChoice::automatic},
                                      {"centroid", TranslationChoice::centroid},
                                      {"stochastic", TranslationChoice::stochastic}});
         },
         [](const RunConfig& c) {
             switch (c.translation) {
                 case TranslationChoice::centroid:
                     return std::string("centroid");
                 case TranslationChoice::stochastic:
                     return std::string("stochastic");
                 default:
                     return std::string("auto");
             }
         }},
        {"mode",
         [](RunConfig& c, std::string_view v) {
             c.mode = pick(v, {std::pair{std::string_view("rounds"), RunMode::rounds}, {"events", RunMode::events}});
         },
         [](const RunConfig& c) { return std::string(to_string(c.mode)); }},
        {"lambda_ms", [](RunConfig& c, std::string_view v) { c.lambda_ms = to_double(v); },
         [](const RunConfig& c) { return num(c.lambda_ms); }},
        {"lease_delta_s", [](RunConfig& c, std::string_view v) { c.lease_delta_s = to_double(v); },
         [](const RunConfig& c) { return num(c.lease_delta_s); }},
        {"thaw",
         [](RunConfig& c, std::string_view v) {
             if (v == "auto") {
                 c.thaw_s.reset();
             } else {
                 c.thaw_s = to_double(v);
             }
         },
         [](const RunConfig& c) { return c.thaw_s ? num(*c.thaw_s) : std::string("auto"); }},
        {"loss.mode",
         [](RunConfig& c, std::string_view v) {
             const auto m = parse_loss_mode(v);
             if (!m) {
                 throw BadValue{fmt::format("'{}' is not one of none|tx|rx|both", v)};
             }
             c.loss_mode = *m;
         },
         [](const RunConfig& c) { return std::string(to_string(c.loss_mode)); }},
        {"loss.rate", [](RunConfig& c, std::string_view v) { c.loss_rate = to_double(v); },
         [](const RunConfig& c) { return num(c.loss_rate); }},
        {"failure_rate_per_fls_per_s",
         [](RunConfig& c, std::string_view v) { c.failure_rate_per_fls_per_s = to_double(v); },
         [](const RunConfig& c) { return num(c.failure_rate_per_fls_per_s); }},
        {"hd_stop_threshold", [](RunConfig& c, std::string_view v) { c.hd_stop_threshold = to_double(v); },
         [](const RunConfig& c) { return num(c.hd_stop_threshold); }},
        {"round_limit", [](RunConfig& c, std::string_view v) { c.round_limit = to_int<int>(v); },
         [](const RunConfig& c) { return std::to_string(c.round_limit); }},
        {"duration_s", [](RunConfig& c, std::string_view v) { c.duration_s = to_double(v); },
         [](const RunConfig& c) { return num(c.duration_s); }},
        {"seed", [](RunConfig& c, std::string_view v) { c.seed = to_int<std::uint64_t>(v); },
         [](const RunConfig& c) { return std::to_string(c.seed); }},
        {"dispatcher_origin", [](RunConfig& c, std::string_view v) { c.dispatcher_origin = to_vec(v); },
         [](const RunConfig& c) {
             return fmt::format("{} {} {}", c.dispatcher_origin.l, c.dispatcher_origin.h, c.dispatcher_origin.d);
         }},
        {"velocity.v_max", [](RunConfig& c, std::string_view v) { c.velocity.v_max = to_double(v); },
         [](const RunConfig& c) { return num(c.velocity.v_max); }},
        {"velocity.a_max", [](RunConfig& c, std::string_view v) { c.velocity.a_max = to_double(v); },
         [](const RunConfig& c) { return num(c.velocity.a_max); }},
        {"cell_size_m", [](RunConfig& c, std::string_view v) { c.cell_size_m = to_double(v); },
         [](const RunConfig& c) { return num(c.cell_size_m); }},
        {"oracle_mode", [](RunConfig& c, std::string_view v) { c.oracle_mode = to_bool(v); },
         [](const RunConfig& c) { return std::string(c.oracle_mode ? "true" : "false"); }},
        {"placement",
         [](RunConfig& c, std::string_view v) {
             c.placement =
                 pick(v, {std::pair{std::string_view("deploy"), Placement::deploy}, {"random", Placement::random}});
         },
         [](const RunConfig& c) { return std::string(to_string(c.placement)); }},
        {"radio.default", [](RunConfig& c, std::string_view v) { c.radio_default = to_double(v); },
         [](const RunConfig& c) { return num(c.radio_default); }},
        {"radio.max", [](RunConfig& c, std::string_view v) { c.radio_max = to_double(v); },
         [](const RunConfig& c) { return num(c.radio_max); }},
        {"latency_ms", [](RunConfig& c, std::string_view v) { c.latency_ms = to_double(v); },
         [](const RunConfig& c) { return num(c.latency_ms); }},
        {"neighbors_k", [](RunConfig& c, std::string_view v) { c.neighbors_k = to_int<int>(v); },
         [](const RunConfig& c) { return std::to_string(c.neighbors_k); }},
        {"move_threshold", [](RunConfig& c, std::string_view v) { c.move_threshold = to_double(v); },
         [](const RunConfig& c) { return num(c.move_threshold); }},
        {"match_tolerance", [](RunConfig& c, std::string_view v) { c.match_tolerance = to_double(v); },
         [](const RunConfig& c) { return num(c.match_tolerance); }},
        {"pm_standoff", [](RunConfig& c, std::string_view v) { c.pm_standoff = to_double(v); },
         [](const RunConfig& c) { return num(c.pm_standoff); }},
        {"lease_renew_fraction", [](RunConfig& c, std::string_view v) { c.lease_renew_fraction = to_double(v); },
         [](const RunConfig& c) { return num(c.lease_renew_fraction); }},
        {"replacement_delay_s", [](RunConfig& c, std::string_view v) { c.replacement_delay_s = to_double(v); },
         [](const RunConfig& c) { return num(c.replacement_delay_s); }},
        {"hd_sample_ms", [](RunConfig& c, std::string_view v) { c.hd_sample_ms = to_double(v); },
         [](const RunConfig& c) { return num(c.hd_sample_ms); }},
        {"stochastic_r", [](RunConfig& c, std::string_view v) { c.stochastic_r = to_int<std::size_t>(v); },
         [](const RunConfig& c) { return std::to_string(c.stochastic_r); }},
        {"noise.distance_rel", [](RunConfig& c, std::string_view v) { c.noise_distance_rel = to_double(v); },
         [](const RunConfig& c) { return num(c.noise_distance_rel); }},
        {"noise.angle_deg", [](RunConfig& c, std::string_view v) { c.noise_angle_deg = to_double(v); },
         [](const RunConfig& c) { return num(c.noise_angle_deg); }},
        {"snapshot_every", [](RunConfig& c, std::string_view v) { c.snapshot_every = to_int<std::size_t>(v); },
         [](const RunConfig& c) { return std::to_string(c.snapshot_every); }},
        {"baseline.confidence",
         [](RunConfig& c, std::string_view v) {
             c.baseline_confidence = pick(v, {std::pair{std::string_view("worst"), ConfidenceMode::worst},
                                              {"average", ConfidenceMode::average}});
         },
         [](const RunConfig& c) {
             return std::string(c.baseline_confidence == ConfidenceMode::worst ? "worst" : "average");
         }},
        {"baseline.threshold", [](RunConfig& c, std::string_view v) { c.baseline_threshold = to_double(v); },
         [](const RunConfig& c) { return num(c.baseline_threshold); }},
        {"baseline.max_iters",
         [](RunConfig& c, std::string_view v) { c.baseline_max_iters = to_int<std::size_t>(v); },
         [](const RunConfig& c) { return std::to_string(c.baseline_max_iters); }},
        {"baseline.trilateration_tol",
         [](RunConfig& c, std::string_view v) { c.baseline_trilateration_tol = to_double(v); },
         [](const RunConfig& c) { return num(c.baseline_trilateration_tol); }},
        {"baseline.min_center_gap",
         [](RunConfig& c, std::string_view v) { c.baseline_min_center_gap = to_double(v); },
         [](const RunConfig& c) { return num(c.baseline_min_center_gap); }},
        {"baseline.neighbor_radius",
         [](RunConfig& c, std::string_view v) { c.baseline_neighbor_radius = to_double(v); },
         [](const RunConfig& c) { return num(c.baseline_neighbor_radius); }},
    };
    return table;
}

[[noreturn]] void fail_at(std::string_view key, std::size_t line, const std::string& reason) {
    const std::string where = line ? fmt::format("line {}: ", line) : std::string();
    throw ConfigError(fmt::format("{}{}: {}", where, key, reason), std::string(key), line);
}

}  // namespace

std::string_view to_string(RunMode mode) { return mode == RunMode::rounds ? "rounds" : "events"; }
std::string_view to_string(Placement placement) { return placement == Placement::deploy ? "deploy" : "random"; }

void apply_setting(RunConfig& config, std::string_view key, std::string_view value, std::size_t line) {
    key = trim(key);
    value = trim(value);
    for (const Key& k : keys()) {
        if (k.name == key) {
            try {
                k.set(config, value);
            } catch (const BadValue& bad) {
                fail_at(key, line, bad.reason);
            }
            return;
        }
    }
    fail_at(key, line, "unknown key");
}

void apply_override(RunConfig& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError(fmt::format("override '{}' is not key=value", assignment), std::string(assignment), 0);
    }
    apply_setting(config, assignment.substr(0, eq), assignment.substr(eq + 1), 0);
}

void parse_config(std::istream& in, RunConfig& config, const std::filesystem::path& base_dir) {
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line(raw);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(fmt::format("line {}: expected key = value", line_no), std::string(line), line_no);
        }
        const std::string_view key = trim(line.substr(0, eq));
        apply_setting(config, key, line.substr(eq + 1), line_no);
        if (key == "cloud_path" && !base_dir.empty() && !config.cloud_path.empty() &&
            std::filesystem::path(config.cloud_path).is_relative()) {
            config.cloud_path = (base_dir / config.cloud_path).lexically_normal().string();
        }
    }
}

RunConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError(fmt::format("cannot open config '{}'", path.string()));
    }
    RunConfig config;
    parse_config(in, config, path.parent_path());
    return config;
}

std::string render_config(const RunConfig& config) {
    std::string out;
    for (const Key& k : keys()) {
        out += fmt::format("{} = {}\n", k.name, k.get(config));
    }
    return out;
}

void RunConfig::validate() const {
    auto bad = [](std::string_view key, const std::string& reason) { fail_at(key, 0, reason); };
    if (!(epsilon_deg >= 0.0 && epsilon_deg < 180.0)) {
        bad("epsilon_deg", "must be in [0, 180)");
    }
    if (M != kUnboundedMerge && M < 2) {
        bad("M", "must be at least 2 or inf");
    }
    if (eta < 1) {
        bad("eta", "must be at least 1");
    }
    if (mode == RunMode::events && !(lambda_ms > 0.0)) {
        bad("lambda_ms", "must be positive");
    }
    if (!(lease_delta_s > 0.0)) {
        bad("lease_delta_s", "must be positive");
    }
    if (!(lease_renew_fraction > 0.0 && lease_renew_fraction < 1.0)) {
        bad("lease_renew_fraction", "must be in (0, 1)");
    }
    if (thaw_s && !(*thaw_s > 0.0)) {
        bad("thaw", "must be auto or positive");
    }
    if (!(loss_rate >= 0.0 && loss_rate <= 1.0)) {
        bad("loss.rate", "must be in [0, 1]");
    }
    if (!(failure_rate_per_fls_per_s >= 0.0 && failure_rate_per_fls_per_s <= 1.0)) {
        bad("failure_rate_per_fls_per_s", "must be in [0, 1]");
    }
    if (!(hd_stop_threshold > 0.0)) {
        bad("hd_stop_threshold", "must be positive");
    }
    if (round_limit < 0) {
        bad("round_limit", "must be non-negative");
    }
    if (!(duration_s >= 0.0)) {
        bad("duration_s", "must be non-negative");
    }
    if (!(velocity.v_max > 0.0)) {
        bad("velocity.v_max", "must be positive");
    }
    if (!(velocity.a_max > 0.0)) {
        bad("velocity.a_max", "must be positive");
    }
    if (!(cell_size_m > 0.0)) {
        bad("cell_size_m", "must be positive");
    }
    if (!(radio_default > 0.0)) {
        bad("radio.default", "must be positive");
    }
    if (!(radio_max >= radio_default)) {
        bad("radio.max", "must be at least radio.default");
    }
    if (!(latency_ms >= 0.0)) {
        bad("latency_ms", "must be non-negative");
    }
    if (neighbors_k < 0) {
        bad("neighbors_k", "must be non-negative");
    }
    if (!(move_threshold >= 0.0)) {
        bad("move_threshold", "must be non-negative");
    }
    if (!(match_tolerance >= 0.0)) {
        bad("match_tolerance", "must be non-negative");
    }
    if (!(pm_standoff >= 0.0)) {
        bad("pm_standoff", "must be non-negative");
    }
    if (!(replacement_delay_s > 0.0)) {
        bad("replacement_delay_s", "must be positive");
    }
    if (!(hd_sample_ms > 0.0)) {
        bad("hd_sample_ms", "must be positive");
    }
    if (stochastic_r == 0) {
        bad("stochastic_r", "must be positive");
    }
    if (!(noise_distance_rel >= 0.0)) {
        bad("noise.distance_rel", "must be non-negative");
    }
    if (!(noise_angle_deg >= 0.0)) {
        bad("noise.angle_deg", "must be non-negative");
    }
    if (!(baseline_threshold >= 0.0 && baseline_threshold <= 1.0)) {
        bad("baseline.threshold", "must be in [0, 1]");
    }
    if (!(baseline_trilateration_tol > 0.0)) {
        bad("baseline.trilateration_tol", "must be positive");
    }
    if (!(baseline_neighbor_radius >= 0.0)) {
        bad("baseline.neighbor_radius", "must be non-negative");
    }
}

TranslationMethod RunConfig::translation_method() const {
    switch (translation) {
        case TranslationChoice::centroid:
            return TranslationMethod::centroid;
        case TranslationChoice::stochastic:
            return TranslationMethod::stochastic;
        case TranslationChoice::automatic:
            break;
    }
    return mode == RunMode::rounds ? TranslationMethod::stochastic : TranslationMethod::centroid;
}

int RunConfig::known_neighbor_count() const { return neighbors_k > 0 ? neighbors_k : std::max(eta + 2, 8); }

ProtocolConfig RunConfig::protocol() const {
    ProtocolConfig p;
    p.eta = eta;
    p.max_merge = M;
    p.move_threshold = move_threshold;
    p.match_tolerance = match_tolerance;
    p.lease.delta_s = lease_delta_s;
    p.lease.renew_fraction = lease_renew_fraction;
    return p;
}

RadioConfig RunConfig::radio() const { return RadioConfig::doubling(radio_default, radio_max); }

Localizer RunConfig::localizer_plugin() const {
    Localizer l;
    l.kind = localizer;
    l.standoff = pm_standoff;
    l.noise.distance_rel_error = noise_distance_rel;
    l.noise.angle_error_deg = noise_angle_deg;
    return l;
}

BaselineConfig RunConfig::baseline(BaselineMethod method) const {
    BaselineConfig b;
    b.method = method;
    b.confidence_mode = baseline_confidence;
    b.threshold = baseline_threshold;
    b.max_iters = baseline_max_iters;
    b.epsilon_deg = epsilon_deg;
    b.trilateration_tol = baseline_trilateration_tol;
    b.min_center_gap = baseline_min_center_gap;
    b.neighbors_k = static_cast<std::size_t>(known_neighbor_count());
    if (baseline_neighbor_radius > 0.0) {
        b.neighbor_radius = baseline_neighbor_radius;
    }
    b.translation = translation_method();
    return b;
}

}  // namespace swarmer
