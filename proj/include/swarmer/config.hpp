#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "swarmer/baselines.hpp"
#include "swarmer/geometry.hpp"
#include "swarmer/localization.hpp"
#include "swarmer/netsim.hpp"
#include "swarmer/protocol.hpp"

namespace swarmer {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, std::string key, std::size_t line)
        : std::runtime_error(what), key_(std::move(key)), line_(line) {}
    const std::string& key() const { return key_; }
    std::size_t line() const { return line_; }

private:
    std::string key_;
    std::size_t line_;
};

enum class RunMode { rounds, events };
enum class TranslationChoice { automatic, centroid, stochastic };
enum class Placement { deploy, random };

struct VelocityProfile {
    double v_max = 3.0;  // m/s
    double a_max = 3.0;  // m/s^2
};

struct RunConfig {
    std::string cloud_path;
    double epsilon_deg = 5.0;
    int M = kUnboundedMerge;
    int eta = 5;
    AnchorPolicy anchor_policy = AnchorPolicy::lowest_swarm_id;
    LocalizerKind localizer = LocalizerKind::ss;
    TranslationChoice translation = TranslationChoice::automatic;
    RunMode mode = RunMode::rounds;
    double lambda_ms = 500.0;
    double lease_delta_s = 1.0;
    std::optional<double> thaw_s;  // nullopt: log2 F
    LossMode loss_mode = LossMode::none;
    double loss_rate = 0.0;
    double failure_rate_per_fls_per_s = 0.0;
    double hd_stop_threshold = 0.09;
    int round_limit = 100;
    double duration_s = 60.0;
    std::uint64_t seed = 1;
    Vec3 dispatcher_origin;
    VelocityProfile velocity;
    double cell_size_m = 0.05;
    bool oracle_mode = false;
    Placement placement = Placement::deploy;
    double radio_default = 1.0;
    double radio_max = 1024.0;
    double latency_ms = 1.0;

    int neighbors_k = 0;  // 0: max(eta + 2, 8)
    double move_threshold = 0.01;
    double match_tolerance = 0.25;
    double pm_standoff = kDefaultStandoff;
    double lease_renew_fraction = 0.5;
    double replacement_delay_s = 2.0;
    double hd_sample_ms = 250.0;
    std::size_t stochastic_r = kStochasticSampleSize;
    double noise_distance_rel = 0.0;
    double noise_angle_deg = 0.0;
    std::size_t snapshot_every = 0;  // 0: first and last only

    ConfidenceMode baseline_confidence = ConfidenceMode::worst;
    double baseline_threshold = 0.9;
    std::size_t baseline_max_iters = 0;
    double baseline_trilateration_tol = kTrilaterationTol;
    double baseline_min_center_gap = kMinCenterGap;
    double baseline_neighbor_radius = 0.0;  // 0: unlimited

    void validate() const;
    TranslationMethod translation_method() const;
    int known_neighbor_count() const;
    ProtocolConfig protocol() const;
    RadioConfig radio() const;
    Localizer localizer_plugin() const;
    BaselineConfig baseline(BaselineMethod method) const;
};

// Applies one key = value setting. line is used in error messages (0 for
// command-line overrides).
void apply_setting(RunConfig& config, std::string_view key, std::string_view value, std::size_t line = 0);

// Flat "key = value" lines; '#' starts a comment. Relative cloud_path values
// resolve against base_dir when it is non-empty.
void parse_config(std::istream& in, RunConfig& config, const std::filesystem::path& base_dir = {});
RunConfig load_config_file(const std::filesystem::path& path);

// Applies "key=value".
void apply_override(RunConfig& config, std::string_view assignment);

// Every key with its effective value, one "key = value" per line.
std::string render_config(const RunConfig& config);

std::string_view to_string(RunMode mode);
std::string_view to_string(Placement placement);

}  // namespace swarmer
