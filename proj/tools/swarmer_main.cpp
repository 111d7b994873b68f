#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "swarmer/config.hpp"
#include "swarmer/engine.hpp"
#include "swarmer/generate.hpp"
#include "swarmer/point_cloud_io.hpp"

namespace fs = std::filesystem;
using namespace swarmer;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("swarmer");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    const char* env = std::getenv("SWARMER_LOG");
    const std::string level = env ? env : "error";
    if (level == "debug") {
        spdlog::set_level(spdlog::level::debug);
    } else if (level == "info") {
        spdlog::set_level(spdlog::level::info);
    } else {
        spdlog::set_level(spdlog::level::err);
    }
}

struct RunArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
};

void add_run_flags(CLI::App* cmd, RunArgs& args) {
    cmd->add_option("--config", args.config_path, "Configuration file (key = value lines)");
    cmd->add_option("--set", args.overrides, "Override one setting, KEY=VALUE (repeatable, last wins)");
    cmd->add_option("--out", args.out_dir, "Output directory");
    cmd->add_option("--seed", args.seed, "Shorthand for --set seed=N");
}

RunConfig resolve_config(const RunArgs& args) {
    RunConfig config = args.config_path.empty() ? RunConfig{} : load_config_file(args.config_path);
    for (const std::string& o : args.overrides) {
        apply_override(config, o);
    }
    if (args.seed) {
        config.seed = *args.seed;
    }
    config.validate();
    if (config.cloud_path.empty()) {
        throw ConfigError("cloud_path: required", "cloud_path", 0);
    }
    return config;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError(fmt::format("cannot write '{}'", path.string()));
    }
    out << text;
    if (!out) {
        throw IoError(fmt::format("write failed for '{}'", path.string()));
    }
}

void make_out_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
    }
}

// Runs body and maps failures onto exit codes.
template <typename F>
int guarded(F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        spdlog::error("config error: {}", e.what());
        return kExitConfig;
    } catch (const CloudFormatError& e) {
        spdlog::error("point cloud: {}", e.what());
        return kExitConfig;
    } catch (const GeometryError& e) {
        spdlog::error("point cloud: {}", e.what());
        return kExitConfig;
    } catch (const IoError& e) {
        spdlog::error("i/o error: {}", e.what());
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        spdlog::error("config error: {}", e.what());
        return kExitConfig;
    }
}

int cmd_run(const RunArgs& args) {
    return guarded([&] {
        const RunConfig config = resolve_config(args);
        const PointCloud gt = load_point_cloud(config.cloud_path);
        const fs::path out = args.out_dir;
        make_out_dir(out);
        spdlog::info("running {} FLSs in {} mode, seed {}", gt.size(), to_string(config.mode), config.seed);
        const RunResult result = run(gt, config);
        emit_metrics(result.trace, out / "metrics.csv");
        for (const Snapshot& s : result.snapshots) {
            emit_snapshot(s.points, s.index, out);
        }
        write_text(out / "summary.txt", render_summary(result, config));
        spdlog::info("{}: final HD {}", result.status, result.final_hd);
        return 0;
    });
}

int cmd_compare(const RunArgs& args) {
    return guarded([&] {
        const RunConfig config = resolve_config(args);
        const PointCloud gt = load_point_cloud(config.cloud_path);
        const fs::path out = args.out_dir;
        make_out_dir(out);
        const auto outcomes = compare_methods(gt, config);
        for (const MethodOutcome& m : outcomes) {
            std::string csv = "step,hd\r\n";
            for (std::size_t i = 0; i < m.trace.size(); ++i) {
                csv += fmt::format("{},{}\r\n", i, m.trace[i]);
            }
            write_text(out / fmt::format("hd_{}.csv", m.name), csv);
        }
        write_text(out / "comparison.txt", render_comparison(outcomes));
        return 0;
    });
}

int cmd_gen(const std::string& kind, const ShapeSpec& base, const std::string& out_path) {
    const auto parsed = parse_shape(kind);
    if (!parsed) {
        spdlog::error("unknown shape '{}' (grid, line, ring, blob)", kind);
        return kExitConfig;
    }
    ShapeSpec spec = base;
    spec.kind = *parsed;
    std::vector<Vec3> points;
    try {
        points = generate_shape(spec);
    } catch (const std::invalid_argument& e) {
        spdlog::error("{}", e.what());
        return kExitConfig;
    }
    try {
        if (out_path.empty() || out_path == "-") {
            write_point_cloud(std::cout, points);
        } else {
            write_point_cloud_file(out_path, points);
        }
    } catch (const IoError& e) {
        spdlog::error("i/o error: {}", e.what());
        return kExitIo;
    }
    return 0;
}

int cmd_validate(const std::string& path) {
    ParsedCloud parsed;
    try {
        parsed = read_point_cloud_file(path);
    } catch (const IoError& e) {
        std::cout << e.what() << "\n";
        return kExitIo;
    } catch (const CloudFormatError& e) {
        std::cout << "malformed: " << e.what() << "\n";
        return kExitConfig;
    }
    if (parsed.points.empty()) {
        std::cout << "malformed: no points\n";
        return kExitConfig;
    }
    const bool planar = std::all_of(parsed.points.begin(), parsed.points.end(), [](const Vec3& p) { return p.d == 0.0; });
    std::cout << fmt::format("{} points, dim {}\n", parsed.points.size(), planar ? 2 : 3);
    if (parsed.duplicates > 0) {
        std::cout << fmt::format("{} duplicates (removed on load)\n", parsed.duplicates);
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"SwarMer localization simulator"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "Simulate one configuration");
    add_run_flags(run_cmd, run_args);

    RunArgs compare_args;
    auto* compare_cmd = app.add_subcommand("compare", "SwarMer against triangulation and trilateration");
    add_run_flags(compare_cmd, compare_args);

    std::string kind;
    ShapeSpec shape;
    std::string gen_out;
    auto* gen_cmd = app.add_subcommand("gen", "Write a synthetic point cloud");
    gen_cmd->add_option("kind", kind, "grid, line, ring or blob")->required();
    gen_cmd->add_option("--n", shape.n, "Number of points");
    gen_cmd->add_option("--dim", shape.dim, "2 or 3");
    gen_cmd->add_option("--spacing", shape.spacing, "Gap between neighbors in cells");
    gen_cmd->add_option("--seed", shape.seed, "Seed for blob");
    gen_cmd->add_option("--out", gen_out, "Output file (default stdout)");

    std::string validate_path;
    auto* validate_cmd = app.add_subcommand("validate", "Check a point-cloud file");
    validate_cmd->add_option("path", validate_path, "Point-cloud file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }
    if (*run_cmd) {
        return cmd_run(run_args);
    }
    if (*compare_cmd) {
        return cmd_compare(compare_args);
    }
    if (*gen_cmd) {
        return cmd_gen(kind, shape, gen_out);
    }
    return cmd_validate(validate_path);
}
