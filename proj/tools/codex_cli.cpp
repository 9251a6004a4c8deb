#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "codex/errors.hpp"
#include "codex/experiment.hpp"
#include "json.hpp"

namespace {

struct Options {
    std::string config;
    std::string out;
    std::string data;
    std::string input;
    std::optional<std::uint64_t> seed;
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
};

codex::ExperimentConfig load(const Options& o) {
    codex::ExperimentConfig c = codex::load_config(o.config);
    if (o.seed) c.seed = *o.seed;
    return c;
}

std::filesystem::path out_dir(const Options& o, const codex::ExperimentConfig& c) {
    return o.out.empty() ? std::filesystem::path(c.output_dir) : std::filesystem::path(o.out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Coded-exposure fly-scan CT simulation and reconstruction"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "Output directory (default: config output_dir)");
        sub->add_option("--seed", o.seed, "Override the noise seed");
    };

    auto* sim = app.add_subcommand("simulate", "Simulate counts, views and phantom");
    add_common(sim);
    auto* rec = app.add_subcommand("reconstruct", "Reconstruct view data from a simulate/bin directory");
    add_common(rec);
    rec->add_option("--data", o.data, "Directory holding y.f32/y.json")->required();
    auto* bin = app.add_subcommand("bin", "Code a dense N_theta-row projection array into views");
    add_common(bin);
    bin->add_option("--input", o.input, "Dense array (.f32 with .json sidecar)")->required();
    auto* swp = app.add_subcommand("sweep", "Run the flux / code / code-length sweep");
    add_common(swp);
    swp->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
    auto* met = app.add_subcommand("metrics", "NRMSE and MTF of a reconstruction directory");
    add_common(met);
    met->add_option("--data", o.data, "Directory holding recon and phantom")->required();
    auto* val = app.add_subcommand("validate-config", "Parse and check a config, print its canonical form");
    val->add_option("--config", o.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const codex::ExperimentConfig c = load(o);
        if (*sim) {
            codex::run_simulate(c, out_dir(o, c));
        } else if (*rec) {
            codex::run_reconstruct(c, o.data, out_dir(o, c));
        } else if (*bin) {
            codex::run_bin(c, o.input, out_dir(o, c));
        } else if (*swp) {
            codex::run_sweep(c, out_dir(o, c), o.threads);
        } else if (*met) {
            codex::run_metrics(c, o.data, out_dir(o, c));
        } else if (*val) {
            std::cout << codex::serialize_config(c);
            std::cout << "config_hash " << codex::config_hash(c) << "\n";
        }
        return 0;
    } catch (const codex::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const codex::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
