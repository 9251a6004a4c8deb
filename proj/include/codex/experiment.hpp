#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "codex/admm.hpp"
#include "codex/baselines.hpp"
#include "codex/phantom.hpp"
#include "codex/projector.hpp"
#include "codex/sampling.hpp"
#include "codex/tomo.hpp"

namespace codex {

enum class Method { codex, mbir, ifbp };
Method parse_method(const std::string& name);
std::string to_string(Method m);

/// How a code is specified in a config: a kind plus explicit bits for "custom".
/// "flutter" repeats the length-52 fluttered code up to K.
struct CodeSpec {
    std::string kind = "boxcar";
    std::string bits;

    ExposureCode build(int K) const;
    friend bool operator==(const CodeSpec&, const CodeSpec&) = default;
};

struct MbirOptions {
    int iterations = 100;
    TomoSolver solver = TomoSolver::icd;
    bool positivity = false;
    /// "start" (first chop of each view) or "center" (middle of the blur window).
    std::string view_angles = "start";
    friend bool operator==(const MbirOptions&, const MbirOptions&) = default;
};

struct IfbpOptions {
    int cg_iterations = 200;
    double ridge = 1e-6;
    FbpFilter filter = FbpFilter::ramp;
    friend bool operator==(const IfbpOptions&, const IfbpOptions&) = default;
};

/// Values of the sweep grid; every (length, code, lambda0) cell is averaged over `seeds`.
struct SweepSpec {
    int N_theta = 233;
    std::vector<int> code_lengths{52};
    std::vector<std::string> codes{"snapshot", "boxcar", "flutter"};
    std::vector<double> lambda0{1e2, 1e3, 1e4, 1e5, 1e6};
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct ExperimentConfig {
    int K = 52;
    int m = 5;
    int n = 27;
    int M_theta = 233;
    CodeSpec code;
    /// Photon flux per chop; +infinity for noiseless data.
    double lambda0 = 1e4;
    std::uint64_t seed = 0;
    double count_floor = 1.0;
    /// Scale of the statistical weights; absent means 1 / mean(exp(-y)).
    std::optional<double> weight_scale;
    Geometry geometry = Geometry::square(64, 1.0 / 64);
    PhantomSpec phantom;
    Method method = Method::codex;
    PriorConfig prior;
    CodexConfig codex;
    MbirOptions mbir;
    IfbpOptions ifbp;
    std::optional<SweepSpec> sweep;
    std::string output_dir = "out";

    SamplingPlan plan() const;
    ExposureCode exposure_code() const;
    /// Cross-field checks; throws ConfigError.
    void validate() const;
    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses JSON text. Unknown keys anywhere are rejected with ConfigError. A manifest written
/// by run_* is also accepted; its embedded config is used.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical JSON (all fields explicit); parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);

struct SimulationOutput {
    Array2D phantom;
    PhotonCounts counts;
    Projections projections;
};

/// Simulates one acquisition in memory.
SimulationOutput simulate(const ExperimentConfig& config, const Projector* micro_projector = nullptr);

struct ReconstructionOutput {
    Array2D image;
    std::vector<ResidualPoint> residuals;
    int stalled_deblur_iterations = 0;
};

/// Reconstructs view data y with the configured method.
ReconstructionOutput reconstruct(const ExperimentConfig& config, const Array2D& y,
                                 const Projector* micro_projector = nullptr);

/// Writes phantom, counts, y, previews and a manifest into `out_dir`.
void run_simulate(const ExperimentConfig& config, const std::filesystem::path& out_dir);
/// Reads y (and the phantom, if present) from `data_dir`; writes the reconstruction, its
/// preview, residuals.csv and metrics.json into `out_dir`.
void run_reconstruct(const ExperimentConfig& config, const std::filesystem::path& data_dir,
                     const std::filesystem::path& out_dir);
/// Codes a dense N_theta-row projection array into view data.
void run_bin(const ExperimentConfig& config, const std::filesystem::path& dense_file,
             const std::filesystem::path& out_dir);

struct SweepRow {
    std::string code;
    int code_length = 0;
    double lambda0 = 0.0;
    int runs = 0;
    double rmse_mean = 0.0;
    double rmse_std = 0.0;
    double nrmse_mean = 0.0;
    std::string error;
};

/// Runs every sweep cell (threads workers) and returns one row per cell in grid order.
std::vector<SweepRow> sweep(const ExperimentConfig& config, int threads = 1);
void run_sweep(const ExperimentConfig& config, const std::filesystem::path& out_dir, int threads = 1);
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Metrics of a reconstruction against the phantom stored next to it; adds MTF curves for
/// Siemens-star and concentric-circle phantoms.
void run_metrics(const ExperimentConfig& config, const std::filesystem::path& data_dir,
                 const std::filesystem::path& out_dir);

std::string residuals_csv(const std::vector<ResidualPoint>& history);

}  // namespace codex
