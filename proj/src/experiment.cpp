#include "codex/experiment.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "codex/errors.hpp"
#include "codex/io.hpp"
#include "codex/metrics.hpp"
#include "json.hpp"

namespace codex {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

Method parse_method(const std::string& name) {
    if (name == "codex") return Method::codex;
    if (name == "mbir") return Method::mbir;
    if (name == "ifbp") return Method::ifbp;
    throw ConfigError("unknown method: " + name + " (expected codex, mbir or ifbp)");
}

std::string to_string(Method m) {
    switch (m) {
    case Method::codex: return "codex";
    case Method::mbir: return "mbir";
    case Method::ifbp: return "ifbp";
    }
    return "unknown";
}

ExposureCode CodeSpec::build(int K) const {
    try {
        if (kind == "snapshot") return build_code(CodeKind::snapshot, K);
        if (kind == "boxcar") return build_code(CodeKind::boxcar, K);
        if (kind == "flutter") return flutter_code(K);
        if (kind == "custom") {
            ExposureCode c = parse_code(bits);
            if (c.length() != K)
                throw ConfigError("custom code has length " + std::to_string(c.length()) + " but K = " + std::to_string(K));
            return c;
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("code: ") + e.what());
    }
    throw ConfigError("unknown code kind: " + kind + " (expected snapshot, boxcar, flutter or custom)");
}

SamplingPlan ExperimentConfig::plan() const {
    try {
        return make_sampling_plan(K, m, n, M_theta);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("plan: ") + e.what());
    }
}

ExposureCode ExperimentConfig::exposure_code() const { return code.build(K); }

void ExperimentConfig::validate() const {
    const SamplingPlan p = plan();
    exposure_code();
    if (!(lambda0 > 0.0)) throw ConfigError("lambda0 must be positive or \"inf\"");
    if (!(count_floor > 0.0)) throw ConfigError("count_floor must be positive");
    if (weight_scale && !(*weight_scale > 0.0)) throw ConfigError("weight_scale must be positive");
    try {
        geometry.validate();
        prior.validate();
        if (method == Method::codex) {
            codex.validate();
            if (!check_unique_angles(p).unique)
                throw ConfigError("plan repeats a view angle; use M_theta <= N_theta / gcd(K, N_theta) = " +
                                  std::to_string(p.N_theta / p.gcd_K_N));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (phantom.n_side != geometry.n_side) throw ConfigError("phantom.n_side must equal geometry.n_side");
    if (mbir.iterations < 1) throw ConfigError("mbir.iterations must be >= 1");
    if (mbir.view_angles != "start" && mbir.view_angles != "center")
        throw ConfigError("mbir.view_angles must be \"start\" or \"center\"");
    if (mbir.positivity && mbir.solver != TomoSolver::icd) throw ConfigError("mbir.positivity requires the icd solver");
    if (codex.tomo.positivity && codex.tomo.solver != TomoSolver::icd)
        throw ConfigError("codex.tomo.positivity requires the icd solver");
    if (ifbp.cg_iterations < 0 || !(ifbp.ridge >= 0.0)) throw ConfigError("ifbp: cg_iterations and ridge must be >= 0");
    if (sweep) {
        if (sweep->N_theta < 1) throw ConfigError("sweep.N_theta must be >= 1");
        if (sweep->code_lengths.empty() || sweep->codes.empty() || sweep->lambda0.empty() || sweep->seeds.empty())
            throw ConfigError("sweep lists must be non-empty");
        for (const auto& c : sweep->codes)
            if (c == "custom") throw ConfigError("sweep codes cannot be custom");
            else CodeSpec{c, ""}.build(1);
        for (int L : sweep->code_lengths)
            if (L < 1) throw ConfigError("sweep code lengths must be >= 1");
        for (double l : sweep->lambda0)
            if (!(l > 0.0)) throw ConfigError("sweep lambda0 values must be positive");
    }
}

namespace {

// Reads one JSON object, remembering which keys were consumed so leftovers can be rejected.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(label() + " must be a JSON object");
    }

    template <class T>
    void get(const char* key, T& out) {
        if (!j_.contains(key)) return;
        used_.insert(key);
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(label(key) + " has the wrong type");
        }
    }

    void get_number(const char* key, double& out) {
        if (!j_.contains(key)) return;
        used_.insert(key);
        const json& v = j_.at(key);
        if (v.is_number()) {
            out = v.get<double>();
        } else if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity")) {
            out = std::numeric_limits<double>::infinity();
        } else {
            throw ConfigError(label(key) + " must be a number or \"inf\"");
        }
    }

    bool has(const char* key) const { return j_.contains(key); }

    std::optional<Reader> sub(const char* key) {
        if (!j_.contains(key)) return std::nullopt;
        used_.insert(key);
        return Reader(j_.at(key), label(key));
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) throw ConfigError("unknown config key: " + label(it.key()));
    }

private:
    std::string label(const std::string& key = "") const {
        if (key.empty()) return path_.empty() ? "config" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

template <class F>
auto wrap_invalid(F&& f) {
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

ordered_json number_or_inf(double v) { return std::isinf(v) ? ordered_json("inf") : ordered_json(v); }

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (root.is_object() && root.contains("config") && root.contains("config_hash")) root = root.at("config");

    ExperimentConfig c;
    Reader r(root, "");
    if (auto pr = r.sub("plan")) {
        pr->get("K", c.K);
        pr->get("M_theta", c.M_theta);
        if (pr->has("N_theta")) {
            if (pr->has("m") || pr->has("n")) throw ConfigError("plan: give either N_theta or (m, n), not both");
            int N = 0;
            pr->get("N_theta", N);
            const SamplingPlan p = wrap_invalid([&] { return plan_for_n_theta(c.K, N, 1); });
            c.m = p.m;
            c.n = p.n;
        } else {
            pr->get("m", c.m);
            pr->get("n", c.n);
        }
        pr->finish();
    }
    if (auto cr = r.sub("code")) {
        cr->get("kind", c.code.kind);
        cr->get("bits", c.code.bits);
        cr->finish();
    }
    r.get_number("lambda0", c.lambda0);
    r.get("seed", c.seed);
    r.get("count_floor", c.count_floor);
    if (r.has("weight_scale")) {
        double w = 0.0;
        r.get("weight_scale", w);
        c.weight_scale = w;
    }
    if (auto gr = r.sub("geometry")) {
        int n_side = c.geometry.n_side;
        gr->get("n_side", n_side);
        double pitch = 1.0 / n_side;
        gr->get("pixel_pitch", pitch);
        if (n_side < 1) throw ConfigError("geometry.n_side must be >= 1");
        Geometry g = Geometry::square(n_side, pitch);
        gr->get("num_detector_pixels", g.num_detector_pixels);
        gr->get("detector_pitch", g.detector_pitch);
        gr->get("center_offset", g.center_offset);
        gr->finish();
        c.geometry = g;
    }
    c.phantom.n_side = c.geometry.n_side;
    if (auto pr = r.sub("phantom")) {
        std::string kind = to_string(c.phantom.kind);
        pr->get("kind", kind);
        c.phantom.kind = wrap_invalid([&] { return parse_phantom_kind(kind); });
        pr->get("seed", c.phantom.seed);
        pr->get("spokes", c.phantom.spokes);
        pr->get("rings", c.phantom.rings);
        pr->get("radius_frac", c.phantom.radius_frac);
        pr->finish();
    }
    std::string method = to_string(c.method);
    r.get("method", method);
    c.method = parse_method(method);
    if (auto pr = r.sub("prior")) {
        pr->get("beta", c.prior.beta);
        std::string pot = to_string(c.prior.potential);
        pr->get("potential", pot);
        c.prior.potential = wrap_invalid([&] { return parse_potential(pot); });
        pr->get("p", c.prior.p_exp);
        pr->get("q", c.prior.q_exp);
        pr->get("T", c.prior.T);
        pr->finish();
    }
    if (auto cr = r.sub("codex")) {
        cr->get("outer_iterations", c.codex.outer_iterations);
        cr->get("sigma", c.codex.sigma);
        cr->get("init_iterations", c.codex.init_iterations);
        cr->get("tolerance", c.codex.tolerance);
        cr->get("divergence_factor", c.codex.divergence_factor);
        if (auto dr = cr->sub("deblur")) {
            dr->get("n_p", c.codex.deblur.n_p);
            dr->get("eta0", c.codex.deblur.eta0);
            dr->get("epsilon", c.codex.deblur.epsilon);
            dr->get("max_halvings", c.codex.deblur.max_halvings);
            dr->finish();
        }
        if (auto tr = cr->sub("tomo")) {
            tr->get("n_t", c.codex.tomo.n_t);
            std::string solver = to_string(c.codex.tomo.solver);
            tr->get("solver", solver);
            c.codex.tomo.solver = wrap_invalid([&] { return parse_tomo_solver(solver); });
            tr->get("positivity", c.codex.tomo.positivity);
            tr->get("order_seed", c.codex.tomo.order_seed);
            tr->finish();
        }
        cr->finish();
    }
    if (auto mr = r.sub("mbir")) {
        mr->get("iterations", c.mbir.iterations);
        std::string solver = to_string(c.mbir.solver);
        mr->get("solver", solver);
        c.mbir.solver = wrap_invalid([&] { return parse_tomo_solver(solver); });
        mr->get("positivity", c.mbir.positivity);
        mr->get("view_angles", c.mbir.view_angles);
        mr->finish();
    }
    if (auto ir = r.sub("ifbp")) {
        ir->get("cg_iterations", c.ifbp.cg_iterations);
        ir->get("ridge", c.ifbp.ridge);
        std::string filter = to_string(c.ifbp.filter);
        ir->get("filter", filter);
        c.ifbp.filter = wrap_invalid([&] { return parse_fbp_filter(filter); });
        ir->finish();
    }
    if (auto sr = r.sub("sweep")) {
        SweepSpec s;
        sr->get("N_theta", s.N_theta);
        sr->get("code_lengths", s.code_lengths);
        sr->get("codes", s.codes);
        if (sr->has("lambda0")) {
            std::vector<json> vals;
            sr->get("lambda0", vals);
            s.lambda0.clear();
            for (const auto& v : vals) {
                if (v.is_number())
                    s.lambda0.push_back(v.get<double>());
                else if (v.is_string() && v.get<std::string>() == "inf")
                    s.lambda0.push_back(std::numeric_limits<double>::infinity());
                else
                    throw ConfigError("sweep.lambda0 entries must be numbers or \"inf\"");
            }
        }
        sr->get("seeds", s.seeds);
        sr->finish();
        c.sweep = s;
    }
    r.get("output_dir", c.output_dir);
    r.finish();
    c.validate();
    return c;
}

ExperimentConfig load_config(const fs::path& path) { return parse_config(io::read_text(path)); }

namespace {

ordered_json config_json(const ExperimentConfig& c) {
    ordered_json j;
    j["plan"] = {{"K", c.K}, {"m", c.m}, {"n", c.n}, {"M_theta", c.M_theta}};
    j["code"] = {{"kind", c.code.kind}, {"bits", c.code.bits}};
    j["lambda0"] = number_or_inf(c.lambda0);
    j["seed"] = c.seed;
    j["count_floor"] = c.count_floor;
    if (c.weight_scale) j["weight_scale"] = *c.weight_scale;
    j["geometry"] = {{"n_side", c.geometry.n_side},
                     {"pixel_pitch", c.geometry.pixel_pitch},
                     {"num_detector_pixels", c.geometry.num_detector_pixels},
                     {"detector_pitch", c.geometry.detector_pitch},
                     {"center_offset", c.geometry.center_offset}};
    j["phantom"] = {{"kind", to_string(c.phantom.kind)},
                    {"seed", c.phantom.seed},
                    {"spokes", c.phantom.spokes},
                    {"rings", c.phantom.rings},
                    {"radius_frac", c.phantom.radius_frac}};
    j["method"] = to_string(c.method);
    j["prior"] = {{"beta", c.prior.beta},
                  {"potential", to_string(c.prior.potential)},
                  {"p", c.prior.p_exp},
                  {"q", c.prior.q_exp},
                  {"T", c.prior.T}};
    j["codex"] = {{"outer_iterations", c.codex.outer_iterations},
                  {"sigma", c.codex.sigma},
                  {"init_iterations", c.codex.init_iterations},
                  {"tolerance", c.codex.tolerance},
                  {"divergence_factor", c.codex.divergence_factor},
                  {"deblur",
                   {{"n_p", c.codex.deblur.n_p},
                    {"eta0", c.codex.deblur.eta0},
                    {"epsilon", c.codex.deblur.epsilon},
                    {"max_halvings", c.codex.deblur.max_halvings}}},
                  {"tomo",
                   {{"n_t", c.codex.tomo.n_t},
                    {"solver", to_string(c.codex.tomo.solver)},
                    {"positivity", c.codex.tomo.positivity},
                    {"order_seed", c.codex.tomo.order_seed}}}};
    j["mbir"] = {{"iterations", c.mbir.iterations},
                 {"solver", to_string(c.mbir.solver)},
                 {"positivity", c.mbir.positivity},
                 {"view_angles", c.mbir.view_angles}};
    j["ifbp"] = {{"cg_iterations", c.ifbp.cg_iterations}, {"ridge", c.ifbp.ridge}, {"filter", to_string(c.ifbp.filter)}};
    if (c.sweep) {
        ordered_json l = ordered_json::array();
        for (double v : c.sweep->lambda0) l.push_back(number_or_inf(v));
        j["sweep"] = {{"N_theta", c.sweep->N_theta},
                      {"code_lengths", c.sweep->code_lengths},
                      {"codes", c.sweep->codes},
                      {"lambda0", l},
                      {"seeds", c.sweep->seeds}};
    }
    j["output_dir"] = c.output_dir;
    return j;
}

}  // namespace

std::string serialize_config(const ExperimentConfig& config) { return config_json(config).dump(2) + "\n"; }

std::string config_hash(const ExperimentConfig& config) { return io::fnv1a_hex(config_json(config).dump()); }

SimulationOutput simulate(const ExperimentConfig& config, const Projector* micro_projector) {
    config.validate();
    const SamplingPlan plan = config.plan();
    const ExposureCode code = config.exposure_code();
    std::optional<Projector> own;
    if (!micro_projector) micro_projector = &own.emplace(config.geometry, plan.micro_angles_rad());
    SimulationOutput out;
    out.phantom = make_phantom(config.phantom);
    out.counts = simulate_counts(out.phantom, *micro_projector, plan, code, config.lambda0, config.seed);
    out.projections = counts_to_projections(out.counts, config.count_floor);
    return out;
}

ReconstructionOutput reconstruct(const ExperimentConfig& config, const Array2D& y, const Projector* micro_projector) {
    config.validate();
    const SamplingPlan plan = config.plan();
    const ExposureCode code = config.exposure_code();
    if (y.rows() != static_cast<std::size_t>(plan.M_theta) ||
        y.cols() != static_cast<std::size_t>(config.geometry.num_detector_pixels))
        throw ConfigError("view data is " + std::to_string(y.rows()) + "x" + std::to_string(y.cols()) +
                          " but the config expects M_theta x M_d = " + std::to_string(plan.M_theta) + "x" +
                          std::to_string(config.geometry.num_detector_pixels));
    ReconstructionOutput out;
    if (config.method == Method::ifbp) {
        IfbpConfig ic;
        ic.cg_iterations = config.ifbp.cg_iterations;
        ic.ridge = config.ifbp.ridge;
        ic.fbp.filter = config.ifbp.filter;
        out.image = ifbp(y, plan, code, config.geometry, ic);
        return out;
    }
    const double w = config.weight_scale ? *config.weight_scale : default_weight_scale(y);
    const Array2D D = compute_weights(y, w).weights;
    if (config.method == Method::mbir) {
        Projector V(config.geometry, config.mbir.view_angles == "center" ? plan.center_view_angles_rad()
                                                                         : plan.nominal_view_angles_rad());
        out.image = mbir_full(y, V, D, config.prior, config.mbir.iterations, nullptr, config.mbir.solver,
                              config.mbir.positivity)
                        .x;
        return out;
    }
    CodexConfig cc = config.codex;
    cc.prior = config.prior;
    std::optional<Projector> own;
    if (!micro_projector) micro_projector = &own.emplace(config.geometry, plan.micro_angles_rad());
    const CodexResult r = codex_reconstruct(y, D, plan, code, *micro_projector, cc);
    out.image = r.x;
    out.residuals = r.history;
    out.stalled_deblur_iterations = r.stalled_deblur_iterations;
    return out;
}

std::string residuals_csv(const std::vector<ResidualPoint>& history) {
    std::ostringstream ss;
    ss.precision(10);
    ss << "iteration,primal,dual\n";
    for (const auto& h : history) ss << h.iteration << ',' << h.primal << ',' << h.dual << '\n';
    return ss.str();
}

namespace {

void write_manifest(const ExperimentConfig& config, const fs::path& out_dir, const std::string& command,
                    ordered_json extra) {
    ordered_json m;
    m["tool"] = "codex";
    m["command"] = command;
    m["config_hash"] = config_hash(config);
    m["seed"] = config.seed;
    m["config"] = config_json(config);
    for (auto it = extra.begin(); it != extra.end(); ++it) m[it.key()] = it.value();
    io::write_text_atomic(out_dir / "manifest.json", m.dump(2) + "\n");
}

}  // namespace

void run_simulate(const ExperimentConfig& config, const fs::path& out_dir) {
    const SimulationOutput sim = simulate(config);
    const SamplingPlan plan = config.plan();
    fs::create_directories(out_dir);
    io::write_array(out_dir / "phantom", sim.phantom, {0, 0, "image", {}});
    io::write_array(out_dir / "counts", sim.counts.values, {0, 0, "counts", plan.nominal_view_angles_rad()});
    io::write_array(out_dir / "y", sim.projections.y, {0, 0, "views", plan.nominal_view_angles_rad()});
    io::write_pgm(out_dir / "phantom.pgm", sim.phantom);
    io::write_pgm(out_dir / "y.pgm", sim.projections.y);
    write_manifest(config, out_dir, "simulate",
                   {{"outputs", {"phantom", "counts", "y"}},
                    {"noisy", sim.counts.noisy},
                    {"clamped_counts", sim.projections.clamped},
                    {"N_theta", plan.N_theta},
                    {"blur_angle_deg", plan.blur_angle_deg()},
                    {"span_deg", plan.span_deg()}});
}

void run_reconstruct(const ExperimentConfig& config, const fs::path& data_dir, const fs::path& out_dir) {
    io::ArrayInfo info;
    const Array2D y = io::read_array(data_dir / "y", &info);
    if (info.role != "views") throw ConfigError("data directory does not hold view data (role " + info.role + ")");
    const ReconstructionOutput rec = reconstruct(config, y);
    fs::create_directories(out_dir);
    io::write_array(out_dir / "recon", rec.image, {0, 0, "image", {}});
    io::write_pgm(out_dir / "recon.pgm", rec.image);
    io::write_text_atomic(out_dir / "residuals.csv", residuals_csv(rec.residuals));
    ordered_json metrics;
    metrics["method"] = to_string(config.method);
    metrics["config_hash"] = config_hash(config);
    if (fs::exists(data_dir / "phantom.json")) {
        const Array2D phantom = io::read_array(data_dir / "phantom");
        metrics["nrmse"] = nrmse(rec.image, phantom);
        metrics["rmse"] = rmse(rec.image, phantom);
    }
    if (!rec.residuals.empty()) {
        metrics["iterations"] = rec.residuals.size();
        metrics["final_primal"] = rec.residuals.back().primal;
        metrics["final_dual"] = rec.residuals.back().dual;
        metrics["stalled_deblur_iterations"] = rec.stalled_deblur_iterations;
    }
    io::write_text_atomic(out_dir / "metrics.json", metrics.dump(2) + "\n");
    if (fs::exists(data_dir / "phantom.json") && data_dir != out_dir) {
        const Array2D phantom = io::read_array(data_dir / "phantom");
        io::write_array(out_dir / "phantom", phantom, {0, 0, "image", {}});
    }
    write_manifest(config, out_dir, "reconstruct",
                   {{"data_dir", data_dir.string()}, {"outputs", {"recon", "residuals.csv", "metrics.json"}}});
}

void run_bin(const ExperimentConfig& config, const fs::path& dense_file, const fs::path& out_dir) {
    config.validate();
    const SamplingPlan plan = config.plan();
    const Array2D dense = io::read_array(dense_file);
    if (dense.rows() != static_cast<std::size_t>(plan.N_theta))
        throw ConfigError("dense data has " + std::to_string(dense.rows()) + " rows but N_theta = " +
                          std::to_string(plan.N_theta));
    const Array2D y = bin_dense_projections(dense, plan, config.exposure_code());
    fs::create_directories(out_dir);
    io::write_array(out_dir / "y", y, {0, 0, "views", plan.nominal_view_angles_rad()});
    io::write_pgm(out_dir / "y.pgm", y);
    write_manifest(config, out_dir, "bin", {{"input", dense_file.string()}, {"outputs", {"y"}}});
}

std::vector<SweepRow> sweep(const ExperimentConfig& config, int threads) {
    config.validate();
    if (!config.sweep) throw ConfigError("config has no sweep section");
    const SweepSpec& s = *config.sweep;
    struct Cell {
        int length;
        std::string code;
        double lambda0;
    };
    std::vector<Cell> cells;
    for (int L : s.code_lengths)
        for (const auto& c : s.codes)
            for (double l : s.lambda0) cells.push_back({L, c, l});

    std::vector<double> angles;
    for (int j = 0; j < s.N_theta; ++j) angles.push_back(std::numbers::pi * j / s.N_theta);
    const Projector A(config.geometry, angles);
    const Array2D phantom = make_phantom(config.phantom);

    const std::size_t jobs = cells.size() * s.seeds.size();
    std::vector<double> rmse_v(jobs, std::nan("")), nrmse_v(jobs, std::nan(""));
    std::vector<std::string> errors(jobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t job = next++; job < jobs; job = next++) {
            const Cell& cell = cells[job / s.seeds.size()];
            try {
                ExperimentConfig c = config;
                c.sweep.reset();
                const SamplingPlan p = plan_for_n_theta(cell.length, s.N_theta, config.M_theta);
                c.K = p.K;
                c.m = p.m;
                c.n = p.n;
                c.code = CodeSpec{cell.code, ""};
                c.lambda0 = cell.lambda0;
                c.seed = s.seeds[job % s.seeds.size()];
                const SimulationOutput sim = simulate(c, &A);
                const ReconstructionOutput rec = reconstruct(c, sim.projections.y, &A);
                rmse_v[job] = rmse(rec.image, phantom);
                nrmse_v[job] = nrmse(rec.image, phantom);
            } catch (const std::exception& e) {
                errors[job] = e.what();
            }
        }
    };
    const int nthreads = std::max(1, std::min<int>(threads, static_cast<int>(jobs)));
    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::vector<SweepRow> rows;
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        SweepRow row;
        row.code = cells[ci].code;
        row.code_length = cells[ci].length;
        row.lambda0 = cells[ci].lambda0;
        double sum = 0, sum2 = 0, nsum = 0;
        for (std::size_t k = 0; k < s.seeds.size(); ++k) {
            const std::size_t job = ci * s.seeds.size() + k;
            if (!errors[job].empty()) {
                if (row.error.empty()) row.error = errors[job];
                continue;
            }
            ++row.runs;
            sum += rmse_v[job];
            sum2 += rmse_v[job] * rmse_v[job];
            nsum += nrmse_v[job];
        }
        if (row.runs > 0) {
            row.rmse_mean = sum / row.runs;
            row.rmse_std = std::sqrt(std::max(0.0, sum2 / row.runs - row.rmse_mean * row.rmse_mean));
            row.nrmse_mean = nsum / row.runs;
        }
        rows.push_back(row);
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream ss;
    ss.precision(8);
    ss << "code,code_length,lambda0,runs,rmse_mean,rmse_std,nrmse_mean,error\n";
    for (const auto& r : rows) {
        std::string err = r.error;
        for (char& ch : err)
            if (ch == ',' || ch == '\n' || ch == '"') ch = ';';
        ss << r.code << ',' << r.code_length << ',' << r.lambda0 << ',' << r.runs << ',' << r.rmse_mean << ','
           << r.rmse_std << ',' << r.nrmse_mean << ',' << err << '\n';
    }
    return ss.str();
}

void run_sweep(const ExperimentConfig& config, const fs::path& out_dir, int threads) {
    const std::vector<SweepRow> rows = sweep(config, threads);
    fs::create_directories(out_dir);
    io::write_text_atomic(out_dir / "sweep.csv", sweep_csv(rows));
    write_manifest(config, out_dir, "sweep", {{"outputs", {"sweep.csv"}}, {"cells", rows.size()}});
}

void run_metrics(const ExperimentConfig& config, const fs::path& data_dir, const fs::path& out_dir) {
    const Array2D image = io::read_array(data_dir / "recon");
    const Array2D phantom = io::read_array(data_dir / "phantom");
    ordered_json m;
    m["nrmse"] = nrmse(image, phantom);
    m["rmse"] = rmse(image, phantom);
    std::ostringstream csv;
    csv.precision(8);
    csv << "frequency,magnitude,direction,radius\n";
    if (config.phantom.kind == PhantomKind::siemens_star || config.phantom.kind == PhantomKind::concentric_circles) {
        const MtfReport rep = wrap_invalid([&] { return mtf_report(image, config.phantom); });
        ordered_json curves = ordered_json::array();
        for (const auto& c : rep.curves) {
            for (std::size_t k = 0; k < c.frequencies.size(); ++k)
                csv << c.frequencies[k] << ',' << c.magnitudes[k] << ',' << to_string(c.direction) << ',' << c.radius
                    << '\n';
            curves.push_back({{"direction", to_string(c.direction)}, {"radius", c.radius}, {"mtf_at_0.25", c.at(0.25)}});
        }
        m["mtf"] = curves;
    }
    fs::create_directories(out_dir);
    io::write_text_atomic(out_dir / "metrics.json", m.dump(2) + "\n");
    io::write_text_atomic(out_dir / "mtf.csv", csv.str());
}

}  // namespace codex
