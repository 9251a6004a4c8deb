// End-to-end acceptance checks. Prints one [PASS]/[FAIL] line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "codex/acquisition.hpp"
#include "codex/admm.hpp"
#include "codex/baselines.hpp"
#include "codex/deblur.hpp"
#include "codex/experiment.hpp"
#include "codex/metrics.hpp"
#include "codex/phantom.hpp"
#include "codex/projector.hpp"
#include "codex/rng.hpp"
#include "codex/sampling.hpp"
#include "codex/tomo.hpp"
#include "oracles.hpp"

using namespace codex;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Array2D random_array(std::size_t r, std::size_t c, CounterRng& rng, double lo = -1.0, double hi = 1.0) {
    Array2D a(r, c);
    for (auto& v : a.flat()) v = lo + (hi - lo) * rng.uniform();
    return a;
}

double dot(const Array2D& a, const Array2D& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const Array2D& a) { return std::sqrt(dot(a, a)); }

// Noiseless 64 x 64 scene: K = 52, N_theta = M_theta = 233.
ExperimentConfig noiseless_scene(const std::string& code) {
    ExperimentConfig c;
    c.K = 52;
    c.m = 5;
    c.n = 27;
    c.M_theta = 233;
    c.code.kind = code;
    c.lambda0 = kInf;
    c.geometry = Geometry::square(64, 1.0 / 64);
    c.phantom.n_side = 64;
    c.phantom.seed = 1;
    c.prior.beta = 0.001;
    c.codex.outer_iterations = 30;
    c.mbir.iterations = 400;
    return c;
}

Outcome sampling_rows() {
    struct Row {
        int K, m, n, N;
        double dtheta;
    };
    const Row rows[] = {{52, 2, 27, 77, 121.56}, {52, 5, 27, 233, 40.17}, {52, 10, 27, 493, 18.98},
                        {52, 20, 27, 1013, 9.24}};
    std::ostringstream d;
    bool ok = true;
    for (const auto& r : rows) {
        const SamplingPlan p = make_sampling_plan(r.K, r.m, r.n, 1);
        const bool row_ok = p.N_theta == r.N && std::abs(p.blur_angle_deg() - r.dtheta) <= 0.01;
        ok = ok && row_ok;
        d << fmt("m=%d N=%d dtheta=%.3f%s ", r.m, p.N_theta, p.blur_angle_deg(), row_ok ? "" : "(mismatch)");
    }
    return {ok, d.str()};
}

Outcome number_theory() {
    long long t1_cases = 0, t1_bad = 0;
    for (int N = 1; N <= 500; ++N) {
        for (int K = 1; K <= N; ++K) {
            if (gcd(K, N) != 1) continue;
            ++t1_cases;
            std::vector<char> seen(static_cast<std::size_t>(N), 0);
            bool bijective = true;
            for (int i = 0; i < N; ++i) {
                const auto j = static_cast<std::size_t>((static_cast<long long>(i) * K) % N);
                if (seen[j]) {
                    bijective = false;
                    break;
                }
                seen[j] = 1;
            }
            if (!bijective) ++t1_bad;
        }
        // Library check on one plan per N: all N views of the K = N - 1 (or 1) plan are unique.
        const int K = N > 2 ? N - 1 : 1;
        const SamplingPlan p = plan_for_n_theta(K, N, N);
        if (!check_unique_angles(p).unique) ++t1_bad;
    }
    long long t2_cases = 0, t2_bad = 0;
    for (int K = 1; K <= 100; ++K)
        for (int n = 1; n <= K; ++n) {
            if (gcd(K, n) != 1) continue;
            for (int m = 1; m <= 20; ++m) {
                if (m * K <= n) continue;
                ++t2_cases;
                const SamplingPlan p = make_sampling_plan(K, m, n, 1);
                if (p.N_theta != m * K - n || gcd(K, p.N_theta) != 1 || p.gcd_K_N != 1) ++t2_bad;
            }
        }
    return {t1_bad == 0 && t2_bad == 0,
            fmt("uniqueness %lld cases %lld counterexamples; co-primality %lld cases %lld counterexamples", t1_cases,
                t1_bad, t2_cases, t2_bad)};
}

Outcome operators() {
    CounterRng rng(11);
    double worst_A = 0.0;
    for (int n_side : {16, 64}) {
        const Geometry g = Geometry::square(n_side, 1.0 / n_side);
        std::vector<double> angles;
        for (int j = 0; j < 37; ++j) angles.push_back(std::numbers::pi * j / 37.0 + 0.013);
        const Projector A(g, angles);
        for (int trial = 0; trial < 100; ++trial) {
            const Array2D x = random_array(n_side, n_side, rng);
            const Array2D s = random_array(angles.size(), g.num_detector_pixels, rng);
            const Array2D Ax = A.project(x);
            const double rel = std::abs(dot(Ax, s) - dot(x, A.backproject(s))) / (norm(Ax) * norm(s));
            worst_A = std::max(worst_A, rel);
        }
    }
    double worst_C = 0.0, worst_row = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int K = 2 + static_cast<int>(rng() % 60);
        int nn = 1 + static_cast<int>(rng() % K);
        while (gcd(K, nn) != 1) ++nn;
        const int m = 2 + static_cast<int>(rng() % 6);
        SamplingPlan p = make_sampling_plan(K, m, nn, 1);
        p = make_sampling_plan(K, m, nn, 1 + static_cast<int>(rng() % p.N_theta));
        std::vector<std::uint8_t> bits(K);
        for (auto& b : bits) b = rng() % 2;
        bits[rng() % K] = 1;
        const ExposureCode code = build_code(CodeKind::custom, K, bits);
        const Array2D u = random_array(p.N_theta, 3, rng), v = random_array(p.M_theta, 3, rng);
        const Array2D Cu = apply_C(p, code, u);
        worst_C = std::max(worst_C, std::abs(dot(Cu, v) - dot(u, apply_C_transpose(p, code, v))) /
                                        (norm(Cu) * norm(v)));
        const Array2D rows = apply_C(p, code, Array2D(p.N_theta, 3, 1.0));
        for (double x : rows.flat()) worst_row = std::max(worst_row, std::abs(x - 1.0));
    }
    return {worst_A <= 1e-6 && worst_C <= 1e-12 && worst_row <= 1e-12,
            fmt("A adjoint %.2e (<=1e-6), C adjoint %.2e (<=1e-12), C row sums %.2e (<=1e-12)", worst_A, worst_C,
                worst_row)};
}

// Cost written out with an explicit dense C for the finite-difference oracle.
double dense_cost(const Array2D& p, const Array2D& pt, const Array2D& y, const Array2D& D, double sigma,
                  const SamplingPlan& plan, const ExposureCode& code) {
    double data = 0.0;
    for (int i = 0; i < plan.M_theta; ++i)
        for (std::size_t d = 0; d < p.cols(); ++d) {
            double acc = 0.0;
            for (int k = 0; k < plan.K; ++k)
                if (code.bits[k]) acc += std::exp(-p((i * plan.K + k) % plan.N_theta, d)) / code.cbar;
            const double r = y(i, d) + std::log(acc);
            data += D(i, d) * r * r;
        }
    double prox = 0.0;
    for (std::size_t e = 0; e < p.size(); ++e) prox += (p[e] - pt[e]) * (p[e] - pt[e]);
    return 0.5 * data + 0.5 * prox / (sigma * sigma);
}

Outcome gradient_check() {
    const auto t0 = std::chrono::steady_clock::now();
    CounterRng rng(4);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int K = 2 + static_cast<int>(rng() % 6);
        int nn = 1 + static_cast<int>(rng() % K);
        while (gcd(K, nn) != 1) ++nn;
        const int m = 2 + static_cast<int>(rng() % 3);
        SamplingPlan plan = make_sampling_plan(K, m, nn, 1);
        plan = make_sampling_plan(K, m, nn, 1 + static_cast<int>(rng() % plan.N_theta));
        std::vector<std::uint8_t> bits(K);
        for (auto& b : bits) b = rng() % 2;
        bits[rng() % K] = 1;
        const ExposureCode code = build_code(CodeKind::custom, K, bits);
        const std::size_t md = 1 + rng() % 4;
        const Array2D p = random_array(plan.N_theta, md, rng, 0.0, 2.0);
        const Array2D pt = random_array(plan.N_theta, md, rng, 0.0, 2.0);
        const Array2D y = random_array(plan.M_theta, md, rng, 0.0, 2.0);
        const Array2D D = random_array(plan.M_theta, md, rng, 0.2, 1.5);
        const double sigma = 0.5 + rng.uniform();
        const Array2D g = deblur_gradient(p, pt, y, D, sigma, plan, code);
        Array2D fd(p.rows(), p.cols());
        const double h = 1e-6;
        for (std::size_t e = 0; e < p.size(); ++e) {
            Array2D pp = p, pm = p;
            pp[e] += h;
            pm[e] -= h;
            fd[e] = (dense_cost(pp, pt, y, D, sigma, plan, code) - dense_cost(pm, pt, y, D, sigma, plan, code)) /
                    (2 * h);
        }
        Array2D diff = g;
        for (std::size_t e = 0; e < g.size(); ++e) diff[e] -= fd[e];
        worst = std::max(worst, norm(diff) / std::max(norm(fd), 1e-300));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-4 && secs < 60.0, fmt("max relative error %.2e over 50 instances (<=1e-4), %.2fs", worst, secs)};
}

Outcome subsolver_oracle() {
    const int n = 16;
    const Geometry g = Geometry::square(n, 1.0 / n);
    std::vector<double> angles;
    for (int j = 0; j < 24; ++j) angles.push_back(std::numbers::pi * j / 24.0);
    const Projector A(g, angles);
    CounterRng rng(5);
    PhantomSpec ps;
    ps.n_side = n;
    Array2D p_tilde = A.project(make_phantom(ps));
    for (auto& v : p_tilde.flat()) v += 0.01 * (rng.uniform() - 0.5);
    TomoConfig cfg;
    cfg.sigma = 0.5;
    cfg.n_t = 400;
    PriorConfig prior;
    prior.beta = 0.05;
    const SolveResult r = tomo_partial(Array2D(n, n), p_tilde, cfg, prior, A);
    const Eigen::MatrixXd M = oracle::dense_system_matrix(A);
    const Eigen::MatrixXd H = M.transpose() * M / (cfg.sigma * cfg.sigma) + prior.beta * oracle::pair_laplacian(n);
    const Eigen::VectorXd x_star = H.ldlt().solve(M.transpose() * oracle::to_vec(p_tilde) / (cfg.sigma * cfg.sigma));
    const double rel = (oracle::to_vec(r.x) - x_star).norm() / x_star.norm();
    return {rel <= 1e-4, fmt("relative distance to dense solution %.2e (<=1e-4)", rel)};
}

Outcome snapshot_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig c = noiseless_scene("snapshot");
    const SimulationOutput sim = simulate(c);
    const double e_codex = nrmse(reconstruct(c, sim.projections.y).image, sim.phantom);
    c.method = Method::mbir;
    const double e_mbir = nrmse(reconstruct(c, sim.projections.y).image, sim.phantom);
    const double secs = seconds_since(t0);
    return {std::abs(e_codex - e_mbir) <= 0.01 && secs < 300.0,
            fmt("NRMSE codex %.4f mbir %.4f |diff| %.4f (<=0.01), %.1fs", e_codex, e_mbir, std::abs(e_codex - e_mbir),
                secs)};
}

Outcome blur_inversion() {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig c = noiseless_scene("boxcar");
    const SimulationOutput sim = simulate(c);
    const double e_codex = nrmse(reconstruct(c, sim.projections.y).image, sim.phantom);
    // Baseline MBIR assigns every view its nominal angle theta_i.
    c.method = Method::mbir;
    const double e_mbir = nrmse(reconstruct(c, sim.projections.y).image, sim.phantom);
    // Reported only: MBIR with views placed at the middle of their blur window.
    c.mbir.view_angles = "center";
    const double e_center = nrmse(reconstruct(c, sim.projections.y).image, sim.phantom);
    const double secs = seconds_since(t0);
    return {e_codex <= 0.5 * e_mbir && secs < 600.0,
            fmt("NRMSE codex %.4f, mbir %.4f, ratio %.3f (<=0.5); center-angle mbir %.4f (ratio %.3f), %.1fs", e_codex,
                e_mbir, e_codex / e_mbir, e_center, e_codex / e_center, secs)};
}

Outcome admm_convergence() {
    std::ostringstream d;
    bool ok = true;
    for (const char* code : {"boxcar", "flutter"}) {
        ExperimentConfig c = noiseless_scene(code);
        c.M_theta = 100;
        c.lambda0 = 1e4;
        c.prior.beta = 0.01;
        c.codex.outer_iterations = 50;
        const SimulationOutput sim = simulate(c);
        const ReconstructionOutput r = reconstruct(c, sim.projections.y);
        const ResidualPoint& a = r.residuals.at(4);
        const ResidualPoint& b = r.residuals.at(49);
        const bool pass = a.iteration == 5 && b.iteration == 50 && b.primal < 0.5 * a.primal && b.dual < 0.5 * a.dual;
        ok = ok && pass;
        d << fmt("%s primal %.2e->%.2e dual %.2e->%.2e; ", code, a.primal, b.primal, a.dual, b.dual);
    }
    return {ok, d.str()};
}

Outcome noise_ordering() {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig c = noiseless_scene("snapshot");
    c.M_theta = 100;
    c.prior.beta = 0.01;
    c.codex.outer_iterations = 50;
    SweepSpec s;
    s.N_theta = 233;
    s.code_lengths = {52};
    s.codes = {"snapshot", "boxcar", "flutter"};
    s.lambda0 = {100.0, 1e6};
    s.seeds = {0, 1, 2, 3, 4};
    c.sweep = s;
    const int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const std::vector<SweepRow> rows = sweep(c, threads);
    auto get = [&](const std::string& code, double l) {
        for (const auto& r : rows)
            if (r.code == code && r.lambda0 == l) {
                if (!r.error.empty() || r.runs != 5) throw std::runtime_error(code + ": " + r.error);
                return r.rmse_mean;
            }
        throw std::runtime_error("missing sweep cell");
    };
    const double sl = get("snapshot", 100), bl = get("boxcar", 100), rl = get("flutter", 100);
    const double sh = get("snapshot", 1e6), bh = get("boxcar", 1e6), rh = get("flutter", 1e6);
    const double secs = seconds_since(t0);
    const bool ok = bl < sl && rl < sl && sh < bh && sh < rh && secs < 1800.0;
    return {ok, fmt("RMSE lambda0=100: snapshot %.4f boxcar %.4f flutter %.4f; lambda0=1e6: snapshot %.4f boxcar %.4f "
                    "flutter %.4f; %.0fs",
                    sl, bl, rl, sh, bh, rh, secs)};
}

Outcome short_scan_ordering() {
    const auto t0 = std::chrono::steady_clock::now();
    const int n = 128, N = 1013, M = 40;
    const Geometry g = Geometry::square(n, 1.0 / n);
    PhantomSpec ps;
    ps.n_side = n;
    ps.seed = 1;
    const Array2D x0 = make_phantom(ps);
    const SamplingPlan fast = plan_for_n_theta(52, N, M);
    const SamplingPlan slow = plan_for_n_theta(1, N, M);
    const Projector A(g, fast.micro_angles_rad());
    PriorConfig prior;
    prior.beta = 0.001;

    // Slow scan: one chop per view, same dose per view as the 52-chop boxcar views.
    const ExposureCode one = build_code(CodeKind::snapshot, 1);
    const Projections ys = counts_to_projections(simulate_counts(x0, A, slow, one, 52 * 1e4, 3));
    const Projector Vs(g, slow.nominal_view_angles_rad());
    const double e_slow =
        nrmse(mbir_full(ys.y, Vs, compute_weights(ys.y, default_weight_scale(ys.y)).weights, prior, 100).x, x0);

    const ExposureCode box = build_code(CodeKind::boxcar, 52);
    const Projections yf = counts_to_projections(simulate_counts(x0, A, fast, box, 1e4, 3));
    const Array2D Df = compute_weights(yf.y, default_weight_scale(yf.y)).weights;
    const Projector Vf(g, fast.nominal_view_angles_rad());
    const double e_mbir = nrmse(mbir_full(yf.y, Vf, Df, prior, 100).x, x0);
    IfbpConfig ic;
    ic.fbp.filter = FbpFilter::hamming;
    const double e_ifbp = nrmse(ifbp(yf.y, fast, box, g, ic), x0);
    CodexConfig cc;
    cc.prior = prior;
    cc.outer_iterations = 50;
    const double e_codex = nrmse(codex_reconstruct(yf.y, Df, fast, box, A, cc).x, x0);
    const double secs = seconds_since(t0);
    const bool ok = e_codex < e_ifbp && e_ifbp < e_mbir && e_mbir < e_slow && e_slow > 0.4 && secs < 1800.0;
    return {ok, fmt("NRMSE fast-CodEx %.4f < fast-IFBP %.4f < fast-MBIR %.4f < slow-MBIR %.4f (>0.4); %.0fs", e_codex,
                    e_ifbp, e_mbir, e_slow, secs)};
}

Outcome mtf_directions() {
    const int n = 64;
    const Geometry g = Geometry::square(n, 1.0 / n);
    const SamplingPlan plan = make_sampling_plan(52, 5, 27, 233);
    const Projector A(g, plan.micro_angles_rad());
    auto run = [&](PhantomKind kind, const ExposureCode& code) {
        PhantomSpec ps;
        ps.n_side = n;
        ps.kind = kind;
        ps.spokes = 8;
        const Array2D x0 = make_phantom(ps);
        const Projections pr = counts_to_projections(simulate_counts(x0, A, plan, code, kInf, 1));
        const Array2D D = compute_weights(pr.y, default_weight_scale(pr.y)).weights;
        CodexConfig cc;
        cc.prior.beta = 0.001;
        cc.outer_iterations = 100;
        return mtf_report(codex_reconstruct(pr.y, D, plan, code, A, cc).x, ps);
    };
    const ExposureCode box = build_code(CodeKind::boxcar, 52), flutter = flutter_code(52);
    const MtfReport sb = run(PhantomKind::siemens_star, box), sf = run(PhantomKind::siemens_star, flutter);
    const double tb = sb.get(MtfDirection::tangential, true).at(0.25);
    const double tf = sf.get(MtfDirection::tangential, true).at(0.25);
    const MtfReport cb = run(PhantomKind::concentric_circles, box), cf = run(PhantomKind::concentric_circles, flutter);
    double worst = 0.0;
    for (bool far : {false, true})
        for (double f : {0.05, 0.1, 0.15, 0.2, 0.25}) {
            const double a = cb.get(MtfDirection::radial, far).at(f), b = cf.get(MtfDirection::radial, far).at(f);
            worst = std::max(worst, std::abs(a - b) / std::max(a, b));
        }
    return {tf >= tb && worst <= 0.10,
            fmt("far tangential MTF(0.25): fluttered %.4f boxcar %.4f; radial max relative difference %.3f (<=0.10)",
                tf, tb, worst)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"interlaced sampling parameter rows", sampling_rows},
        {"angle uniqueness and co-primality", number_theory},
        {"operator adjoints and normalization", operators},
        {"deblurring gradient vs finite differences", gradient_check},
        {"tomographic sub-solver vs dense solution", subsolver_oracle},
        {"snapshot code: CodEx equals MBIR", snapshot_equivalence},
        {"boxcar blur inversion vs MBIR", blur_inversion},
        {"ADMM residual decay", admm_convergence},
        {"flux-dependent code ordering", noise_ordering},
        {"short-scan method ordering", short_scan_ordering},
        {"tangential and radial MTF by code", mtf_directions},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::printf("[%s] %zu: %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
