// End-to-end acceptance checks. Each check prints one PASS/FAIL line; the
// binary exits nonzero if any check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <hawkes/cli.hpp>
#include <hawkes/harness.hpp>
#include <hawkes/projection.hpp>

using namespace hawkes;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& what) {
    std::printf("criterion %d: %s — %s\n", id, pass ? "PASS" : "FAIL", what.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

template <typename F>
void run_check(int id, const std::string& name, F f) {
    try {
        f();
    } catch (const std::exception& e) {
        report(id, false, name + " (exception: " + e.what() + ")");
    }
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// d = 2, linearly drifting baseline, x-invariant exponential kernel,
// spectral radius 0.6
ModelSpec d2_preset(double T) {
    json params = {{"nu_a", {0.5, 0.8}},
                   {"nu_b", {0.5, 0.2}},
                   {"gamma", {{0.4, 0.2}, {0.2, 0.4}}},
                   {"beta", 2.0}};
    return builtin_family("linear_baseline", params, 2, 1.0, T);
}

ModelSpec d2_stationary(double T) {
    json params = {{"nu", {0.5, 0.8}}, {"gamma", {{0.4, 0.2}, {0.2, 0.4}}}, {"beta", 2.0}};
    return builtin_family("constant", params, 2, 1.0, T);
}

// d = 1 stationary model with a two-piece constant kernel: exactly
// representable by order-1 splines with two basis functions
ModelSpec pc_preset(double T) {
    return builtin_family("piecewise_const_kernel", {{"nu", 0.5}, {"heights", {0.5, 0.3}}}, 1, 1.0,
                          T);
}

// d = 1, both baseline and kernel amplitude drift with rescaled time
ModelSpec tv_preset(double T) {
    return builtin_family(
        "exp_kernel_tv_amplitude",
        {{"nu_a", 1.0}, {"nu_b", 0.5}, {"alpha0", 0.3}, {"alpha1", 0.3}, {"beta", 2.0}}, 1, 1.0,
        T);
}

double quadratic_form(const Matrix& m, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t a = 0; a < v.size(); ++a)
        for (std::size_t b = 0; b < v.size(); ++b) s += v[a] * m(a, b) * v[b];
    return s;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void check_cross_engine() {
    const auto t0 = std::chrono::steady_clock::now();
    const CheckResult res = cross_engine_check(d2_preset(2000.0), 2000.0, 400, 10, 101);
    const double dt = elapsed_s(t0);
    report(1, res.pass && dt < 300.0,
           "cluster vs thinning window counts agree (pass fraction " + fmt(res.pass_fraction) +
               ", max |z| " + fmt(res.max_abs_z) + ", " + fmt(dt) + " s)");
}

void check_mean_intensity() {
    MomentOptions mopts;
    mopts.steps_per_A = 256;
    const CheckResult res =
        lambda_check(d2_preset(2000.0), 2000.0, 400, 20, 102, 1.0, 1, 1e-4, mopts);

    // stationary closed form Lambda = (I - Gamma)^{-1} nu
    const MomentTable table = compute_Lambda(d2_stationary(2000.0), {0.0, 1.0}, 1e-6);
    const double l0 = (0.6 * 0.5 + 0.2 * 0.8) / 0.32;
    const double l1 = (0.2 * 0.5 + 0.6 * 0.8) / 0.32;
    double closed_err = 0.0;
    for (const auto& lam : table.lambda) {
        closed_err = std::max(closed_err, std::abs(lam[0] - l0));
        closed_err = std::max(closed_err, std::abs(lam[1] - l1));
    }
    report(2, res.pass && closed_err < 1e-5,
           "binned mean intensity matches the moment oracle (max |z| " + fmt(res.max_abs_z) +
               "), stationary closed form to " + fmt(closed_err));
}

void check_renewal_fixed_point() {
    // compute_Lambda throws if the residual exceeds 10 * tol
    double worst = 0.0;
    auto track = [&](const MomentTable& t, double tol) {
        for (double r : t.fp_residual) worst = std::max(worst, r / tol);
    };
    const ModelSpec c1 =
        builtin_family("constant", {{"nu", 0.5}, {"gamma", 0.5}, {"beta", 2.0}}, 1, 1.0, 2000.0);
    track(compute_Lambda(c1, {0.0, 1.0}, 1e-6), 1e-6);
    track(compute_Lambda(pc_preset(2000.0), {0.0, 1.0}, 1e-6), 1e-6);
    track(compute_Lambda(d2_stationary(2000.0), {0.0, 1.0}, 1e-6), 1e-6);
    MomentOptions coarse;
    coarse.steps_per_A = 256;
    const std::vector<double> xg = {0.0, 0.25, 0.5, 0.75, 1.0};
    track(compute_Lambda(d2_preset(2000.0), xg, 1e-4, coarse), 1e-4);
    track(compute_Lambda(tv_preset(5000.0), xg, 1e-4, coarse), 1e-4);
    report(3, worst < 10.0,
           "renewal fixed point holds on every preset (worst residual / tol " + fmt(worst) + ")");
}

void check_quadratic_form() {
    const ModelSpec model = d2_preset(2000.0);
    EstimatorConfig cfg;
    cfg.x0 = 0.5;
    cfg.h = 0.01;
    cfg.A = model.A;
    cfg.basis_order = 4;
    cfg.basis_scalar_count = 4;
    cfg.K_order = 2;
    cfg.quad_step = 1.0 / 8192.0;
    const SplineBasis basis(cfg.A, cfg.basis_order, cfg.basis_scalar_count, model.d);

    double max_rel = 0.0, min_eig_ratio = 0.0;
    bool symmetric = true;
    RngStream theta_rng(77, 0);
    for (int stream = 0; stream < 5; ++stream) {
        RngStream rng(103, static_cast<std::uint64_t>(stream));
        const EventStream ev = simulate_cluster(model, model.T, rng, default_warmup(model));
        const DesignSystem sys = assemble_design(ev, cfg, basis);
        EstimatorConfig fine = cfg;
        fine.quad_step = cfg.quad_step / 10.0;
        const DesignSystem oracle = assemble_design(ev, fine, basis);
        for (std::size_t a = 0; a < sys.tau.size(); ++a)
            for (std::size_t b = 0; b < a; ++b)
                if (sys.delta(a, b) != sys.delta(b, a)) symmetric = false;
        min_eig_ratio = std::min(min_eig_ratio, sys.min_eigenvalue / sys.norm);
        for (int t = 0; t < 10; ++t) {
            std::vector<double> theta(sys.tau.size());
            for (double& v : theta) v = theta_rng.uniform(-1.0, 1.0);
            const double q = quadratic_form(sys.delta, theta);
            const double q_fine = quadratic_form(oracle.delta, theta);
            max_rel = std::max(max_rel, std::abs(q - q_fine) / std::max(std::abs(q_fine), 1e-300));
        }
    }
    report(4, max_rel <= 1e-4 && symmetric && min_eig_ratio >= -1e-10,
           "design quadratic form matches a 10x finer quadrature (max rel err " + fmt(max_rel) +
               "), exactly symmetric, min eigenvalue ratio " + fmt(min_eig_ratio));
}

void check_stationary_rates() {
    const auto t0 = std::chrono::steady_clock::now();
    const SplineBasis basis(1.0, 1, 2, 1);
    const double eps = project_truth(pc_preset(5000.0), basis, 0.5, 0.2, 1).eps_T;

    std::vector<double> medians;
    for (double T : {5000.0, 20000.0}) {
        const ModelSpec model = pc_preset(T);
        std::vector<double> ises;
        for (int r = 0; r < 100; ++r) {
            RngStream rng(105, static_cast<std::uint64_t>(r));
            const EventStream ev = simulate_cluster(model, T, rng, default_warmup(model));
            EstimatorConfig cfg;
            cfg.A = model.A;
            cfg.basis_order = 1;
            cfg.basis_scalar_count = 2;
            const FitResult fit = fit_stationary(ev, cfg);
            ises.push_back(ise(fit, model, 0.5).total);
        }
        medians.push_back(median_of(ises));
    }
    const double ratio = medians[1] / medians[0];
    const double dt = elapsed_s(t0);
    report(5, eps < 1e-10 && ratio >= 0.125 && ratio <= 0.5 && dt < 900.0,
           "stationary fit: representable truth (eps " + fmt(eps) +
               "), median ISE ratio T=20000/5000 = " + fmt(ratio) + " in [1/8, 1/2] (" + fmt(dt) +
               " s)");
}

void check_time_varying_rates() {
    std::vector<double> med_ise, med_nu;
    for (double T : {5000.0, 20000.0}) {
        const ModelSpec model = tv_preset(T);
        const double h = 0.5 * std::pow(T, -0.2);
        std::vector<double> ises, nus;
        for (int r = 0; r < 100; ++r) {
            RngStream rng(106, static_cast<std::uint64_t>(r));
            const EventStream ev = simulate_cluster(model, T, rng, default_warmup(model));
            EstimatorConfig cfg;
            cfg.x0 = 0.5;
            cfg.h = h;
            cfg.A = model.A;
            const FitResult fit = fit_local(ev, cfg);
            const IseResult err = ise(fit, model, 0.5);
            ises.push_back(err.total);
            nus.push_back(err.nu_error);
        }
        med_ise.push_back(median_of(ises));
        med_nu.push_back(median_of(nus));
    }
    report(6, med_ise[1] < med_ise[0] && med_nu[1] < med_nu[0],
           "localized fit improves with horizon: median ISE " + fmt(med_ise[0]) + " -> " +
               fmt(med_ise[1]) + ", median baseline error " + fmt(med_nu[0]) + " -> " +
               fmt(med_nu[1]));
}

void check_localization() {
    const ModelSpec model = d2_preset(2000.0);
    RngStream rng(107, 0);
    EventStream ev = simulate_cluster(model, model.T, rng, default_warmup(model));
    EstimatorConfig cfg;
    cfg.x0 = 0.5;
    cfg.h = 0.1;
    cfg.A = model.A;
    const FitResult base = fit_local(ev, cfg);

    // events strictly outside [t0 - Th - A, t0 + Th] must not move theta-hat
    EventStream padded = ev;
    for (double t : {50.0, 120.0, 1800.0, 1950.0})
        padded.events.push_back({t, 1});
    std::sort(padded.events.begin(), padded.events.end(),
              [](const Event& a, const Event& b) { return a.t < b.t; });
    const FitResult moved = fit_local(padded, cfg);
    report(7, base.theta_hat == moved.theta_hat,
           "estimate is bit-identical under changes outside the localization window");
}

void check_covariance() {
    const CheckResult res =
        covariance_check(pc_preset(5000.0), 5000.0, 200, {0.0, 0.5, 1.0}, 0.5, 108);
    report(8, res.pass,
           "stationary bin-count covariance matches the moment oracle (max |z| " +
               fmt(res.max_abs_z) + ")");
}

void check_cli_determinism() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "hawkes_acceptance_cli";
    fs::create_directories(dir);
    const fs::path model_path = dir / "model.json";
    pc_preset(500.0).save(model_path.string());

    auto run = [&](std::vector<std::string> args) {
        std::ostringstream out, err;
        const int code = run_cli(std::move(args), out, err);
        if (code != 0) throw std::runtime_error("cli exited " + std::to_string(code) + ": " + err.str());
    };
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };

    bool same = true;
    const fs::path ev1 = dir / "ev1.csv", ev2 = dir / "ev2.csv";
    for (const auto& p : {ev1, ev2})
        run({"simulate", "--model", model_path.string(), "--T", "500", "--seed", "9", "--out",
             p.string()});
    same = same && slurp(ev1) == slurp(ev2);

    const fs::path fit1 = dir / "fit1.json", fit2 = dir / "fit2.json";
    for (const auto& p : {fit1, fit2})
        run({"estimate", "--events", ev1.string(), "--A", "1", "--stationary", "--J", "2",
             "--order", "1", "--out", p.string()});
    same = same && slurp(fit1) == slurp(fit2);

    const fs::path mo1 = dir / "mo1.csv", mo2 = dir / "mo2.csv";
    for (const auto& p : {mo1, mo2})
        run({"moments", "--model", model_path.string(), "--out", p.string()});
    same = same && slurp(mo1) == slurp(mo2);

    fs::remove_all(dir);
    report(9, same, "simulate / estimate / moments artifacts are bit-identical across reruns");
}

}  // namespace

int main() {
    run_check(1, "cross-engine agreement", check_cross_engine);
    run_check(2, "mean intensity vs oracle", check_mean_intensity);
    run_check(3, "renewal fixed point", check_renewal_fixed_point);
    run_check(4, "design quadratic form", check_quadratic_form);
    run_check(5, "stationary convergence rate", check_stationary_rates);
    run_check(6, "time-varying convergence", check_time_varying_rates);
    run_check(7, "localization", check_localization);
    run_check(8, "bin-count covariance", check_covariance);
    run_check(9, "CLI determinism", check_cli_determinism);
    std::printf("%s\n", failures == 0 ? "all acceptance checks passed"
                                      : "acceptance checks FAILED");
    return failures == 0 ? 0 : 1;
}
