#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <hawkes/estimate.hpp>
#include <hawkes/model.hpp>
#include <hawkes/projection.hpp>
#include <hawkes/simulate.hpp>

using namespace hawkes;

namespace {

ModelSpec d2_preset(double T) {
    json params = {{"nu_a", {0.5, 0.5}},
                   {"nu_b", {0.5, 0.3}},
                   {"gamma", {{0.4, 0.2}, {0.2, 0.4}}},
                   {"beta", 2.0}};
    return builtin_family("linear_baseline", params, 2, 1.0, T);
}

ModelSpec pc_preset(double T) {
    return builtin_family("piecewise_const_kernel", {{"nu", 0.5}, {"heights", {0.5, 0.3}}}, 1,
                          1.0, T);
}

// independent evaluation of lambda#(t; theta): direct event sums, no reuse
// of the assembly scratch
double lambda_sharp(const EventStream& ev, const SplineBasis& basis,
                    const std::vector<double>& theta, int K, double t, double t0, double Th,
                    double A) {
    const double z = (t - t0) / Th;
    const int js = basis.scalar_count();
    double val = 0.0, zp = 1.0;
    for (int k = 0; k < K; ++k) {
        val += theta[static_cast<std::size_t>(k)] * zp;
        zp *= z;
    }
    for (const Event& e : ev.events) {
        if (e.t >= t) break;
        if (e.t <= t - A) continue;
        const SplineBasis::Band band = basis.eval_band(t - e.t);
        for (int r = 0; r < static_cast<int>(band.values.size()); ++r) {
            const int j = 1 + e.component * js + band.first + r;
            zp = 1.0;
            for (int k = 0; k < K; ++k) {
                val += theta[static_cast<std::size_t>(j * K + k)] *
                       band.values[static_cast<std::size_t>(r)] * zp;
                zp *= z;
            }
        }
    }
    return val;
}

double rho_criterion(const DesignSystem& sys, const std::vector<double>& theta) {
    const auto dt = mat_vec(sys.delta, theta);
    return -2.0 * dot(sys.tau, theta) + dot(theta, dt);
}

}  // namespace

TEST_CASE("empty window gives the degenerate identity-corner design") {
    EventStream ev;
    ev.d = 1;
    ev.T = 1000.0;
    EstimatorConfig cfg;
    cfg.x0 = 0.5;
    cfg.h = 0.1;
    cfg.A = 1.0;
    cfg.basis_order = 1;
    cfg.basis_scalar_count = 2;
    const SplineBasis basis(cfg.A, cfg.basis_order, cfg.basis_scalar_count, ev.d);
    const DesignSystem sys = assemble_design(ev, cfg, basis);
    CHECK(sys.degenerate);
    CHECK(sys.delta(0, 0) == Catch::Approx(1.0).margin(1e-6));
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b)
            if (a != 0 || b != 0) CHECK(sys.delta(a, b) == 0.0);
    for (double v : sys.tau) CHECK(v == 0.0);
}

TEST_CASE("single-event tau matches the direct formula") {
    EventStream ev;
    ev.d = 1;
    ev.T = 1000.0;
    ev.events = {{520.0, 0}};
    EstimatorConfig cfg;
    cfg.x0 = 0.5;
    cfg.h = 0.1;
    cfg.A = 1.0;
    cfg.basis_order = 1;
    cfg.basis_scalar_count = 2;
    cfg.K_order = 2;
    const SplineBasis basis(cfg.A, 1, 2, 1);
    const DesignSystem sys = assemble_design(ev, cfg, basis);
    const double Th = 100.0, z = (520.0 - 500.0) / Th;
    const double k = 0.75 * (1.0 - z * z);
    CHECK(sys.tau[0] == Catch::Approx(k / Th).epsilon(1e-12));
    CHECK(sys.tau[1] == Catch::Approx(k * z / Th).epsilon(1e-12));
    for (std::size_t j = 2; j < sys.tau.size(); ++j) CHECK(sys.tau[j] == 0.0);
}

TEST_CASE("quadratic form matches a 10x finer quadrature oracle") {
    const ModelSpec model = d2_preset(2000.0);
    EstimatorConfig cfg;
    cfg.x0 = 0.5;
    cfg.h = 0.01;
    cfg.A = 1.0;
    cfg.basis_order = 4;
    cfg.basis_scalar_count = 4;
    cfg.K_order = 2;
    cfg.quad_step = 1.0 / 8192.0;
    const SplineBasis basis(cfg.A, cfg.basis_order, cfg.basis_scalar_count, model.d);
    const std::size_t dim = static_cast<std::size_t>((1 + basis.size()) * cfg.K_order);
    const int K = cfg.K_order, js = basis.scalar_count();
    RngStream theta_rng(99, 0);

    for (int stream = 0; stream < 5; ++stream) {
        const EventStream ev = simulate_cluster(model, 2000.0,
                                                RngStream(55, static_cast<std::uint64_t>(stream)),
                                                default_warmup(model));
        const DesignSystem sys = assemble_design(ev, cfg, basis);

        // exact symmetry and PSD
        for (std::size_t a = 0; a < dim; ++a)
            for (std::size_t b = 0; b < dim; ++b) REQUIRE(sys.delta(a, b) == sys.delta(b, a));
        REQUIRE(sys.min_eigenvalue >= -1e-10 * sys.norm);

        std::vector<std::vector<double>> thetas(10, std::vector<double>(dim));
        for (auto& th : thetas)
            for (double& v : th) v = theta_rng.uniform(-1.0, 1.0);

        // midpoint rule with a 10x finer step; lambda#(t; theta) = theta . f(t)
        const double t0 = cfg.x0 * ev.T, Th = cfg.h * ev.T;
        const double q = sys.quad_step / 10.0;
        const auto n = static_cast<std::size_t>(std::llround(2.0 * Th / q));
        std::vector<double> oracle(thetas.size(), 0.0);
        std::vector<double> f(dim);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = t0 - Th + q * (static_cast<double>(i) + 0.5);
            const double z = (t - t0) / Th;
            const double w = 0.75 * (1.0 - z * z);
            if (w <= 0.0) continue;
            std::fill(f.begin(), f.end(), 0.0);
            double zp = 1.0;
            for (int k = 0; k < K; ++k) {
                f[static_cast<std::size_t>(k)] = zp;
                zp *= z;
            }
            auto lo = std::lower_bound(ev.events.begin(), ev.events.end(), t - cfg.A,
                                       [](const Event& e, double v) { return e.t <= v; });
            for (auto it = lo; it != ev.events.end() && it->t < t; ++it) {
                const SplineBasis::Band band = basis.eval_band(t - it->t);
                for (int r = 0; r < static_cast<int>(band.values.size()); ++r) {
                    const int j = 1 + it->component * js + band.first + r;
                    zp = 1.0;
                    for (int k = 0; k < K; ++k) {
                        f[static_cast<std::size_t>(j * K + k)] +=
                            band.values[static_cast<std::size_t>(r)] * zp;
                        zp *= z;
                    }
                }
            }
            for (std::size_t p = 0; p < thetas.size(); ++p) {
                const double l = dot(thetas[p], f);
                oracle[p] += q * w / Th * l * l;
            }
        }
        for (std::size_t p = 0; p < thetas.size(); ++p) {
            const double qf = dot(thetas[p], mat_vec(sys.delta, thetas[p]));
            REQUIRE(qf == Catch::Approx(oracle[p]).epsilon(1e-4));
        }
    }
}

TEST_CASE("identity design solves trivially") {
    DesignSystem sys;
    sys.delta = Matrix::identity(5);
    sys.tau = {1.0, -2.0, 0.5, 0.0, 3.0};
    sys.K = 1;
    sys.min_eigenvalue = 1.0;
    sys.norm = 1.0;
    const FitResult fit = solve_coefficients(sys);
    CHECK(fit.ridge_used == 0.0);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(fit.theta_hat[i] == Catch::Approx(sys.tau[i]).margin(1e-14));
}

TEST_CASE("solver residual contract and minimizer property") {
    const ModelSpec model = d2_preset(5000.0);
    const EventStream ev =
        simulate_cluster(model, 5000.0, RngStream(8, 0), default_warmup(model));
    EstimatorConfig cfg;
    cfg.x0 = 0.5;
    cfg.h = 0.1;
    cfg.A = 1.0;
    cfg.basis_order = 4;
    cfg.basis_scalar_count = 4;
    const SplineBasis basis(cfg.A, 4, 4, model.d);
    const DesignSystem sys = assemble_design(ev, cfg, basis);
    const FitResult fit = solve_coefficients(sys);
    REQUIRE(fit.ridge_used == 0.0);
    CHECK(fit.solve_residual_rel < 1e-8);

    const double rho_hat = rho_criterion(sys, fit.theta_hat);
    RngStream rng(12, 0);
    for (int p = 0; p < 100; ++p) {
        std::vector<double> probe = fit.theta_hat;
        const double scale = std::pow(10.0, rng.uniform(-3.0, 0.0));
        for (double& v : probe) v += scale * rng.uniform(-1.0, 1.0);
        CHECK(rho_criterion(sys, probe) >= rho_hat - 1e-12 * std::abs(rho_hat));
    }
}

TEST_CASE("events outside the window leave theta bitwise unchanged") {
    const ModelSpec model = d2_preset(2000.0);
    const EventStream ev =
        simulate_cluster(model, 2000.0, RngStream(21, 0), default_warmup(model));
    EstimatorConfig cfg;
    cfg.x0 = 0.5;
    cfg.h = 0.1;
    cfg.A = 1.0;
    cfg.basis_order = 4;
    cfg.basis_scalar_count = 4;
    const FitResult base = fit_local(ev, cfg);

    // inject events strictly outside [t0 - Th - A, t0 + Th]
    EventStream noisy = ev;
    const double t0 = cfg.x0 * ev.T, Th = cfg.h * ev.T;
    std::vector<Event> extra = {{t0 - Th - cfg.A - 3.0, 0},
                                {t0 - Th - cfg.A - 2.5, 1},
                                {t0 + Th + 1.0, 0},
                                {t0 + Th + 7.0, 1}};
    noisy.events.insert(noisy.events.end(), extra.begin(), extra.end());
    std::sort(noisy.events.begin(), noisy.events.end(),
              [](const Event& a, const Event& b) { return a.t < b.t; });
    const FitResult shifted = fit_local(noisy, cfg);
    REQUIRE(shifted.theta_hat.size() == base.theta_hat.size());
    for (std::size_t i = 0; i < base.theta_hat.size(); ++i)
        REQUIRE(shifted.theta_hat[i] == base.theta_hat[i]);
}

TEST_CASE("fit is consistent under affine time rescaling") {
    const ModelSpec model = pc_preset(4000.0);
    const EventStream ev =
        simulate_cluster(model, 4000.0, RngStream(33, 0), default_warmup(model));
    EstimatorConfig cfg;
    cfg.x0 = 0.5;
    cfg.h = 0.1;
    cfg.A = 1.0;
    cfg.basis_order = 1;
    cfg.basis_scalar_count = 2;
    const FitResult fit1 = fit_local(ev, cfg);

    const double c = 2.5;
    EventStream scaled = ev;
    scaled.T = ev.T * c;
    scaled.warmup_start = ev.warmup_start * c;
    for (Event& e : scaled.events) e.t *= c;
    EstimatorConfig cfg2 = cfg;
    cfg2.A = cfg.A * c;
    const FitResult fit2 = fit_local(scaled, cfg2);

    CHECK(fit2.nu_star_hat * c == Catch::Approx(fit1.nu_star_hat).epsilon(1e-9));
    for (double u : {0.1, 0.4, 0.6, 0.9})
        CHECK(fit2.mu_hat(0, c * u) * c == Catch::Approx(fit1.mu_hat(0, u)).margin(1e-9));
}

TEST_CASE("mu_hat vanishes outside [0, A]") {
    const ModelSpec model = pc_preset(2000.0);
    const EventStream ev =
        simulate_cluster(model, 2000.0, RngStream(2, 0), default_warmup(model));
    EstimatorConfig cfg;
    cfg.x0 = 0.5;
    cfg.h = 0.1;
    cfg.A = 1.0;
    cfg.basis_order = 1;
    cfg.basis_scalar_count = 2;
    const FitResult fit = fit_local(ev, cfg);
    CHECK(fit.mu_hat(0, -0.1) == 0.0);
    CHECK(fit.mu_hat(0, 1.1) == 0.0);
}

TEST_CASE("strict boundary mode rejects infeasible windows, truncate renormalizes") {
    EventStream ev;
    ev.d = 1;
    ev.T = 1000.0;
    EstimatorConfig cfg;
    cfg.x0 = 0.05;
    cfg.h = 0.2;
    cfg.A = 1.0;
    cfg.basis_order = 1;
    cfg.basis_scalar_count = 2;
    const SplineBasis basis(cfg.A, 1, 2, 1);
    CHECK_THROWS(assemble_design(ev, cfg, basis));
    cfg.boundary = BoundaryMode::truncate;
    const DesignSystem sys = assemble_design(ev, cfg, basis);
    CHECK(sys.delta(0, 0) == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("local Poisson calibration: nu_hat within 0.1 in >= 90% of runs") {
    const ModelSpec model =
        builtin_family("constant", {{"nu", 1.0}, {"gamma", 0.0}}, 1, 1.0, 20000.0);
    EstimatorConfig cfg;
    cfg.x0 = 0.5;
    cfg.h = 0.2;
    cfg.A = 1.0;
    cfg.basis_order = 1;
    cfg.basis_scalar_count = 2;
    cfg.quad_step = 0.125;
    int hits = 0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
        const EventStream ev =
            simulate_cluster(model, 20000.0, RngStream(81, static_cast<std::uint64_t>(r)), 0.0);
        const FitResult fit = fit_local(ev, cfg);
        if (std::abs(fit.nu_star_hat - 1.0) <= 0.1) ++hits;
    }
    CHECK(hits >= reps * 9 / 10);
}

TEST_CASE("stationary Poisson calibration: nu_hat within 0.05 in >= 90% of runs") {
    const ModelSpec model =
        builtin_family("constant", {{"nu", 0.5}, {"gamma", 0.0}}, 1, 1.0, 10000.0);
    EstimatorConfig cfg;
    cfg.A = 1.0;
    cfg.basis_order = 1;
    cfg.basis_scalar_count = 2;
    cfg.quad_step = 0.125;
    int hits = 0;
    const int reps = 50;
    for (int r = 0; r < reps; ++r) {
        const EventStream ev =
            simulate_cluster(model, 10000.0, RngStream(82, static_cast<std::uint64_t>(r)), 0.0);
        const FitResult fit = fit_stationary(ev, cfg);
        if (std::abs(fit.nu_star_hat - 0.5) <= 0.05) ++hits;
    }
    CHECK(hits >= reps * 9 / 10);
}

TEST_CASE("ise agrees with closed forms and a fine Riemann oracle") {
    const ModelSpec pc = pc_preset(5000.0);
    const SplineBasis basis(1.0, 1, 2, 1);

    // exact representation: project the truth, expect numerically zero ISE
    const ProjectionResult proj = project_truth(pc, basis, 0.5, 0.25, 1);
    FitResult exact;
    exact.theta_hat = proj.theta;
    exact.K = 1;
    exact.nu_star_hat = proj.theta[0];
    exact.basis = basis;
    const IseResult zero = ise(exact, pc, 0.5);
    CHECK(zero.total < 1e-12);
    CHECK(zero.nu_error < 1e-9);

    // zero fit: ISE = int mu^2; smooth kernel for an exact closed form
    const ModelSpec smooth =
        builtin_family("constant", {{"nu", 0.5}, {"gamma", 0.5}, {"beta", 2.0}}, 1, 1.0, 5000.0);
    FitResult null_fit;
    null_fit.theta_hat.assign(3, 0.0);
    null_fit.K = 1;
    null_fit.basis = basis;
    const double norm = 1.0 - std::exp(-2.0);
    const double mass2 = 0.25 * 4.0 / (norm * norm) * (1.0 - std::exp(-4.0)) / 4.0;
    const IseResult full = ise(null_fit, smooth, 0.5);
    CHECK(full.total == Catch::Approx(mass2).epsilon(1e-8));

    // midpoint oracle on a non-trivial smooth fit (cubic projection of the
    // exponential kernel, so the integrand has no jumps)
    const SplineBasis cubic(1.0, 4, 8, 1);
    const ProjectionResult proj4 = project_truth(smooth, cubic, 0.5, 0.25, 1);
    FitResult fit4;
    fit4.theta_hat = proj4.theta;
    fit4.K = 1;
    fit4.nu_star_hat = proj4.theta[0];
    fit4.basis = cubic;
    const IseResult got = ise(fit4, smooth, 0.5);
    const int n = 1000000;
    double riemann = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = (i + 0.5) / static_cast<double>(n);
        const double diff = fit4.mu_hat(0, u) - smooth.kernel(0, 0, u, 0.5);
        riemann += diff * diff;
    }
    riemann /= n;
    CHECK(got.total == Catch::Approx(riemann).margin(1e-8));
}
