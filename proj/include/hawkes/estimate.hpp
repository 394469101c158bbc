#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hawkes/events.hpp"
#include "hawkes/linalg.hpp"
#include "hawkes/model.hpp"
#include "hawkes/quadrature.hpp"
#include "hawkes/splines.hpp"

namespace hawkes {

enum class SmoothingKernel { epanechnikov, triangular, uniform };

inline SmoothingKernel smoothing_kernel_from_string(const std::string& s) {
    if (s == "epanechnikov") return SmoothingKernel::epanechnikov;
    if (s == "triangular") return SmoothingKernel::triangular;
    if (s == "uniform") return SmoothingKernel::uniform;
    throw std::invalid_argument("unknown smoothing kernel: " + s);
}

inline std::string smoothing_kernel_to_string(SmoothingKernel k) {
    switch (k) {
        case SmoothingKernel::epanechnikov: return "epanechnikov";
        case SmoothingKernel::triangular: return "triangular";
        case SmoothingKernel::uniform: return "uniform";
    }
    throw std::logic_error("bad kernel enum");
}

inline double smoothing_kernel_value(SmoothingKernel k, double z) {
    if (z < -1.0 || z > 1.0) return 0.0;
    switch (k) {
        case SmoothingKernel::epanechnikov: return 0.75 * (1.0 - z * z);
        case SmoothingKernel::triangular: return 1.0 - std::abs(z);
        case SmoothingKernel::uniform: return 0.5;
    }
    throw std::logic_error("bad kernel enum");
}

// integral of K over [a,b] (subset of [-1,1]); used to renormalize in
// boundary-truncated windows
inline double smoothing_kernel_mass(SmoothingKernel k, double a, double b) {
    a = std::max(a, -1.0);
    b = std::min(b, 1.0);
    if (b <= a) return 0.0;
    switch (k) {
        case SmoothingKernel::epanechnikov:
            return 0.75 * ((b - b * b * b / 3.0) - (a - a * a * a / 3.0));
        case SmoothingKernel::triangular: {
            auto F = [](double z) { return z < 0.0 ? z + 0.5 * z * z + 0.5 : z - 0.5 * z * z + 0.5; };
            return F(b) - F(a);
        }
        case SmoothingKernel::uniform: return 0.5 * (b - a);
    }
    throw std::logic_error("bad kernel enum");
}

enum class BoundaryMode { strict, truncate };

struct EstimatorConfig {
    int target_l = 0;  // estimated intensity row, 0-based
    double x0 = 0.5;
    double h = 0.1;
    double A = 1.0;             // kernel support length
    int basis_order = 4;        // 1 = piecewise constant, 4 = cubic
    int basis_scalar_count = 8;
    int K_order = 1;
    SmoothingKernel kernel = SmoothingKernel::epanechnikov;
    double quad_step = 0.0;  // 0: min(Th, A) / (16 * J_s)
    double ridge = 0.0;
    BoundaryMode boundary = BoundaryMode::strict;

    json to_json() const {
        return json{{"target_l", target_l},
                    {"x0", x0},
                    {"h", h},
                    {"A", A},
                    {"basis_order", basis_order},
                    {"basis_scalar_count", basis_scalar_count},
                    {"K_order", K_order},
                    {"kernel", smoothing_kernel_to_string(kernel)},
                    {"quad_step", quad_step},
                    {"ridge", ridge},
                    {"boundary", boundary == BoundaryMode::strict ? "strict" : "truncate"}};
    }

    static EstimatorConfig from_json(const json& j) {
        EstimatorConfig c;
        c.target_l = j.at("target_l").get<int>();
        c.x0 = j.at("x0").get<double>();
        c.h = j.at("h").get<double>();
        c.A = j.at("A").get<double>();
        c.basis_order = j.at("basis_order").get<int>();
        c.basis_scalar_count = j.at("basis_scalar_count").get<int>();
        c.K_order = j.at("K_order").get<int>();
        c.kernel = smoothing_kernel_from_string(j.at("kernel").get<std::string>());
        c.quad_step = j.at("quad_step").get<double>();
        c.ridge = j.at("ridge").get<double>();
        c.boundary = j.at("boundary").get<std::string>() == "truncate" ? BoundaryMode::truncate
                                                                       : BoundaryMode::strict;
        return c;
    }
};

struct DesignSystem {
    Matrix delta;
    std::vector<double> tau;
    int K = 1;
    int d = 1;
    double t0 = 0.0;
    double Th = 0.0;
    double quad_step = 0.0;
    std::size_t events_in_window = 0;
    bool degenerate = false;
    double min_eigenvalue = 0.0;
    double norm = 0.0;  // spectral norm of Delta
    double condition_number = 0.0;
};

struct FitResult {
    std::vector<double> theta_hat;
    double nu_star_hat = 0.0;
    std::optional<SplineBasis> basis;
    int K = 1;
    int target_l = 0;
    double x0 = 0.0;
    double ridge_used = 0.0;
    double min_eigenvalue = 0.0;
    double condition_number = 0.0;
    double solve_residual_rel = 0.0;

    double theta(int j, int k) const { return theta_hat[static_cast<std::size_t>(j * K + k - 1)]; }

    // reconstructed kernel row component m (0-based) at lag u
    double mu_hat(int m, double u) const {
        if (!basis) throw std::runtime_error("FitResult: no basis attached");
        if (u < 0.0 || u > basis->A()) return 0.0;
        const SplineBasis::Band band = basis->eval_band(u);
        if (band.values.empty()) return 0.0;
        const int js = basis->scalar_count();
        double v = 0.0;
        for (int r = 0; r < static_cast<int>(band.values.size()); ++r)
            v += theta(1 + m * js + band.first + r, 1) * band.values[static_cast<std::size_t>(r)];
        return v;
    }

    std::vector<double> mu_star_coefficients() const {
        std::vector<double> c;
        const int J = basis ? basis->size() : 0;
        for (int j = 1; j <= J; ++j) c.push_back(theta(j, 1));
        return c;
    }
};

// Localized least-squares design: Delta by midpoint quadrature in t with
// exact event sums inside, tau-hat by exact sums over target events.
inline DesignSystem assemble_design(const EventStream& events, const EstimatorConfig& cfg,
                                    const SplineBasis& basis) {
    if (cfg.target_l < 0 || cfg.target_l >= events.d)
        throw std::invalid_argument("assemble_design: target component out of range");
    if (basis.d() != events.d) throw std::invalid_argument("assemble_design: basis dimension mismatch");
    if (cfg.K_order < 1) throw std::invalid_argument("assemble_design: K_order must be >= 1");
    const double T = events.T;
    const double t0 = cfg.x0 * T;
    const double Th = cfg.h * T;
    double win_lo = t0 - Th, win_hi = t0 + Th;
    double kernel_norm = 1.0;
    if (win_lo < 0.0 || win_hi > T) {
        if (cfg.boundary == BoundaryMode::strict) {
            std::ostringstream os;
            os << "assemble_design: window [" << win_lo << ", " << win_hi
               << "] exceeds [0, " << T << "]; need h < min(x0, 1-x0) or boundary truncation";
            throw std::invalid_argument(os.str());
        }
        win_lo = std::max(win_lo, 0.0);
        win_hi = std::min(win_hi, T);
        kernel_norm = smoothing_kernel_mass(cfg.kernel, (win_lo - t0) / Th, (win_hi - t0) / Th);
        if (!(kernel_norm > 0.0))
            throw std::invalid_argument("assemble_design: truncated window has no kernel mass");
    }

    const int K = cfg.K_order;
    const int J = basis.size();
    const int js = basis.scalar_count();
    const std::size_t dim = static_cast<std::size_t>((1 + J) * K);

    DesignSystem sys;
    sys.delta = Matrix(dim, dim);
    sys.tau.assign(dim, 0.0);
    sys.K = K;
    sys.d = events.d;
    sys.t0 = t0;
    sys.Th = Th;

    const double q0 = cfg.quad_step > 0.0
                          ? cfg.quad_step
                          : std::min(Th, cfg.A) / (16.0 * static_cast<double>(js));
    const auto n_nodes = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((win_hi - win_lo) / q0)));
    const double q = (win_hi - win_lo) / static_cast<double>(n_nodes);
    sys.quad_step = q;

    const auto& ev = events.events;
    auto first_after = [&](double t) {
        return static_cast<std::size_t>(
            std::lower_bound(ev.begin(), ev.end(), t,
                             [](const Event& e, double v) { return e.t <= v; }) -
            ev.begin());
    };

    // scratch: sparse inner-sum vector over spline indices
    std::vector<double> s_val(static_cast<std::size_t>(1 + J), 0.0);
    std::vector<int> s_idx;
    std::vector<double> z_pow(static_cast<std::size_t>(K));
    std::vector<double> v(dim);
    std::vector<std::size_t> v_idx;

    auto inner_sums = [&](double t) {
        for (int j : s_idx) s_val[static_cast<std::size_t>(j)] = 0.0;
        s_idx.clear();
        s_idx.push_back(0);
        s_val[0] = 1.0;
        std::size_t lo = first_after(t - cfg.A);
        for (std::size_t i = lo; i < ev.size() && ev[i].t < t; ++i) {
            const SplineBasis::Band band = basis.eval_band(t - ev[i].t);
            if (band.values.empty()) continue;
            for (int r = 0; r < static_cast<int>(band.values.size()); ++r) {
                const int j = 1 + ev[i].component * js + band.first + r;
                if (s_val[static_cast<std::size_t>(j)] == 0.0) s_idx.push_back(j);
                s_val[static_cast<std::size_t>(j)] += band.values[static_cast<std::size_t>(r)];
            }
        }
    };

    // Delta: midpoint rule over the window
    for (std::size_t n = 0; n < n_nodes; ++n) {
        const double t = win_lo + q * (static_cast<double>(n) + 0.5);
        const double z = (t - t0) / Th;
        const double w = smoothing_kernel_value(cfg.kernel, z) / kernel_norm;
        if (w == 0.0) continue;
        inner_sums(t);
        z_pow[0] = 1.0;
        for (int k = 1; k < K; ++k) z_pow[static_cast<std::size_t>(k)] = z_pow[static_cast<std::size_t>(k - 1)] * z;
        v_idx.clear();
        for (int j : s_idx)
            for (int k = 0; k < K; ++k) {
                const auto row = static_cast<std::size_t>(j * K + k);
                v[row] = s_val[static_cast<std::size_t>(j)] * z_pow[static_cast<std::size_t>(k)];
                v_idx.push_back(row);
            }
        const double scale = q * w / Th;
        for (std::size_t a : v_idx)
            for (std::size_t b : v_idx) {
                if (b < a) continue;
                const double inc = scale * v[a] * v[b];
                sys.delta(a, b) += inc;
                if (a != b) sys.delta(b, a) = sys.delta(a, b);
            }
    }

    // tau-hat: exact sums over target-component events in the window
    const auto win_begin = static_cast<std::size_t>(
        std::lower_bound(ev.begin(), ev.end(), win_lo,
                         [](const Event& e, double v) { return e.t < v; }) -
        ev.begin());
    std::size_t total_in_window = 0;
    for (std::size_t i = win_begin; i < ev.size() && ev[i].t <= win_hi; ++i) {
        ++total_in_window;
        if (ev[i].component != cfg.target_l) continue;
        const double te = ev[i].t;
        const double z = (te - t0) / Th;
        const double w = smoothing_kernel_value(cfg.kernel, z) / kernel_norm;
        if (w == 0.0) continue;
        inner_sums(te);
        z_pow[0] = 1.0;
        for (int k = 1; k < K; ++k) z_pow[static_cast<std::size_t>(k)] = z_pow[static_cast<std::size_t>(k - 1)] * z;
        for (int j : s_idx)
            for (int k = 0; k < K; ++k)
                sys.tau[static_cast<std::size_t>(j * K + k)] +=
                    (w / Th) * s_val[static_cast<std::size_t>(j)] * z_pow[static_cast<std::size_t>(k)];
    }
    sys.events_in_window = total_in_window;
    sys.degenerate = total_in_window == 0;

    const auto eig = symmetric_eigenvalues(sys.delta);
    double lo_e = eig[0], hi_e = 0.0;
    for (double e : eig) {
        lo_e = std::min(lo_e, e);
        hi_e = std::max(hi_e, std::abs(e));
    }
    sys.min_eigenvalue = lo_e;
    sys.norm = hi_e;
    sys.condition_number = hi_e / std::max(std::abs(lo_e), 1e-300);
    return sys;
}

// theta-hat = Delta^{-1} tau-hat via Cholesky, with a fixed ridge escalation
// ladder when Delta is numerically singular.
inline FitResult solve_coefficients(const DesignSystem& sys, double ridge = 0.0) {
    const std::size_t dim = sys.tau.size();
    double trace = 0.0;
    for (std::size_t i = 0; i < dim; ++i) trace += sys.delta(i, i);
    std::vector<double> ladder = {ridge};
    for (double c : {1e-10, 1e-8, 1e-6})
        ladder.push_back(std::max(ridge, c * trace / static_cast<double>(dim)));

    const double eig_floor = 1e-10 * sys.norm;
    std::string last_error;
    for (double r : ladder) {
        if (sys.min_eigenvalue + r < eig_floor) continue;
        Matrix a = sys.delta;
        for (std::size_t i = 0; i < dim; ++i) a(i, i) += r;
        std::vector<double> theta;
        try {
            theta = cholesky_solve(a, sys.tau);
        } catch (const std::runtime_error& e) {
            last_error = e.what();
            continue;
        }
        const auto resid = mat_vec(a, theta);
        double rn = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            const double diff = resid[i] - sys.tau[i];
            rn += diff * diff;
        }
        const double tau_norm = norm2(sys.tau);
        const double rel = tau_norm > 0.0 ? std::sqrt(rn) / tau_norm : std::sqrt(rn);
        if (rel > 1e-8) {
            last_error = "solve residual " + std::to_string(rel);
            continue;
        }
        FitResult fit;
        fit.theta_hat = std::move(theta);
        fit.K = sys.K;
        fit.nu_star_hat = fit.theta_hat[0];
        fit.ridge_used = r;
        fit.min_eigenvalue = sys.min_eigenvalue + r;
        fit.condition_number = (sys.norm + r) / std::max(sys.min_eigenvalue + r, 1e-300);
        fit.solve_residual_rel = rel;
        return fit;
    }
    std::ostringstream os;
    os << "solve_coefficients: design singular after ridge escalation (min eigenvalue "
       << sys.min_eigenvalue << ", norm " << sys.norm << ")";
    if (!last_error.empty()) os << "; " << last_error;
    throw std::runtime_error(os.str());
}

inline FitResult fit_local(const EventStream& events, const EstimatorConfig& cfg) {
    SplineBasis basis(cfg.A, cfg.basis_order, cfg.basis_scalar_count, events.d);
    const DesignSystem sys = assemble_design(events, cfg, basis);
    FitResult fit = solve_coefficients(sys, cfg.ridge);
    fit.basis = std::move(basis);
    fit.target_l = cfg.target_l;
    fit.x0 = cfg.x0;
    return fit;
}

// Stationary estimator: the same quadratic criterion with uniform weight
// over [A, T] and no localization (K_order = 1).
inline FitResult fit_stationary(const EventStream& events, EstimatorConfig cfg) {
    if (events.T <= cfg.A) throw std::invalid_argument("fit_stationary: T must exceed A");
    cfg.K_order = 1;
    cfg.kernel = SmoothingKernel::uniform;
    cfg.x0 = 0.5 * (events.T + cfg.A) / events.T;
    cfg.h = 0.5 * (events.T - cfg.A) / events.T;
    cfg.boundary = BoundaryMode::strict;
    return fit_local(events, cfg);
}

struct IseResult {
    std::vector<double> per_component;  // L2 errors squared, integrated over [0,A]
    double total = 0.0;
    double nu_error = 0.0;
};

// Integrated squared error of the reconstructed kernel row against the
// truth at x0; Simpson with 4096 panels.
inline IseResult ise(const FitResult& fit, const ModelSpec& truth, double x0) {
    IseResult out;
    out.nu_error = std::abs(fit.nu_star_hat - truth.baseline(fit.target_l, x0));
    for (int m = 0; m < truth.d; ++m) {
        auto f = [&](double u) {
            const double diff = fit.mu_hat(m, u) - truth.kernel(fit.target_l, m, u, x0);
            return diff * diff;
        };
        const double v = simpson(f, 0.0, truth.A, 4096);
        out.per_component.push_back(v);
        out.total += v;
    }
    return out;
}

inline json fit_to_json(const FitResult& fit, const EstimatorConfig& cfg) {
    return json{{"config", cfg.to_json()},
                {"theta_hat", fit.theta_hat},
                {"nu_star_hat", fit.nu_star_hat},
                {"mu_star_coefficients", fit.mu_star_coefficients()},
                {"diagnostics",
                 {{"min_eigenvalue", fit.min_eigenvalue},
                  {"condition_number", fit.condition_number},
                  {"ridge_used", fit.ridge_used},
                  {"solve_residual_rel", fit.solve_residual_rel}}}};
}

}  // namespace hawkes
