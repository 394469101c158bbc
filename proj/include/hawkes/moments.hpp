#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "hawkes/linalg.hpp"
#include "hawkes/model.hpp"

namespace hawkes {

struct MomentOptions {
    int steps_per_A = 1024;     // lag grid resolution, step = A / steps_per_A
    double s_max_factor = 40.0; // lag cutoff S_max = factor * A
    double tol = 1e-6;
    int max_k = 200;
    int min_k = 1;
};

// Gridded Neumann-series kernel chi and mean intensity Lambda.
// chi columns are stored per x-grid point; models whose kernel does not
// depend on rescaled time share a single column. Samples are jump-averaged
// (half the one-sided value at jump points and support edges), so integrals
// against chi are plain sums ds * sum_i chi[i] * f(s_i).
struct MomentTable {
    int d = 1;
    double T = 1.0;
    double A = 1.0;
    double ds = 0.0;
    double s_max = 0.0;
    std::vector<double> x_grid;
    std::vector<double> s_grid;
    bool x_invariant = true;
    // chi_cols[col][si * d * d + l * d + m]
    std::vector<std::vector<double>> chi_cols;
    std::vector<std::vector<double>> lambda;  // per x-grid point, d entries
    std::vector<double> fp_residual;          // renewal fixed-point residual per x
    int truncation_k = 0;
    double tail_bound = 0.0;

    std::size_t n_s() const { return s_grid.size(); }

    const std::vector<double>& column(std::size_t xi) const {
        return chi_cols[x_invariant ? 0 : xi];
    }

    // chi entry at a grid lag index, interpolated linearly in x
    double chi_grid(int l, int m, std::size_t si, double x) const {
        const std::size_t off = si * static_cast<std::size_t>(d * d) +
                                static_cast<std::size_t>(l * d + m);
        if (x_invariant || x_grid.size() < 2) return chi_cols[0][off];
        const double lo = x_grid.front(), hi = x_grid.back();
        const double xc = std::clamp(x, lo, hi);
        const double pos = (xc - lo) / (hi - lo) * static_cast<double>(x_grid.size() - 1);
        const auto i = std::min(static_cast<std::size_t>(pos), x_grid.size() - 2);
        const double f = pos - static_cast<double>(i);
        return chi_cols[i][off] * (1.0 - f) + chi_cols[i + 1][off] * f;
    }

    // chi(s, x), linear in both arguments; 0 for s < 0 and s > s_max
    double chi(int l, int m, double s, double x) const {
        if (s < 0.0 || s > s_max) return 0.0;
        const double pos = s / ds;
        const auto i = std::min(static_cast<std::size_t>(pos), n_s() - 2);
        const double f = pos - static_cast<double>(i);
        return chi_grid(l, m, i, x) * (1.0 - f) + chi_grid(l, m, i + 1, x) * f;
    }

    double lambda_interp(int l, double x) const {
        if (lambda.empty()) throw std::runtime_error("MomentTable: Lambda not computed");
        if (lambda.size() == 1 || x_grid.size() < 2) return lambda[0][static_cast<std::size_t>(l)];
        const double lo = x_grid.front(), hi = x_grid.back();
        const double xc = std::clamp(x, lo, hi);
        const double pos = (xc - lo) / (hi - lo) * static_cast<double>(x_grid.size() - 1);
        const auto i = std::min(static_cast<std::size_t>(pos), x_grid.size() - 2);
        const double f = pos - static_cast<double>(i);
        return lambda[i][static_cast<std::size_t>(l)] * (1.0 - f) +
               lambda[i + 1][static_cast<std::size_t>(l)] * f;
    }
};

namespace detail {

// Kernel samples for grid convolution, jump-averaged everywhere: half the
// one-sided value at the support edges s = 0 and s = A. With this
// convention a plain sum ds * sum_i f[i] g[i0 - i] telescopes into the
// trapezoid rule on every smooth piece, so no endpoint weights are needed.
inline std::vector<double> shape_samples(const ModelSpec& model, int steps_per_A) {
    const int d = model.d;
    std::vector<double> shape(static_cast<std::size_t>((steps_per_A + 1) * d * d));
    for (int i = 0; i <= steps_per_A; ++i) {
        const double s = model.A * static_cast<double>(i) / steps_per_A;
        const double edge = (i == 0 || i == steps_per_A) ? 0.5 : 1.0;
        for (int l = 0; l < d; ++l)
            for (int m = 0; m < d; ++m)
                shape[static_cast<std::size_t>((i * d + l) * d + m)] =
                    edge * model.kernel_shape_quad(l, m, s);
    }
    return shape;
}

}  // namespace detail

// Accumulates the iterated-convolution series chi = sum_k mu^{(*k)} on a
// uniform lag grid by trapezoid convolutions. The left factor of each
// convolution carries the target rescaled time x, the right factor is
// evaluated at x - b/T per the series recursion.
inline MomentTable compute_chi(const ModelSpec& model, const std::vector<double>& x_grid,
                               const MomentOptions& opts = {}) {
    if (x_grid.empty()) throw std::invalid_argument("compute_chi: empty x grid");
    if (!(opts.tol > 0.0)) throw std::invalid_argument("compute_chi: tol must be positive");
    const double rho = gamma_plus(model).radius;
    if (!(rho < 1.0)) throw std::invalid_argument("compute_chi: spectral radius must be < 1");

    const int d = model.d;
    const int na = opts.steps_per_A;
    const std::size_t dd = static_cast<std::size_t>(d * d);
    MomentTable table;
    table.d = d;
    table.T = model.T;
    table.A = model.A;
    table.ds = model.A / na;
    table.s_max = opts.s_max_factor * model.A;
    table.x_grid = x_grid;
    table.x_invariant = !model.kernel_time_varying();
    const auto n_s = static_cast<std::size_t>(std::llround(table.s_max / table.ds)) + 1;
    table.s_grid.resize(n_s);
    for (std::size_t i = 0; i < n_s; ++i) table.s_grid[i] = table.ds * static_cast<double>(i);

    const std::vector<double> shape = detail::shape_samples(model, na);
    const std::size_t n_cols = table.x_invariant ? 1 : x_grid.size();
    table.chi_cols.assign(n_cols, std::vector<double>(n_s * dd, 0.0));

    int max_trunc = 1;
    double max_tail = 0.0;

    std::vector<double> coefs(n_s * dd);
    for (std::size_t col = 0; col < n_cols; ++col) {
        const double x = x_grid[col];
        auto& chi = table.chi_cols[col];

        // amplitude factors at the lagged rescaled times, fixed for the column
        for (std::size_t j = 0; j < n_s; ++j) {
            const double xr = x - table.s_grid[j] / model.T;
            for (std::size_t e = 0; e < dd; ++e)
                coefs[j * dd + e] =
                    model.kernel_xcoef(static_cast<int>(e) / d, static_cast<int>(e) % d, xr);
        }

        // mu^{(*1)}: kernel at rescaled time x (shape samples are already
        // jump-averaged at the support edge)
        std::vector<double> prev(n_s * dd, 0.0);
        for (int i = 0; i <= na && static_cast<std::size_t>(i) < n_s; ++i)
            for (std::size_t e = 0; e < dd; ++e)
                prev[static_cast<std::size_t>(i) * dd + e] =
                    shape[static_cast<std::size_t>(i) * dd + e] *
                    model.kernel_xcoef(static_cast<int>(e) / d, static_cast<int>(e) % d, x);
        for (std::size_t i = 0; i < prev.size(); ++i) chi[i] += prev[i];

        // track both the sup and the row-sum mass of each term: the tail has
        // to be small in both senses (pointwise chi and integrals against it)
        auto term_size = [&](const std::vector<double>& term, std::size_t support) {
            double sup = 0.0;
            std::vector<double> mass(dd, 0.0);
            for (std::size_t i = 0; i <= support; ++i)
                for (std::size_t e = 0; e < dd; ++e) {
                    sup = std::max(sup, std::abs(term[i * dd + e]));
                    mass[e] += table.ds * term[i * dd + e];
                }
            double row = 0.0;
            for (int l = 0; l < d; ++l) {
                double s = 0.0;
                for (int m = 0; m < d; ++m) s += std::abs(mass[static_cast<std::size_t>(l * d + m)]);
                row = std::max(row, s);
            }
            return std::max(sup, row);
        };

        std::size_t prev_support = std::min<std::size_t>(static_cast<std::size_t>(na), n_s - 1);
        double term_sup = term_size(prev, prev_support);
        int k = 1;
        double tail = term_sup * rho / (1.0 - rho);
        std::vector<double> cur(n_s * dd, 0.0);
        while ((term_sup / (1.0 - rho) >= opts.tol || k < opts.min_k) && term_sup > 0.0) {
            if (k >= opts.max_k) {
                std::ostringstream os;
                os << "compute_chi: tolerance unreachable within " << opts.max_k
                   << " terms, achieved bound " << tail;
                throw std::runtime_error(os.str());
            }
            ++k;
            const std::size_t support = std::min(prev_support + static_cast<std::size_t>(na), n_s - 1);
            std::fill(cur.begin(), cur.end(), 0.0);
            for (std::size_t i = 1; i <= support; ++i) {
                const std::size_t j_lo = i > static_cast<std::size_t>(na) ? i - na : 0;
                const std::size_t j_hi = std::min(i, prev_support);
                if (j_hi <= j_lo) continue;
                double* out = &cur[i * dd];
                for (std::size_t j = j_lo; j <= j_hi; ++j) {
                    const double* coef = &coefs[j * dd];
                    const double* left = &prev[j * dd];
                    const double* sh = &shape[(i - j) * dd];
                    // out += left * (coef .* shape)   (d x d matrix product)
                    for (int a = 0; a < d; ++a)
                        for (int r = 0; r < d; ++r) {
                            const double lv = left[a * d + r];
                            if (lv == 0.0) continue;
                            for (int b = 0; b < d; ++b)
                                out[a * d + b] += lv * coef[static_cast<std::size_t>(r * d + b)] *
                                                  sh[r * d + b];
                        }
                }
                for (std::size_t e = 0; e < dd; ++e) out[e] *= table.ds;
            }
            for (std::size_t i = 0; i <= support; ++i)
                for (std::size_t e = 0; e < dd; ++e) chi[i * dd + e] += cur[i * dd + e];
            term_sup = term_size(cur, support);
            prev.swap(cur);
            prev_support = support;
            tail = term_sup * rho / (1.0 - rho);
        }
        max_trunc = std::max(max_trunc, k);
        max_tail = std::max(max_tail, tail);
    }

    table.truncation_k = max_trunc;
    table.tail_bound = max_tail;
    return table;
}

namespace detail {

// Lambda(x) = nu(x) + int chi(b, x') nu(x - b/T) db with chi taken at
// rescaled time x (series identity). x' controls which chi column is used.
inline std::vector<double> lambda_from_chi(const ModelSpec& model, const MomentTable& table,
                                           double x) {
    const int d = model.d;
    std::vector<double> out(static_cast<std::size_t>(d));
    for (int l = 0; l < d; ++l) out[static_cast<std::size_t>(l)] = model.baseline(l, x);
    // chi holds jump-averaged samples, so a plain sum is the right quadrature
    const std::size_t n = table.n_s();
    for (std::size_t j = 0; j < n; ++j) {
        const double b = table.s_grid[j];
        for (int l = 0; l < d; ++l) {
            double s = 0.0;
            for (int m = 0; m < d; ++m)
                s += table.chi_grid(l, m, j, x) * model.baseline(m, x - b / model.T);
            out[static_cast<std::size_t>(l)] += table.ds * s;
        }
    }
    return out;
}

}  // namespace detail

// Mean intensity via the series identity, cross-checked against the renewal
// fixed point Lambda(x) = nu(x) + int mu(b, x) Lambda(x - b/T) db.
inline MomentTable compute_Lambda(const ModelSpec& model, const std::vector<double>& x_grid,
                                  double tol, MomentOptions opts = {}) {
    opts.tol = tol;
    MomentTable table = compute_chi(model, x_grid, opts);
    table.lambda.resize(x_grid.size());
    table.fp_residual.resize(x_grid.size());

    const bool flat = table.x_invariant && model.is_stationary();
    const int na = opts.steps_per_A;
    for (std::size_t xi = 0; xi < x_grid.size(); ++xi) {
        const double x = x_grid[xi];
        table.lambda[xi] = detail::lambda_from_chi(model, table, x);

        // renewal fixed point: evaluate Lambda at the lag offsets needed by
        // the quadrature over [0, A]
        std::vector<std::vector<double>> lam_off(static_cast<std::size_t>(na) + 1);
        for (int j = 0; j <= na; ++j) {
            const double xb = x - table.ds * j / model.T;
            lam_off[static_cast<std::size_t>(j)] =
                (flat && j > 0) ? lam_off[0] : detail::lambda_from_chi(model, table, xb);
        }
        double resid = 0.0;
        for (int l = 0; l < model.d; ++l) {
            double rhs = model.baseline(l, x);
            for (int j = 0; j <= na; ++j) {
                const double w = (j == 0 || j == na) ? 0.5 : 1.0;
                const double b = table.ds * j;
                for (int m = 0; m < model.d; ++m)
                    rhs += w * table.ds * model.kernel_quad(l, m, b, x) *
                           lam_off[static_cast<std::size_t>(j)][static_cast<std::size_t>(m)];
            }
            resid = std::max(resid,
                             std::abs(rhs - table.lambda[xi][static_cast<std::size_t>(l)]));
        }
        table.fp_residual[xi] = resid;
        if (resid > 10.0 * tol) {
            std::ostringstream os;
            os << "compute_Lambda: renewal fixed-point residual " << resid << " exceeds 10*tol at x="
               << x;
            throw std::runtime_error(os.str());
        }
    }
    return table;
}

struct CovarianceDensity {
    Matrix density;     // smooth part of E[dN_t dN_t'^T] / (dt dt')
    Matrix dirac_coef;  // coefficient of delta(t - t'), nonzero only at t == t'
};

// Second-moment density of the counting process: mean product, the Dirac
// ridge, the two chi cross terms and the chi-Sigma-chi integral.
inline CovarianceDensity covariance_density(const ModelSpec& model, const MomentTable& table,
                                            double t, double t_prime) {
    const int d = model.d;
    if (table.lambda.empty())
        throw std::invalid_argument("covariance_density: table needs Lambda (use compute_Lambda)");
    if (std::abs(t - t_prime) > table.s_max)
        throw std::invalid_argument("covariance_density: lag beyond table coverage");
    const double x = t / model.T, xp = t_prime / model.T;
    CovarianceDensity out;
    out.density = Matrix(static_cast<std::size_t>(d), static_cast<std::size_t>(d));
    out.dirac_coef = Matrix(static_cast<std::size_t>(d), static_cast<std::size_t>(d));

    std::vector<double> lam(static_cast<std::size_t>(d)), lam_p(static_cast<std::size_t>(d));
    for (int l = 0; l < d; ++l) {
        lam[static_cast<std::size_t>(l)] = table.lambda_interp(l, x);
        lam_p[static_cast<std::size_t>(l)] = table.lambda_interp(l, xp);
    }
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            out.density(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) =
                lam[static_cast<std::size_t>(a)] * lam_p[static_cast<std::size_t>(b)];

    if (t == t_prime)
        for (int a = 0; a < d; ++a)
            out.dirac_coef(static_cast<std::size_t>(a), static_cast<std::size_t>(a)) =
                lam[static_cast<std::size_t>(a)];

    // chi(t - t', t/T) Sigma_{t'/T}  and its mirror
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            out.density(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) +=
                table.chi(a, b, t - t_prime, x) * lam_p[static_cast<std::size_t>(b)];
            out.density(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) +=
                lam[static_cast<std::size_t>(a)] * table.chi(b, a, t_prime - t, xp);
        }

    // int chi(t - s, t/T) Sigma_{s/T} chi(t' - s, t'/T)^T ds
    const double s_lo = std::max(t, t_prime) - table.s_max;
    const double s_hi = std::min(t, t_prime);
    if (s_hi > s_lo) {
        const auto n = static_cast<std::size_t>(std::ceil((s_hi - s_lo) / table.ds));
        const double step = (s_hi - s_lo) / static_cast<double>(n);
        for (std::size_t j = 0; j <= n; ++j) {
            const double s = s_lo + step * static_cast<double>(j);
            const double w = (j == 0 || j == n) ? 0.5 : 1.0;
            for (int r = 0; r < d; ++r) {
                const double sig = table.lambda_interp(r, s / model.T);
                if (sig == 0.0) continue;
                for (int a = 0; a < d; ++a) {
                    const double left = table.chi(a, r, t - s, x);
                    if (left == 0.0) continue;
                    for (int b = 0; b < d; ++b)
                        out.density(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) +=
                            w * step * left * sig * table.chi(b, r, t_prime - s, xp);
                }
            }
        }
    }
    return out;
}

}  // namespace hawkes
