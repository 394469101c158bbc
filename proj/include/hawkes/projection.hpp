#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hawkes/linalg.hpp"
#include "hawkes/model.hpp"
#include "hawkes/splines.hpp"

namespace hawkes {

struct ProjectionResult {
    // coefficient layout matches the estimator: index (j,k) -> j*K + (k-1),
    // j = 0 for the baseline polynomial, j = 1..J for the spline part
    std::vector<double> theta;
    int K = 1;
    double eps_T = 0.0;  // sup-norm residual on the projection grid
};

// Least-squares projection of the true baseline and kernel row onto the
// local polynomial x spline space around x0; the sup residual estimates the
// best-approximation error of that space.
inline ProjectionResult project_truth(const ModelSpec& model, const SplineBasis& basis, double x0,
                                      double h, int K_order, int target_l = 0,
                                      int u_grid = 801, int x_grid = 201) {
    if (!(x0 > 0.0 && x0 < 1.0)) throw std::invalid_argument("project_truth: x0 must be in (0,1)");
    if (!(h > 0.0) || h >= std::min(x0, 1.0 - x0))
        throw std::invalid_argument("project_truth: need h < min(x0, 1-x0)");
    if (K_order < 1) throw std::invalid_argument("project_truth: K_order >= 1");
    if (basis.d() != model.d) throw std::invalid_argument("project_truth: basis/model dimension mismatch");

    const int K = K_order;
    const int js = basis.scalar_count();
    const int J = basis.size();
    ProjectionResult out;
    out.K = K;
    out.theta.assign(static_cast<std::size_t>((1 + J) * K), 0.0);

    std::vector<double> xs(static_cast<std::size_t>(x_grid));
    for (int b = 0; b < x_grid; ++b)
        xs[static_cast<std::size_t>(b)] =
            x0 - h + 2.0 * h * static_cast<double>(b) / static_cast<double>(x_grid - 1);

    auto solve_normal = [&](const Matrix& ata, const std::vector<double>& atb) {
        try {
            return cholesky_solve(ata, atb);
        } catch (const std::runtime_error&) {
            const auto eig = symmetric_eigenvalues(ata);
            double lo = eig[0], hi = eig[0];
            for (double e : eig) {
                lo = std::min(lo, e);
                hi = std::max(hi, e);
            }
            throw std::runtime_error(
                "project_truth: singular normal equations, gram condition number " +
                std::to_string(std::abs(hi) / std::max(std::abs(lo), 1e-300)));
        }
    };

    double sup_resid = 0.0;

    // baseline: fit nu^{(target)}(x) by a degree K-1 polynomial in (x - x0)
    {
        Matrix ata(static_cast<std::size_t>(K), static_cast<std::size_t>(K));
        std::vector<double> atb(static_cast<std::size_t>(K), 0.0);
        std::vector<double> mono(static_cast<std::size_t>(K));
        for (double x : xs) {
            mono[0] = 1.0;
            for (int k = 1; k < K; ++k) mono[static_cast<std::size_t>(k)] = mono[static_cast<std::size_t>(k - 1)] * (x - x0);
            const double y = model.baseline(target_l, x);
            for (int a = 0; a < K; ++a) {
                atb[static_cast<std::size_t>(a)] += mono[static_cast<std::size_t>(a)] * y;
                for (int b = 0; b < K; ++b)
                    ata(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) +=
                        mono[static_cast<std::size_t>(a)] * mono[static_cast<std::size_t>(b)];
            }
        }
        const auto coef = solve_normal(ata, atb);
        for (int k = 0; k < K; ++k) out.theta[static_cast<std::size_t>(k)] = coef[static_cast<std::size_t>(k)];
        for (double x : xs) {
            double fit = 0.0, mono_v = 1.0;
            for (int k = 0; k < K; ++k) {
                fit += coef[static_cast<std::size_t>(k)] * mono_v;
                mono_v *= (x - x0);
            }
            sup_resid = std::max(sup_resid, std::abs(model.baseline(target_l, x) - fit));
        }
    }

    // kernel row: per source component m, fit mu^{(target,m)}(u,x) in the
    // tensor space spline(u) x poly(x - x0)
    const int nc = js * K;
    for (int m = 0; m < model.d; ++m) {
        Matrix ata(static_cast<std::size_t>(nc), static_cast<std::size_t>(nc));
        std::vector<double> atb(static_cast<std::size_t>(nc), 0.0);
        std::vector<double> mono(static_cast<std::size_t>(K));
        for (int a = 0; a < u_grid; ++a) {
            const double u = basis.A() * static_cast<double>(a) / static_cast<double>(u_grid - 1);
            const SplineBasis::Band band = basis.eval_band(u);
            if (band.values.empty()) continue;
            for (double x : xs) {
                mono[0] = 1.0;
                for (int k = 1; k < K; ++k) mono[static_cast<std::size_t>(k)] = mono[static_cast<std::size_t>(k - 1)] * (x - x0);
                const double y = model.kernel(target_l, m, u, x);
                // nonzero columns: (band.first + r)*K + k
                for (int r = 0; r < static_cast<int>(band.values.size()); ++r) {
                    const double bv = band.values[static_cast<std::size_t>(r)];
                    for (int k = 0; k < K; ++k) {
                        const int col = (band.first + r) * K + k;
                        const double v = bv * mono[static_cast<std::size_t>(k)];
                        atb[static_cast<std::size_t>(col)] += v * y;
                        for (int r2 = 0; r2 < static_cast<int>(band.values.size()); ++r2) {
                            const double bv2 = band.values[static_cast<std::size_t>(r2)];
                            for (int k2 = 0; k2 < K; ++k2) {
                                const int col2 = (band.first + r2) * K + k2;
                                ata(static_cast<std::size_t>(col), static_cast<std::size_t>(col2)) +=
                                    v * bv2 * mono[static_cast<std::size_t>(k2)];
                            }
                        }
                    }
                }
            }
        }
        const auto coef = solve_normal(ata, atb);
        for (int i = 0; i < js; ++i)
            for (int k = 0; k < K; ++k)
                out.theta[static_cast<std::size_t>((1 + m * js + i) * K + k)] =
                    coef[static_cast<std::size_t>(i * K + k)];
        for (int a = 0; a < u_grid; ++a) {
            const double u = basis.A() * static_cast<double>(a) / static_cast<double>(u_grid - 1);
            const SplineBasis::Band band = basis.eval_band(u);
            for (double x : xs) {
                double fit = 0.0;
                if (!band.values.empty()) {
                    double mono_v = 1.0;
                    std::vector<double> monos(static_cast<std::size_t>(K));
                    for (int k = 0; k < K; ++k) {
                        monos[static_cast<std::size_t>(k)] = mono_v;
                        mono_v *= (x - x0);
                    }
                    for (int r = 0; r < static_cast<int>(band.values.size()); ++r)
                        for (int k = 0; k < K; ++k)
                            fit += coef[static_cast<std::size_t>((band.first + r) * K + k)] *
                                   band.values[static_cast<std::size_t>(r)] * monos[static_cast<std::size_t>(k)];
                }
                sup_resid = std::max(sup_resid, std::abs(model.kernel(target_l, m, u, x) - fit));
            }
        }
    }

    out.eps_T = sup_resid;
    return out;
}

}  // namespace hawkes
