#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "hawkes/linalg.hpp"
#include "hawkes/quadrature.hpp"

namespace hawkes {

// Equidistant-knot scalar B-splines on [0,A], clamped at the boundary,
// each scaled to unit L2 norm. The vector basis for d-dimensional kernels
// places the scalar functions one component at a time:
// psi_{m*J_s + i}(u) = e_m * b_i(u) / ||b_i||.
class SplineBasis {
public:
    SplineBasis(double A, int order, int scalar_count, int d)
        : A_(A), order_(order), scalar_count_(scalar_count), d_(d) {
        if (!(A > 0.0)) throw std::invalid_argument("SplineBasis: A must be positive");
        if (order < 1) throw std::invalid_argument("SplineBasis: order must be >= 1");
        if (d < 1) throw std::invalid_argument("SplineBasis: d must be >= 1");
        if (scalar_count < order)
            throw std::invalid_argument("SplineBasis: need at least `order` basis functions");
        const int spans = scalar_count - order + 1;
        const double dt = A / static_cast<double>(spans);
        knots_.resize(static_cast<std::size_t>(scalar_count + order));
        for (int i = 0; i < scalar_count + order; ++i) {
            const int clampd = std::min(std::max(i - (order - 1), 0), spans);
            knots_[static_cast<std::size_t>(i)] = dt * static_cast<double>(clampd);
        }
        compute_norms();
    }

    double A() const { return A_; }
    int order() const { return order_; }
    int scalar_count() const { return scalar_count_; }
    int d() const { return d_; }
    int size() const { return d_ * scalar_count_; }
    double norm_factor(int i) const { return norm_factors_[static_cast<std::size_t>(i)]; }
    const std::vector<double>& knots() const { return knots_; }

    // component index (0-based) of vector basis function j (0-based)
    int component_of(int j) const { return j / scalar_count_; }
    int scalar_of(int j) const { return j % scalar_count_; }

    struct Band {
        int first = 0;                 // index of first nonzero scalar spline
        std::vector<double> values;    // `order` values, normalized
    };

    // Values of the (at most `order`) scalar splines that are nonzero at u.
    // Returns an empty band outside [0,A].
    Band eval_band(double u) const {
        Band band;
        if (u < 0.0 || u > A_) return band;
        band = eval_band_raw(u);
        for (int r = 0; r < order_; ++r)
            band.values[static_cast<std::size_t>(r)] *=
                norm_factors_[static_cast<std::size_t>(band.first + r)];
        return band;
    }

    // Normalized scalar spline i at u (0 outside its support and outside [0,A]).
    double eval_scalar(int i, double u) const {
        if (i < 0 || i >= scalar_count_) throw std::invalid_argument("eval_scalar: bad index");
        const Band band = eval_band(u);
        if (band.values.empty() || i < band.first || i >= band.first + order_) return 0.0;
        return band.values[static_cast<std::size_t>(i - band.first)];
    }

    // Unnormalized values (partition of unity).
    Band eval_band_raw(double u) const {
        Band band;
        if (u < 0.0 || u > A_) return band;
        const int span = find_span(u);
        band.first = span - (order_ - 1);
        band.values.assign(static_cast<std::size_t>(order_), 0.0);
        band.values[0] = 1.0;
        std::vector<double> left(static_cast<std::size_t>(order_)), right(static_cast<std::size_t>(order_));
        for (int jj = 1; jj < order_; ++jj) {
            left[static_cast<std::size_t>(jj)] = u - knots_[static_cast<std::size_t>(span + 1 - jj)];
            right[static_cast<std::size_t>(jj)] = knots_[static_cast<std::size_t>(span + jj)] - u;
            double saved = 0.0;
            for (int r = 0; r < jj; ++r) {
                const double denom = right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(jj - r)];
                const double temp = band.values[static_cast<std::size_t>(r)] / denom;
                band.values[static_cast<std::size_t>(r)] = saved + right[static_cast<std::size_t>(r + 1)] * temp;
                saved = left[static_cast<std::size_t>(jj - r)] * temp;
            }
            band.values[static_cast<std::size_t>(jj)] = saved;
        }
        return band;
    }

    int span_count() const { return scalar_count_ - order_ + 1; }

    double span_left(int s) const { return knots_[static_cast<std::size_t>(order_ - 1 + s)]; }
    double span_right(int s) const { return knots_[static_cast<std::size_t>(order_ + s)]; }

    // Gram matrix of the vector basis; exact per-span Gauss-Legendre.
    Matrix gram() const {
        const int js = scalar_count_;
        Matrix gs(static_cast<std::size_t>(js), static_cast<std::size_t>(js));
        for (int s = 0; s < span_count(); ++s) {
            const double a = span_left(s), b = span_right(s);
            const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            for (std::size_t q = 0; q < 8; ++q) {
                const double u = mid + half * GaussLegendre8::nodes[q];
                const double w = GaussLegendre8::weights[q] * half;
                const Band band = eval_band(u);
                for (int r = 0; r < order_; ++r)
                    for (int c = 0; c < order_; ++c)
                        gs(static_cast<std::size_t>(band.first + r), static_cast<std::size_t>(band.first + c)) +=
                            w * band.values[static_cast<std::size_t>(r)] * band.values[static_cast<std::size_t>(c)];
            }
        }
        Matrix g(static_cast<std::size_t>(size()), static_cast<std::size_t>(size()));
        for (int m = 0; m < d_; ++m)
            for (int i = 0; i < js; ++i)
                for (int k = 0; k < js; ++k)
                    g(static_cast<std::size_t>(m * js + i), static_cast<std::size_t>(m * js + k)) =
                        gs(static_cast<std::size_t>(i), static_cast<std::size_t>(k));
        return g;
    }

private:
    int find_span(double u) const {
        const int spans = span_count();
        int s = static_cast<int>(u / (A_ / static_cast<double>(spans)));
        if (s >= spans) s = spans - 1;  // u == A
        // guard against rounding at span edges
        while (s > 0 && u < span_left(s)) --s;
        while (s + 1 < spans && u >= span_right(s)) ++s;
        return order_ - 1 + s;
    }

    void compute_norms() {
        norm_factors_.assign(static_cast<std::size_t>(scalar_count_), 0.0);
        std::vector<double> sq(static_cast<std::size_t>(scalar_count_), 0.0);
        for (int s = 0; s < span_count(); ++s) {
            const double a = span_left(s), b = span_right(s);
            const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            for (std::size_t q = 0; q < 8; ++q) {
                const double u = mid + half * GaussLegendre8::nodes[q];
                const double w = GaussLegendre8::weights[q] * half;
                const Band band = eval_band_raw(u);
                for (int r = 0; r < order_; ++r) {
                    const double v = band.values[static_cast<std::size_t>(r)];
                    sq[static_cast<std::size_t>(band.first + r)] += w * v * v;
                }
            }
        }
        for (int i = 0; i < scalar_count_; ++i)
            norm_factors_[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(sq[static_cast<std::size_t>(i)]);
    }

    double A_;
    int order_;
    int scalar_count_;
    int d_;
    std::vector<double> knots_;
    std::vector<double> norm_factors_;
};

}  // namespace hawkes
