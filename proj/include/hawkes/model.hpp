#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hawkes/linalg.hpp"
#include "hawkes/quadrature.hpp"

namespace hawkes {

using json = nlohmann::json;

enum class Family {
    constant,
    linear_baseline,
    sine_baseline,
    exp_kernel_tv_amplitude,
    piecewise_const_kernel,
};

inline Family family_from_string(const std::string& name) {
    if (name == "constant") return Family::constant;
    if (name == "linear_baseline") return Family::linear_baseline;
    if (name == "sine_baseline") return Family::sine_baseline;
    if (name == "exp_kernel_tv_amplitude") return Family::exp_kernel_tv_amplitude;
    if (name == "piecewise_const_kernel") return Family::piecewise_const_kernel;
    throw std::invalid_argument("unknown model family: " + name);
}

inline std::string family_to_string(Family f) {
    switch (f) {
        case Family::constant: return "constant";
        case Family::linear_baseline: return "linear_baseline";
        case Family::sine_baseline: return "sine_baseline";
        case Family::exp_kernel_tv_amplitude: return "exp_kernel_tv_amplitude";
        case Family::piecewise_const_kernel: return "piecewise_const_kernel";
    }
    throw std::logic_error("bad family enum");
}

struct GammaMatrix {
    Matrix entries;
    double radius = 0.0;
};

// Time-rescaled Hawkes model with closed-form parameter families.
// Baseline nu and kernel mu take rescaled time x = t/T; both are extended
// constantly outside [0,1] (frozen at the endpoint values).
class ModelSpec {
public:
    int d = 1;
    double A = 1.0;
    double T = 1.0;

    ModelSpec() = default;

    std::string family_tag() const { return family_to_string(family_); }
    const json& params() const { return params_; }
    Family family() const { return family_; }

    double baseline(int l, double x) const {
        const double xc = clamp_x(x);
        switch (family_) {
            case Family::constant:
            case Family::piecewise_const_kernel:
                return nu_a_[l];
            case Family::linear_baseline:
            case Family::exp_kernel_tv_amplitude:
                return nu_a_[l] + nu_b_[l] * xc;
            case Family::sine_baseline:
                return nu_a_[l] + nu_b_[l] * std::sin(2.0 * pi() * sine_freq_ * xc);
        }
        throw std::logic_error("bad family enum");
    }

    double baseline_sup(int l) const {
        switch (family_) {
            case Family::constant:
            case Family::piecewise_const_kernel:
                return nu_a_[l];
            case Family::linear_baseline:
            case Family::exp_kernel_tv_amplitude:
                return nu_a_[l] + std::max(0.0, nu_b_[l]);
            case Family::sine_baseline:
                return nu_a_[l] + std::abs(nu_b_[l]);
        }
        throw std::logic_error("bad family enum");
    }

    // Excitation of component l by a component-m event, lag s, rescaled time x.
    double kernel(int l, int m, double s, double x) const {
        if (s < 0.0 || s > A) return 0.0;
        return kernel_coef(l, m, x) * kernel_shape(l, m, s);
    }

    // Quadrature-friendly evaluation: identical to kernel() except that the
    // piecewise-constant family returns the average of the one-sided limits
    // at its interior breakpoints, which makes node-aligned trapezoid rules
    // exact.
    double kernel_quad(int l, int m, double s, double x) const {
        if (s < 0.0 || s > A) return 0.0;
        return kernel_xcoef(l, m, x) * kernel_shape_quad(l, m, s);
    }

    // The kernel factors as amplitude(x) * shape(s) in every built-in family.
    double kernel_xcoef(int l, int m, double x) const { return kernel_coef(l, m, x); }

    double kernel_shape_quad(int l, int m, double s) const {
        if (s < 0.0 || s > A) return 0.0;
        if (family_ == Family::piecewise_const_kernel) {
            const auto& h = heights_[idx(l, m)];
            const double piece_w = A / static_cast<double>(h.size());
            const double pos = s / piece_w;
            const double nearest = std::round(pos);
            if (std::abs(pos - nearest) < 1e-12) {
                const long k = static_cast<long>(nearest);
                if (k > 0 && k < static_cast<long>(h.size()))
                    return 0.5 * (h[static_cast<std::size_t>(k - 1)] +
                                  h[static_cast<std::size_t>(k)]);
                return k <= 0 ? h.front() : h.back();
            }
        }
        return kernel_shape(l, m, s);
    }

    // sup over x <= 1 of kernel(l, m, s, x); the dominating stationary kernel.
    double kernel_sup(int l, int m, double s) const {
        if (s < 0.0 || s > A) return 0.0;
        return sup_coef(l, m) * kernel_shape(l, m, s);
    }

    // sup over s of kernel_sup.
    double kernel_sup_max(int l, int m) const {
        switch (family_) {
            case Family::constant:
            case Family::linear_baseline:
            case Family::sine_baseline:
            case Family::exp_kernel_tv_amplitude:
                return sup_coef(l, m) * kernel_shape(l, m, 0.0);
            case Family::piecewise_const_kernel: {
                const auto& h = heights_[idx(l, m)];
                return *std::max_element(h.begin(), h.end());
            }
        }
        throw std::logic_error("bad family enum");
    }

    // Closed-form integral of kernel_sup over [0,A].
    double kernel_sup_mass(int l, int m) const {
        switch (family_) {
            case Family::constant:
            case Family::linear_baseline:
            case Family::sine_baseline:
                return gamma_(l, m);
            case Family::exp_kernel_tv_amplitude:
                return sup_coef(l, m) * (1.0 - std::exp(-beta_ * A));
            case Family::piecewise_const_kernel: {
                const auto& h = heights_[idx(l, m)];
                const double piece_w = A / static_cast<double>(h.size());
                double s = 0.0;
                for (double v : h) s += v * piece_w;
                return s;
            }
        }
        throw std::logic_error("bad family enum");
    }

    // Inverse CDF of the density kernel_sup(l,m,.) / kernel_sup_mass(l,m).
    double sample_sup_offset(int l, int m, double u01) const {
        switch (family_) {
            case Family::constant:
            case Family::linear_baseline:
            case Family::sine_baseline:
            case Family::exp_kernel_tv_amplitude: {
                const double mass = 1.0 - std::exp(-beta_ * A);
                return -std::log1p(-u01 * mass) / beta_;
            }
            case Family::piecewise_const_kernel: {
                const auto& h = heights_[idx(l, m)];
                const double piece_w = A / static_cast<double>(h.size());
                const double total = kernel_sup_mass(l, m);
                double target = u01 * total;
                for (std::size_t k = 0; k < h.size(); ++k) {
                    const double piece_mass = h[k] * piece_w;
                    if (target <= piece_mass || k + 1 == h.size())
                        return piece_w * static_cast<double>(k) +
                               (h[k] > 0.0 ? target / h[k] : 0.0);
                    target -= piece_mass;
                }
                return A;
            }
        }
        throw std::logic_error("bad family enum");
    }

    bool kernel_time_varying() const { return family_ == Family::exp_kernel_tv_amplitude && alpha1_.max_abs() > 0.0; }

    bool baseline_time_varying() const {
        for (int l = 0; l < d; ++l)
            if (baseline(l, 0.0) != baseline(l, 0.5) || baseline(l, 0.0) != baseline(l, 1.0))
                return true;
        return false;
    }

    bool is_stationary() const {
        if (kernel_time_varying()) return false;
        for (int l = 0; l < d; ++l)
            if (baseline(l, 0.0) != baseline(l, 1.0) || baseline(l, 0.0) != baseline(l, 0.5))
                return false;
        return true;
    }

    json to_json() const {
        return json{{"d", d}, {"A", A}, {"T", T}, {"family", family_tag()}, {"params", params_}};
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write model config: " + path);
        out << to_json().dump(2) << "\n";
    }

    friend ModelSpec builtin_family(const std::string& name, const json& params, int d, double A,
                                    double T);

private:
    static double pi() { return 3.14159265358979323846; }
    static double clamp_x(double x) { return std::min(std::max(x, 0.0), 1.0); }

    std::size_t idx(int l, int m) const { return static_cast<std::size_t>(l * d + m); }

    double exp_shape(double s) const { return beta_ * std::exp(-beta_ * s); }

    double kernel_shape(int l, int m, double s) const {
        switch (family_) {
            case Family::constant:
            case Family::linear_baseline:
            case Family::sine_baseline:
                return exp_shape(s) / (1.0 - std::exp(-beta_ * A));
            case Family::exp_kernel_tv_amplitude:
                return exp_shape(s);
            case Family::piecewise_const_kernel: {
                const auto& h = heights_[idx(l, m)];
                const double piece_w = A / static_cast<double>(h.size());
                auto k = static_cast<std::size_t>(s / piece_w);
                if (k >= h.size()) k = h.size() - 1;  // s == A
                return h[k];
            }
        }
        throw std::logic_error("bad family enum");
    }

    double kernel_coef(int l, int m, double x) const {
        switch (family_) {
            case Family::constant:
            case Family::linear_baseline:
            case Family::sine_baseline:
                return gamma_(l, m);
            case Family::exp_kernel_tv_amplitude:
                return alpha0_(l, m) + alpha1_(l, m) * clamp_x(x);
            case Family::piecewise_const_kernel:
                return 1.0;
        }
        throw std::logic_error("bad family enum");
    }

    double sup_coef(int l, int m) const {
        switch (family_) {
            case Family::constant:
            case Family::linear_baseline:
            case Family::sine_baseline:
                return gamma_(l, m);
            case Family::exp_kernel_tv_amplitude:
                return std::max(alpha0_(l, m), alpha0_(l, m) + alpha1_(l, m));
            case Family::piecewise_const_kernel:
                return 1.0;
        }
        throw std::logic_error("bad family enum");
    }

    Family family_ = Family::constant;
    json params_;
    std::vector<double> nu_a_, nu_b_;
    double sine_freq_ = 1.0;
    double beta_ = 1.0;
    Matrix gamma_;
    Matrix alpha0_, alpha1_;
    std::vector<std::vector<double>> heights_;  // row-major (l,m) -> piece heights
};

// Perron root of a nonnegative matrix by power iteration (all-ones start,
// relative tolerance 1e-10, at most 1e4 iterations).
inline double spectral_radius(const Matrix& m) {
    const std::size_t n = m.rows();
    if (n != m.cols()) throw std::invalid_argument("spectral_radius: not square");
    for (double v : m.data())
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("spectral_radius: entries must be finite and nonnegative");
    std::vector<double> v(n, 1.0);
    double est = 0.0;
    for (int it = 0; it < 10000; ++it) {
        std::vector<double> w = mat_vec(m, v);
        const double nw = norm2(w);
        if (nw == 0.0) return 0.0;
        for (double& x : w) x /= nw;
        const double next = dot(w, mat_vec(m, w)) / dot(w, w);
        if (it > 0 && std::abs(next - est) <= 1e-10 * std::max(1.0, std::abs(next))) return next;
        est = next;
        v = std::move(w);
    }
    std::ostringstream os;
    os << "spectral_radius: no convergence after 10000 iterations, last estimate " << est;
    throw std::runtime_error(os.str());
}

// Gamma+ entries: Simpson quadrature (2048 panels) of the sup over a
// 512-point x-grid of the kernel.
inline GammaMatrix gamma_plus(const ModelSpec& spec) {
    GammaMatrix g;
    g.entries = Matrix(static_cast<std::size_t>(spec.d), static_cast<std::size_t>(spec.d));
    for (int l = 0; l < spec.d; ++l)
        for (int m = 0; m < spec.d; ++m) {
            auto f = [&](double s) {
                double sup = 0.0;
                for (int i = 0; i < 512; ++i) {
                    const double x = static_cast<double>(i) / 511.0;
                    sup = std::max(sup, spec.kernel_quad(l, m, s, x));
                }
                return sup;
            };
            g.entries(static_cast<std::size_t>(l), static_cast<std::size_t>(m)) =
                simpson(f, 0.0, spec.A, 2048);
        }
    g.radius = spectral_radius(g.entries);
    return g;
}

struct ValidationReport {
    bool pass = false;
    GammaMatrix gamma;
    double nu_min = 0.0, nu_max = 0.0;
    double mu_min = 0.0, mu_max = 0.0;
    std::vector<std::string> violations;
};

inline ValidationReport validate_model(const ModelSpec& spec, int grid_density = 256) {
    ValidationReport rep;
    const int nx = std::max(2, grid_density);
    const int ns = std::max(2, static_cast<int>(std::ceil(spec.A * grid_density)));
    rep.nu_min = std::numeric_limits<double>::infinity();
    rep.nu_max = -rep.nu_min;
    rep.mu_min = std::numeric_limits<double>::infinity();
    rep.mu_max = -rep.mu_min;
    for (int i = 0; i <= nx; ++i) {
        const double x = static_cast<double>(i) / nx;
        for (int l = 0; l < spec.d; ++l) {
            const double v = spec.baseline(l, x);
            rep.nu_min = std::min(rep.nu_min, v);
            rep.nu_max = std::max(rep.nu_max, v);
            if (!(v > 0.0) || !std::isfinite(v)) {
                std::ostringstream os;
                os << "baseline nonpositive: nu[" << l << "](" << x << ") = " << v;
                rep.violations.push_back(os.str());
            }
            for (int j = 0; j <= ns; ++j) {
                const double s = spec.A * static_cast<double>(j) / ns;
                for (int m = 0; m < spec.d; ++m) {
                    const double w = spec.kernel(l, m, s, x);
                    rep.mu_min = std::min(rep.mu_min, w);
                    rep.mu_max = std::max(rep.mu_max, w);
                    if (!(w >= 0.0) || !std::isfinite(w)) {
                        std::ostringstream os;
                        os << "kernel negative: mu[" << l << "," << m << "](" << s << "," << x
                           << ") = " << w;
                        rep.violations.push_back(os.str());
                    }
                }
            }
        }
    }
    for (double s : {-spec.A / 2.0, -1e-9, spec.A * 1.5, spec.A + 1e-9})
        for (int l = 0; l < spec.d; ++l)
            for (int m = 0; m < spec.d; ++m)
                if (spec.kernel(l, m, s, 0.5) != 0.0)
                    rep.violations.push_back("kernel nonzero outside [0,A]");
    rep.gamma = gamma_plus(spec);
    if (!(rep.gamma.radius < 1.0)) {
        std::ostringstream os;
        os << "subcriticality violated: spectral radius " << rep.gamma.radius;
        rep.violations.push_back(os.str());
    }
    rep.pass = rep.violations.empty();
    return rep;
}

namespace detail {

inline std::vector<double> as_vector(const json& j, int d, const std::string& what) {
    std::vector<double> v;
    if (j.is_number()) {
        v.assign(static_cast<std::size_t>(d), j.get<double>());
    } else if (j.is_array()) {
        if (static_cast<int>(j.size()) != d)
            throw std::invalid_argument(what + ": expected " + std::to_string(d) + " entries");
        for (const auto& e : j) v.push_back(e.get<double>());
    } else {
        throw std::invalid_argument(what + ": expected number or array");
    }
    return v;
}

inline Matrix as_matrix(const json& j, int d, const std::string& what) {
    Matrix m(static_cast<std::size_t>(d), static_cast<std::size_t>(d));
    if (j.is_number()) {
        for (int l = 0; l < d; ++l)
            for (int k = 0; k < d; ++k) m(static_cast<std::size_t>(l), static_cast<std::size_t>(k)) = j.get<double>();
        return m;
    }
    if (!j.is_array() || static_cast<int>(j.size()) != d)
        throw std::invalid_argument(what + ": expected " + std::to_string(d) + " rows");
    for (int l = 0; l < d; ++l) {
        const auto& row = j[static_cast<std::size_t>(l)];
        if (!row.is_array() || static_cast<int>(row.size()) != d)
            throw std::invalid_argument(what + ": ragged matrix");
        for (int k = 0; k < d; ++k)
            m(static_cast<std::size_t>(l), static_cast<std::size_t>(k)) =
                row[static_cast<std::size_t>(k)].get<double>();
    }
    return m;
}

}  // namespace detail

inline ModelSpec builtin_family(const std::string& name, const json& params, int d, double A,
                                double T) {
    if (d < 1) throw std::invalid_argument("builtin_family: d must be positive");
    if (!(A > 0.0) || !(T > 0.0)) throw std::invalid_argument("builtin_family: A and T must be positive");
    ModelSpec spec;
    spec.d = d;
    spec.A = A;
    spec.T = T;
    spec.family_ = family_from_string(name);
    spec.params_ = params;

    auto get = [&](const char* key) -> const json& {
        if (!params.contains(key))
            throw std::invalid_argument("builtin_family " + name + ": missing param '" + key + "'");
        return params.at(key);
    };
    auto get_or = [&](const char* key, double dflt) {
        return params.contains(key) ? params.at(key).get<double>() : dflt;
    };

    switch (spec.family_) {
        case Family::constant:
            spec.nu_a_ = detail::as_vector(get("nu"), d, "nu");
            spec.nu_b_.assign(static_cast<std::size_t>(d), 0.0);
            spec.gamma_ = detail::as_matrix(get("gamma"), d, "gamma");
            spec.beta_ = get_or("beta", 1.0);
            break;
        case Family::linear_baseline:
        case Family::sine_baseline:
            spec.nu_a_ = detail::as_vector(get("nu_a"), d, "nu_a");
            spec.nu_b_ = detail::as_vector(get("nu_b"), d, "nu_b");
            spec.gamma_ = detail::as_matrix(get("gamma"), d, "gamma");
            spec.beta_ = get_or("beta", 1.0);
            if (spec.family_ == Family::sine_baseline) spec.sine_freq_ = get_or("freq", 1.0);
            break;
        case Family::exp_kernel_tv_amplitude:
            spec.nu_a_ = detail::as_vector(get("nu_a"), d, "nu_a");
            spec.nu_b_ = params.contains("nu_b") ? detail::as_vector(params.at("nu_b"), d, "nu_b")
                                                 : std::vector<double>(static_cast<std::size_t>(d), 0.0);
            spec.alpha0_ = detail::as_matrix(get("alpha0"), d, "alpha0");
            spec.alpha1_ = detail::as_matrix(get("alpha1"), d, "alpha1");
            spec.beta_ = get_or("beta", 1.0);
            for (std::size_t i = 0; i < spec.alpha0_.data().size(); ++i) {
                const double a0 = spec.alpha0_.data()[i];
                const double a1 = spec.alpha1_.data()[i];
                if (a0 < 0.0 || a0 + a1 < 0.0)
                    throw std::invalid_argument("exp_kernel_tv_amplitude: amplitude negative on [0,1]");
            }
            break;
        case Family::piecewise_const_kernel: {
            spec.nu_a_ = detail::as_vector(get("nu"), d, "nu");
            spec.nu_b_.assign(static_cast<std::size_t>(d), 0.0);
            const json& hj = get("heights");
            // d=1 shorthand: a flat array of piece heights
            if (d == 1 && hj.is_array() && !hj.empty() && hj[0].is_number()) {
                spec.heights_.push_back(hj.get<std::vector<double>>());
            } else {
                if (!hj.is_array() || static_cast<int>(hj.size()) != d)
                    throw std::invalid_argument("heights: expected d x d x pieces array");
                for (int l = 0; l < d; ++l)
                    for (int m = 0; m < d; ++m)
                        spec.heights_.push_back(
                            hj[static_cast<std::size_t>(l)][static_cast<std::size_t>(m)]
                                .get<std::vector<double>>());
            }
            std::size_t pieces = spec.heights_.front().size();
            for (const auto& h : spec.heights_) {
                if (h.size() != pieces || h.empty())
                    throw std::invalid_argument("heights: all entries need the same piece count");
                for (double v : h)
                    if (v < 0.0) throw std::invalid_argument("heights: negative kernel height");
            }
            break;
        }
    }
    if (!(spec.beta_ > 0.0)) throw std::invalid_argument("builtin_family: beta must be positive");
    for (int l = 0; l < d; ++l) {
        if (!(spec.baseline(l, 0.0) > 0.0) || !(spec.baseline(l, 1.0) > 0.0))
            throw std::invalid_argument("builtin_family: baseline must be positive on [0,1]");
    }
    const GammaMatrix g = gamma_plus(spec);
    if (!(g.radius < 1.0)) {
        std::ostringstream os;
        os << "builtin_family " << name << ": subcritical radius required, got " << g.radius;
        throw std::invalid_argument(os.str());
    }
    return spec;
}

inline ModelSpec model_from_json(const json& j) {
    return builtin_family(j.at("family").get<std::string>(), j.at("params"), j.at("d").get<int>(),
                          j.at("A").get<double>(), j.at("T").get<double>());
}

inline ModelSpec load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read model config: " + path);
    json j;
    in >> j;
    return model_from_json(j);
}

}  // namespace hawkes
