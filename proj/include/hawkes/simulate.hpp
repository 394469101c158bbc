#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hawkes/events.hpp"
#include "hawkes/model.hpp"
#include "hawkes/rng.hpp"

namespace hawkes {

inline double default_warmup(const ModelSpec& model) { return 20.0 * model.A; }

// Branching (cluster) sampler. Immigrants arrive as an inhomogeneous
// Poisson process on [-L, T]; an individual of type m born at S has
// Poisson(p^{(l,m)}_{S/T}) children of type l with offsets drawn from the
// density mu^{(l,m)}(., S/T + ./T) / p. The offspring means p are cached on
// a 512-point grid in rescaled time and interpolated linearly.
class ClusterEngine {
public:
    ClusterEngine(const ModelSpec& model, double T, double L)
        : model_(model), T_(T), L_(L) {
        if (L < 0.0) throw std::invalid_argument("ClusterEngine: warmup length must be >= 0");
        const ValidationReport rep = validate_model(model, 64);
        if (!rep.pass)
            throw std::invalid_argument("ClusterEngine: model fails validation: " +
                                        rep.violations.front());
        x_lo_ = std::min(0.0, -L / T);
        const int nx = model.kernel_time_varying() ? 512 : 1;
        p_.assign(static_cast<std::size_t>(model.d * model.d),
                  std::vector<double>(static_cast<std::size_t>(nx), 0.0));
        for (int l = 0; l < model.d; ++l)
            for (int m = 0; m < model.d; ++m) {
                auto& tab = p_[pidx(l, m)];
                for (int i = 0; i < nx; ++i) {
                    const double x = nx == 1 ? 0.0 : x_lo_ + (1.0 - x_lo_) * i / (nx - 1.0);
                    const int n = 1024;
                    double s = 0.0;
                    for (int k = 0; k <= n; ++k) {
                        const double u = model.A * k / static_cast<double>(n);
                        const double w = (k == 0 || k == n) ? 0.5 : 1.0;
                        s += w * model.kernel_quad(l, m, u, x + u / T);
                    }
                    tab[static_cast<std::size_t>(i)] = s * model.A / n;
                }
            }
    }

    EventStream run(RngStream rng) {
        proposals_ = accepts_ = 0;
        EventStream out;
        out.d = model_.d;
        out.T = T_;
        out.warmup_start = -L_;
        out.seed = rng.seed();
        out.stream_id = rng.stream_id();

        std::vector<Event> population;
        // immigrants: thinning against the constant rate sup nu
        for (int m = 0; m < model_.d; ++m) {
            const double bar = model_.baseline_sup(m);
            if (bar <= 0.0) continue;
            double t = -L_;
            while (true) {
                t += rng.exponential(bar);
                if (t > T_) break;
                if (rng.uniform() * bar < model_.baseline(m, t / T_)) population.push_back({t, m});
            }
        }

        for (std::size_t head = 0; head < population.size(); ++head) {
            const Event parent = population[head];
            if (parent.t > T_) continue;
            const double x = parent.t / T_;
            for (int l = 0; l < model_.d; ++l) {
                const double mean = p_interp(l, parent.component, x);
                const std::uint64_t n = rng.poisson(mean);
                for (std::uint64_t c = 0; c < n; ++c) {
                    const double s = sample_offspring_offset(l, parent.component, x, rng);
                    const double birth = parent.t + s;
                    if (birth <= T_) population.push_back({birth, l});
                }
                if (population.size() > 10'000'000)
                    throw std::runtime_error("ClusterEngine: family-size runaway, model invalid");
            }
        }

        out.events = std::move(population);
        std::sort(out.events.begin(), out.events.end(),
                  [](const Event& a, const Event& b) { return a.t < b.t; });
        out.validate();
        return out;
    }

    // Rejection sampler against the dominating kernel sup_x mu(s, x).
    double sample_offspring_offset(int l, int m, double x, RngStream& rng) {
        while (true) {
            ++proposals_;
            const double s = model_.sample_sup_offset(l, m, rng.uniform());
            const double envelope = model_.kernel_sup(l, m, s);
            const double target = model_.kernel(l, m, s, x + s / T_);
            if (target > envelope * (1.0 + 1e-9))
                throw std::runtime_error("sample_offspring_offset: envelope violated");
            if (rng.uniform() * envelope <= target) {
                ++accepts_;
                return s;
            }
        }
    }

    double offspring_mean(int l, int m, double x) const { return p_interp(l, m, x); }
    std::uint64_t proposals() const { return proposals_; }
    std::uint64_t accepts() const { return accepts_; }

private:
    std::size_t pidx(int l, int m) const { return static_cast<std::size_t>(l * model_.d + m); }

    double p_interp(int l, int m, double x) const {
        const auto& tab = p_[pidx(l, m)];
        if (tab.size() == 1) return tab[0];
        const double pos = (std::clamp(x, x_lo_, 1.0) - x_lo_) / (1.0 - x_lo_) *
                           static_cast<double>(tab.size() - 1);
        const auto i = std::min(static_cast<std::size_t>(pos), tab.size() - 2);
        const double f = pos - static_cast<double>(i);
        return tab[i] * (1.0 - f) + tab[i + 1] * f;
    }

    ModelSpec model_;
    double T_;
    double L_;
    double x_lo_;
    std::vector<std::vector<double>> p_;
    std::uint64_t proposals_ = 0;
    std::uint64_t accepts_ = 0;
};

inline EventStream simulate_cluster(const ModelSpec& model, double T, RngStream rng, double L) {
    return ClusterEngine(model, T, L).run(rng);
}

// Ogata-style thinning sampler: candidates are proposed at a piecewise
// constant dominating rate built from sup nu and the sup kernel applied to
// the trailing A-window counts, then accepted with probability lambda/B.
inline EventStream simulate_thinning(const ModelSpec& model, double T, RngStream rng, double L) {
    if (L < 0.0) throw std::invalid_argument("simulate_thinning: warmup length must be >= 0");
    {
        const ValidationReport rep = validate_model(model, 64);
        if (!rep.pass)
            throw std::invalid_argument("simulate_thinning: model fails validation: " +
                                        rep.violations.front());
    }
    const int d = model.d;
    std::vector<double> nu_bar(static_cast<std::size_t>(d));
    std::vector<double> mu_max(static_cast<std::size_t>(d * d));
    double nu_bar_total = 0.0;
    for (int l = 0; l < d; ++l) {
        nu_bar[static_cast<std::size_t>(l)] = model.baseline_sup(l);
        nu_bar_total += nu_bar[static_cast<std::size_t>(l)];
        for (int m = 0; m < d; ++m)
            mu_max[static_cast<std::size_t>(l * d + m)] = model.kernel_sup_max(l, m);
    }
    std::vector<double> mu_max_col(static_cast<std::size_t>(d), 0.0);  // sum over l
    for (int m = 0; m < d; ++m)
        for (int l = 0; l < d; ++l)
            mu_max_col[static_cast<std::size_t>(m)] += mu_max[static_cast<std::size_t>(l * d + m)];

    EventStream out;
    out.d = d;
    out.T = T;
    out.warmup_start = -L;
    out.seed = rng.seed();
    out.stream_id = rng.stream_id();

    std::vector<int> window_count(static_cast<std::size_t>(d), 0);
    std::size_t head = 0;  // first event with t + A > current time
    double t = -L;
    std::vector<double> lambda(static_cast<std::size_t>(d));
    while (t < T) {
        double b_rate = nu_bar_total;
        for (int m = 0; m < d; ++m)
            b_rate += mu_max_col[static_cast<std::size_t>(m)] * window_count[static_cast<std::size_t>(m)];
        const double next_expiry = head < out.events.size()
                                       ? out.events[head].t + model.A
                                       : std::numeric_limits<double>::infinity();
        const double tc = t + rng.exponential(b_rate);
        if (tc >= next_expiry || tc > T) {
            t = std::min(next_expiry, T);
            if (t >= T) break;
            --window_count[static_cast<std::size_t>(out.events[head].component)];
            ++head;
            continue;
        }
        double total = 0.0;
        for (int l = 0; l < d; ++l) {
            double v = model.baseline(l, tc / T);
            for (std::size_t j = head; j < out.events.size(); ++j)
                v += model.kernel(l, out.events[j].component, tc - out.events[j].t, tc / T);
            lambda[static_cast<std::size_t>(l)] = v;
            total += v;
        }
        if (total > b_rate * (1.0 + 1e-9))
            throw std::runtime_error("simulate_thinning: dominating rate violated");
        const double u = rng.uniform() * b_rate;
        if (u < total) {
            double acc = 0.0;
            int comp = d - 1;
            for (int l = 0; l < d; ++l) {
                acc += lambda[static_cast<std::size_t>(l)];
                if (u < acc) {
                    comp = l;
                    break;
                }
            }
            out.events.push_back({tc, comp});
            ++window_count[static_cast<std::size_t>(comp)];
        }
        t = tc;
    }
    out.validate();
    return out;
}

}  // namespace hawkes
