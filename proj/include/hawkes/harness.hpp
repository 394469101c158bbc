#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "hawkes/estimate.hpp"
#include "hawkes/events.hpp"
#include "hawkes/model.hpp"
#include "hawkes/moments.hpp"
#include "hawkes/rng.hpp"
#include "hawkes/simulate.hpp"

namespace hawkes {

namespace detail {

inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double median_of(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty set");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// run fn(0..n-1) on up to `workers` threads; each index writes its own slot,
// so results are order-independent
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const auto nt = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    for (std::size_t w = 0; w < nt; ++w)
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    for (auto& t : pool) t.join();
}

}  // namespace detail

struct ExperimentConfig {
    ModelSpec model;
    std::vector<double> T_grid;
    std::vector<double> x0_list;
    // bandwidth rule: fixed h if h_fixed > 0, else h = h_c * T^{-h_a}
    double h_fixed = 0.0;
    double h_c = 0.5;
    double h_a = 0.2;
    // basis-size rule: fixed J_s if J_c <= 0, else J_s = round(J_c * T^{J_b})
    int J_fixed = 8;
    double J_c = 0.0;
    double J_b = 0.0;
    int basis_order = 4;
    int K_order = 1;
    int target_l = 0;
    int replicates = 1;
    std::uint64_t base_seed = 1;
    std::string engine = "cluster";  // or "thinning"
    std::string output_dir;
    int workers = 1;

    double bandwidth(double T) const {
        return h_fixed > 0.0 ? h_fixed : h_c * std::pow(T, -h_a);
    }
    int basis_size(double T) const {
        if (J_c <= 0.0) return J_fixed;
        return std::max(1, static_cast<int>(std::lround(J_c * std::pow(T, J_b))));
    }
};

struct ExperimentRow {
    double T = 0.0;
    double x0 = 0.0;
    int replicate = 0;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    std::string status = "ok";
    double nu_error = 0.0;
    double ise_total = 0.0;
    std::vector<double> ise_per_component;
    double min_eigenvalue = 0.0;
    double condition_number = 0.0;
    double ridge_used = 0.0;
};

struct CellAggregate {
    double T = 0.0;
    double x0 = 0.0;
    int ok_count = 0;
    double median_ise = 0.0;
    double median_nu_error = 0.0;
    double iqr_ise = 0.0;
};

struct ExperimentReport {
    std::vector<ExperimentRow> rows;
    std::vector<CellAggregate> aggregates;
    double ise_rate_exponent = 0.0;       // slope of log median ISE on log T
    double nu_rate_exponent = 0.0;        // slope of log median nu-error^2 on log T
    bool rate_exponents_defined = false;  // needs >= 2 horizons with clean cells
};

// slope of the least-squares line y ~ a + b x
inline double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("regression_slope: need >= 2 points");
    const auto n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) throw std::invalid_argument("regression_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / den;
}

namespace detail {

inline std::string report_header(int d) {
    std::string h = "# hawkes-report v1\nT,x0,replicate,seed,stream_id,status,nu_error,ise_total";
    for (int m = 0; m < d; ++m) h += ",ise_c" + std::to_string(m + 1);
    h += ",min_eigenvalue,condition_number,ridge_used\n";
    return h;
}

inline std::string row_to_csv(const ExperimentRow& r) {
    std::string s = fmt17(r.T) + "," + fmt17(r.x0) + "," + std::to_string(r.replicate) + "," +
                    std::to_string(r.seed) + "," + std::to_string(r.stream_id) + "," + r.status +
                    "," + fmt17(r.nu_error) + "," + fmt17(r.ise_total);
    for (double v : r.ise_per_component) s += "," + fmt17(v);
    s += "," + fmt17(r.min_eigenvalue) + "," + fmt17(r.condition_number) + "," +
         fmt17(r.ridge_used) + "\n";
    return s;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace detail

inline std::vector<ExperimentRow> load_report_rows(const std::string& path, int d) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read report file: " + path);
    std::string line;
    std::getline(in, line);
    if (line != "# hawkes-report v1") throw std::runtime_error("bad report header: " + line);
    std::getline(in, line);  // column names
    std::vector<ExperimentRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_csv(line);
        if (f.size() != static_cast<std::size_t>(11 + d))
            throw std::runtime_error("bad report row: " + line);
        ExperimentRow r;
        std::size_t i = 0;
        r.T = std::stod(f[i++]);
        r.x0 = std::stod(f[i++]);
        r.replicate = std::stoi(f[i++]);
        r.seed = std::stoull(f[i++]);
        r.stream_id = std::stoull(f[i++]);
        r.status = f[i++];
        r.nu_error = std::stod(f[i++]);
        r.ise_total = std::stod(f[i++]);
        for (int m = 0; m < d; ++m) r.ise_per_component.push_back(std::stod(f[i++]));
        r.min_eigenvalue = std::stod(f[i++]);
        r.condition_number = std::stod(f[i++]);
        r.ridge_used = std::stod(f[i++]);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline void save_report_rows(const std::vector<ExperimentRow>& rows, int d,
                             const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report file: " + path);
    out << detail::report_header(d);
    for (const auto& r : rows) out << detail::row_to_csv(r);
}

inline void aggregate_report(ExperimentReport& rep) {
    std::map<std::pair<double, double>, std::vector<const ExperimentRow*>> cells;
    for (const auto& r : rep.rows) cells[{r.T, r.x0}].push_back(&r);
    rep.aggregates.clear();
    for (const auto& [key, rows] : cells) {
        CellAggregate a;
        a.T = key.first;
        a.x0 = key.second;
        std::vector<double> ise, nu;
        for (const auto* r : rows) {
            if (r->status != "ok") continue;
            ise.push_back(r->ise_total);
            nu.push_back(r->nu_error);
        }
        a.ok_count = static_cast<int>(ise.size());
        if (!ise.empty()) {
            a.median_ise = detail::median_of(ise);
            a.median_nu_error = detail::median_of(nu);
            std::sort(ise.begin(), ise.end());
            a.iqr_ise = ise[ise.size() * 3 / 4] - ise[ise.size() / 4];
        }
        rep.aggregates.push_back(a);
    }
    // rate exponents from log-log regression across horizons (pooled over x0)
    std::map<double, std::vector<double>> by_T_ise, by_T_nu;
    for (const auto& a : rep.aggregates)
        if (a.ok_count > 0) {
            by_T_ise[a.T].push_back(a.median_ise);
            by_T_nu[a.T].push_back(a.median_nu_error);
        }
    std::vector<double> lt, li, ln;
    for (const auto& [T, v] : by_T_ise) {
        const double mi = detail::median_of(v);
        const double mn = detail::median_of(by_T_nu[T]);
        if (mi <= 0.0 || mn <= 0.0) continue;
        lt.push_back(std::log(T));
        li.push_back(std::log(mi));
        ln.push_back(std::log(mn * mn));
    }
    rep.rate_exponents_defined = lt.size() >= 2;
    if (rep.rate_exponents_defined) {
        rep.ise_rate_exponent = regression_slope(lt, li);
        rep.nu_rate_exponent = regression_slope(lt, ln);
    }
}

// Deterministic per-row RNG stream id: cell-indexed, independent of worker
// scheduling and of which cells a resumed run recomputes.
inline std::uint64_t experiment_stream_id(std::size_t ti, std::size_t xi, int rep) {
    return (static_cast<std::uint64_t>(ti) * 1000003u + xi) * 1000003u +
           static_cast<std::uint64_t>(rep);
}

inline ExperimentRow run_experiment_cell(const ExperimentConfig& cfg, std::size_t ti,
                                         std::size_t xi, int rep) {
    ExperimentRow row;
    row.T = cfg.T_grid[ti];
    row.x0 = cfg.x0_list[xi];
    row.replicate = rep;
    row.seed = cfg.base_seed;
    row.stream_id = experiment_stream_id(ti, xi, rep);
    row.ise_per_component.assign(static_cast<std::size_t>(cfg.model.d), 0.0);
    try {
        RngStream rng(cfg.base_seed, row.stream_id);
        const double L = default_warmup(cfg.model);
        ModelSpec model = cfg.model;
        model.T = row.T;
        const EventStream ev = cfg.engine == "thinning"
                                   ? simulate_thinning(model, row.T, rng, L)
                                   : simulate_cluster(model, row.T, rng, L);
        EstimatorConfig ecfg;
        ecfg.target_l = cfg.target_l;
        ecfg.x0 = row.x0;
        ecfg.h = cfg.bandwidth(row.T);
        ecfg.A = cfg.model.A;
        ecfg.basis_order = cfg.basis_order;
        ecfg.basis_scalar_count = cfg.basis_size(row.T);
        ecfg.K_order = cfg.K_order;
        const FitResult fit = fit_local(ev, ecfg);
        const IseResult err = ise(fit, model, row.x0);
        row.nu_error = err.nu_error;
        row.ise_total = err.total;
        row.ise_per_component = err.per_component;
        row.min_eigenvalue = fit.min_eigenvalue;
        row.condition_number = fit.condition_number;
        row.ridge_used = fit.ridge_used;
    } catch (const std::exception& e) {
        std::string msg = e.what();
        for (char& c : msg)
            if (c == ',' || c == '\n') c = ';';
        row.status = "error: " + msg;
    }
    return row;
}

// Config-driven sweep. Rows are persisted after every completed cell; a
// resumed run reloads finished rows, recomputes only what is missing, and
// rewrites the file in canonical order, so interrupted and uninterrupted
// runs emit identical reports.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    if (cfg.replicates < 1) throw std::invalid_argument("run_experiment: replicates must be >= 1");
    if (cfg.T_grid.empty() || cfg.x0_list.empty())
        throw std::invalid_argument("run_experiment: empty T grid or x0 list");
    for (double T : cfg.T_grid)
        for (double x0 : cfg.x0_list) {
            const double h = cfg.bandwidth(T);
            if (h >= std::min(x0, 1.0 - x0))
                throw std::invalid_argument("run_experiment: window infeasible at T=" +
                                            std::to_string(T) + ", x0=" + std::to_string(x0));
        }

    std::string report_path;
    std::map<std::tuple<double, double, int>, ExperimentRow> done;
    if (!cfg.output_dir.empty()) {
        std::filesystem::create_directories(cfg.output_dir);
        report_path = cfg.output_dir + "/report.csv";
        if (std::filesystem::exists(report_path))
            for (auto& r : load_report_rows(report_path, cfg.model.d))
                done[{r.T, r.x0, r.replicate}] = std::move(r);
    }

    ExperimentReport rep;
    for (std::size_t ti = 0; ti < cfg.T_grid.size(); ++ti)
        for (std::size_t xi = 0; xi < cfg.x0_list.size(); ++xi) {
            std::vector<ExperimentRow> cell(static_cast<std::size_t>(cfg.replicates));
            std::vector<std::size_t> todo;
            for (int rep_i = 0; rep_i < cfg.replicates; ++rep_i) {
                const auto it = done.find({cfg.T_grid[ti], cfg.x0_list[xi], rep_i});
                if (it != done.end())
                    cell[static_cast<std::size_t>(rep_i)] = it->second;
                else
                    todo.push_back(static_cast<std::size_t>(rep_i));
            }
            detail::parallel_for(todo.size(), cfg.workers, [&](std::size_t k) {
                cell[todo[k]] = run_experiment_cell(cfg, ti, xi, static_cast<int>(todo[k]));
            });
            for (auto& r : cell) rep.rows.push_back(std::move(r));
            if (!report_path.empty()) save_report_rows(rep.rows, cfg.model.d, report_path);
        }
    aggregate_report(rep);
    return rep;
}

// --- simulator / oracle cross-validation -------------------------------

struct CheckResult {
    std::string name;
    double max_abs_z = 0.0;
    double pass_fraction = 1.0;  // fraction of cells with |z| < 4
    bool pass = false;
    std::vector<double> z_scores;
};

struct ValidationSummary {
    std::vector<CheckResult> checks;
    bool pass = true;
};

// Per-component counts on n_windows windows, both engines, two-sample z
// per window x component cell.
inline CheckResult cross_engine_check(const ModelSpec& model, double T, int replicates,
                                      int n_windows, std::uint64_t seed, int workers = 1) {
    const int d = model.d;
    const std::size_t cells = static_cast<std::size_t>(n_windows * d);
    ModelSpec m = model;
    m.T = T;
    const double L = default_warmup(m);
    // counts[engine][rep][cell]
    std::vector<std::vector<std::vector<double>>> counts(
        2, std::vector<std::vector<double>>(static_cast<std::size_t>(replicates),
                                            std::vector<double>(cells, 0.0)));
    ClusterEngine cluster(m, T, L);
    for (int eng = 0; eng < 2; ++eng) {
        detail::parallel_for(static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
            RngStream rng(seed, static_cast<std::uint64_t>(eng) * 1'000'000u + r);
            const EventStream ev = eng == 0 ? cluster.run(rng) : simulate_thinning(m, T, rng, L);
            for (int w = 0; w < n_windows; ++w) {
                const double a = T * w / n_windows, b = T * (w + 1) / n_windows;
                for (int c = 0; c < d; ++c)
                    counts[static_cast<std::size_t>(eng)][r][static_cast<std::size_t>(w * d + c)] =
                        static_cast<double>(ev.count_in(a, b, c));
            }
        });
    }
    CheckResult res;
    res.name = "cross_engine_window_counts";
    std::size_t ok = 0;
    for (std::size_t c = 0; c < cells; ++c) {
        double mean[2], var[2];
        for (int eng = 0; eng < 2; ++eng) {
            double s = 0.0, s2 = 0.0;
            for (int r = 0; r < replicates; ++r) s += counts[eng][static_cast<std::size_t>(r)][c];
            mean[eng] = s / replicates;
            for (int r = 0; r < replicates; ++r) {
                const double dlt = counts[eng][static_cast<std::size_t>(r)][c] - mean[eng];
                s2 += dlt * dlt;
            }
            var[eng] = s2 / std::max(1, replicates - 1);
        }
        const double se = std::sqrt((var[0] + var[1]) / replicates);
        const double z = se > 0.0 ? (mean[0] - mean[1]) / se : 0.0;
        res.z_scores.push_back(z);
        res.max_abs_z = std::max(res.max_abs_z, std::abs(z));
        if (std::abs(z) < 4.0) ++ok;
    }
    res.pass_fraction = static_cast<double>(ok) / static_cast<double>(cells);
    res.pass = res.pass_fraction >= 0.95;
    return res;
}

// Empirical binned mean intensity vs compute_Lambda. lambda_scale != 1 is a
// test hook that perturbs the oracle to confirm the check has power.
inline CheckResult lambda_check(const ModelSpec& model, double T, int replicates, int bins,
                                std::uint64_t seed, double lambda_scale = 1.0, int workers = 1,
                                double tol = 1e-6, const MomentOptions& mopts = {}) {
    const int d = model.d;
    ModelSpec m = model;
    m.T = T;
    const double L = default_warmup(m);
    const std::size_t cells = static_cast<std::size_t>(bins * d);
    std::vector<std::vector<double>> counts(static_cast<std::size_t>(replicates),
                                            std::vector<double>(cells, 0.0));
    ClusterEngine engine(m, T, L);
    detail::parallel_for(static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
        const EventStream ev = engine.run(RngStream(seed, 2'000'000u + r));
        for (int b = 0; b < bins; ++b) {
            const double a = T * b / bins, bb = T * (b + 1) / bins;
            for (int c = 0; c < d; ++c)
                counts[r][static_cast<std::size_t>(b * d + c)] =
                    static_cast<double>(ev.count_in(a, bb, c));
        }
    });
    // oracle: integral of Lambda over each bin
    std::vector<double> x_grid;
    const int nx = m.kernel_time_varying() || m.baseline_time_varying() ? 41 : 2;
    for (int i = 0; i < nx; ++i) x_grid.push_back(static_cast<double>(i) / (nx - 1));
    const MomentTable table = compute_Lambda(m, x_grid, tol, mopts);
    CheckResult res;
    res.name = "lambda_binned_mean";
    for (std::size_t c = 0; c < cells; ++c) {
        const int b = static_cast<int>(c) / d, comp = static_cast<int>(c) % d;
        const double a = T * b / bins, bb = T * (b + 1) / bins;
        const int nq = 64;
        double theo = 0.0;
        for (int i = 0; i < nq; ++i) {
            const double t = a + (bb - a) * (i + 0.5) / nq;
            theo += table.lambda_interp(comp, t / T);
        }
        theo *= (bb - a) / nq * lambda_scale;
        double s = 0.0, s2 = 0.0;
        for (int r = 0; r < replicates; ++r) s += counts[static_cast<std::size_t>(r)][c];
        const double mean = s / replicates;
        for (int r = 0; r < replicates; ++r) {
            const double dlt = counts[static_cast<std::size_t>(r)][c] - mean;
            s2 += dlt * dlt;
        }
        const double se = std::sqrt(s2 / std::max(1, replicates - 1) / replicates);
        const double z = se > 0.0 ? (mean - theo) / se : (mean == theo ? 0.0 : 1e9);
        res.z_scores.push_back(z);
        res.max_abs_z = std::max(res.max_abs_z, std::abs(z));
    }
    std::size_t ok = 0;
    for (double z : res.z_scores)
        if (std::abs(z) <= 4.0) ++ok;
    res.pass_fraction = static_cast<double>(ok) / static_cast<double>(res.z_scores.size());
    res.pass = res.max_abs_z <= 4.0;
    return res;
}

// Stationary-model bin-count covariance at the given lags vs the
// second-moment formula integrated over bin pairs.
inline CheckResult covariance_check(const ModelSpec& model, double T, int replicates,
                                    const std::vector<double>& lags, double bin_width,
                                    std::uint64_t seed, int workers = 1, double tol = 1e-6) {
    if (!model.is_stationary())
        throw std::invalid_argument("covariance_check: needs a stationary model");
    ModelSpec m = model;
    m.T = T;
    const double L = default_warmup(m);
    const MomentTable table = compute_Lambda(m, {0.0, 1.0}, tol);
    const double lam = table.lambda_interp(0, 0.5);

    const double max_lag = *std::max_element(lags.begin(), lags.end());
    const double start = m.A;  // skip the stretch where history is incomplete
    const double stride = bin_width;
    const auto n_pos =
        static_cast<std::size_t>(std::floor((T - start - max_lag - bin_width) / stride));
    if (n_pos < 10) throw std::invalid_argument("covariance_check: horizon too short");

    // theoretical covariance of counts in bins at lag u:
    //   lag 0:      Lambda*delta + int (delta-|v|) c(v) dv over [-delta, delta]
    //   lag u >= delta: int (delta - |v-u|) c(v) dv over [u-delta, u+delta]
    auto theo_cov = [&](double u) {
        const int nq = 512;
        const double lo = u - bin_width, hi = u + bin_width;
        double acc = 0.0;
        for (int i = 0; i < nq; ++i) {
            const double v = lo + (hi - lo) * (i + 0.5) / nq;
            const double w = bin_width - std::abs(v - u);
            if (w <= 0.0) continue;
            const double av = std::abs(v);
            const CovarianceDensity cd = covariance_density(m, table, 0.5 * T, 0.5 * T + av);
            // density carries the raw second moment; subtract the mean product
            acc += w * (cd.density(0, 0) - lam * lam);
        }
        acc *= (hi - lo) / nq;
        if (u == 0.0) acc += lam * bin_width;
        return acc;
    };

    // per replicate: average over bin positions of (X - E)(Y - E) with the
    // oracle mean for centering
    const double bin_mean = lam * bin_width;
    std::vector<std::vector<double>> g(lags.size(),
                                       std::vector<double>(static_cast<std::size_t>(replicates)));
    detail::parallel_for(static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
        const EventStream ev = simulate_cluster(m, T, RngStream(seed, 3'000'000u + r), L);
        // bin counts once on a fine grid aligned to bin_width
        const auto nb = static_cast<std::size_t>(std::floor((T - start) / bin_width));
        std::vector<double> bc(nb, 0.0);
        for (const Event& e : ev.events) {
            if (e.t < start) continue;
            const auto b = static_cast<std::size_t>((e.t - start) / bin_width);
            if (b < nb) bc[b] += 1.0;
        }
        for (std::size_t li = 0; li < lags.size(); ++li) {
            const auto off = static_cast<std::size_t>(std::lround(lags[li] / bin_width));
            double acc = 0.0;
            for (std::size_t p = 0; p < n_pos; ++p)
                acc += (bc[p] - bin_mean) * (bc[p + off] - bin_mean);
            g[li][r] = acc / static_cast<double>(n_pos);
        }
    });

    CheckResult res;
    res.name = "stationary_bin_covariance";
    for (std::size_t li = 0; li < lags.size(); ++li) {
        const double theo = theo_cov(lags[li]);
        double s = 0.0, s2 = 0.0;
        for (double v : g[li]) s += v;
        const double mean = s / replicates;
        for (double v : g[li]) s2 += (v - mean) * (v - mean);
        const double se = std::sqrt(s2 / std::max(1, replicates - 1) / replicates);
        const double z = se > 0.0 ? (mean - theo) / se : (mean == theo ? 0.0 : 1e9);
        res.z_scores.push_back(z);
        res.max_abs_z = std::max(res.max_abs_z, std::abs(z));
    }
    std::size_t ok = 0;
    for (double z : res.z_scores)
        if (std::abs(z) <= 4.0) ++ok;
    res.pass_fraction = static_cast<double>(ok) / static_cast<double>(res.z_scores.size());
    res.pass = res.max_abs_z <= 4.0;
    return res;
}

inline ValidationSummary validate_pipeline(const ModelSpec& model, double T, int replicates,
                                           std::uint64_t seed = 1, int workers = 1,
                                           double lambda_scale = 1.0) {
    ValidationSummary out;
    out.checks.push_back(cross_engine_check(model, T, replicates, 10, seed, workers));
    // time-varying models get a coarser, cheaper moment oracle
    const bool tv = model.kernel_time_varying() || model.baseline_time_varying();
    MomentOptions mopts;
    if (tv) mopts.steps_per_A = 256;
    out.checks.push_back(lambda_check(model, T, replicates, 20, seed, lambda_scale, workers,
                                      tv ? 1e-4 : 1e-6, mopts));
    if (model.is_stationary() && model.d == 1)
        out.checks.push_back(
            covariance_check(model, T, replicates, {0.0, 0.5, 1.0}, 0.5, seed, workers));
    for (const auto& c : out.checks) out.pass = out.pass && c.pass;
    return out;
}

}  // namespace hawkes
