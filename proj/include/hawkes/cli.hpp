#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hawkes/estimate.hpp"
#include "hawkes/events.hpp"
#include "hawkes/harness.hpp"
#include "hawkes/model.hpp"
#include "hawkes/moments.hpp"
#include "hawkes/projection.hpp"
#include "hawkes/simulate.hpp"

namespace hawkes {

namespace detail {

inline std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    if (out.empty()) throw std::invalid_argument("empty list: " + s);
    return out;
}

inline void write_lambda_csv(const ModelSpec& model, const MomentTable& table,
                             const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write moments file: " + path);
    out << "# hawkes-moments v1 kind=lambda d=" << model.d << "\nx,l,Lambda_l\n";
    for (std::size_t xi = 0; xi < table.x_grid.size(); ++xi)
        for (int l = 0; l < model.d; ++l)
            out << fmt17(table.x_grid[xi]) << "," << (l + 1) << ","
                << fmt17(table.lambda[xi][static_cast<std::size_t>(l)]) << "\n";
}

inline void write_chi_csv(const ModelSpec& model, const MomentTable& table,
                          const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write chi file: " + path);
    out << "# hawkes-moments v1 kind=chi d=" << model.d << "\nx,s,l,m,chi_lm\n";
    for (std::size_t xi = 0; xi < table.x_grid.size(); ++xi)
        for (std::size_t si = 0; si < table.s_grid.size(); ++si)
            for (int l = 0; l < model.d; ++l)
                for (int m = 0; m < model.d; ++m)
                    out << fmt17(table.x_grid[xi]) << "," << fmt17(table.s_grid[si]) << ","
                        << (l + 1) << "," << (m + 1) << ","
                        << fmt17(table.chi_grid(l, m, si, table.x_grid[xi])) << "\n";
}

inline void write_eval_grid(const FitResult& fit, int d, int n, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write eval grid: " + path);
    out << "# hawkes-mu-grid v1 d=" << d << "\nu,m,mu_hat\n";
    const double A = fit.basis->A();
    for (int i = 0; i <= n; ++i) {
        const double u = A * static_cast<double>(i) / n;
        for (int m = 0; m < d; ++m)
            out << fmt17(u) << "," << (m + 1) << "," << fmt17(fit.mu_hat(m, u)) << "\n";
    }
}

}  // namespace detail

// In-process entry point shared by the binary and the tests. Exit codes:
// 0 success, 1 usage error, 2 runtime error.
inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CLI::App app{"locally stationary Hawkes toolkit"};
    app.require_subcommand(1);
    // several subcommands take --h (bandwidth), so help gets the long flag only
    app.set_help_flag("--help", "print help");

    // --- simulate ---
    auto* sim = app.add_subcommand("simulate", "sample an event stream and write it to a file");
    std::string sim_model, sim_out, sim_engine = "cluster";
    double sim_T = 0.0, sim_warmup = -1.0;
    std::uint64_t sim_seed = 1, sim_stream = 0;
    sim->add_option("--model", sim_model, "model config JSON")->required();
    sim->add_option("--T", sim_T, "horizon (overrides config)")->required();
    sim->add_option("--seed", sim_seed, "RNG seed");
    sim->add_option("--stream", sim_stream, "RNG stream id");
    sim->add_option("--engine", sim_engine, "cluster or thinning")
        ->check(CLI::IsMember({"cluster", "thinning"}));
    sim->add_option("--warmup", sim_warmup, "warm-up length (default 20*A)");
    sim->add_option("--out", sim_out, "output event file")->required();

    // --- estimate ---
    auto* est = app.add_subcommand("estimate", "fit the localized least-squares estimator");
    std::string est_events, est_out, est_kernel = "epanechnikov", est_eval_out;
    double est_x0 = 0.5, est_h = 0.1, est_A = 1.0, est_ridge = 0.0, est_quad = 0.0;
    int est_J = 8, est_order = 4, est_K = 1, est_target = 1, est_eval_grid = 0;
    bool est_stationary = false, est_truncate = false;
    est->add_option("--events", est_events, "event file")->required();
    est->add_option("--x0", est_x0, "rescaled estimation point");
    est->add_option("--h", est_h, "bandwidth (rescaled)");
    est->add_option("--A", est_A, "kernel support length")->required();
    est->add_option("--J", est_J, "scalar spline count");
    est->add_option("--order", est_order, "spline order (1=pc, 4=cubic)");
    est->add_option("--K", est_K, "local polynomial order");
    est->add_option("--target", est_target, "target component (1-based)");
    est->add_option("--kernel", est_kernel, "smoothing kernel")
        ->check(CLI::IsMember({"epanechnikov", "triangular", "uniform"}));
    est->add_option("--quad-step", est_quad, "design quadrature step (0 = auto)");
    est->add_option("--ridge", est_ridge, "ridge added to the design");
    est->add_flag("--stationary", est_stationary, "unlocalized fit over [A, T]");
    est->add_flag("--truncate-boundary", est_truncate, "renormalize kernel in clipped windows");
    est->add_option("--out", est_out, "output fit JSON")->required();
    est->add_option("--eval-grid", est_eval_grid, "emit mu_hat on an n-point grid");
    est->add_option("--eval-out", est_eval_out, "eval grid CSV path");

    // --- moments ---
    auto* mom = app.add_subcommand("moments", "tabulate Lambda (and optionally chi)");
    std::string mom_model, mom_out, mom_chi_out;
    double mom_tol = 1e-6;
    int mom_xgrid = 0, mom_steps = 1024;
    mom->add_option("--model", mom_model, "model config JSON")->required();
    mom->add_option("--tol", mom_tol, "series truncation tolerance");
    mom->add_option("--x-grid", mom_xgrid, "x grid size (0 = auto)");
    mom->add_option("--steps-per-A", mom_steps, "lag grid resolution");
    mom->add_option("--out", mom_out, "Lambda CSV path")->required();
    mom->add_option("--chi-out", mom_chi_out, "chi CSV path");

    // --- experiment ---
    auto* exp = app.add_subcommand("experiment", "replicated simulate/fit sweep");
    std::string exp_model, exp_tgrid, exp_x0list = "0.5", exp_engine = "cluster", exp_dir;
    double exp_h = 0.0, exp_hc = 0.5, exp_ha = 0.2;
    int exp_J = 8, exp_order = 4, exp_K = 1, exp_target = 1, exp_reps = 1, exp_workers = 1;
    std::uint64_t exp_seed = 1;
    exp->add_option("--model", exp_model, "model config JSON")->required();
    exp->add_option("--T-grid", exp_tgrid, "comma-separated horizons")->required();
    exp->add_option("--x0-list", exp_x0list, "comma-separated x0 values");
    exp->add_option("--h", exp_h, "fixed bandwidth (overrides the rule)");
    exp->add_option("--h-c", exp_hc, "bandwidth rule constant: h = c*T^-a");
    exp->add_option("--h-a", exp_ha, "bandwidth rule exponent");
    exp->add_option("--J", exp_J, "scalar spline count");
    exp->add_option("--order", exp_order, "spline order");
    exp->add_option("--K", exp_K, "local polynomial order");
    exp->add_option("--target", exp_target, "target component (1-based)");
    exp->add_option("--replicates", exp_reps, "replicates per cell");
    exp->add_option("--seed", exp_seed, "base seed");
    exp->add_option("--engine", exp_engine, "cluster or thinning")
        ->check(CLI::IsMember({"cluster", "thinning"}));
    exp->add_option("--workers", exp_workers, "concurrent replicates");
    exp->add_option("--out-dir", exp_dir, "report directory")->required();

    // --- validate ---
    auto* val = app.add_subcommand("validate", "simulator vs moment-oracle cross checks");
    std::string val_model;
    double val_T = 1000.0, val_scale = 1.0;
    int val_reps = 100, val_workers = 1;
    std::uint64_t val_seed = 1;
    val->add_option("--model", val_model, "model config JSON")->required();
    val->add_option("--T", val_T, "horizon");
    val->add_option("--replicates", val_reps, "replicates");
    val->add_option("--seed", val_seed, "seed");
    val->add_option("--workers", val_workers, "concurrent replicates");
    val->add_option("--lambda-scale", val_scale, "oracle perturbation (power check)");

    // --- project ---
    auto* prj = app.add_subcommand("project", "best basis approximation of the truth (eps_T)");
    std::string prj_model, prj_out;
    double prj_x0 = 0.5, prj_h = 0.1;
    int prj_J = 8, prj_order = 4, prj_K = 1, prj_target = 1;
    prj->add_option("--model", prj_model, "model config JSON")->required();
    prj->add_option("--x0", prj_x0, "rescaled estimation point");
    prj->add_option("--h", prj_h, "bandwidth (rescaled)");
    prj->add_option("--J", prj_J, "scalar spline count");
    prj->add_option("--order", prj_order, "spline order");
    prj->add_option("--K", prj_K, "local polynomial order");
    prj->add_option("--target", prj_target, "target component (1-based)");
    prj->add_option("--out", prj_out, "projection JSON path");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        std::stringstream ss;
        const int code = app.exit(e, ss, ss);
        (code == 0 ? out : err) << ss.str();
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) {
            ModelSpec model = load_model(sim_model);
            model.T = sim_T;
            const double L = sim_warmup >= 0.0 ? sim_warmup : default_warmup(model);
            RngStream rng(sim_seed, sim_stream);
            const EventStream ev = sim_engine == "thinning"
                                       ? simulate_thinning(model, sim_T, rng, L)
                                       : simulate_cluster(model, sim_T, rng, L);
            save_events(ev, sim_out);
            out << "wrote " << ev.events.size() << " events to " << sim_out << "\n";
        } else if (est->parsed()) {
            const EventStream ev = load_events(est_events);
            EstimatorConfig cfg;
            cfg.target_l = est_target - 1;
            cfg.x0 = est_x0;
            cfg.h = est_h;
            cfg.A = est_A;
            cfg.basis_order = est_order;
            cfg.basis_scalar_count = est_J;
            cfg.K_order = est_K;
            cfg.kernel = smoothing_kernel_from_string(est_kernel);
            cfg.quad_step = est_quad;
            cfg.ridge = est_ridge;
            cfg.boundary = est_truncate ? BoundaryMode::truncate : BoundaryMode::strict;
            const FitResult fit = est_stationary ? fit_stationary(ev, cfg) : fit_local(ev, cfg);
            std::ofstream f(est_out);
            if (!f) throw std::runtime_error("cannot write fit file: " + est_out);
            f << fit_to_json(fit, cfg).dump(2) << "\n";
            if (est_eval_grid > 0) {
                if (est_eval_out.empty())
                    throw std::invalid_argument("--eval-grid needs --eval-out");
                detail::write_eval_grid(fit, ev.d, est_eval_grid, est_eval_out);
            }
            out << "nu_star_hat = " << fit.nu_star_hat << ", wrote " << est_out << "\n";
        } else if (mom->parsed()) {
            const ModelSpec model = load_model(mom_model);
            std::vector<double> x_grid;
            int nx = mom_xgrid;
            if (nx <= 0)
                nx = model.kernel_time_varying() || model.baseline_time_varying() ? 101 : 2;
            for (int i = 0; i < nx; ++i)
                x_grid.push_back(nx == 1 ? 0.5 : static_cast<double>(i) / (nx - 1));
            MomentOptions opts;
            opts.steps_per_A = mom_steps;
            const MomentTable table = compute_Lambda(model, x_grid, mom_tol, opts);
            detail::write_lambda_csv(model, table, mom_out);
            if (!mom_chi_out.empty()) detail::write_chi_csv(model, table, mom_chi_out);
            out << "series truncated at k=" << table.truncation_k
                << ", tail bound " << table.tail_bound << ", wrote " << mom_out << "\n";
        } else if (exp->parsed()) {
            ExperimentConfig cfg;
            cfg.model = load_model(exp_model);
            cfg.T_grid = detail::parse_double_list(exp_tgrid);
            cfg.x0_list = detail::parse_double_list(exp_x0list);
            cfg.h_fixed = exp_h;
            cfg.h_c = exp_hc;
            cfg.h_a = exp_ha;
            cfg.J_fixed = exp_J;
            cfg.basis_order = exp_order;
            cfg.K_order = exp_K;
            cfg.target_l = exp_target - 1;
            cfg.replicates = exp_reps;
            cfg.base_seed = exp_seed;
            cfg.engine = exp_engine;
            cfg.workers = exp_workers;
            cfg.output_dir = exp_dir;
            const ExperimentReport rep = run_experiment(cfg);
            for (const auto& a : rep.aggregates)
                out << "T=" << a.T << " x0=" << a.x0 << " ok=" << a.ok_count
                    << " median_ise=" << a.median_ise
                    << " median_nu_error=" << a.median_nu_error << "\n";
            if (rep.rate_exponents_defined)
                out << "ise_rate_exponent=" << rep.ise_rate_exponent
                    << " nu_rate_exponent=" << rep.nu_rate_exponent << "\n";
        } else if (val->parsed()) {
            const ModelSpec model = load_model(val_model);
            const ValidationSummary sum =
                validate_pipeline(model, val_T, val_reps, val_seed, val_workers, val_scale);
            for (const auto& c : sum.checks)
                out << c.name << ": " << (c.pass ? "pass" : "FAIL")
                    << " (max |z| = " << c.max_abs_z
                    << ", pass fraction = " << c.pass_fraction << ")\n";
            if (!sum.pass) {
                err << "validation failed\n";
                return 2;
            }
        } else if (prj->parsed()) {
            const ModelSpec model = load_model(prj_model);
            SplineBasis basis(model.A, prj_order, prj_J, model.d);
            const ProjectionResult proj =
                project_truth(model, basis, prj_x0, prj_h, prj_K, prj_target - 1);
            out << "eps_T = " << proj.eps_T << "\n";
            if (!prj_out.empty()) {
                std::ofstream f(prj_out);
                if (!f) throw std::runtime_error("cannot write projection file: " + prj_out);
                f << json{{"eps_T", proj.eps_T}, {"K", proj.K}, {"theta", proj.theta}}.dump(2)
                  << "\n";
            }
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace hawkes
