#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lecam/config.hpp"
#include "lecam/csv.hpp"
#include "lecam/distances.hpp"
#include "lecam/errors.hpp"
#include "lecam/experiments.hpp"
#include "lecam/kernels.hpp"
#include "lecam/model.hpp"
#include "lecam/simulate.hpp"

namespace lecam::cli {

/// Exit codes.
inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 1;
inline constexpr int exit_numerical = 2;

namespace detail {

struct Options {
    std::string config;
    std::string in;
    std::string out;
    std::uint64_t seed = 1;
    std::string n_list;
    std::size_t reps = 100;
    std::string kernel = "round";
    std::string formula = "kernel";
    std::optional<double> L;
    double epsilon = 0.5;
};

inline std::vector<std::size_t> parse_n_list(const std::string& text) {
    std::vector<std::size_t> out;
    for (const auto& cell : csv::split(text)) {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(cell, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != cell.size() || v == 0) {
            throw ConfigError("--n-list: '" + cell + "' is not a positive integer");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

inline std::vector<std::size_t> default_n_list() {
    return {16, 32, 64, 128, 256, 512, 1024};
}

inline RunConfig load(const Options& o) {
    if (o.config.empty()) throw ConfigError("--config: required for this subcommand");
    return parse_config_file(o.config);
}

inline void cmd_simulate(const Options& o, std::ostream& out) {
    const RunConfig cfg = load(o);
    const Grid grid = cfg.grid();
    const IncrementSummaries summaries = build_increment_summaries(cfg.spec, grid);
    RngStream rng(o.seed, 0);
    const PathSample path = sample_path(cfg.spec, grid, summaries, rng);
    const auto counts = path.jumps_per_interval();
    csv::write(out, "t_i", "increment", "gaussian_part", "n_jumps_in_interval");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        csv::write(out, grid[i + 1], path.increments[i], path.gaussian_parts[i], counts[i]);
    }
}

/// Reads the "increment" column (or the first column when absent) of a CSV with a header.
inline std::vector<double> read_increments(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("--in: empty input");
    const auto header = csv::split(line);
    std::size_t column = 0;
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (header[k] == "increment") column = k;
    }
    std::vector<double> values;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto cells = csv::split(line);
        if (column >= cells.size()) {
            throw ConfigError("--in: row " + std::to_string(row) + " has too few columns");
        }
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(cells[column], &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != cells[column].size()) {
            throw ConfigError("--in: row " + std::to_string(row) + " is not numeric");
        }
        values.push_back(v);
    }
    return values;
}

inline void cmd_filter(const Options& o, std::istream& stdin_stream, std::ostream& out) {
    std::vector<double> x;
    if (o.in.empty()) {
        x = read_increments(stdin_stream);
    } else {
        std::ifstream file(o.in);
        if (!file) throw ConfigError("--in: cannot open '" + o.in + "'");
        x = read_increments(file);
    }
    std::vector<double> y;
    if (o.kernel == "round") {
        y = apply_round_kernel(x);
    } else if (o.kernel == "truncate") {
        const RunConfig cfg = load(o);
        const Grid grid = cfg.grid();
        const IncrementSummaries summaries = build_increment_summaries(cfg.spec, grid);
        if (summaries.size() != x.size()) {
            throw ConfigError("--in: " + std::to_string(x.size()) +
                              " increments do not match the config grid of " +
                              std::to_string(summaries.size()) + " intervals");
        }
        const double L = o.L.value_or(summaries.max_abs_m());
        RngStream rng(o.seed, 1);
        for (std::size_t i = 0; i < x.size(); ++i) {
            TruncateResampleParams p{L, o.epsilon, summaries[i].sigma()};
            p.validate();
            y.push_back(truncate_resample(x[i], p, rng));
        }
    } else {
        throw ConfigError("--kernel: must be 'round' or 'truncate'");
    }
    csv::write(out, "i", "increment", "filtered");
    for (std::size_t i = 0; i < x.size(); ++i) csv::write(out, i + 1, x[i], y[i]);
}

inline void cmd_bounds(const Options& o, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = load(o);
    const Grid grid = cfg.grid();
    const IncrementSummaries summaries = build_increment_summaries(cfg.spec, grid);
    BoundReport report;
    if (o.formula == "bernoulli") {
        report = bernoulli_aggregate_bound(summaries);
    } else if (o.formula == "kernel") {
        if (cfg.spec.jump_law.is_continuous()) {
            report = continuous_kernel_aggregate_bound(summaries, o.L.value_or(summaries.max_abs_m()),
                                                       o.epsilon, cfg.spec.jump_law);
        } else {
            report = discrete_kernel_aggregate_bound(summaries);
        }
    } else {
        throw ConfigError("--formula: must be 'kernel' or 'bernoulli'");
    }
    for (const auto& w : report.warnings) err << "warning: " << w << '\n';
    csv::write(out, "i", "lambda_i", "sigma_i", "m_i", "per_increment_bound", "formula_name");
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        csv::write(out, i + 1, summaries[i].lambda, summaries[i].sigma(), summaries[i].m,
                   report.per_increment[i], report.formula_name);
    }
    csv::write(out, "aggregate", "", "", "", report.aggregate, report.formula_name);
}

inline void cmd_convergence(const Options& o, std::ostream& out, std::size_t workers) {
    const RunConfig cfg = load(o);
    ConvergenceOptions opts;
    opts.jump_case = cfg.spec.jump_law.is_continuous() ? JumpCase::continuous : JumpCase::lattice;
    opts.holder = cfg.holder.value_or(HolderClassParams{});
    if (o.L) opts.L = *o.L;
    opts.epsilon = o.epsilon;
    opts.workers = workers;
    const auto n_values = o.n_list.empty() ? default_n_list() : parse_n_list(o.n_list);
    const auto rows = run_convergence(cfg.spec, n_values, opts);
    csv::write(out, "n", "delta_n", "aggregate_bound", "oracle_product_bound", "rate_prediction");
    for (const auto& r : rows) {
        csv::write(out, r.n, r.delta_n, r.aggregate_bound, r.oracle_product_bound, r.rate_prediction);
    }
}

inline void cmd_risk_transfer(const Options& o, std::ostream& out, std::size_t workers) {
    const RunConfig cfg = load(o);
    RiskOptions opts;
    opts.replications = o.reps;
    opts.seed = o.seed;
    opts.workers = workers;
    const auto n_values = o.n_list.empty() ? default_n_list() : parse_n_list(o.n_list);
    const auto rows = run_risk_transfer(cfg.spec, moving_average_drift, n_values, opts);
    csv::write(out, "n", "mise_direct_gaussian", "mise_transferred", "mise_naive_on_jumps",
               "replications");
    for (const auto& r : rows) {
        csv::write(out, r.n, r.mise_direct_gaussian, r.mise_transferred, r.mise_naive_on_jumps,
                   r.replications);
    }
}

}  // namespace detail

/// Runs one command line (args excludes the program name). CSV goes to `out`
/// unless --out is given; diagnostics go to `err`. `workers` = 0 means
/// default_workers().
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
               std::istream& in = std::cin, std::size_t workers = 0) {
    detail::Options o;
    CLI::App app{"Jump-diffusion simulation, jump-filtering kernels and distance bounds", "lecam"};
    app.require_subcommand(1);
    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON model config");
    };
    auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", o.seed, "RNG seed"); };
    auto add_out = [&](CLI::App* sub) { sub->add_option("--out", o.out, "Write CSV here"); };
    auto add_kernel_params = [&](CLI::App* sub) {
        sub->add_option("--L", o.L, "Bound on |m_i| for the truncate kernel (default max |m_i|)");
        sub->add_option("--epsilon", o.epsilon, "Truncate kernel exponent in (0, 1)");
    };

    auto* simulate = app.add_subcommand("simulate", "Simulate one path's increments");
    add_config(simulate);
    add_seed(simulate);
    add_out(simulate);

    auto* filter = app.add_subcommand("filter", "Apply a jump-filtering kernel to increments");
    add_config(filter);
    add_seed(filter);
    add_out(filter);
    filter->add_option("--in", o.in, "Increment CSV (default: standard input)");
    filter->add_option("--kernel", o.kernel, "round or truncate");
    add_kernel_params(filter);

    auto* bounds = app.add_subcommand("bounds", "Per-increment and aggregate bounds");
    add_config(bounds);
    add_out(bounds);
    bounds->add_option("--formula", o.formula, "kernel or bernoulli");
    add_kernel_params(bounds);

    auto* convergence = app.add_subcommand("convergence", "Bound and oracle sweep over n");
    add_config(convergence);
    add_out(convergence);
    add_seed(convergence);
    convergence->add_option("--n-list", o.n_list, "Comma-separated n values");
    add_kernel_params(convergence);

    auto* risk = app.add_subcommand("risk-transfer", "MISE of direct, transferred and naive estimators");
    add_config(risk);
    add_out(risk);
    add_seed(risk);
    risk->add_option("--n-list", o.n_list, "Comma-separated n values");
    risk->add_option("--reps", o.reps, "Replications per n");

    auto* validate = app.add_subcommand("validate", "Check a config and exit");
    add_config(validate);

    std::vector<std::string> argv_storage{"lecam"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_storage) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? exit_ok : exit_config;
    }

    try {
        std::ostringstream buffer;
        if (simulate->parsed()) {
            detail::cmd_simulate(o, buffer);
        } else if (filter->parsed()) {
            detail::cmd_filter(o, in, buffer);
        } else if (bounds->parsed()) {
            detail::cmd_bounds(o, buffer, err);
        } else if (convergence->parsed()) {
            detail::cmd_convergence(o, buffer, workers);
        } else if (risk->parsed()) {
            detail::cmd_risk_transfer(o, buffer, workers);
        } else if (validate->parsed()) {
            detail::load(o);
        }
        if (o.out.empty()) {
            out << buffer.str();
        } else {
            std::ofstream file(o.out, std::ios::binary);
            if (!file) throw ConfigError("--out: cannot open '" + o.out + "'");
            file << buffer.str();
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << '\n';
        return exit_config;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return exit_numerical;
    }
    return exit_ok;
}

}  // namespace lecam::cli
