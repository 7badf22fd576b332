// Command-line front end: simulate, backtest, experiment, diagnose.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 data error, 3 runtime failure.

#include "baws/baws.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kRuntime = 3 };

// Output failures are runtime failures, unlike unreadable input.
struct OutputError : baws::Error {
    using baws::Error::Error;
};

void emit(const std::string& path, const std::function<void(std::ostream&)>& write) {
    if (path == "-") {
        write(std::cout);
        std::cout.flush();
        if (!std::cout) throw OutputError("write to standard output failed");
        return;
    }
    try {
        baws::write_file(path, write);
    } catch (const baws::IoError& e) {
        throw OutputError(e.what());
    }
}

baws::ForecastTarget parse_target(const std::string& name, double alpha) {
    if (name == "mean") return baws::Mean{};
    if (name == "var") return baws::VaR{alpha};
    if (name == "vares") return baws::VaRES{alpha};
    throw baws::ConfigError("unknown target '" + name + "' (mean, var, vares)");
}

struct SelectionFlags {
    std::string target = "mean";
    double alpha = 0.95;
    std::size_t t0 = 501;
    double beta = 0.9;
    std::size_t bootstrap_replications = 500;
    std::string mode;  // empty: per-command default
    double block_constant = 1.0;
    std::string control = "pcer";
    std::size_t min_window = 20;
    std::size_t max_window = 0;  // 0: uncapped
    double saws_alpha = 0.1;
    double saws_c = 0.3;
    std::string saws_family = "convex";
};

void add_selection_flags(CLI::App* cmd, SelectionFlags& f) {
    cmd->add_option("--target", f.target, "mean, var or vares")->capture_default_str();
    cmd->add_option("--alpha", f.alpha, "tail level for var and vares")->capture_default_str();
    cmd->add_option("--t0", f.t0, "first forecast index (1-based)")->capture_default_str();
    cmd->add_option("--beta", f.beta, "bootstrap quantile level")->capture_default_str();
    cmd->add_option("-B,--bootstrap-replications", f.bootstrap_replications, "bootstrap replications")
        ->capture_default_str();
    cmd->add_option("--mode", f.mode, "bootstrap resampling: iid or block");
    cmd->add_option("--block-constant", f.block_constant, "block length constant c")->capture_default_str();
    cmd->add_option("--control", f.control, "error control: pcer or fwer")->capture_default_str();
    cmd->add_option("--min-window", f.min_window, "smallest candidate window k0")->capture_default_str();
    cmd->add_option("--max-window", f.max_window, "cap on every window (0 = none)")->capture_default_str();
    cmd->add_option("--saws-alpha", f.saws_alpha, "SAWS threshold exponent parameter")->capture_default_str();
    cmd->add_option("--saws-c", f.saws_c, "SAWS threshold constant")->capture_default_str();
    cmd->add_option("--saws-family", f.saws_family, "SAWS loss family: convex or lipschitz")->capture_default_str();
}

baws::ResampleMode parse_mode(const std::string& s) {
    if (s == "iid") return baws::ResampleMode::IID;
    if (s == "block") return baws::ResampleMode::Block;
    throw baws::ConfigError("unknown bootstrap mode '" + s + "' (iid, block)");
}

baws::BacktestConfig to_config(const SelectionFlags& f, baws::ResampleMode default_mode, std::uint64_t seed) {
    baws::BacktestConfig cfg;
    cfg.target = parse_target(f.target, f.alpha);
    cfg.first_forecast = f.t0;
    cfg.bootstrap.beta = f.beta;
    cfg.bootstrap.replications = f.bootstrap_replications;
    cfg.bootstrap.mode = f.mode.empty() ? default_mode : parse_mode(f.mode);
    cfg.bootstrap.block_constant = f.block_constant;
    cfg.bootstrap.seed = seed;
    if (f.control == "pcer") {
        cfg.bootstrap.control = baws::ErrorControl::PCER;
    } else if (f.control == "fwer") {
        cfg.bootstrap.control = baws::ErrorControl::FWER;
    } else {
        throw baws::ConfigError("unknown error control '" + f.control + "' (pcer, fwer)");
    }
    cfg.grid.min_window = f.min_window;
    if (f.max_window > 0) cfg.grid.max_window = f.max_window;
    cfg.saws.alpha_tau = f.saws_alpha;
    cfg.saws.c_tau = f.saws_c;
    cfg.saws.family = baws::parse_saws_family(f.saws_family);
    return cfg;
}

baws::ValueKind parse_kind(const std::string& s) {
    if (s == "auto") return baws::ValueKind::Auto;
    if (s == "price") return baws::ValueKind::Price;
    if (s == "loss") return baws::ValueKind::Loss;
    throw baws::ConfigError("unknown column kind '" + s + "' (auto, price, loss)");
}

int run(int argc, char** argv) {
    CLI::App app{"Adaptive rolling-window forecasting of means and tail risk"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "baws 1.0.0");
    // Keys match the long flag names, grouped under [simulate], [backtest], ... sections.
    app.set_config("--config", "", "read options from a TOML/INI file; flags win on conflict");
    app.fallthrough();

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a seeded scenario path as CSV");
    std::string sim_scenario;
    std::size_t sim_horizon = 2000;
    std::uint64_t sim_seed = 1;
    double sim_alpha = 0.95;
    std::string sim_out = "-";
    sim->add_option("--scenario", sim_scenario, "A1, A2, A3, B1, B2, B3 or GARCH")->required();
    sim->add_option("--horizon", sim_horizon, "path length T")->capture_default_str();
    sim->add_option("--seed", sim_seed, "random seed")->capture_default_str();
    sim->add_option("--alpha", sim_alpha, "level of the true VaR column")->capture_default_str();
    sim->add_option("-o,--out", sim_out, "output CSV ('-' for stdout)")->capture_default_str();

    // backtest
    auto* bt = app.add_subcommand("backtest", "rolling out-of-sample forecasts from a price or loss CSV");
    std::string bt_input, bt_column, bt_date_column, bt_kind = "auto", bt_method = "BAWS", bt_out = "-", bt_plot;
    std::uint64_t bt_seed = 1;
    std::size_t bt_resume_k = 0;
    SelectionFlags bt_flags;
    bt->add_option("-i,--input", bt_input, "input CSV with (date, price), (date, loss) or (loss)")->required();
    bt->add_option("--column", bt_column, "name of the value column (default: price or loss)");
    bt->add_option("--date-column", bt_date_column, "name of the date column (default: date)");
    bt->add_option("--kind", bt_kind, "auto, price or loss")->capture_default_str();
    bt->add_option("--method", bt_method, "BAWS, SAWS, Full or FixedK (e.g. Fixed250)")->capture_default_str();
    bt->add_option("--seed", bt_seed, "bootstrap seed")->capture_default_str();
    bt->add_option("--resume-k", bt_resume_k, "selected window at t0 - 1 when resuming a run (0 = fresh)");
    bt->add_option("-o,--out", bt_out, "forecast CSV ('-' for stdout)")->capture_default_str();
    bt->add_option("--plot", bt_plot, "also write long-format plot data here");
    add_selection_flags(bt, bt_flags);

    // experiment
    auto* ex = app.add_subcommand("experiment", "replicated simulation study, metrics as CSV");
    std::string ex_scenario, ex_out = "-";
    std::size_t ex_horizon = 2000, ex_reps = 100, ex_workers = 0;
    std::uint64_t ex_seed = 1;
    std::vector<std::string> ex_methods{"BAWS", "Fixed250", "Full"};
    SelectionFlags ex_flags;
    ex->add_option("--scenario", ex_scenario, "A1, A2, A3, B1, B2, B3 or GARCH")->required();
    ex->add_option("--horizon", ex_horizon, "path length T")->capture_default_str();
    ex->add_option("-n,--replications", ex_reps, "number of simulated paths")->capture_default_str();
    ex->add_option("--seed", ex_seed, "master seed")->capture_default_str();
    ex->add_option("--methods", ex_methods, "comma-separated methods")->delimiter(',')->capture_default_str();
    ex->add_option("--workers", ex_workers, "worker threads (default: BAWS_WORKERS or all cores)");
    ex->add_option("-o,--out", ex_out, "metrics CSV ('-' for stdout)")->capture_default_str();
    add_selection_flags(ex, ex_flags);

    // diagnose
    auto* dg = app.add_subcommand("diagnose", "rejection probability of the pairwise test under a Gaussian break");
    double dg_mu1 = 1.0, dg_mu2 = 2.0, dg_var1 = 1.0, dg_var2 = 1.0;
    std::size_t dg_k0 = 100, dg_trials = 0;
    std::vector<std::size_t> dg_k{150, 200, 300, 500};
    std::vector<double> dg_tau{0.05, 0.1, 0.2};
    std::uint64_t dg_seed = 1;
    std::string dg_out = "-";
    dg->add_option("--mu1", dg_mu1, "mean before the break (older data)")->capture_default_str();
    dg->add_option("--mu2", dg_mu2, "mean after the break (recent data)")->capture_default_str();
    dg->add_option("--var1", dg_var1, "variance before the break")->capture_default_str();
    dg->add_option("--var2", dg_var2, "variance after the break")->capture_default_str();
    dg->add_option("--k0", dg_k0, "reference window, equal to the post-break length")->capture_default_str();
    dg->add_option("--k", dg_k, "candidate windows")->delimiter(',')->capture_default_str();
    dg->add_option("--tau", dg_tau, "thresholds")->delimiter(',')->capture_default_str();
    dg->add_option("--mc-trials", dg_trials, "add a simulated rate with this many trials (0 = off)")
        ->capture_default_str();
    dg->add_option("--seed", dg_seed, "seed for the simulated rate")->capture_default_str();
    dg->add_option("-o,--out", dg_out, "output CSV ('-' for stdout)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    if (*sim) {
        const auto scenario = baws::parse_scenario(sim_scenario);
        const auto path = baws::generate(scenario, sim_horizon, sim_seed, sim_alpha);
        emit(sim_out, [&](std::ostream& out) { baws::write_scenario_csv(out, path); });
    } else if (*bt) {
        baws::BacktestConfig cfg = to_config(bt_flags, baws::ResampleMode::Block, bt_seed);
        cfg.method = baws::MethodSpec::parse(bt_method);
        if (bt_resume_k > 0) cfg.initial_prev_k = bt_resume_k;
        cfg.validate();
        const auto series =
            baws::load_series_csv(bt_input, baws::ColumnSpec{parse_kind(bt_kind), bt_column, bt_date_column});
        const auto records = baws::run_backtest(series, cfg);
        emit(bt_out, [&](std::ostream& out) { baws::write_backtest_csv(out, records, cfg.target); });
        if (!bt_plot.empty()) {
            emit(bt_plot, [&](std::ostream& out) { baws::write_plot_csv(out, baws::plot_points(records, cfg.target)); });
        }
    } else if (*ex) {
        baws::ExperimentSpec spec;
        spec.scenario = baws::parse_scenario(ex_scenario);
        const auto default_mode =
            spec.scenario == baws::Scenario::Garch ? baws::ResampleMode::Block : baws::ResampleMode::IID;
        spec.base = to_config(ex_flags, default_mode, ex_seed);
        spec.horizon = ex_horizon;
        spec.replications = ex_reps;
        spec.seed = ex_seed;
        spec.workers = ex_workers;
        for (const auto& m : ex_methods) spec.methods.push_back(baws::MethodSpec::parse(m));
        const auto report = baws::run_experiment(spec);
        emit(ex_out, [&](std::ostream& out) { baws::write_metrics_csv(out, report); });
    } else if (*dg) {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t k : dg_k) {
            for (double tau : dg_tau) {
                const baws::GaussianTwoRegime model{dg_mu1, dg_mu2, dg_var1, dg_var2, k, dg_k0};
                std::vector<std::string> row{std::to_string(k), std::to_string(dg_k0), baws::format_number(tau),
                                             baws::format_number(baws::rejection_probability_gaussian(model, tau))};
                if (dg_trials > 0) {
                    const auto seed = baws::mix_key({dg_seed, k, static_cast<std::uint64_t>(rows.size())});
                    row.push_back(baws::format_number(baws::simulate_rejection_rate(model, tau, dg_trials, seed)));
                }
                rows.push_back(std::move(row));
            }
        }
        emit(dg_out, [&](std::ostream& out) {
            out << "k,k0,tau,probability" << (dg_trials > 0 ? ",simulated" : "") << '\n';
            for (const auto& row : rows) {
                for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
                out << '\n';
            }
        });
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const OutputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    } catch (const baws::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kUsage;
    } catch (const baws::ParameterError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kUsage;
    } catch (const baws::ParseError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const baws::IoError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const baws::DomainError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
}
