#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qtmrl/experiment.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::string profile = "desk";
    std::optional<std::uint64_t> seed;
};

qtmrl::ExperimentConfig resolve_config(const CommonOpts& opts) {
    qtmrl::ExperimentConfig cfg = qtmrl::load_config(opts.config_path);
    cfg.apply_profile(opts.profile);
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    if (opts.seed) cfg.seeds = {*opts.seed};
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_seed = true) {
    cmd->add_option("--config", opts.config_path, "experiment config JSON")->required();
    cmd->add_option("--out", opts.out_dir, "output directory (overrides the config)");
    cmd->add_option("--profile", opts.profile, "desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}));
    if (with_seed) cmd->add_option("--seed", opts.seed, "override the configured seeds");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"quantitative trading research pipeline"};
    app.require_subcommand(1);

    CommonOpts ingest_opts, features_opts, train_opts, backtest_opts;
    std::string backtest_strategy;
    std::string checkpoint;
    bool parallel_seeds = false;
    std::string report_run_dir, report_out = "report";

    CLI::App* ingest = app.add_subcommand("ingest", "load, clean and cache OHLCV data");
    add_common(ingest, ingest_opts, false);

    CLI::App* features = app.add_subcommand("features", "build the indicator feature cache");
    add_common(features, features_opts, false);

    CLI::App* train = app.add_subcommand("train", "train the A2C agent on the train split");
    add_common(train, train_opts);

    CLI::App* backtest = app.add_subcommand("backtest", "evaluate a strategy on the test split");
    add_common(backtest, backtest_opts);
    backtest->add_option("--strategy", backtest_strategy,
                         "qtmrl|a2c|random|ma10|ma20|ma30|index|arima (default: config)");
    backtest->add_option("--checkpoint", checkpoint, "checkpoint file for RL strategies");
    backtest->add_flag("--parallel-seeds", parallel_seeds,
                       "run the configured seeds concurrently");

    CLI::App* report = app.add_subcommand("report", "merge backtests into a comparison table");
    report->add_option("--run", report_run_dir, "run directory with backtest outputs")->required();
    report->add_option("--out", report_out, "report subdirectory name");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) {
            qtmrl::cmd_ingest(resolve_config(ingest_opts));
        } else if (features->parsed()) {
            qtmrl::cmd_features(resolve_config(features_opts));
        } else if (train->parsed()) {
            qtmrl::ExperimentConfig cfg = resolve_config(train_opts);
            qtmrl::TrainOutcome outcome = qtmrl::cmd_train(cfg, cfg.seeds.front());
            std::cout << "checkpoint: " << outcome.checkpoint_path << "\n"
                      << "training log: " << outcome.log_path << "\n"
                      << "updates: " << outcome.updates
                      << (outcome.aborted ? " (aborted, last good state kept)" : "") << "\n";
        } else if (backtest->parsed()) {
            qtmrl::ExperimentConfig cfg = resolve_config(backtest_opts);
            const std::string strategy =
                backtest_strategy.empty() ? cfg.strategy : backtest_strategy;
            std::optional<std::string> ckpt;
            if (!checkpoint.empty()) ckpt = checkpoint;
            qtmrl::BacktestOutcome outcome =
                qtmrl::cmd_backtest(cfg, strategy, ckpt, parallel_seeds);
            std::cout << "table: " << outcome.table_path << "\n";
            for (const auto& p : outcome.report_paths) std::cout << "report: " << p << "\n";
        } else if (report->parsed()) {
            qtmrl::cmd_report(report_run_dir, report_out);
            std::cout << "report: " << report_run_dir << "/" << report_out << "/comparison.csv\n";
        }
    } catch (const qtmrl::Error& e) {
        std::cerr << "error[" << e.error_class() << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error[internal]: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
