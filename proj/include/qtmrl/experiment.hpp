#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qtmrl/a2c.hpp"
#include "qtmrl/baselines.hpp"
#include "qtmrl/indicators.hpp"
#include "qtmrl/market_data.hpp"
#include "qtmrl/metrics.hpp"
#include "qtmrl/trading_env.hpp"

namespace qtmrl {

/// Full experiment description. All fields default to the standard setup
/// (10k capital, 5bp fee, W=20, gamma=0.96, seed 42, the ten-indicator
/// feature set) so an empty JSON object is a valid config. The resolved
/// config's hash is embedded in every output file.
struct ExperimentConfig {
    std::string source;                       // OHLCV CSV path
    std::vector<std::string> tickers;
    Date train_start{2010, 1, 1};
    Date train_end{2019, 12, 31};
    Date test_start{2020, 1, 1};
    Date test_end{2020, 12, 31};
    std::vector<IndicatorSpec> indicators;    // empty = OHLCV-only features
    EnvConfig env;
    A2CConfig a2c;
    std::string strategy = "qtmrl";
    ArimaStrategyConfig arima;
    RandomStrategyProbs random_probs;
    std::vector<std::uint64_t> seeds = {42};
    std::string out_dir = "runs/default";

    /// "desk" leaves the config as loaded; "paper" switches to the
    /// full-scale profile (16-stock universe, 1M timesteps).
    void apply_profile(const std::string& profile);

    std::string canonical_json() const;  // resolved, key-sorted
    std::string hash() const;            // fnv1a64 of canonical_json()
};

/// Parses a config file, filling defaults for absent fields. Unknown keys
/// raise Error("bad-config") naming the key.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text);

/// Strategy registry: qtmrl, a2c, random, ma10, ma20, ma30, index, arima.
/// Maps the CLI key to the display name used in reports.
std::string strategy_display_name(const std::string& key);
bool strategy_needs_checkpoint(const std::string& key);

// Pipeline stages. Each stage consumes only the previous stage's cache and
// writes its artifacts plus a manifest under out_dir.

/// load -> clean -> cache. Writes ingest.csv + ingest_manifest.json.
/// Rerunning on unchanged inputs reproduces identical bytes.
void cmd_ingest(const ExperimentConfig& config);

/// Feature matrix over the ingest cache. Writes features.csv +
/// features_manifest.json (feature names, warmup rows truncated).
void cmd_features(const ExperimentConfig& config);

struct TrainOutcome {
    std::string checkpoint_path;
    std::string log_path;
    long long updates = 0;
    bool aborted = false;
};

/// A2C training over the train split of the feature cache. Writes
/// checkpoints, training_log.csv and train_summary.json.
TrainOutcome cmd_train(const ExperimentConfig& config, std::uint64_t seed);

struct BacktestOutcome {
    std::vector<std::string> report_paths;  // one per seed
    std::string table_path;                 // per-seed rows + mean row
};

/// Greedy policy execution for RL checkpoints, signal execution for
/// baselines, over the test split. Emits metrics JSON, the table CSV row
/// format, trade logs and equity curves. `parallel_seeds` runs the
/// configured seeds concurrently in isolated subdirectories.
BacktestOutcome cmd_backtest(const ExperimentConfig& config, const std::string& strategy,
                             const std::optional<std::string>& checkpoint_path,
                             bool parallel_seeds = false);

/// Merges every backtest report under the run directory into the
/// comparison table, grouped by year and sorted by strategy, and emits
/// per-strategy equity-curve CSVs for plotting.
void cmd_report(const std::string& run_dir, const std::string& out_subdir = "report");

// Cache IO shared by the stages and the test suites.
MarketFrame read_ingest_cache(const std::string& out_dir);
FeatureFrame read_feature_cache(const std::string& out_dir);
void write_equity_csv(const EquityCurve& curve, const std::string& path);

}  // namespace qtmrl
