#include "qtmrl/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "qtmrl/csv.hpp"
#include "qtmrl/hash.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace qtmrl {

namespace {

const std::vector<std::string> kPaperUniverse = {
    "CCL", "RCL", "AAL", "UAL", "DAL", "MRO",  "OXY", "WYNN", "LVS",
    "AAPL", "AXP", "BAC", "CVX", "GOOGL", "JNJ", "MSFT", "NVDA"};

void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw Error("bad-config", "unknown key '" + key + "' in " + where);
        }
    }
}

IndicatorSpec indicator_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    IndicatorSpec spec;
    if (kind == "sma" || kind == "ema" || kind == "stddev" || kind == "atr" || kind == "rsi") {
        reject_unknown_keys(j, {"kind", "period"}, "indicator '" + kind + "'");
        spec.kind = kind == "sma"     ? IndicatorKind::Sma
                    : kind == "ema"   ? IndicatorKind::Ema
                    : kind == "stddev" ? IndicatorKind::Stddev
                    : kind == "atr"   ? IndicatorKind::Atr
                                      : IndicatorKind::Rsi;
        spec.period = j.at("period").get<int>();
    } else if (kind == "bollinger") {
        reject_unknown_keys(j, {"kind", "period", "k"}, "indicator 'bollinger'");
        spec.kind = IndicatorKind::Bollinger;
        spec.period = j.at("period").get<int>();
        spec.k = j.value("k", 2.0);
    } else if (kind == "macd") {
        reject_unknown_keys(j, {"kind", "fast", "slow", "signal"}, "indicator 'macd'");
        spec.kind = IndicatorKind::Macd;
        spec.fast = j.value("fast", 12);
        spec.slow = j.value("slow", 26);
        spec.signal = j.value("signal", 9);
    } else if (kind == "heiken_ashi") {
        reject_unknown_keys(j, {"kind"}, "indicator 'heiken_ashi'");
        spec.kind = IndicatorKind::HeikenAshi;
    } else if (kind == "ichimoku") {
        reject_unknown_keys(j, {"kind", "p_conv", "p_base", "p_span"}, "indicator 'ichimoku'");
        spec.kind = IndicatorKind::Ichimoku;
        spec.p_conv = j.value("p_conv", 9);
        spec.p_base = j.value("p_base", 26);
        spec.p_span = j.value("p_span", 52);
    } else if (kind == "supertrend") {
        reject_unknown_keys(j, {"kind", "period", "multiplier"}, "indicator 'supertrend'");
        spec.kind = IndicatorKind::SuperTrend;
        spec.period = j.value("period", 10);
        spec.multiplier = j.value("multiplier", 3.0);
    } else {
        throw Error("bad-config", "unknown indicator kind '" + kind + "'");
    }
    spec.validate();
    return spec;
}

json indicator_to_json(const IndicatorSpec& spec) {
    json j;
    switch (spec.kind) {
        case IndicatorKind::Sma: j["kind"] = "sma"; j["period"] = spec.period; break;
        case IndicatorKind::Ema: j["kind"] = "ema"; j["period"] = spec.period; break;
        case IndicatorKind::Stddev: j["kind"] = "stddev"; j["period"] = spec.period; break;
        case IndicatorKind::Atr: j["kind"] = "atr"; j["period"] = spec.period; break;
        case IndicatorKind::Rsi: j["kind"] = "rsi"; j["period"] = spec.period; break;
        case IndicatorKind::Bollinger:
            j["kind"] = "bollinger";
            j["period"] = spec.period;
            j["k"] = spec.k;
            break;
        case IndicatorKind::Macd:
            j["kind"] = "macd";
            j["fast"] = spec.fast;
            j["slow"] = spec.slow;
            j["signal"] = spec.signal;
            break;
        case IndicatorKind::HeikenAshi: j["kind"] = "heiken_ashi"; break;
        case IndicatorKind::Ichimoku:
            j["kind"] = "ichimoku";
            j["p_conv"] = spec.p_conv;
            j["p_base"] = spec.p_base;
            j["p_span"] = spec.p_span;
            break;
        case IndicatorKind::SuperTrend:
            j["kind"] = "supertrend";
            j["period"] = spec.period;
            j["multiplier"] = spec.multiplier;
            break;
    }
    return j;
}

Date date_from_json(const json& j) { return Date::parse(j.get<std::string>()); }

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("missing-file", "cannot create directory '" + dir + "'");
}

std::string joined_feature_names_hash(const std::vector<std::string>& names) {
    std::string joined;
    for (const auto& n : names) {
        joined += n;
        joined += '\n';
    }
    return hex64(fnv1a64(joined));
}

}  // namespace

void ExperimentConfig::apply_profile(const std::string& profile) {
    if (profile == "desk" || profile.empty()) return;
    if (profile == "paper") {
        tickers = kPaperUniverse;
        a2c.total_timesteps = 1000000;
        return;
    }
    throw Error("bad-config", "unknown profile '" + profile + "' (expected desk or paper)");
}

std::string ExperimentConfig::canonical_json() const {
    json j;
    j["source"] = source;
    j["tickers"] = tickers;
    j["train_range"] = {train_start.to_string(), train_end.to_string()};
    j["test_range"] = {test_start.to_string(), test_end.to_string()};
    json specs = json::array();
    for (const auto& spec : indicators) specs.push_back(indicator_to_json(spec));
    j["indicators"] = specs;
    j["env"] = {{"initial_capital", env.initial_capital},
                {"fee_rate", env.fee_rate},
                {"window", env.window},
                {"buy_fraction", env.buy_fraction},
                {"sell_fraction", env.sell_fraction},
                {"invalid_penalty", env.invalid_penalty},
                {"episode_length", env.episode_length}};
    j["a2c"] = {{"gamma", a2c.gamma},
                {"rollout", a2c.rollout},
                {"value_coef", a2c.value_coef},
                {"entropy_coef", a2c.entropy_coef},
                {"learning_rate", a2c.learning_rate},
                {"total_timesteps", a2c.total_timesteps},
                {"seed", a2c.seed},
                {"hidden", a2c.hidden},
                {"checkpoint_interval", a2c.checkpoint_interval},
                {"grad_clip", a2c.grad_clip},
                {"normalize_advantages", a2c.normalize_advantages}};
    j["strategy"] = strategy;
    j["arima"] = {{"p", arima.p},
                  {"threshold", arima.threshold},
                  {"refit_interval", arima.refit_interval},
                  {"fit_window", arima.fit_window}};
    j["random_probs"] = {{"buy", random_probs.buy},
                         {"sell", random_probs.sell},
                         {"hold", random_probs.hold}};
    j["seeds"] = seeds;
    // out_dir is deliberately absent: where a run writes does not change
    // what it computes, and runs in two directories must hash equal.
    return j.dump();
}

std::string ExperimentConfig::hash() const { return hex64(fnv1a64(canonical_json())); }

ExperimentConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error("bad-config", std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown_keys(j,
                        {"source", "tickers", "train_range", "test_range", "indicators", "env",
                         "a2c", "strategy", "arima", "random_probs", "seeds", "out_dir"},
                        "config");

    ExperimentConfig cfg;
    cfg.indicators = default_indicator_set();
    cfg.source = j.value("source", cfg.source);
    if (j.contains("tickers")) cfg.tickers = j.at("tickers").get<std::vector<std::string>>();
    if (j.contains("train_range")) {
        cfg.train_start = date_from_json(j.at("train_range").at(0));
        cfg.train_end = date_from_json(j.at("train_range").at(1));
    }
    if (j.contains("test_range")) {
        cfg.test_start = date_from_json(j.at("test_range").at(0));
        cfg.test_end = date_from_json(j.at("test_range").at(1));
    }
    if (j.contains("indicators")) {
        const json& ind = j.at("indicators");
        if (ind.is_string()) {
            const std::string mode = ind.get<std::string>();
            if (mode == "full") {
                cfg.indicators = default_indicator_set();
            } else if (mode == "none") {
                cfg.indicators.clear();
            } else {
                throw Error("bad-config", "indicators must be 'full', 'none', or an array");
            }
        } else {
            cfg.indicators.clear();
            for (const auto& item : ind) cfg.indicators.push_back(indicator_from_json(item));
        }
    }
    if (j.contains("env")) {
        const json& e = j.at("env");
        reject_unknown_keys(e,
                            {"initial_capital", "fee_rate", "window", "buy_fraction",
                             "sell_fraction", "invalid_penalty", "episode_length"},
                            "env");
        cfg.env.initial_capital = e.value("initial_capital", cfg.env.initial_capital);
        cfg.env.fee_rate = e.value("fee_rate", cfg.env.fee_rate);
        cfg.env.window = e.value("window", cfg.env.window);
        cfg.env.buy_fraction = e.value("buy_fraction", cfg.env.buy_fraction);
        cfg.env.sell_fraction = e.value("sell_fraction", cfg.env.sell_fraction);
        cfg.env.invalid_penalty = e.value("invalid_penalty", cfg.env.invalid_penalty);
        cfg.env.episode_length = e.value("episode_length", cfg.env.episode_length);
        cfg.env.validate();
    }
    if (j.contains("a2c")) {
        const json& a = j.at("a2c");
        reject_unknown_keys(a,
                            {"gamma", "rollout", "value_coef", "entropy_coef", "learning_rate",
                             "total_timesteps", "seed", "hidden", "checkpoint_interval",
                             "grad_clip", "normalize_advantages"},
                            "a2c");
        cfg.a2c.gamma = a.value("gamma", cfg.a2c.gamma);
        cfg.a2c.rollout = a.value("rollout", cfg.a2c.rollout);
        cfg.a2c.value_coef = a.value("value_coef", cfg.a2c.value_coef);
        cfg.a2c.entropy_coef = a.value("entropy_coef", cfg.a2c.entropy_coef);
        cfg.a2c.learning_rate = a.value("learning_rate", cfg.a2c.learning_rate);
        cfg.a2c.total_timesteps = a.value("total_timesteps", cfg.a2c.total_timesteps);
        cfg.a2c.seed = a.value("seed", cfg.a2c.seed);
        if (a.contains("hidden")) cfg.a2c.hidden = a.at("hidden").get<std::vector<std::size_t>>();
        cfg.a2c.checkpoint_interval = a.value("checkpoint_interval", cfg.a2c.checkpoint_interval);
        cfg.a2c.grad_clip = a.value("grad_clip", cfg.a2c.grad_clip);
        cfg.a2c.normalize_advantages =
            a.value("normalize_advantages", cfg.a2c.normalize_advantages);
        cfg.a2c.validate();
    }
    cfg.strategy = j.value("strategy", cfg.strategy);
    if (j.contains("arima")) {
        const json& a = j.at("arima");
        reject_unknown_keys(a, {"p", "threshold", "refit_interval", "fit_window"}, "arima");
        cfg.arima.p = a.value("p", cfg.arima.p);
        cfg.arima.threshold = a.value("threshold", cfg.arima.threshold);
        cfg.arima.refit_interval = a.value("refit_interval", cfg.arima.refit_interval);
        cfg.arima.fit_window = a.value("fit_window", cfg.arima.fit_window);
    }
    if (j.contains("random_probs")) {
        const json& r = j.at("random_probs");
        reject_unknown_keys(r, {"buy", "sell", "hold"}, "random_probs");
        cfg.random_probs.buy = r.value("buy", cfg.random_probs.buy);
        cfg.random_probs.sell = r.value("sell", cfg.random_probs.sell);
        cfg.random_probs.hold = r.value("hold", cfg.random_probs.hold);
    }
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (cfg.seeds.empty()) throw Error("bad-config", "seeds must not be empty");
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("missing-file", "cannot open config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_json_text(buf.str());
}

std::string strategy_display_name(const std::string& key) {
    if (key == "qtmrl") return "QTMRL";
    if (key == "a2c") return "A2C";
    if (key == "random") return "Random Strategy";
    if (key == "ma10") return "10-Day Moving Average Strategy";
    if (key == "ma20") return "20-Day Moving Average Strategy";
    if (key == "ma30") return "30-Day Moving Average Strategy";
    if (key == "index") return "Dow Jones Tracking Strategy";
    if (key == "arima") return "ARIMA";
    throw Error("bad-config", "unknown strategy '" + key + "'");
}

bool strategy_needs_checkpoint(const std::string& key) {
    return key == "qtmrl" || key == "a2c";
}

// ---------------------------------------------------------------------------
// ingest

void cmd_ingest(const ExperimentConfig& config) {
    ensure_dir(config.out_dir);
    MarketFrame frame =
        clean(load_ohlcv(config.source, config.tickers, config.train_start, config.test_end));

    const std::string cache_path = config.out_dir + "/ingest.csv";
    {
        std::ofstream out(cache_path);
        if (!out) throw Error("missing-file", "cannot write '" + cache_path + "'");
        out << "date,ticker,open,high,low,close,volume\n";
        for (std::size_t i = 0; i < frame.asset_count(); ++i) {
            for (const Bar& bar : frame.series[i].bars) {
                out << bar.date.to_string() << ',' << frame.tickers[i] << ','
                    << format_double(bar.open) << ',' << format_double(bar.high) << ','
                    << format_double(bar.low) << ',' << format_double(bar.close) << ','
                    << format_double(bar.volume) << '\n';
            }
        }
    }

    json manifest;
    manifest["schema_version"] = 1;
    manifest["config_hash"] = config.hash();
    manifest["source_path"] = config.source;
    manifest["source_fingerprint"] = file_fingerprint(config.source);
    manifest["cache_fingerprint"] = file_fingerprint(cache_path);
    manifest["tickers"] = frame.tickers;
    manifest["rows"] = frame.length();
    manifest["calendar_start"] = frame.calendar.front().to_string();
    manifest["calendar_end"] = frame.calendar.back().to_string();
    std::ofstream mf(config.out_dir + "/ingest_manifest.json");
    mf << manifest.dump(1) << "\n";
}

MarketFrame read_ingest_cache(const std::string& out_dir) {
    const std::string manifest_path = out_dir + "/ingest_manifest.json";
    std::ifstream mf(manifest_path);
    if (!mf) {
        throw Error("missing-cache",
                    "no ingest cache under '" + out_dir + "' (run the ingest stage first)");
    }
    json manifest;
    mf >> manifest;
    const auto tickers = manifest.at("tickers").get<std::vector<std::string>>();
    const Date from = Date::parse(manifest.at("calendar_start").get<std::string>());
    const Date to = Date::parse(manifest.at("calendar_end").get<std::string>());
    // The cache is already aligned and filled; clean() here is a no-op pass
    // that revalidates the invariants.
    return clean(load_ohlcv(out_dir + "/ingest.csv", tickers, from, to));
}

// ---------------------------------------------------------------------------
// features

void cmd_features(const ExperimentConfig& config) {
    MarketFrame frame = read_ingest_cache(config.out_dir);
    FeatureFrame features = build_feature_matrix(frame, config.indicators);

    const std::string cache_path = config.out_dir + "/features.csv";
    {
        std::ofstream out(cache_path);
        if (!out) throw Error("missing-file", "cannot write '" + cache_path + "'");
        out << "date,ticker";
        for (const auto& name : features.feature_names) out << ',' << name;
        out << '\n';
        for (std::size_t t = 0; t < features.length(); ++t) {
            for (std::size_t i = 0; i < features.asset_count(); ++i) {
                out << features.calendar[t].to_string() << ',' << features.tickers[i];
                for (std::size_t f = 0; f < features.feature_count(); ++f) {
                    out << ',' << format_double(features.value(t, i, f));
                }
                out << '\n';
            }
        }
    }

    json manifest;
    manifest["schema_version"] = 1;
    manifest["config_hash"] = config.hash();
    manifest["ingest_fingerprint"] = file_fingerprint(config.out_dir + "/ingest.csv");
    manifest["cache_fingerprint"] = file_fingerprint(cache_path);
    manifest["tickers"] = features.tickers;
    manifest["feature_names"] = features.feature_names;
    manifest["feature_names_hash"] = joined_feature_names_hash(features.feature_names);
    manifest["rows"] = features.length();
    manifest["warmup_rows_truncated"] = frame.length() - features.length();
    std::ofstream mf(config.out_dir + "/features_manifest.json");
    mf << manifest.dump(1) << "\n";
}

FeatureFrame read_feature_cache(const std::string& out_dir) {
    const std::string manifest_path = out_dir + "/features_manifest.json";
    std::ifstream mf(manifest_path);
    if (!mf) {
        throw Error("missing-cache",
                    "no feature cache under '" + out_dir + "' (run the features stage first)");
    }
    json manifest;
    mf >> manifest;

    FeatureFrame features;
    features.tickers = manifest.at("tickers").get<std::vector<std::string>>();
    features.feature_names = manifest.at("feature_names").get<std::vector<std::string>>();
    const std::size_t rows = manifest.at("rows").get<std::size_t>();
    const std::size_t n_assets = features.tickers.size();
    const std::size_t n_features = features.feature_names.size();
    features.values.resize(rows * n_assets * n_features);
    features.calendar.reserve(rows);

    CsvReader csv(out_dir + "/features.csv");
    const std::size_t c_date = csv.column("date");
    const std::size_t c_ticker = csv.column("ticker");
    std::vector<std::size_t> c_feat(n_features);
    for (std::size_t f = 0; f < n_features; ++f) c_feat[f] = csv.column(features.feature_names[f]);

    std::size_t t = 0, i = 0;
    while (csv.next_row()) {
        if (t >= rows) throw Error("corrupt-row", "feature cache has more rows than its manifest");
        if (csv.field(c_ticker) != features.tickers[i]) {
            throw Error("corrupt-row", "feature cache row " + std::to_string(csv.line_number()) +
                                           " breaks the ticker ordering");
        }
        const Date d = csv.date(c_date);
        if (i == 0) {
            features.calendar.push_back(d);
        } else if (!(features.calendar[t] == d)) {
            throw Error("corrupt-row", "feature cache row " + std::to_string(csv.line_number()) +
                                           " breaks the date grouping");
        }
        for (std::size_t f = 0; f < n_features; ++f) {
            features.value(t, i, f) = csv.number(c_feat[f]);
        }
        if (++i == n_assets) {
            i = 0;
            ++t;
        }
    }
    if (t != rows || i != 0) {
        throw Error("corrupt-row", "feature cache is truncated relative to its manifest");
    }
    return features;
}

// ---------------------------------------------------------------------------
// train

namespace {

// Price rows matching a feature calendar (features lose the warmup prefix).
MarketFrame align_prices(const MarketFrame& prices, const std::vector<Date>& calendar) {
    auto it = std::lower_bound(prices.calendar.begin(), prices.calendar.end(), calendar.front());
    if (it == prices.calendar.end() || !(*it == calendar.front())) {
        throw Error("dim-mismatch", "feature calendar does not align with the price cache");
    }
    const std::size_t offset = static_cast<std::size_t>(it - prices.calendar.begin());
    MarketFrame out = prices.slice(offset, offset + calendar.size());
    if (!(out.calendar == calendar)) {
        throw Error("dim-mismatch", "feature calendar does not align with the price cache");
    }
    return out;
}

std::string checkpoint_path_for(const std::string& out_dir, std::uint64_t seed) {
    return out_dir + "/checkpoint_s" + std::to_string(seed) + "_final.json";
}

}  // namespace

TrainOutcome cmd_train(const ExperimentConfig& config, std::uint64_t seed) {
    ensure_dir(config.out_dir);
    MarketFrame prices = read_ingest_cache(config.out_dir);
    FeatureFrame features = read_feature_cache(config.out_dir);

    auto [train_features, test_features] =
        features.split_by_date(config.train_end, config.test_start, config.test_end);
    const NormStats stats = compute_norm_stats(train_features);
    FeatureFrame normalized = zscore(train_features, stats);
    MarketFrame train_prices = align_prices(prices, train_features.calendar);

    TradingEnv env(config.env, &train_prices, &normalized);
    A2CConfig a2c_cfg = config.a2c;
    a2c_cfg.seed = seed;

    const std::string feature_hash = joined_feature_names_hash(features.feature_names);
    const std::string config_hash = config.hash();
    auto make_ckpt = [&](const MlpParams& actor, const MlpParams& critic) {
        Checkpoint ckpt;
        ckpt.config_hash = config_hash;
        ckpt.feature_names_hash = feature_hash;
        ckpt.actor = actor;
        ckpt.critic = critic;
        ckpt.norm_mean = stats.mean;
        ckpt.norm_stddev = stats.stddev;
        return ckpt;
    };

    UpdateHook hook = nullptr;
    if (a2c_cfg.checkpoint_interval > 0) {
        hook = [&](const TrainLogRow& row, const MlpParams& actor, const MlpParams& critic) {
            if (row.update_idx % a2c_cfg.checkpoint_interval == 0) {
                save_checkpoint(make_ckpt(actor, critic),
                                config.out_dir + "/checkpoint_s" + std::to_string(seed) + "_u" +
                                    std::to_string(row.update_idx) + ".json");
            }
        };
    }

    TrainResult result = train(env, a2c_cfg, hook);

    TrainOutcome outcome;
    outcome.checkpoint_path = checkpoint_path_for(config.out_dir, seed);
    outcome.log_path = config.out_dir + "/training_log_s" + std::to_string(seed) + ".csv";
    outcome.updates = static_cast<long long>(result.log.size());
    outcome.aborted = result.aborted;

    save_checkpoint(make_ckpt(result.actor, result.critic), outcome.checkpoint_path);
    write_training_log(result.log, outcome.log_path);

    json summary;
    summary["config_hash"] = config_hash;
    summary["feature_names_hash"] = feature_hash;
    summary["seed"] = seed;
    summary["timesteps"] = result.timesteps;
    summary["updates"] = outcome.updates;
    summary["aborted"] = result.aborted;
    summary["abort_reason"] = result.abort_reason;
    summary["final_equity"] = result.log.empty() ? config.env.initial_capital
                                                 : result.log.back().equity;
    std::ofstream sf(config.out_dir + "/train_summary_s" + std::to_string(seed) + ".json");
    sf << summary.dump(1) << "\n";
    return outcome;
}

// ---------------------------------------------------------------------------
// backtest

namespace {

struct BacktestData {
    MarketFrame prices;        // rows [0, end]; trading starts at start_index
    std::size_t start_index;   // first decision day (= first test date)
};

// The frame used for a backtest keeps the pre-test history so strategy
// warmups and observation windows reach back without touching test rows
// for anything but trading.
BacktestData test_window(const MarketFrame& prices, const Date& test_start,
                         const Date& test_end) {
    auto lo = std::lower_bound(prices.calendar.begin(), prices.calendar.end(), test_start);
    auto hi = std::upper_bound(prices.calendar.begin(), prices.calendar.end(), test_end);
    if (lo >= hi) {
        throw Error("empty-range", "no test rows between " + test_start.to_string() + " and " +
                                       test_end.to_string());
    }
    BacktestData data;
    data.start_index = static_cast<std::size_t>(lo - prices.calendar.begin());
    data.prices = prices.slice(0, static_cast<std::size_t>(hi - prices.calendar.begin()));
    if (data.start_index + 1 >= data.prices.length()) {
        throw Error("empty-range", "test range has no step to trade");
    }
    return data;
}

EquityCurve curve_from(const std::vector<Date>& dates, const std::vector<double>& values) {
    EquityCurve c;
    c.dates = dates;
    c.values = values;
    return c;
}

BaselineRun run_rl_greedy(const ExperimentConfig& config, const Checkpoint& ckpt,
                          const MarketFrame& prices, const FeatureFrame& features) {
    NormStats stats;
    stats.mean = ckpt.norm_mean;
    stats.stddev = ckpt.norm_stddev;
    FeatureFrame normalized = zscore(features, stats);

    // Feature rows covering [test_start - (W-1), test_end].
    auto lo = std::lower_bound(normalized.calendar.begin(), normalized.calendar.end(),
                               config.test_start);
    auto hi = std::upper_bound(normalized.calendar.begin(), normalized.calendar.end(),
                               config.test_end);
    if (lo >= hi) throw Error("empty-range", "no test rows in the feature cache");
    const std::size_t w = static_cast<std::size_t>(config.env.window);
    const std::size_t first_test = static_cast<std::size_t>(lo - normalized.calendar.begin());
    if (first_test + 1 < w) {
        throw Error("short-series", "not enough history before the test range for one window");
    }
    const std::size_t begin = first_test - (w - 1);
    const std::size_t end = static_cast<std::size_t>(hi - normalized.calendar.begin());
    FeatureFrame obs = normalized.slice(begin, end);
    MarketFrame price_slice = align_prices(prices, obs.calendar);

    EnvConfig env_cfg = config.env;
    env_cfg.episode_length = static_cast<int>(obs.length());
    TradingEnv env(env_cfg, &price_slice, &obs);
    env.reset(w - 1);

    const std::size_t in_expected = ckpt.actor.input_size();
    std::vector<Date> dates = {price_slice.calendar[env.current_index()]};
    std::vector<double> equity = {env.equity()};
    while (!env.done()) {
        const MarketState state = env.observe();
        std::vector<double> input = state_to_input(state, env);
        if (input.size() != in_expected) {
            throw Error("checkpoint-mismatch",
                        "checkpoint expects input size " + std::to_string(in_expected) +
                            ", environment produces " + std::to_string(input.size()));
        }
        const std::vector<double> logits = forward(ckpt.actor, input);
        std::size_t best = 0;
        for (std::size_t a = 1; a < logits.size(); ++a) {
            if (logits[a] > logits[best]) best = a;
        }
        env.step(ActionCode{static_cast<std::uint32_t>(best)});
        dates.push_back(price_slice.calendar[env.current_index()]);
        equity.push_back(env.equity());
    }

    BaselineRun run;
    run.strategy = "greedy-policy";
    run.account_names = {"PORTFOLIO"};
    run.dates.push_back(std::move(dates));
    run.equity.push_back(std::move(equity));
    run.trades = env.trade_log();
    return run;
}

void write_equity_table(const BaselineRun& run, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("missing-file", "cannot write '" + path + "'");
    out << "date";
    for (const auto& name : run.account_names) out << ',' << name;
    out << '\n';
    const std::size_t len = run.dates.front().size();
    for (std::size_t t = 0; t < len; ++t) {
        out << run.dates.front()[t].to_string();
        for (std::size_t acct = 0; acct < run.equity.size(); ++acct) {
            out << ',' << format_double(run.equity[acct][t]);
        }
        out << '\n';
    }
}

MetricsReport backtest_one_seed(const ExperimentConfig& config, const std::string& strategy,
                                const std::optional<std::string>& checkpoint_path,
                                std::uint64_t seed, const MarketFrame& prices,
                                const std::optional<FeatureFrame>& features) {
    BacktestData data = test_window(prices, config.test_start, config.test_end);
    const std::string display = strategy_display_name(strategy);

    BaselineRun run;
    if (strategy == "random") {
        SignalMatrix signals = random_signals(data.prices.length(), data.prices.asset_count(),
                                              config.random_probs, seed);
        run = run_rule_based(display, config.env, data.prices, signals, data.start_index);
    } else if (strategy == "ma10" || strategy == "ma20" || strategy == "ma30") {
        const int period = strategy == "ma10" ? 10 : strategy == "ma20" ? 20 : 30;
        SignalMatrix signals;
        signals.days = data.prices.length();
        signals.assets = data.prices.asset_count();
        signals.ops.resize(signals.days * signals.assets, TradeOp::Hold);
        for (std::size_t i = 0; i < signals.assets; ++i) {
            Series close(data.prices.length());
            for (std::size_t t = 0; t < close.size(); ++t) {
                close[t] = data.prices.series[i].bars[t].close;
            }
            std::vector<TradeOp> ops = ma_crossover(close, period);
            for (std::size_t t = 0; t < ops.size(); ++t) signals.at(t, i) = ops[t];
        }
        run = run_rule_based(display, config.env, data.prices, signals, data.start_index);
    } else if (strategy == "arima") {
        SignalMatrix signals = arima_signals(data.prices, config.arima);
        run = run_rule_based(display, config.env, data.prices, signals, data.start_index);
    } else if (strategy == "index") {
        run = run_index_tracking(config.env, data.prices, data.start_index);
    } else if (strategy_needs_checkpoint(strategy)) {
        if (!checkpoint_path) {
            throw Error("bad-config", "strategy '" + strategy + "' needs a checkpoint");
        }
        if (!features) throw Error("missing-cache", "RL backtests need the feature cache");
        Checkpoint ckpt = load_checkpoint(*checkpoint_path);
        run = run_rl_greedy(config, ckpt, prices, *features);
    } else {
        throw Error("bad-config", "unknown strategy '" + strategy + "'");
    }

    std::vector<EquityCurve> curves;
    for (std::size_t acct = 0; acct < run.account_names.size(); ++acct) {
        curves.push_back(curve_from(run.dates[acct], run.equity[acct]));
    }
    MetricsReport report = make_report(display, config.test_start.year, seed, config.hash(),
                                       run.account_names, curves);

    const std::string tag = strategy + "_s" + std::to_string(seed);
    write_report_json(report, config.out_dir + "/metrics_" + tag + ".json");
    write_trade_log(run.trades, config.out_dir + "/trades_" + tag + ".csv");
    write_equity_table(run, config.out_dir + "/equity_" + tag + ".csv");
    return report;
}

}  // namespace

BacktestOutcome cmd_backtest(const ExperimentConfig& config, const std::string& strategy,
                             const std::optional<std::string>& checkpoint_path,
                             bool parallel_seeds) {
    ensure_dir(config.out_dir);
    MarketFrame prices = read_ingest_cache(config.out_dir);
    std::optional<FeatureFrame> features;
    if (strategy_needs_checkpoint(strategy)) {
        features = read_feature_cache(config.out_dir);
    }
    std::optional<std::string> ckpt = checkpoint_path;
    if (strategy_needs_checkpoint(strategy) && !ckpt) {
        ckpt = checkpoint_path_for(config.out_dir, config.seeds.front());
    }

    // Only the random baseline varies with the seed; everything else is
    // deterministic and runs once.
    std::vector<std::uint64_t> seeds =
        strategy == "random" ? config.seeds
                             : std::vector<std::uint64_t>{config.seeds.front()};

    std::vector<MetricsReport> reports(seeds.size());
    auto run_one = [&](std::size_t k) {
        reports[k] = backtest_one_seed(config, strategy, ckpt, seeds[k], prices, features);
    };
    if (parallel_seeds && seeds.size() > 1) {
        std::vector<std::thread> workers;
        for (std::size_t k = 0; k < seeds.size(); ++k) workers.emplace_back(run_one, k);
        for (auto& w : workers) w.join();
    } else {
        for (std::size_t k = 0; k < seeds.size(); ++k) run_one(k);
    }

    BacktestOutcome outcome;
    for (std::size_t k = 0; k < seeds.size(); ++k) {
        outcome.report_paths.push_back(config.out_dir + "/metrics_" + strategy + "_s" +
                                       std::to_string(seeds[k]) + ".json");
    }

    outcome.table_path = config.out_dir + "/backtest_" + strategy + ".csv";
    std::ofstream table(outcome.table_path);
    table << "Year,Strategy,Seed,Return_Rate,Sharpe_Ratio,Volatility,Max_Drawdown\n";
    MetricValues mean;
    for (std::size_t k = 0; k < seeds.size(); ++k) {
        const MetricValues& m = reports[k].portfolio_mean;
        table << reports[k].year << ',' << reports[k].strategy << ',' << seeds[k] << ','
              << format_fixed2(m.return_rate) << ',' << format_fixed2(m.sharpe_ratio) << ','
              << format_fixed2(m.volatility) << ',' << format_fixed2(m.max_drawdown) << '\n';
        mean.return_rate += m.return_rate;
        mean.sharpe_ratio += m.sharpe_ratio;
        mean.volatility += m.volatility;
        mean.max_drawdown += m.max_drawdown;
    }
    if (seeds.size() > 1) {
        const double n = static_cast<double>(seeds.size());
        table << reports.front().year << ',' << reports.front().strategy << ",mean,"
              << format_fixed2(mean.return_rate / n) << ',' << format_fixed2(mean.sharpe_ratio / n)
              << ',' << format_fixed2(mean.volatility / n) << ','
              << format_fixed2(mean.max_drawdown / n) << '\n';
    }
    return outcome;
}

// ---------------------------------------------------------------------------
// report

void cmd_report(const std::string& run_dir, const std::string& out_subdir) {
    std::vector<std::string> report_files;
    if (fs::exists(run_dir)) {
        for (const auto& entry : fs::directory_iterator(run_dir)) {
            const std::string name = entry.path().filename().string();
            if (name.rfind("metrics_", 0) == 0 && entry.path().extension() == ".json") {
                report_files.push_back(entry.path().string());
            }
        }
    }
    if (report_files.empty()) {
        throw Error("missing-cache", "no backtest reports under '" + run_dir + "'");
    }
    std::sort(report_files.begin(), report_files.end());

    struct Group {
        int year;
        std::string strategy;
        std::vector<MetricsReport> reports;
    };
    std::map<std::pair<int, std::string>, Group> groups;
    for (const auto& path : report_files) {
        MetricsReport r = read_report_json(path);
        auto key = std::make_pair(r.year, r.strategy);
        groups[key].year = r.year;
        groups[key].strategy = r.strategy;
        groups[key].reports.push_back(std::move(r));
    }

    const std::string report_dir = run_dir + "/" + out_subdir;
    ensure_dir(report_dir);
    std::ofstream table(report_dir + "/comparison.csv");
    table << "Year,Strategy,Return_Rate,Sharpe_Ratio,Volatility,Max_Drawdown\n";
    json manifest;
    manifest["inputs"] = json::array();
    for (const auto& [key, group] : groups) {
        std::vector<MetricValues> values;
        for (const auto& r : group.reports) values.push_back(r.portfolio_mean);
        const MetricValues m = aggregate(values);
        table << group.year << ',' << group.strategy << ',' << format_fixed2(m.return_rate) << ','
              << format_fixed2(m.sharpe_ratio) << ',' << format_fixed2(m.volatility) << ','
              << format_fixed2(m.max_drawdown) << '\n';
        for (const auto& r : group.reports) {
            json item;
            item["strategy"] = r.strategy;
            item["year"] = r.year;
            item["seed"] = r.seed;
            item["config_hash"] = r.config_hash;
            manifest["inputs"].push_back(item);
        }
    }

    // Equity curves for plotting, copied under canonical names.
    for (const auto& entry : fs::directory_iterator(run_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("equity_", 0) == 0 && entry.path().extension() == ".csv") {
            fs::copy_file(entry.path(), fs::path(report_dir) / name,
                          fs::copy_options::overwrite_existing);
        }
    }
    std::ofstream mf(report_dir + "/report_manifest.json");
    mf << manifest.dump(1) << "\n";
}

void write_equity_csv(const EquityCurve& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("missing-file", "cannot write '" + path + "'");
    out << "date,equity\n";
    for (std::size_t t = 0; t < curve.values.size(); ++t) {
        out << curve.dates[t].to_string() << ',' << format_double(curve.values[t]) << '\n';
    }
}

}  // namespace qtmrl
