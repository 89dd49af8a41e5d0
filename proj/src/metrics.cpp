#include "qtmrl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "qtmrl/csv.hpp"

namespace qtmrl {

namespace {
constexpr double kAnnualization = 252.0;

void require_curve(const EquityCurve& curve, std::size_t min_len) {
    if (curve.values.size() < min_len) {
        throw Error("short-series", "equity curve needs at least " + std::to_string(min_len) +
                                        " points for this metric");
    }
    for (double v : curve.values) {
        if (!(v > 0.0)) throw Error("bad-config", "equity curve values must be positive");
    }
}

double sample_stddev(const std::vector<double>& xs, double mean) {
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}
}  // namespace

std::vector<double> EquityCurve::daily_returns() const {
    std::vector<double> r;
    r.reserve(values.size() > 0 ? values.size() - 1 : 0);
    for (std::size_t t = 1; t < values.size(); ++t) {
        r.push_back(values[t] / values[t - 1] - 1.0);
    }
    return r;
}

double total_return(const EquityCurve& curve) {
    require_curve(curve, 1);
    const double start = curve.values.front();
    const double end = curve.values.back();
    return 100.0 * (end - start) / start;
}

double sharpe(const EquityCurve& curve, bool* degenerate) {
    require_curve(curve, 3);  // two returns minimum
    const std::vector<double> r = curve.daily_returns();
    double mean = 0.0;
    for (double x : r) mean += x;
    mean /= static_cast<double>(r.size());
    const double sd = sample_stddev(r, mean);
    if (degenerate) *degenerate = sd == 0.0;
    if (sd == 0.0) return 0.0;  // defined, flagged upstream
    return mean / sd * std::sqrt(kAnnualization);
}

double volatility(const EquityCurve& curve) {
    require_curve(curve, 3);
    const std::vector<double> r = curve.daily_returns();
    double mean = 0.0;
    for (double x : r) mean += x;
    mean /= static_cast<double>(r.size());
    return sample_stddev(r, mean) * std::sqrt(kAnnualization) * 100.0;
}

double max_drawdown(const EquityCurve& curve) {
    require_curve(curve, 1);
    double peak = curve.values.front();
    double worst = 0.0;
    for (std::size_t j = 1; j < curve.values.size(); ++j) {
        worst = std::max(worst, (peak - curve.values[j]) / peak);
        peak = std::max(peak, curve.values[j]);
    }
    return -100.0 * worst;
}

MetricValues compute_metrics(const EquityCurve& curve) {
    MetricValues m;
    m.return_rate = total_return(curve);
    m.sharpe_ratio = sharpe(curve, &m.degenerate_sharpe);
    m.volatility = volatility(curve);
    m.max_drawdown = max_drawdown(curve);
    return m;
}

MetricValues aggregate(const std::vector<MetricValues>& per_asset) {
    if (per_asset.empty()) throw Error("empty-series", "nothing to aggregate");
    MetricValues out;
    for (const MetricValues& m : per_asset) {
        out.return_rate += m.return_rate;
        out.sharpe_ratio += m.sharpe_ratio;
        out.volatility += m.volatility;
        out.max_drawdown += m.max_drawdown;
        out.degenerate_sharpe = out.degenerate_sharpe || m.degenerate_sharpe;
    }
    const double n = static_cast<double>(per_asset.size());
    out.return_rate /= n;
    out.sharpe_ratio /= n;
    out.volatility /= n;
    out.max_drawdown /= n;
    return out;
}

MetricsReport make_report(const std::string& strategy, int year, std::uint64_t seed,
                          const std::string& config_hash, const std::vector<std::string>& names,
                          const std::vector<EquityCurve>& curves) {
    if (names.size() != curves.size() || curves.empty()) {
        throw Error("dim-mismatch", "one name per curve required");
    }
    MetricsReport report;
    report.strategy = strategy;
    report.year = year;
    report.seed = seed;
    report.config_hash = config_hash;
    report.asset_names = names;
    std::vector<MetricValues> values;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        values.push_back(compute_metrics(curves[i]));
        report.per_asset[names[i]] = values.back();
    }
    report.portfolio_mean = aggregate(values);

    // The averaged-curve view: metrics of the mean equity path, emitted for
    // transparency next to the primary per-asset averaging.
    if (curves.size() > 1) {
        bool same_len = true;
        for (const auto& c : curves) same_len = same_len && c.values.size() == curves[0].values.size();
        if (same_len) {
            EquityCurve pooled;
            pooled.dates = curves[0].dates;
            pooled.values.assign(curves[0].values.size(), 0.0);
            for (const auto& c : curves) {
                for (std::size_t t = 0; t < c.values.size(); ++t) pooled.values[t] += c.values[t];
            }
            for (double& v : pooled.values) v /= static_cast<double>(curves.size());
            report.pooled = compute_metrics(pooled);
        }
    }
    return report;
}

namespace {
nlohmann::json metric_values_to_json(const MetricValues& m) {
    nlohmann::json j;
    j["return_rate"] = m.return_rate;
    j["sharpe_ratio"] = m.sharpe_ratio;
    j["volatility"] = m.volatility;
    j["max_drawdown"] = m.max_drawdown;
    j["degenerate_sharpe"] = m.degenerate_sharpe;
    return j;
}

MetricValues metric_values_from_json(const nlohmann::json& j) {
    MetricValues m;
    m.return_rate = j.at("return_rate").get<double>();
    m.sharpe_ratio = j.at("sharpe_ratio").get<double>();
    m.volatility = j.at("volatility").get<double>();
    m.max_drawdown = j.at("max_drawdown").get<double>();
    m.degenerate_sharpe = j.at("degenerate_sharpe").get<bool>();
    return m;
}
}  // namespace

void write_report_json(const MetricsReport& report, const std::string& path) {
    nlohmann::json j;
    j["strategy"] = report.strategy;
    j["year"] = report.year;
    j["seed"] = report.seed;
    j["config_hash"] = report.config_hash;
    j["asset_names"] = report.asset_names;
    nlohmann::json per;
    for (const auto& [name, m] : report.per_asset) per[name] = metric_values_to_json(m);
    j["per_asset"] = per;
    j["portfolio_mean"] = metric_values_to_json(report.portfolio_mean);
    if (report.pooled) j["pooled"] = metric_values_to_json(*report.pooled);
    std::ofstream out(path);
    if (!out) throw Error("missing-file", "cannot write report '" + path + "'");
    out << j.dump(1) << "\n";
}

MetricsReport read_report_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("missing-file", "cannot open report '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("corrupt-row", "malformed report '" + path + "': " + e.what());
    }
    MetricsReport report;
    report.strategy = j.at("strategy").get<std::string>();
    report.year = j.at("year").get<int>();
    report.seed = j.at("seed").get<std::uint64_t>();
    report.config_hash = j.at("config_hash").get<std::string>();
    report.asset_names = j.at("asset_names").get<std::vector<std::string>>();
    for (const auto& [name, m] : j.at("per_asset").items()) {
        report.per_asset[name] = metric_values_from_json(m);
    }
    report.portfolio_mean = metric_values_from_json(j.at("portfolio_mean"));
    if (j.contains("pooled")) report.pooled = metric_values_from_json(j.at("pooled"));
    return report;
}

std::string report_csv_row(const MetricsReport& report) {
    const MetricValues& m = report.portfolio_mean;
    return std::to_string(report.year) + "," + report.strategy + "," +
           format_fixed2(m.return_rate) + "," + format_fixed2(m.sharpe_ratio) + "," +
           format_fixed2(m.volatility) + "," + format_fixed2(m.max_drawdown);
}

}  // namespace qtmrl
