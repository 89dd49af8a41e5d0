#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qtmrl/core.hpp"

namespace qtmrl {

/// Per-step portfolio values with their dates. Daily simple returns are
/// r_t = P_t / P_{t-1} - 1.
struct EquityCurve {
    std::vector<Date> dates;
    std::vector<double> values;

    std::vector<double> daily_returns() const;
};

struct MetricValues {
    double return_rate = 0.0;    // percent
    double sharpe_ratio = 0.0;   // annualized by sqrt(252)
    double volatility = 0.0;     // annualized percent
    double max_drawdown = 0.0;   // signed percent, <= 0
    bool degenerate_sharpe = false;  // zero return dispersion
};

/// 100 * (P_end - P_start) / P_start. Throws on P_start <= 0.
double total_return(const EquityCurve& curve);

/// mean(daily r) / sample std(daily r) * sqrt(252); 0 with the degenerate
/// flag when the dispersion is zero. Needs at least 2 returns.
double sharpe(const EquityCurve& curve, bool* degenerate = nullptr);

/// sample std(daily r) * sqrt(252) * 100. Needs at least 2 returns.
double volatility(const EquityCurve& curve);

/// -100 * max over j > i of (P_i - P_j) / P_i against the running peak;
/// 0 for monotone nondecreasing curves.
double max_drawdown(const EquityCurve& curve);

MetricValues compute_metrics(const EquityCurve& curve);

struct MetricsReport {
    std::string strategy;
    int year = 0;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::vector<std::string> asset_names;          // report order
    std::map<std::string, MetricValues> per_asset;
    MetricValues portfolio_mean;                   // arithmetic mean across assets
    std::optional<MetricValues> pooled;            // metrics of the averaged curve
};

/// Arithmetic mean per metric across the per-asset entries. Curves must
/// cover identical periods; the caller guarantees that by construction.
MetricValues aggregate(const std::vector<MetricValues>& per_asset);

MetricsReport make_report(const std::string& strategy, int year, std::uint64_t seed,
                          const std::string& config_hash,
                          const std::vector<std::string>& names,
                          const std::vector<EquityCurve>& curves);

/// Full-precision JSON for machines, two-decimal CSV row(s) in the table
/// schema Year,Strategy,Return_Rate,Sharpe_Ratio,Volatility,Max_Drawdown.
void write_report_json(const MetricsReport& report, const std::string& path);
MetricsReport read_report_json(const std::string& path);
std::string report_csv_row(const MetricsReport& report);

}  // namespace qtmrl
