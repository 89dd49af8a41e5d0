#include "qtmrl/reference/metrics_ref.hpp"

#include <algorithm>
#include <cmath>

namespace qtmrl::reference {

double max_drawdown(const EquityCurve& curve) {
    const auto& p = curve.values;
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = i + 1; j < p.size(); ++j) {
            worst = std::max(worst, (p[i] - p[j]) / p[i]);
        }
    }
    return -100.0 * worst;
}

std::vector<double> discounted_returns(const std::vector<double>& rewards, double gamma,
                                       bool terminal, double bootstrap) {
    const std::size_t n = rewards.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double acc = 0.0;
        double w = 1.0;
        for (std::size_t k = t; k < n; ++k) {
            acc += w * rewards[k];
            w *= gamma;
        }
        if (!terminal) acc += w * bootstrap;  // w = gamma^(n-t) after the loop
        out[t] = acc;
    }
    return out;
}

}  // namespace qtmrl::reference
