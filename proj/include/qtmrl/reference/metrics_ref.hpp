#pragma once

#include <vector>

#include "qtmrl/metrics.hpp"

namespace qtmrl::reference {

/// O(n^2) exhaustive pairwise drawdown: -100 * max over j > i of
/// (P_i - P_j) / P_i.
double max_drawdown(const EquityCurve& curve);

/// Direct discounted sums G_t = sum_k gamma^k r_{t+k} (+ gamma^{T-t} * tail
/// for a bootstrapped cutoff), no recursion.
std::vector<double> discounted_returns(const std::vector<double>& rewards,
                                       double gamma, bool terminal, double bootstrap);

}  // namespace qtmrl::reference
