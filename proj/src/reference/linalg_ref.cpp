#include "qtmrl/reference/linalg_ref.hpp"

namespace qtmrl::reference {

std::vector<double> matvec(const Matrix& m, std::span<const double> x) {
    std::vector<double> out(m.rows, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < m.cols; ++c) acc += m.at(r, c) * x[c];
        out[r] = acc;
    }
    return out;
}

std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> input) {
    std::vector<double> cur(input.begin(), input.end());
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
        std::vector<double> next = matvec(params.layers[l].weights, cur);
        for (std::size_t r = 0; r < next.size(); ++r) next[r] += params.layers[l].bias[r];
        if (l + 1 < params.layers.size()) {
            for (double& v : next) v = v > 0.0 ? v : 0.0;
        }
        cur = std::move(next);
    }
    return cur;
}

}  // namespace qtmrl::reference
