#pragma once

#include <span>
#include <vector>

#include "qtmrl/neural_core.hpp"

// Serial, loop-nest matrix arithmetic for checking the threaded network
// kernels, plus a from-scratch forward pass that composes them.

namespace qtmrl::reference {

std::vector<double> matvec(const Matrix& m, std::span<const double> x);

/// Hand-unrolled affine + ReLU composition, linear final layer.
std::vector<double> mlp_forward(const MlpParams& params, std::span<const double> input);

}  // namespace qtmrl::reference
