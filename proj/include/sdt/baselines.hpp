#pragma once

#include "sdt/basis.hpp"
#include "sdt/dataset.hpp"
#include "sdt/lp.hpp"
#include "sdt/tree.hpp"

namespace sdt {

// Plain sparse (L1) regression over a basis. The model is a depth-1 tree
// whose root splits at the smallest feature-0 value and whose two leaves
// carry the same coefficients, so every x gets the single global expression.
struct SparseFit {
    TreeModel model;
    std::vector<double> coefficients;
    double loss = 0.0;  // (1/N) sum |r_i| + lambda_m sum |c_k|
};

SparseFit fit_sparse(const Dataset& data, const BasisSet& basis, double lambda_m,
                     CoefficientBounds bounds = {});

struct CartOptions {
    int min_samples_split = 2;
    // Absolute count, or a fraction of N when in (0, 1).
    double min_samples_leaf = 1.0;
};

// Greedy top-down regression trees minimizing the children's summed squared
// error. A node becomes a leaf when its depth is reached, it is too small to
// split, or no split strictly reduces the squared error. The root always
// branches (tree invariant); if it has no improving split it takes the
// pass-through split at the smallest feature-0 value with both leaves equal.
TreeModel fit_cart_constant(const Dataset& data, int depth, CartOptions opts = {});
// Leaves are least-squares lines on {1, x_1..x_Nf}; fewer than two distinct
// points fall back to the mean.
TreeModel fit_cart_linear(const Dataset& data, int depth, CartOptions opts = {6, 0.1});

inline constexpr double baseline_coefficient_limit = 1e6;

}  // namespace sdt
