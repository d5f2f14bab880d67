#include "sdt/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sdt/errors.hpp"
#include "sdt/learner.hpp"

namespace sdt {

namespace {

ModelBounds label_bounds(const Dataset& data, double c_lb, double c_ub) {
    const double lo = data.y.minCoeff(), hi = data.y.maxCoeff();
    const double margin = hi > lo ? 0.1 * (hi - lo) : 0.1 * std::max(1.0, std::abs(hi));
    return {c_lb, c_ub, lo - margin, hi + margin};
}

using Rows = std::vector<Eigen::Index>;

struct LeafFit {
    std::vector<double> coefficients;
    double sse = 0.0;
};

LeafFit constant_leaf(const Dataset& data, const Rows& rows) {
    double mean = 0.0;
    for (auto i : rows) mean += data.y(i);
    mean /= static_cast<double>(rows.size());
    double sse = 0.0;
    for (auto i : rows) sse += (data.y(i) - mean) * (data.y(i) - mean);
    return {{mean}, sse};
}

LeafFit linear_leaf(const Dataset& data, const Rows& rows) {
    const auto nf = data.n_features();
    const auto n = static_cast<Eigen::Index>(rows.size());
    bool spread = false;
    for (Eigen::Index f = 0; f < nf && !spread; ++f)
        for (auto i : rows) spread |= data.X(i, f) != data.X(rows.front(), f);
    if (n < 2 || !spread) {
        LeafFit c = constant_leaf(data, rows);
        c.coefficients.resize(static_cast<std::size_t>(nf + 1), 0.0);
        return c;
    }
    Eigen::MatrixXd A(n, nf + 1);
    Eigen::VectorXd b(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        A(r, 0) = 1.0;
        A.row(r).tail(nf) = data.X.row(rows[r]);
        b(r) = data.y(rows[r]);
    }
    const Eigen::VectorXd c = A.completeOrthogonalDecomposition().solve(b);
    return {std::vector<double>(c.data(), c.data() + c.size()), (A * c - b).squaredNorm()};
}

class GreedyTree {
public:
    GreedyTree(const Dataset& data, int depth, CartOptions opts, bool linear)
        : data_(data), depth_(depth), linear_(linear), min_split_(opts.min_samples_split) {
        data.check();
        if (depth < 1) throw ConfigError("tree depth must be at least 1");
        if (opts.min_samples_split < 2) throw ConfigError("min_samples_split must be at least 2");
        if (!(opts.min_samples_leaf > 0.0)) throw ConfigError("min_samples_leaf must be positive");
        const double n = static_cast<double>(data.size());
        min_leaf_ = opts.min_samples_leaf < 1.0 ? static_cast<long>(std::ceil(opts.min_samples_leaf * n))
                                                : static_cast<long>(opts.min_samples_leaf);
        min_leaf_ = std::max(1L, min_leaf_);
    }

    TreeModel build() {
        const auto nf = static_cast<int>(data_.n_features());
        TreeModel model(depth_, linear_ ? linear_basis(nf) : constant_basis(),
                        label_bounds(data_, -baseline_coefficient_limit, baseline_coefficient_limit));
        Rows all(static_cast<std::size_t>(data_.size()));
        for (Eigen::Index i = 0; i < data_.size(); ++i) all[static_cast<std::size_t>(i)] = i;
        if (!grow(model, 1, all)) {
            // root must branch: pass-through split, both leaves the root fit
            const LeafFit f = fit(all);
            model.set_branch(1, {0, data_.X.col(0).minCoeff()});
            model.set_leaf(2, {f.coefficients});
            model.set_leaf(3, {f.coefficients});
        }
        return model;
    }

private:
    LeafFit fit(const Rows& rows) const { return linear_ ? linear_leaf(data_, rows) : constant_leaf(data_, rows); }

    // Returns false (leaving the node untouched) when the node should be a leaf.
    bool grow(TreeModel& model, int node, const Rows& rows) {
        if (topology::node_depth(node) >= depth_) return false;
        const auto n = static_cast<long>(rows.size());
        if (n < min_split_ || n < 2 * min_leaf_) return false;
        const LeafFit here = fit(rows);

        double best_sse = here.sse;
        BranchRule best_rule;
        bool found = false;
        for (int f = 0; f < static_cast<int>(data_.n_features()); ++f) {
            const Dataset sub = data_.subset(rows);
            for (double t : candidate_thresholds(sub, f)) {
                Rows l, r;
                for (auto i : rows) (data_.X(i, f) < t ? l : r).push_back(i);
                if (static_cast<long>(l.size()) < min_leaf_ || static_cast<long>(r.size()) < min_leaf_) continue;
                const double sse = fit(l).sse + fit(r).sse;
                if (sse < best_sse - 1e-12 * std::max(1.0, here.sse)) {
                    best_sse = sse;
                    best_rule = {f, t};
                    found = true;
                }
            }
        }
        if (!found) return false;
        if (!(best_sse < here.sse)) throw NumericalError("greedy split does not reduce the squared error");

        model.set_branch(node, best_rule);
        Rows l, r;
        for (auto i : rows) (data_.X(i, best_rule.feature) < best_rule.threshold ? l : r).push_back(i);
        const int lc = topology::left_child(node), rc = topology::right_child(node);
        if (!grow(model, lc, l)) model.set_leaf(lc, {fit(l).coefficients});
        if (!grow(model, rc, r)) model.set_leaf(rc, {fit(r).coefficients});
        return true;
    }

    const Dataset& data_;
    int depth_;
    bool linear_;
    long min_split_;
    long min_leaf_ = 1;
};

}  // namespace

SparseFit fit_sparse(const Dataset& data, const BasisSet& basis, double lambda_m, CoefficientBounds bounds) {
    data.check();
    if (!(lambda_m >= 0.0)) throw ConfigError("lambda_m must be nonnegative");
    const Eigen::MatrixXd phi = basis_matrix(basis, data.X);
    const L1Fit f = fit_l1(phi, data.y, 1.0 / static_cast<double>(data.size()), lambda_m, bounds);

    SparseFit out{TreeModel(1, basis, label_bounds(data, bounds.lower, bounds.upper)), f.coefficients, f.loss};
    out.model.set_branch(1, {0, data.X.col(0).minCoeff()});
    out.model.set_leaf(2, {f.coefficients});
    out.model.set_leaf(3, {f.coefficients});
    return out;
}

TreeModel fit_cart_constant(const Dataset& data, int depth, CartOptions opts) {
    return GreedyTree(data, depth, opts, false).build();
}

TreeModel fit_cart_linear(const Dataset& data, int depth, CartOptions opts) {
    return GreedyTree(data, depth, opts, true).build();
}

}  // namespace sdt
