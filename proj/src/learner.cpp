#include "sdt/learner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include "sdt/errors.hpp"
#include "sdt/lp.hpp"

namespace sdt {

ModelBounds LearnConfig::resolve_bounds(const Dataset& data) const {
    check();
    ModelBounds b;
    b.c_lb = c_lb;
    b.c_ub = c_ub;
    const double lo = data.y.minCoeff();
    const double hi = data.y.maxCoeff();
    const double range = hi - lo;
    const double margin = range > 0.0 ? 0.1 * range : 0.1 * std::max(1.0, std::abs(hi));
    b.y_lb = y_lb.value_or(lo - margin);
    b.y_ub = y_ub.value_or(hi + margin);
    if (!(b.y_lb < b.y_ub)) {
        std::ostringstream msg;
        msg << "prediction bounds [" << b.y_lb << ", " << b.y_ub << "] are empty";
        throw ConfigError(msg.str());
    }
    if (!(big_m > std::max(std::abs(b.y_lb), std::abs(b.y_ub))))
        throw ConfigError("big-M " + std::to_string(big_m) +
                          " must exceed the magnitude of both prediction bounds");
    return b;
}

void LearnConfig::check() const {
    if (depth < 1) throw ConfigError("depth must be at least 1");
    if (depth > 6) throw ConfigError("exact learning beyond depth 6 is not supported");
    if (!(lambda_c >= 0.0) || !(lambda_m >= 0.0)) throw ConfigError("lambda_c and lambda_m must be nonnegative");
    if (!(c_lb < c_ub)) throw ConfigError("coefficient bounds need c_lb < c_ub");
    if (c_lb > 0.0 || c_ub < 0.0)
        throw ConfigError("coefficient bounds must contain 0 (unused leaves and branch nodes carry zeros)");
    if (!(eps_routing > 0.0)) throw ConfigError("eps_routing must be positive");
    if (!(big_m > 0.0)) throw ConfigError("big_M must be positive");
}

std::vector<double> candidate_thresholds(const Dataset& data, int feature) {
    if (feature < 0 || feature >= data.n_features())
        throw IndexError("feature " + std::to_string(feature) + " outside 0.." +
                         std::to_string(data.n_features() - 1));
    std::vector<double> v(static_cast<std::size_t>(data.size()));
    for (Eigen::Index i = 0; i < data.size(); ++i) v[static_cast<std::size_t>(i)] = data.X(i, feature);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    std::vector<double> out;
    for (std::size_t i = 1; i < v.size(); ++i) out.push_back(0.5 * (v[i - 1] + v[i]));
    return out;
}

std::optional<L1Fit> fit_leaf(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y, const std::vector<int>& rows,
                              const LearnConfig& cfg, const ModelBounds& bounds) {
    const auto K = phi.cols();
    Eigen::MatrixXd own_phi(static_cast<Eigen::Index>(rows.size()), K);
    Eigen::VectorXd own_y(static_cast<Eigen::Index>(rows.size()));
    std::vector<PredictionBand> bands;
    std::vector<char> own(static_cast<std::size_t>(phi.rows()), 0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] < 0 || rows[r] >= phi.rows()) throw IndexError("leaf sample index out of range");
        own_phi.row(static_cast<Eigen::Index>(r)) = phi.row(rows[r]);
        own_y(static_cast<Eigen::Index>(r)) = y(rows[r]);
        own[static_cast<std::size_t>(rows[r])] = 1;
        bands.push_back({phi.row(rows[r]), bounds.y_lb, bounds.y_ub});
    }
    // |phi_i . c| <= M only needs a row when the coefficient box can break it.
    const double cmax = std::max(std::abs(bounds.c_lb), std::abs(bounds.c_ub));
    for (Eigen::Index i = 0; i < phi.rows(); ++i)
        if (!own[static_cast<std::size_t>(i)] && phi.row(i).cwiseAbs().sum() * cmax > cfg.big_m)
            bands.push_back({phi.row(i), -cfg.big_m, cfg.big_m});
    return try_fit_l1(own_phi, own_y, 1.0 / static_cast<double>(phi.rows()), cfg.lambda_m,
                      {bounds.c_lb, bounds.c_ub}, bands);
}

namespace {

using Subset = std::vector<int>;  // sorted sample indices

struct PlanNode {
    bool leaf = true;
    std::vector<double> coefficients;
    int feature = 0;
    double threshold = 0.0;
    std::shared_ptr<const PlanNode> left, right;
};

struct Candidate {
    double objective = std::numeric_limits<double>::infinity();
    int branches = 0;
    std::vector<std::pair<int, double>> sequence;  // preorder (feature, threshold)
    std::shared_ptr<const PlanNode> plan;

    bool feasible() const { return std::isfinite(objective); }
};

// Lower objective, then fewer branch nodes, then the lexicographically
// smallest split sequence.
bool better(const Candidate& a, const Candidate& b) {
    if (!b.feasible()) return a.feasible();
    if (!a.feasible()) return false;
    const double tol = 1e-12 * std::max(1.0, std::abs(b.objective));
    if (a.objective < b.objective - tol) return true;
    if (a.objective > b.objective + tol) return false;
    if (a.branches != b.branches) return a.branches < b.branches;
    return a.sequence < b.sequence;
}

class ExactLearner {
public:
    ExactLearner(const Dataset& data, const BasisSet& basis, const LearnConfig& cfg)
        : data_(data), cfg_(cfg), bounds_(cfg.resolve_bounds(data)) {
        try {
            phi_ = basis_matrix(basis, data.X);
        } catch (const DomainError& e) {
            throw DomainError(std::string("basis evaluation failed on the training data: ") + e.what());
        }
        const int nf = static_cast<int>(data.n_features());
        thresholds_.resize(static_cast<std::size_t>(nf));
        for (int f = 0; f < nf; ++f) thresholds_[static_cast<std::size_t>(f)] = candidate_thresholds(data, f);

    }

    Candidate solve_root() {
        Subset all(static_cast<std::size_t>(data_.size()));
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
        return best(all, cfg_.depth, true);
    }

    int leaf_lps() const { return leaf_lps_; }

private:
    Candidate leaf(const Subset& s) {
        auto it = leaf_cache_.find(s);
        if (it != leaf_cache_.end()) return it->second;

        const auto K = phi_.cols();
        Candidate c;
        auto node = std::make_shared<PlanNode>();
        if (s.empty()) {
            node->coefficients.assign(static_cast<std::size_t>(K), 0.0);
            c.objective = 0.0;
        } else {
            ++leaf_lps_;
            auto fit = fit_leaf(phi_, data_.y, s, cfg_, bounds_);
            if (fit) {
                node->coefficients = std::move(fit->coefficients);
                c.objective = fit->loss;
            }
        }
        c.plan = std::move(node);
        leaf_cache_.emplace(s, c);
        return c;
    }

    Candidate best(const Subset& s, int remaining, bool root) {
        const auto key = std::make_pair(remaining, s);
        if (!root) {
            auto it = memo_.find(key);
            if (it != memo_.end()) return it->second;
        }

        Candidate winner;
        if (!root) winner = leaf(s);

        auto consider_split = [&](int feature, double threshold, const Subset& l, const Subset& r) {
            Candidate cl = best(l, remaining - 1, false);
            if (!cl.feasible()) return;
            Candidate cr = best(r, remaining - 1, false);
            if (!cr.feasible()) return;
            Candidate c;
            c.objective = cfg_.lambda_c + cl.objective + cr.objective;
            c.branches = 1 + cl.branches + cr.branches;
            // Cheap reject before building the sequence.
            if (winner.feasible() &&
                c.objective > winner.objective + 1e-12 * std::max(1.0, std::abs(winner.objective)))
                return;
            c.sequence.reserve(1 + cl.sequence.size() + cr.sequence.size());
            c.sequence.emplace_back(feature, threshold);
            c.sequence.insert(c.sequence.end(), cl.sequence.begin(), cl.sequence.end());
            c.sequence.insert(c.sequence.end(), cr.sequence.begin(), cr.sequence.end());
            if (!better(c, winner)) return;
            auto node = std::make_shared<PlanNode>();
            node->leaf = false;
            node->feature = feature;
            node->threshold = threshold;
            node->left = cl.plan;
            node->right = cr.plan;
            c.plan = std::move(node);
            winner = std::move(c);
        };

        if (remaining >= 1) {
            if (root) {
                // Root threshold at the smallest value: every sample goes right.
                double lowest = data_.X.col(0).minCoeff();
                consider_split(0, lowest, Subset{}, s);
            }
            for (int f = 0; f < static_cast<int>(data_.n_features()); ++f) {
                Subset order = s;
                std::stable_sort(order.begin(), order.end(),
                                 [&](int a, int b) { return data_.X(a, f) < data_.X(b, f); });
                const auto& cands = thresholds_[static_cast<std::size_t>(f)];
                for (std::size_t j = 1; j < order.size(); ++j) {
                    const double lo = data_.X(order[j - 1], f);
                    const double hi = data_.X(order[j], f);
                    if (!(lo < hi)) continue;
                    // Smallest global midpoint separating lo from hi.
                    const double threshold = *std::upper_bound(cands.begin(), cands.end(), lo);
                    Subset l(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(j));
                    Subset r(order.begin() + static_cast<std::ptrdiff_t>(j), order.end());
                    std::sort(l.begin(), l.end());
                    std::sort(r.begin(), r.end());
                    consider_split(f, threshold, l, r);
                }
            }
        }
        if (!root) memo_.emplace(key, winner);
        return winner;
    }

    const Dataset& data_;
    const LearnConfig& cfg_;
    ModelBounds bounds_;
    Eigen::MatrixXd phi_;
    std::vector<std::vector<double>> thresholds_;
    std::map<Subset, Candidate> leaf_cache_;
    std::map<std::pair<int, Subset>, Candidate> memo_;
    int leaf_lps_ = 0;

public:
    const ModelBounds& bounds() const { return bounds_; }
};

void place(TreeModel& model, int node, const PlanNode& plan) {
    if (plan.leaf) {
        model.set_leaf(node, {plan.coefficients});
        return;
    }
    model.set_branch(node, {plan.feature, plan.threshold});
    place(model, topology::left_child(node), *plan.left);
    place(model, topology::right_child(node), *plan.right);
}

}  // namespace

FitReport fit_tree(const Dataset& data, const BasisSet& basis, const LearnConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    data.check();
    cfg.check();
    if (basis.size() == 0) throw ConfigError("basis set is empty");
    if (basis.max_coordinate() >= data.n_features())
        throw IndexError("basis reads coordinate " + std::to_string(basis.max_coordinate()) +
                         " but the data has " + std::to_string(data.n_features()) + " features");

    ExactLearner learner(data, basis, cfg);
    const Candidate best = learner.solve_root();
    if (!best.feasible()) throw ConfigError("no tree satisfies the coefficient and prediction bounds");

    FitReport report;
    report.model = TreeModel(cfg.depth, basis, learner.bounds());
    place(report.model, 1, *best.plan);
    std::tie(report.objective, report.breakdown) = objective_of(report.model, data, cfg);
    report.subproblems_solved = learner.leaf_lps();
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::pair<double, ObjectiveBreakdown> objective_of(const TreeModel& model, const Dataset& data,
                                                   const LearnConfig& cfg) {
    data.check();
    ObjectiveBreakdown b;
    std::vector<double> x(static_cast<std::size_t>(data.n_features()));
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        for (Eigen::Index j = 0; j < data.n_features(); ++j) x[static_cast<std::size_t>(j)] = data.X(i, j);
        b.accuracy += std::abs(data.y(i) - model.predict(x));
    }
    b.accuracy /= static_cast<double>(data.size());
    b.complexity = model.branch_count();
    for (const auto& [node, expr] : model.leaves())
        for (double c : expr.coefficients) b.magnitude += std::abs(c);
    const double objective = b.accuracy + cfg.lambda_c * b.complexity + cfg.lambda_m * b.magnitude;
    return {objective, b};
}

}  // namespace sdt
