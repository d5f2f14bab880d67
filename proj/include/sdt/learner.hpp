#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "sdt/basis.hpp"
#include "sdt/dataset.hpp"
#include "sdt/lp.hpp"
#include "sdt/tree.hpp"

namespace sdt {

struct LearnConfig {
    int depth = 2;
    double lambda_c = 1e-2;     // weight on the number of branch nodes
    double lambda_m = 1e-2;     // weight on the sum of |coefficients|
    double c_lb = -100.0;
    double c_ub = 100.0;
    std::optional<double> y_lb;  // default: min y - 0.1 * range
    std::optional<double> y_ub;  // default: max y + 0.1 * range
    double eps_routing = 1e-4;   // left-branch strictness in the MILP
    double big_m = 1000.0;

    // Coefficient and prediction bounds with the data-dependent defaults
    // filled in. Throws ConfigError on degenerate bounds.
    ModelBounds resolve_bounds(const Dataset& data) const;
    void check() const;
};

struct ObjectiveBreakdown {
    double accuracy = 0.0;   // (1/N) sum |y - prediction|
    int complexity = 0;      // number of branch nodes
    double magnitude = 0.0;  // sum of |c| over every stored leaf coefficient
};

struct FitReport {
    TreeModel model;
    double objective = 0.0;
    ObjectiveBreakdown breakdown;
    int subproblems_solved = 0;  // leaf LPs actually solved (cache misses)
    double wall_time_s = 0.0;
};

// Midpoints between consecutive distinct values of feature f.
std::vector<double> candidate_thresholds(const Dataset& data, int feature);

// L1 fit of one leaf holding the samples `rows` (weight 1/N over the whole
// data set): the leaf's own predictions must lie in [y_lb, y_ub] and its
// prediction for every other sample in [-M, M], as in the MILP. nullopt when
// those rows admit no coefficients.
std::optional<L1Fit> fit_leaf(const Eigen::MatrixXd& phi, const Eigen::VectorXd& y, const std::vector<int>& rows,
                              const LearnConfig& cfg, const ModelBounds& bounds);

// Globally optimal tree over every topology admitted under the depth cap
// (root always splits, any internal node may stop as a leaf) and every
// data-induced threshold. Leaves are L1 fits with weight 1/N; a root split
// that sends every sample right is admitted, matching the MILP's freedom to
// place the root threshold below all data.
FitReport fit_tree(const Dataset& data, const BasisSet& basis, const LearnConfig& cfg);

// objective = accuracy + lambda_c * complexity + lambda_m * magnitude.
std::pair<double, ObjectiveBreakdown> objective_of(const TreeModel& model, const Dataset& data,
                                                   const LearnConfig& cfg);

}  // namespace sdt
