#pragma once

#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace sdt {

inline constexpr double lp_infinity = std::numeric_limits<double>::infinity();
inline constexpr double lp_feas_tol = 1e-8;

enum class Relation { less_equal, equal, greater_equal, range };

struct LpRow {
    std::vector<double> coefficients;
    Relation relation = Relation::less_equal;
    double rhs = 0.0;
    double rhs_lower = 0.0;  // only read for Relation::range: rhs_lower <= a.x <= rhs

    static LpRow ranged(std::vector<double> a, double lo, double hi) {
        return {std::move(a), Relation::range, hi, lo};
    }
};

// minimize objective.x subject to rows and lower <= x <= upper.
struct LpProblem {
    std::vector<double> objective;
    std::vector<LpRow> rows;
    std::vector<double> lower;
    std::vector<double> upper;

    LpProblem() = default;
    // n variables, default bounds [0, +inf), zero objective.
    explicit LpProblem(std::size_t n)
        : objective(n, 0.0), lower(n, 0.0), upper(n, lp_infinity) {}

    std::size_t n_vars() const { return objective.size(); }
    std::size_t add_row(LpRow row) {
        rows.push_back(std::move(row));
        return rows.size() - 1;
    }
};

enum class LpStatus { optimal, infeasible, unbounded };

const char* to_string(LpStatus s);

struct LpSolution {
    LpStatus status = LpStatus::infeasible;
    std::vector<double> x;
    double objective = 0.0;
    int iterations = 0;
};

// Dense bounded-variable primal simplex. Phase 1 minimises the sum of
// artificial variables; Dantzig pricing switches to Bland's rule after a run
// of degenerate pivots. Throws DimensionError on inconsistent sizes and
// NumericalError if the iteration cap is exhausted.
LpSolution solve_lp(const LpProblem& p);

// Largest violation of any row or bound by x.
double max_violation(const LpProblem& p, const std::vector<double>& x);

struct CoefficientBounds {
    double lower = -100.0;
    double upper = 100.0;
};

// Extra linear constraint lo <= phi.c <= hi on a leaf expression.
struct PredictionBand {
    Eigen::RowVectorXd phi;
    double lo = -lp_infinity;
    double hi = lp_infinity;
};

struct L1Fit {
    std::vector<double> coefficients;
    double loss = 0.0;
};

// argmin over c in [lower, upper]^K of
//   weight * sum_i |y_i - Phi_i c| + lambda * sum_k |c_k|,
// posed with split residuals e+/e- and split coefficients c+/c-.
// `bands` adds lo <= phi.c <= hi rows. Empty data without bands returns the
// box projection of 0.
L1Fit fit_l1(const Eigen::MatrixXd& Phi, const Eigen::VectorXd& y, double weight, double lambda,
             CoefficientBounds bounds, const std::vector<PredictionBand>& bands = {});

// As fit_l1, but returns nullopt when the bands and bounds admit no c.
std::optional<L1Fit> try_fit_l1(const Eigen::MatrixXd& Phi, const Eigen::VectorXd& y, double weight,
                                double lambda, CoefficientBounds bounds,
                                const std::vector<PredictionBand>& bands = {});

}  // namespace sdt
