#include "sdt/lp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sdt/errors.hpp"

namespace sdt {

const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
    }
    return "?";
}

namespace {

constexpr double pivot_tol = 1e-9;
constexpr double cost_tol = 1e-10;
constexpr int refactor_every = 50;
constexpr int degenerate_run_before_bland = 25;

enum class VarState { basic, at_lower, at_upper, free_zero };

std::pair<double, double> row_bounds(const LpRow& r) {
    switch (r.relation) {
        case Relation::less_equal: return {-lp_infinity, r.rhs};
        case Relation::equal: return {r.rhs, r.rhs};
        case Relation::greater_equal: return {r.rhs, lp_infinity};
        case Relation::range: return {r.rhs_lower, r.rhs};
    }
    return {-lp_infinity, lp_infinity};
}

// Columns: n structurals, then one logical s_i = a_i.x per row, then one
// artificial per row. Every row reads a_i.x - s_i + sigma_i * art_i = 0.
class DenseSimplex {
public:
    explicit DenseSimplex(const LpProblem& p) : p_(p) {
        n_ = static_cast<int>(p.n_vars());
        m_ = static_cast<int>(p.rows.size());
        ncol_ = n_ + 2 * m_;
        A_ = Eigen::MatrixXd::Zero(m_, ncol_);
        lb_.assign(ncol_, 0.0);
        ub_.assign(ncol_, 0.0);
        x_.assign(ncol_, 0.0);
        state_.assign(ncol_, VarState::at_lower);
        for (int j = 0; j < n_; ++j) {
            lb_[j] = p.lower[j];
            ub_[j] = p.upper[j];
        }
        for (int i = 0; i < m_; ++i) {
            for (int j = 0; j < n_; ++j) A_(i, j) = p.rows[i].coefficients[j];
            A_(i, n_ + i) = -1.0;
            auto [lo, hi] = row_bounds(p.rows[i]);
            lb_[n_ + i] = lo;
            ub_[n_ + i] = hi;
        }
    }

    LpSolution run() {
        LpSolution sol;
        for (int j = 0; j < n_ + m_; ++j) {
            if (lb_[j] > ub_[j] || lb_[j] == lp_infinity || ub_[j] == -lp_infinity) {
                sol.status = LpStatus::infeasible;
                return sol;
            }
        }
        initialise();

        // Phase 1.
        std::vector<double> cost(ncol_, 0.0);
        bool any_artificial = false;
        for (int i = 0; i < m_; ++i)
            if (ub_[n_ + m_ + i] > 0.0) {
                cost[n_ + m_ + i] = 1.0;
                any_artificial = true;
            }
        if (any_artificial) {
            if (iterate(cost) == LpStatus::unbounded)
                throw NumericalError("phase 1 of the simplex reported an unbounded ray");
            refactor();
            double infeasibility = 0.0;
            for (int i = 0; i < m_; ++i) infeasibility += std::abs(x_[n_ + m_ + i]);
            if (infeasibility > feasibility_threshold()) {
                sol.status = LpStatus::infeasible;
                sol.iterations = iterations_;
                return sol;
            }
            retire_artificials();
        }

        // Phase 2.
        std::fill(cost.begin(), cost.end(), 0.0);
        for (int j = 0; j < n_; ++j) cost[j] = p_.objective[j];
        const LpStatus st = iterate(cost);
        sol.iterations = iterations_;
        if (st == LpStatus::unbounded) {
            sol.status = LpStatus::unbounded;
            return sol;
        }
        refactor();
        sol.status = LpStatus::optimal;
        sol.x.assign(x_.begin(), x_.begin() + n_);
        for (int j = 0; j < n_; ++j) {
            // Snap tiny bound overshoots left by the final refactorisation.
            if (sol.x[j] < lb_[j] && sol.x[j] > lb_[j] - 1e-11) sol.x[j] = lb_[j];
            if (sol.x[j] > ub_[j] && sol.x[j] < ub_[j] + 1e-11) sol.x[j] = ub_[j];
        }
        sol.objective = 0.0;
        for (int j = 0; j < n_; ++j) sol.objective += p_.objective[j] * sol.x[j];
        return sol;
    }

private:
    double feasibility_threshold() const {
        double scale = 1.0;
        for (int i = 0; i < m_; ++i) {
            for (double v : {lb_[n_ + i], ub_[n_ + i]})
                if (std::isfinite(v)) scale = std::max(scale, std::abs(v));
        }
        return 1e-9 * scale;
    }

    void set_nonbasic_start(int j) {
        if (std::isfinite(lb_[j])) {
            state_[j] = VarState::at_lower;
            x_[j] = lb_[j];
        } else if (std::isfinite(ub_[j])) {
            state_[j] = VarState::at_upper;
            x_[j] = ub_[j];
        } else {
            state_[j] = VarState::free_zero;
            x_[j] = 0.0;
        }
    }

    void initialise() {
        for (int j = 0; j < n_; ++j) set_nonbasic_start(j);
        basis_.assign(m_, -1);
        for (int i = 0; i < m_; ++i) {
            double activity = 0.0;
            for (int j = 0; j < n_; ++j) activity += A_(i, j) * x_[j];
            const int s = n_ + i;
            const int a = n_ + m_ + i;
            if (activity >= lb_[s] - 1e-12 && activity <= ub_[s] + 1e-12) {
                basis_[i] = s;
                state_[s] = VarState::basic;
                x_[s] = activity;
                lb_[a] = ub_[a] = 0.0;
                state_[a] = VarState::at_lower;
                x_[a] = 0.0;
            } else {
                const double target = activity < lb_[s] ? lb_[s] : ub_[s];
                state_[s] = activity < lb_[s] ? VarState::at_lower : VarState::at_upper;
                x_[s] = target;
                const double sigma = target > activity ? 1.0 : -1.0;
                A_(i, a) = sigma;
                lb_[a] = 0.0;
                ub_[a] = lp_infinity;
                basis_[i] = a;
                state_[a] = VarState::basic;
                x_[a] = std::abs(target - activity);
            }
        }
        refactor();
    }

    // T = B^-1 A and basic values recomputed from the original columns.
    void refactor() {
        if (m_ == 0) {
            T_.resize(0, ncol_);
            return;
        }
        Eigen::MatrixXd B(m_, m_);
        for (int i = 0; i < m_; ++i) B.col(i) = A_.col(basis_[i]);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
        if (std::abs(lu.determinant()) == 0.0 || !std::isfinite(lu.determinant()))
            throw NumericalError("simplex basis became singular");
        T_ = lu.solve(A_);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
        for (int j = 0; j < ncol_; ++j)
            if (state_[j] != VarState::basic && x_[j] != 0.0) rhs -= A_.col(j) * x_[j];
        Eigen::VectorXd xb = lu.solve(rhs);
        for (int i = 0; i < m_; ++i) x_[basis_[i]] = xb(i);
    }

    bool eligible(int j) const {
        if (state_[j] == VarState::basic) return false;
        return ub_[j] > lb_[j];
    }

    // Returns optimal or unbounded for the given cost vector.
    LpStatus iterate(const std::vector<double>& cost) {
        const int cap = 200 * (m_ + ncol_) + 1000;
        int degenerate_run = 0;
        bool bland = false;
        int since_refactor = 0;
        Eigen::RowVectorXd cb(m_);
        while (true) {
            if (iterations_ > cap)
                throw NumericalError("simplex iteration cap exhausted (" + std::to_string(cap) +
                                     " pivots); degeneracy handling failed");
            if (since_refactor >= refactor_every) {
                refactor();
                since_refactor = 0;
            }
            for (int i = 0; i < m_; ++i) cb(i) = cost[basis_[i]];
            Eigen::RowVectorXd reduced = -(cb * T_);

            int entering = -1;
            int dir = 0;
            double best = 0.0;
            for (int j = 0; j < ncol_; ++j) {
                if (!eligible(j)) continue;
                const double d = cost[j] + (m_ > 0 ? reduced(j) : 0.0);
                int cand_dir = 0;
                if ((state_[j] == VarState::at_lower || state_[j] == VarState::free_zero) && d < -cost_tol)
                    cand_dir = 1;
                else if ((state_[j] == VarState::at_upper || state_[j] == VarState::free_zero) && d > cost_tol)
                    cand_dir = -1;
                if (cand_dir == 0) continue;
                if (bland) {
                    entering = j;
                    dir = cand_dir;
                    break;
                }
                if (std::abs(d) > best) {
                    best = std::abs(d);
                    entering = j;
                    dir = cand_dir;
                }
            }
            if (entering < 0) return LpStatus::optimal;

            // Ratio test: x_entering moves by dir*t, basic i moves by -T(i,e)*dir*t.
            double t_max = ub_[entering] - lb_[entering];
            int leaving_row = -1;
            bool leaving_to_upper = false;
            double best_alpha = 0.0;
            for (int i = 0; i < m_; ++i) {
                const double alpha = -T_(i, entering) * dir;
                if (std::abs(alpha) <= pivot_tol) continue;
                const int b = basis_[i];
                double limit;
                bool to_upper;
                if (alpha < 0.0) {
                    if (!std::isfinite(lb_[b])) continue;
                    limit = (x_[b] - lb_[b]) / -alpha;
                    to_upper = false;
                } else {
                    if (!std::isfinite(ub_[b])) continue;
                    limit = (ub_[b] - x_[b]) / alpha;
                    to_upper = true;
                }
                limit = std::max(limit, 0.0);
                bool take = false;
                if (limit < t_max - 1e-12)
                    take = true;
                else if (leaving_row >= 0 && limit <= t_max + 1e-12)
                    take = bland ? b < basis_[leaving_row] : std::abs(alpha) > best_alpha;
                if (take) {
                    t_max = std::min(limit, t_max);
                    leaving_row = i;
                    leaving_to_upper = to_upper;
                    best_alpha = std::abs(alpha);
                }
            }
            if (!std::isfinite(t_max)) return LpStatus::unbounded;

            ++iterations_;
            ++since_refactor;
            if (t_max <= 1e-12) {
                if (++degenerate_run > degenerate_run_before_bland) bland = true;
            } else {
                degenerate_run = 0;
                bland = false;
            }

            const double step = dir * t_max;
            x_[entering] += step;
            for (int i = 0; i < m_; ++i) x_[basis_[i]] -= T_(i, entering) * step;

            if (leaving_row < 0) {
                // Bound flip.
                if (dir > 0) {
                    state_[entering] = VarState::at_upper;
                    x_[entering] = ub_[entering];
                } else {
                    state_[entering] = VarState::at_lower;
                    x_[entering] = lb_[entering];
                }
                continue;
            }
            const int leaving = basis_[leaving_row];
            state_[leaving] = leaving_to_upper ? VarState::at_upper : VarState::at_lower;
            x_[leaving] = leaving_to_upper ? ub_[leaving] : lb_[leaving];
            pivot(leaving_row, entering);
        }
    }

    void pivot(int r, int j) {
        const double piv = T_(r, j);
        T_.row(r) /= piv;
        for (int i = 0; i < m_; ++i) {
            if (i == r) continue;
            const double f = T_(i, j);
            if (f != 0.0) T_.row(i) -= f * T_.row(r);
        }
        basis_[r] = j;
        state_[j] = VarState::basic;
    }

    // Pins artificials to zero and pivots basic ones out where possible.
    void retire_artificials() {
        for (int i = 0; i < m_; ++i) {
            const int a = n_ + m_ + i;
            lb_[a] = ub_[a] = 0.0;
            if (state_[a] != VarState::basic) {
                state_[a] = VarState::at_lower;
                x_[a] = 0.0;
            }
        }
        for (int r = 0; r < m_; ++r) {
            if (basis_[r] < n_ + m_) continue;
            int best = -1;
            double best_abs = pivot_tol;
            for (int j = 0; j < n_ + m_; ++j) {
                if (state_[j] == VarState::basic) continue;
                if (std::abs(T_(r, j)) > best_abs) {
                    best_abs = std::abs(T_(r, j));
                    best = j;
                }
            }
            if (best < 0) continue;  // redundant row; the artificial stays basic at zero
            const int a = basis_[r];
            pivot(r, best);
            state_[a] = VarState::at_lower;
            x_[a] = 0.0;
        }
        refactor();
    }

    const LpProblem& p_;
    int n_ = 0, m_ = 0, ncol_ = 0;
    Eigen::MatrixXd A_, T_;
    std::vector<double> lb_, ub_, x_;
    std::vector<VarState> state_;
    std::vector<int> basis_;
    int iterations_ = 0;
};

void check_problem(const LpProblem& p) {
    const std::size_t n = p.n_vars();
    if (p.lower.size() != n || p.upper.size() != n)
        throw DimensionError("LP has " + std::to_string(n) + " objective coefficients but " +
                             std::to_string(p.lower.size()) + "/" + std::to_string(p.upper.size()) +
                             " bounds");
    for (double c : p.objective)
        if (!std::isfinite(c)) throw DomainError("LP objective contains a non-finite coefficient");
    for (std::size_t i = 0; i < p.rows.size(); ++i) {
        const LpRow& r = p.rows[i];
        if (r.coefficients.size() != n)
            throw DimensionError("LP row " + std::to_string(i) + " has " +
                                 std::to_string(r.coefficients.size()) + " coefficients, expected " +
                                 std::to_string(n));
        for (double a : r.coefficients)
            if (!std::isfinite(a)) throw DomainError("LP row " + std::to_string(i) + " is not finite");
        if (r.relation != Relation::range && !std::isfinite(r.rhs))
            throw DomainError("LP row " + std::to_string(i) + " has a non-finite right-hand side");
    }
    for (std::size_t j = 0; j < n; ++j)
        if (std::isnan(p.lower[j]) || std::isnan(p.upper[j]))
            throw DomainError("LP variable " + std::to_string(j) + " has a NaN bound");
}

}  // namespace

LpSolution solve_lp(const LpProblem& p) {
    check_problem(p);
    DenseSimplex simplex(p);
    return simplex.run();
}

double max_violation(const LpProblem& p, const std::vector<double>& x) {
    double worst = 0.0;
    for (std::size_t j = 0; j < p.n_vars(); ++j) {
        worst = std::max(worst, p.lower[j] - x[j]);
        worst = std::max(worst, x[j] - p.upper[j]);
    }
    for (const LpRow& r : p.rows) {
        double a = 0.0;
        for (std::size_t j = 0; j < p.n_vars(); ++j) a += r.coefficients[j] * x[j];
        auto [lo, hi] = row_bounds(r);
        worst = std::max({worst, lo - a, a - hi});
    }
    return worst;
}

std::optional<L1Fit> try_fit_l1(const Eigen::MatrixXd& Phi, const Eigen::VectorXd& y, double weight,
                                double lambda, CoefficientBounds bounds,
                                const std::vector<PredictionBand>& bands) {
    const auto n_pts = static_cast<std::size_t>(Phi.rows());
    const auto n_k = static_cast<std::size_t>(Phi.cols());
    if (static_cast<std::size_t>(y.size()) != n_pts)
        throw DimensionError("fit_l1: " + std::to_string(n_pts) + " basis rows but " +
                             std::to_string(y.size()) + " labels");
    if (!(weight > 0.0)) throw ConfigError("fit_l1: loss weight must be positive");
    if (!(lambda >= 0.0)) throw ConfigError("fit_l1: lambda must be nonnegative");
    if (!(bounds.lower <= bounds.upper)) throw ConfigError("fit_l1: coefficient bounds are inverted");
    for (const auto& b : bands)
        if (static_cast<std::size_t>(b.phi.size()) != n_k)
            throw DimensionError("fit_l1: prediction band has the wrong width");

    if (n_pts == 0 && bands.empty()) {
        L1Fit fit;
        fit.coefficients.assign(n_k, std::clamp(0.0, bounds.lower, bounds.upper));
        for (double c : fit.coefficients) fit.loss += lambda * std::abs(c);
        return fit;
    }

    // Variables: c (K) | c+ (K) | c- (K) | e+ (N) | e- (N).
    const std::size_t c0 = 0, cp0 = n_k, cm0 = 2 * n_k, ep0 = 3 * n_k, em0 = 3 * n_k + n_pts;
    LpProblem lp(3 * n_k + 2 * n_pts);
    for (std::size_t k = 0; k < n_k; ++k) {
        lp.lower[c0 + k] = bounds.lower;
        lp.upper[c0 + k] = bounds.upper;
        lp.objective[cp0 + k] = lambda;
        lp.objective[cm0 + k] = lambda;
    }
    for (std::size_t i = 0; i < n_pts; ++i) {
        lp.objective[ep0 + i] = weight;
        lp.objective[em0 + i] = weight;
    }
    // e+_i - e-_i = y_i - Phi_i c
    for (std::size_t i = 0; i < n_pts; ++i) {
        LpRow r{std::vector<double>(lp.n_vars(), 0.0), Relation::equal, y(static_cast<Eigen::Index>(i))};
        for (std::size_t k = 0; k < n_k; ++k)
            r.coefficients[c0 + k] = Phi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
        r.coefficients[ep0 + i] = 1.0;
        r.coefficients[em0 + i] = -1.0;
        lp.add_row(std::move(r));
    }
    // c+_k - c-_k = c_k
    for (std::size_t k = 0; k < n_k; ++k) {
        LpRow r{std::vector<double>(lp.n_vars(), 0.0), Relation::equal, 0.0};
        r.coefficients[c0 + k] = -1.0;
        r.coefficients[cp0 + k] = 1.0;
        r.coefficients[cm0 + k] = -1.0;
        lp.add_row(std::move(r));
    }
    for (const auto& b : bands) {
        std::vector<double> a(lp.n_vars(), 0.0);
        for (std::size_t k = 0; k < n_k; ++k) a[c0 + k] = b.phi(static_cast<Eigen::Index>(k));
        lp.add_row(LpRow::ranged(std::move(a), b.lo, b.hi));
    }

    LpSolution sol = solve_lp(lp);
    if (sol.status == LpStatus::infeasible) return std::nullopt;
    if (sol.status != LpStatus::optimal)
        throw NumericalError(std::string("fit_l1: leaf LP is ") + to_string(sol.status));
    L1Fit fit;
    fit.coefficients.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(n_k));
    fit.loss = sol.objective;
    return fit;
}

L1Fit fit_l1(const Eigen::MatrixXd& Phi, const Eigen::VectorXd& y, double weight, double lambda,
             CoefficientBounds bounds, const std::vector<PredictionBand>& bands) {
    auto fit = try_fit_l1(Phi, y, weight, lambda, bounds, bands);
    if (!fit) throw NumericalError("fit_l1: coefficient bounds and prediction bands are infeasible");
    return *fit;
}

}  // namespace sdt
