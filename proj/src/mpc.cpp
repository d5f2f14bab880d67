#include "sdt/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "sdt/errors.hpp"

namespace sdt {

void PlantSpec::check() const {
    if (!(volume > 0.0) || !(feed_concentration > 0.0) || !(rate_constant > 0.0))
        throw ConfigError("plant volume, feed concentration and rate constant must be positive");
}

double plant_rhs(const PlantSpec& plant, double x, double u) {
    return (u / plant.volume) * (plant.feed_concentration - x) - plant.rate_constant * x * x * x;
}

void MpcSpec::check() const {
    plant.check();
    if (horizon < 2) throw ConfigError("MPC horizon must be at least 2");
    if (!(step > 0.0)) throw ConfigError("MPC step must be positive");
    if (!(terminal_weight >= 0.0)) throw ConfigError("terminal weight must be nonnegative");
    if (!(u_rate_max > 0.0)) throw ConfigError("maximum rate of change must be positive");
    if (!(x_lb < x_ub)) throw ConfigError("state bounds must satisfy x_lb < x_ub");
    if (!(u_lb < u_ub)) throw ConfigError("input bounds must satisfy u_lb < u_ub");
}

double MpcSpec::steady_state_flow() const {
    const double sp = setpoint;
    const double gap = plant.feed_concentration - sp;
    const double flow = gap > 0.0 ? plant.volume * plant.rate_constant * sp * sp * sp / gap : u_ub;
    return std::clamp(flow, u_lb, u_ub);
}

namespace {

// Stage cost derivative hook: adds d(extra cost)/dx_t for t = 1..T (1-based).
template <class ExtraStage>
RolloutResult adjoint_rollout(const MpcSpec& spec, double x0, std::span<const double> u, ExtraStage&& extra) {
    const int T = spec.horizon;
    const double h = spec.step;
    const PlantSpec& pl = spec.plant;
    RolloutResult r;
    r.states.resize(static_cast<std::size_t>(T));
    r.states[0] = x0;
    for (int t = 0; t + 1 < T; ++t)
        r.states[t + 1] = r.states[t] + h * plant_rhs(pl, r.states[t], u[t]);

    std::vector<double> dx(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
        const double e = r.states[t] - spec.setpoint;
        r.objective += e * e;
        dx[t] = 2.0 * e;
        if (t == T - 1) {
            r.objective += spec.terminal_weight * e * e;
            dx[t] += 2.0 * spec.terminal_weight * e;
        }
        auto [value, slope] = extra(t, r.states[t]);
        r.objective += value;
        dx[t] += slope;
    }

    r.gradient.assign(static_cast<std::size_t>(T - 1), 0.0);
    double adj = dx[T - 1];
    for (int t = T - 2; t >= 0; --t) {
        const double x = r.states[t];
        const double df_du = (pl.feed_concentration - x) / pl.volume;
        const double df_dx = -u[t] / pl.volume - 3.0 * pl.rate_constant * x * x;
        r.gradient[t] = adj * h * df_du;
        adj = dx[t] + adj * (1.0 + h * df_dx);
    }
    return r;
}

struct NoExtra {
    std::pair<double, double> operator()(int, double) const { return {0.0, 0.0}; }
};

// Inequality constraints g <= 0 handled by the augmented Lagrangian:
//   rate:  +/-(u_{t+1} - u_t) / (h Ubar) - 1      t = 1..T-2
//   state: x_t - x_ub, x_lb - x_t                 t = 2..T
class AugmentedLagrangian {
public:
    explicit AugmentedLagrangian(const MpcSpec& spec, double x0)
        : spec_(spec), x0_(x0), n_(spec.n_controls()),
          rate_scale_(spec.step * spec.u_rate_max),
          mu_rate_up_(static_cast<std::size_t>(std::max(0, n_ - 1)), 0.0),
          mu_rate_dn_(mu_rate_up_.size(), 0.0),
          mu_x_up_(static_cast<std::size_t>(spec.horizon), 0.0),
          mu_x_dn_(mu_x_up_.size(), 0.0) {}

    double rho = 10.0;

    // Value and gradient (w.r.t. u) of the augmented Lagrangian.
    double value(std::span<const double> u, std::vector<double>* grad) const {
        auto psi = [this](double mu, double g) {
            const double s = std::max(0.0, mu + rho * g);
            return std::pair{(s * s - mu * mu) / (2.0 * rho), s};
        };
        auto extra = [&](int t, double x) -> std::pair<double, double> {
            if (t == 0) return {0.0, 0.0};
            auto [vu, su] = psi(mu_x_up_[t], x - spec_.x_ub);
            auto [vd, sd] = psi(mu_x_dn_[t], spec_.x_lb - x);
            return {vu + vd, su - sd};
        };
        RolloutResult r = adjoint_rollout(spec_, x0_, u, extra);
        double total = r.objective;
        for (int t = 0; t + 1 < n_; ++t) {
            const double d = (u[t + 1] - u[t]) / rate_scale_;
            auto [vu, su] = psi(mu_rate_up_[t], d - 1.0);
            auto [vd, sd] = psi(mu_rate_dn_[t], -d - 1.0);
            total += vu + vd;
            const double slope = (su - sd) / rate_scale_;
            r.gradient[t + 1] += slope;
            r.gradient[t] -= slope;
        }
        if (grad) *grad = std::move(r.gradient);
        return total;
    }

    // Gradient of J + sum mu g at the current multipliers.
    std::vector<double> lagrangian_gradient(std::span<const double> u) const {
        auto extra = [&](int t, double) -> std::pair<double, double> {
            if (t == 0) return {0.0, 0.0};
            return {0.0, mu_x_up_[t] - mu_x_dn_[t]};
        };
        RolloutResult r = adjoint_rollout(spec_, x0_, u, extra);
        for (int t = 0; t + 1 < n_; ++t) {
            const double slope = (mu_rate_up_[t] - mu_rate_dn_[t]) / rate_scale_;
            r.gradient[t + 1] += slope;
            r.gradient[t] -= slope;
        }
        return r.gradient;
    }

    // Largest constraint violation, in the constraints' natural units
    // (L/min for rates, mol/L for states).
    double violation(std::span<const double> u, const std::vector<double>& states) const {
        double v = 0.0;
        for (int t = 0; t + 1 < n_; ++t) v = std::max(v, std::abs(u[t + 1] - u[t]) - rate_scale_);
        for (std::size_t t = 1; t < states.size(); ++t)
            v = std::max({v, states[t] - spec_.x_ub, spec_.x_lb - states[t]});
        return v;
    }

    // Largest |mu * g| (complementarity), with g in the scaled units above.
    double complementarity(std::span<const double> u, const std::vector<double>& states) const {
        double c = 0.0;
        for (int t = 0; t + 1 < n_; ++t) {
            const double d = (u[t + 1] - u[t]) / rate_scale_;
            c = std::max({c, std::abs(mu_rate_up_[t] * (d - 1.0)), std::abs(mu_rate_dn_[t] * (-d - 1.0))});
        }
        for (std::size_t t = 1; t < states.size(); ++t)
            c = std::max({c, std::abs(mu_x_up_[t] * (states[t] - spec_.x_ub)),
                          std::abs(mu_x_dn_[t] * (spec_.x_lb - states[t]))});
        return c;
    }

    void update_multipliers(std::span<const double> u, const std::vector<double>& states) {
        for (int t = 0; t + 1 < n_; ++t) {
            const double d = (u[t + 1] - u[t]) / rate_scale_;
            mu_rate_up_[t] = std::max(0.0, mu_rate_up_[t] + rho * (d - 1.0));
            mu_rate_dn_[t] = std::max(0.0, mu_rate_dn_[t] + rho * (-d - 1.0));
        }
        for (std::size_t t = 1; t < states.size(); ++t) {
            mu_x_up_[t] = std::max(0.0, mu_x_up_[t] + rho * (states[t] - spec_.x_ub));
            mu_x_dn_[t] = std::max(0.0, mu_x_dn_[t] + rho * (spec_.x_lb - states[t]));
        }
    }

private:
    const MpcSpec& spec_;
    double x0_;
    int n_;
    double rate_scale_;
    std::vector<double> mu_rate_up_, mu_rate_dn_, mu_x_up_, mu_x_dn_;
};

double projected_gradient_norm(std::span<const double> u, std::span<const double> g, double lo, double hi) {
    double r = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) r = std::max(r, std::abs(std::clamp(u[i] - g[i], lo, hi) - u[i]));
    return r;
}

constexpr int max_outer = 50;
constexpr int max_inner = 2000;
constexpr double inner_tol = 1e-11;  // projected gradient, w.r.t. u

// Nonmonotone spectral projected gradient on the input box.
void minimize_box(const AugmentedLagrangian& al, std::vector<double>& u, double lo, double hi) {
    const std::size_t n = u.size();
    for (double& v : u) v = std::clamp(v, lo, hi);
    std::vector<double> g, g_new, trial(n), d(n);
    double f = al.value(u, &g);
    constexpr int memory = 10;
    std::vector<double> history(memory, f);
    double alpha = 1.0;
    {
        const double pg = projected_gradient_norm(u, g, lo, hi);
        if (pg > 0.0) alpha = std::min(1e6, 1.0 / pg);
    }
    for (int it = 0; it < max_inner; ++it) {
        if (projected_gradient_norm(u, g, lo, hi) <= inner_tol) return;
        double slope = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d[i] = std::clamp(u[i] - alpha * g[i], lo, hi) - u[i];
            slope += g[i] * d[i];
        }
        if (slope >= 0.0) return;  // no descent left at working precision
        const double f_ref = *std::max_element(history.begin(), history.end());
        double step = 1.0;
        double f_new = 0.0;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = std::clamp(u[i] + step * d[i], lo, hi);
            f_new = al.value(trial, &g_new);
            if (f_new <= f_ref + 1e-4 * step * slope) break;
            step *= 0.5;
        }
        double ss = 0.0, sy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double s = trial[i] - u[i];
            ss += s * s;
            sy += s * (g_new[i] - g[i]);
        }
        u.swap(trial);
        g.swap(g_new);
        f = f_new;
        history[static_cast<std::size_t>(it % memory)] = f;
        alpha = sy > 0.0 ? std::clamp(ss / sy, 1e-10, 1e10) : 1e10;
        if (ss == 0.0) return;
    }
}

struct StartResult {
    MpcSolution solution;
    bool converged = false;
};

StartResult solve_from(const MpcSpec& spec, double x0, std::vector<double> u) {
    AugmentedLagrangian al(spec, x0);
    StartResult out;
    double previous_violation = std::numeric_limits<double>::infinity();
    for (int outer = 1; outer <= max_outer; ++outer) {
        minimize_box(al, u, spec.u_lb, spec.u_ub);
        const RolloutResult r = rollout(spec, x0, u);
        const double violation = al.violation(u, r.states);
        al.update_multipliers(u, r.states);
        const std::vector<double> lag = al.lagrangian_gradient(u);
        const double kkt = std::max(projected_gradient_norm(u, lag, spec.u_lb, spec.u_ub),
                                    al.complementarity(u, r.states));
        out.solution.controls = u;
        out.solution.states = r.states;
        out.solution.objective = r.objective;
        out.solution.kkt_residual = kkt;
        out.solution.max_violation = std::max(0.0, violation);
        out.solution.first_action = u.front();
        out.solution.outer_iterations = outer;
        if (violation <= mpc_tolerance && kkt <= mpc_tolerance) {
            out.converged = true;
            return out;
        }
        if (violation > 0.25 * previous_violation) al.rho = std::min(al.rho * 10.0, 1e10);
        previous_violation = violation;
    }
    return out;
}

}  // namespace

RolloutResult rollout(const MpcSpec& spec, double x0, std::span<const double> controls) {
    if (static_cast<int>(controls.size()) != spec.n_controls())
        throw DimensionError("rollout expects " + std::to_string(spec.n_controls()) + " controls, got " +
                             std::to_string(controls.size()));
    return adjoint_rollout(spec, x0, controls, NoExtra{});
}

MpcSolution solve_mpc(const MpcSpec& spec, double x0) {
    spec.check();
    if (!(x0 >= spec.x_lb && x0 <= spec.x_ub)) {
        std::ostringstream msg;
        msg << "initial state " << x0 << " outside [" << spec.x_lb << ", " << spec.x_ub << "]";
        throw PreconditionError(msg.str());
    }
    const auto n = static_cast<std::size_t>(spec.n_controls());
    const double starts[] = {spec.u_lb, spec.u_ub, spec.steady_state_flow()};
    bool found = false;
    MpcSolution best;
    double worst_kkt = 0.0, worst_violation = 0.0;
    for (double s : starts) {
        StartResult r = solve_from(spec, x0, std::vector<double>(n, s));
        if (!r.converged) {
            worst_kkt = std::max(worst_kkt, r.solution.kkt_residual);
            worst_violation = std::max(worst_violation, r.solution.max_violation);
            continue;
        }
        if (!found || r.solution.objective < best.objective) best = std::move(r.solution);
        found = true;
    }
    if (!found) {
        std::ostringstream msg;
        msg << "MPC did not converge from x0 = " << x0 << " (kkt " << worst_kkt << ", violation "
            << worst_violation << ")";
        throw ConvergenceError(msg.str());
    }
    return best;
}

Dataset generate_dataset(const MpcSpec& spec, int n, double lo, double hi, SamplingMode mode, std::uint64_t seed,
                         const std::vector<double>& exclude) {
    if (n < 1) throw PreconditionError("dataset size must be at least 1");
    if (!(lo <= hi) || (n > 1 && !(lo < hi)))
        throw PreconditionError("sampling range needs lo < hi");
    if (lo < spec.x_lb || hi > spec.x_ub) throw PreconditionError("sampling range leaves the state bounds");

    std::vector<double> xs;
    if (mode == SamplingMode::uniform_grid) {
        for (int i = 0; i < n; ++i)
            xs.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    } else {
        std::mt19937_64 rng(seed);
        while (static_cast<int>(xs.size()) < n) {
            // 53 random bits -> [0, 1), independent of the library's distributions.
            const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            const double v = lo + (hi - lo) * unit;
            if (std::find(exclude.begin(), exclude.end(), v) != exclude.end()) continue;
            if (std::find(xs.begin(), xs.end(), v) != xs.end()) continue;
            xs.push_back(v);
        }
        std::sort(xs.begin(), xs.end());
    }

    std::vector<double> ys;
    ys.reserve(xs.size());
    for (double x : xs) {
        try {
            ys.push_back(solve_mpc(spec, x).first_action);
        } catch (const ConvergenceError& e) {
            throw ConvergenceError(std::string("labelling failed: ") + e.what());
        }
    }
    return Dataset::from_columns(xs, ys);
}

}  // namespace sdt
