#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sdt/dataset.hpp"

namespace sdt {

// Isothermal CSTR: dx/dt = (u/V)(x_f - x) - k x^3.
struct PlantSpec {
    double volume = 50.0;              // L
    double feed_concentration = 1.0;   // mol/L
    double rate_constant = 2.0;        // L^2/(min mol^2)

    void check() const;
};

double plant_rhs(const PlantSpec& plant, double x, double u);

struct MpcSpec {
    int horizon = 10;            // T: states x_1..x_T, controls u_1..u_{T-1}
    double step = 0.5;           // h, min
    double terminal_weight = 100.0;
    double setpoint = 0.6;       // mol/L
    double u_rate_max = 50.0;    // |u_{t+1} - u_t| <= h * u_rate_max
    double x_lb = 0.0, x_ub = 1.0;
    double u_lb = 0.0, u_ub = 75.0;
    PlantSpec plant;

    void check() const;
    int n_controls() const { return horizon - 1; }
    // Flow that holds the plant at the set point, clipped to the input box.
    double steady_state_flow() const;
};

struct RolloutResult {
    std::vector<double> states;    // x_1..x_T
    double objective = 0.0;        // sum_t (x_t - sp)^2 + P (x_T - sp)^2
    std::vector<double> gradient;  // d objective / d u, by reverse accumulation
};

// Explicit-Euler single-shooting rollout of the MPC model.
RolloutResult rollout(const MpcSpec& spec, double x0, std::span<const double> controls);

struct MpcSolution {
    std::vector<double> controls;
    std::vector<double> states;
    double objective = 0.0;
    double kkt_residual = 0.0;   // inf-norm of the projected Lagrangian gradient
    double max_violation = 0.0;  // rate and state constraints
    double first_action = 0.0;
    int outer_iterations = 0;
};

// Multi-start augmented Lagrangian (rate and state constraints) with a
// projected spectral-gradient inner solver (input box by projection). Starts
// from u = u_lb, u = u_ub and the steady-state flow; returns the best start
// meeting the tolerances, otherwise throws ConvergenceError.
MpcSolution solve_mpc(const MpcSpec& spec, double x0);

inline constexpr double mpc_tolerance = 1e-6;

enum class SamplingMode { uniform_grid, seeded_random };

// Initial states on [lo, hi] labelled with the MPC's first action.
// uniform_grid: lo + (hi - lo) i / (n - 1). seeded_random: sorted uniform
// draws from a 64-bit Mersenne Twister; identical (mode, seed) give identical
// data on every platform.
Dataset generate_dataset(const MpcSpec& spec, int n, double lo, double hi, SamplingMode mode,
                         std::uint64_t seed = 0, const std::vector<double>& exclude = {});

}  // namespace sdt
