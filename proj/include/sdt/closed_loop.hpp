#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sdt/dataset.hpp"
#include "sdt/mpc.hpp"
#include "sdt/tree.hpp"

namespace sdt {

// State-feedback law x -> u; every output is clipped to [u_lb, u_ub].
class Controller {
public:
    static Controller mpc(MpcSpec spec);
    static Controller model(TreeModel model, double u_lb, double u_ub);
    static Controller constant(double value, double u_lb, double u_ub);

    // Throws ControllerError if the law cannot be evaluated at x.
    double operator()(double x) const;
    std::string name() const;
    double u_lb() const { return u_lb_; }
    double u_ub() const { return u_ub_; }

private:
    struct Mpc { MpcSpec spec; };
    struct Model { TreeModel tree; };
    struct Constant { double value; };
    Controller(std::variant<Mpc, Model, Constant> law, double lo, double hi);

    std::variant<Mpc, Model, Constant> law_;
    double u_lb_, u_ub_;
};

inline constexpr double default_integrator_step = 0.01;  // min

struct SimTrace {
    std::vector<double> times, states, controls, latency_s;
    double x0 = 0.0, t_final = 0.0, dt_sample = 0.0, h_int = 0.0;

    std::size_t size() const { return times.size(); }
};

double rk4_step(const PlantSpec& plant, double x, double u, double h);
// Fixed control over `duration`, in equal RK4 steps no longer than h_int.
double integrate(const PlantSpec& plant, double x, double u, double duration, double h_int);

// Zero-order hold: at t_k = k dt the controller sees x(t_k), its output is
// held until t_{k+1}. The trace has one row per sample instant, k = 0..K with
// K = round(t_final / dt).
SimTrace simulate(const PlantSpec& plant, const Controller& ctrl, double x0, double t_final, double dt_sample,
                  double h_int = default_integrator_step);

// Sum over sample instants of |x_t - x_sp|.
double iae(const SimTrace& trace, double setpoint);
double mae(const Controller& ctrl, const Dataset& data);
// (mean, max) controller latency in seconds.
std::pair<double, double> latency_stats(const SimTrace& trace);

std::string trace_to_csv(const SimTrace& trace, const std::vector<std::string>& comment_lines = {});
void write_trace_csv(const SimTrace& trace, const std::filesystem::path& path,
                     const std::vector<std::string>& comment_lines = {});

}  // namespace sdt
