#include "sdt/closed_loop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "sdt/errors.hpp"
#include "sdt/format.hpp"

namespace sdt {

Controller::Controller(std::variant<Mpc, Model, Constant> law, double lo, double hi)
    : law_(std::move(law)), u_lb_(lo), u_ub_(hi) {
    if (!(lo < hi)) throw ConfigError("controller input bounds must satisfy u_lb < u_ub");
}

Controller Controller::mpc(MpcSpec spec) {
    spec.check();
    const double lo = spec.u_lb, hi = spec.u_ub;
    return Controller(Mpc{std::move(spec)}, lo, hi);
}

Controller Controller::model(TreeModel model, double u_lb, double u_ub) {
    if (auto problems = model.validate(); !problems.empty())
        throw ModelInvalidError("controller model is invalid: " + problems.front());
    return Controller(Model{std::move(model)}, u_lb, u_ub);
}

Controller Controller::constant(double value, double u_lb, double u_ub) {
    if (!std::isfinite(value)) throw ConfigError("constant controller value must be finite");
    return Controller(Constant{value}, u_lb, u_ub);
}

double Controller::operator()(double x) const {
    double u = 0.0;
    try {
        u = std::visit(
            [x](const auto& law) -> double {
                using T = std::decay_t<decltype(law)>;
                if constexpr (std::is_same_v<T, Mpc>) return solve_mpc(law.spec, x).first_action;
                else if constexpr (std::is_same_v<T, Model>) return law.tree.predict(std::span<const double>(&x, 1));
                else return law.value;
            },
            law_);
    } catch (const Error& e) {
        std::ostringstream msg;
        msg << name() << " controller failed at x = " << format_double(x) << ": " << e.what();
        throw ControllerError(msg.str());
    }
    if (!std::isfinite(u)) throw ControllerError(name() + " controller returned a non-finite action");
    return std::clamp(u, u_lb_, u_ub_);
}

std::string Controller::name() const {
    switch (law_.index()) {
        case 0: return "mpc";
        case 1: return "model";
        default: return "constant";
    }
}

double rk4_step(const PlantSpec& plant, double x, double u, double h) {
    const double k1 = plant_rhs(plant, x, u);
    const double k2 = plant_rhs(plant, x + 0.5 * h * k1, u);
    const double k3 = plant_rhs(plant, x + 0.5 * h * k2, u);
    const double k4 = plant_rhs(plant, x + h * k3, u);
    return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double integrate(const PlantSpec& plant, double x, double u, double duration, double h_int) {
    if (!(h_int > 0.0)) throw ConfigError("integrator step must be positive");
    if (duration <= 0.0) return x;
    const int steps = static_cast<int>(std::ceil(duration / h_int - 1e-9));
    const double h = duration / steps;
    for (int i = 0; i < steps; ++i) x = rk4_step(plant, x, u, h);
    return x;
}

SimTrace simulate(const PlantSpec& plant, const Controller& ctrl, double x0, double t_final, double dt_sample,
                  double h_int) {
    plant.check();
    if (!(dt_sample > 0.0)) throw PreconditionError("sampling time must be positive");
    if (!(t_final >= dt_sample)) throw PreconditionError("t_final must be at least one sampling time");
    if (!(h_int > 0.0)) throw PreconditionError("integrator step must be positive");
    if (!std::isfinite(x0)) throw PreconditionError("initial state must be finite");

    const auto samples = static_cast<long>(std::llround(t_final / dt_sample));
    SimTrace tr;
    tr.x0 = x0;
    tr.t_final = t_final;
    tr.dt_sample = dt_sample;
    tr.h_int = h_int;
    double x = x0;
    for (long k = 0; k <= samples; ++k) {
        const double t = static_cast<double>(k) * dt_sample;
        const auto start = std::chrono::steady_clock::now();
        double u = 0.0;
        try {
            u = ctrl(x);
        } catch (const ControllerError& e) {
            throw ControllerError(std::string(e.what()) + " (t = " + format_double(t) + ")");
        }
        const auto stop = std::chrono::steady_clock::now();
        tr.times.push_back(t);
        tr.states.push_back(x);
        tr.controls.push_back(u);
        tr.latency_s.push_back(std::chrono::duration<double>(stop - start).count());
        if (k < samples) {
            x = integrate(plant, x, u, dt_sample, h_int);
            if (!std::isfinite(x)) throw NumericalError("plant state diverged at t = " + format_double(t));
        }
    }
    return tr;
}

double iae(const SimTrace& trace, double setpoint) {
    double s = 0.0;
    for (double x : trace.states) s += std::abs(x - setpoint);
    return s;
}

double mae(const Controller& ctrl, const Dataset& data) {
    data.check();
    if (data.n_features() != 1) throw DimensionError("controllers take a single state");
    double s = 0.0;
    for (Eigen::Index i = 0; i < data.size(); ++i) s += std::abs(data.y(i) - ctrl(data.X(i, 0)));
    return s / static_cast<double>(data.size());
}

std::pair<double, double> latency_stats(const SimTrace& trace) {
    if (trace.latency_s.empty()) throw PreconditionError("empty trace");
    double sum = 0.0, peak = 0.0;
    for (double v : trace.latency_s) {
        sum += v;
        peak = std::max(peak, v);
    }
    return {sum / static_cast<double>(trace.latency_s.size()), peak};
}

std::string trace_to_csv(const SimTrace& trace, const std::vector<std::string>& comment_lines) {
    std::ostringstream out;
    for (const auto& c : comment_lines) out << "# " << c << '\n';
    out << "t,x,u,latency_s\n";
    for (std::size_t i = 0; i < trace.size(); ++i)
        out << format_double(trace.times[i]) << ',' << format_double(trace.states[i]) << ','
            << format_double(trace.controls[i]) << ',' << format_double(trace.latency_s[i]) << '\n';
    return out.str();
}

void write_trace_csv(const SimTrace& trace, const std::filesystem::path& path,
                     const std::vector<std::string>& comment_lines) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path.string());
    f << trace_to_csv(trace, comment_lines);
    if (!f) throw IoError("failed writing " + path.string());
}

}  // namespace sdt
