#include <doctest.h>

#include <cmath>

#include "sdt/closed_loop.hpp"
#include "sdt/errors.hpp"

using namespace sdt;

namespace {

TreeModel step_model(double left, double right, double threshold) {
    TreeModel m(1, constant_basis(), {-1e6, 1e6, -1e3, 1e3});
    m.set_branch(1, {0, threshold});
    m.set_leaf(2, {{left}});
    m.set_leaf(3, {{right}});
    return m;
}

// Closed-form reference for u = 0: dx/dt = -k x^3  =>  x(t) = x0 / sqrt(1 + 2 k x0^2 t).
double decay(double x0, double k, double t) { return x0 / std::sqrt(1.0 + 2.0 * k * x0 * x0 * t); }

}  // namespace

TEST_CASE("constant controller at the steady state stays put") {
    PlantSpec p;
    const auto tr = simulate(p, Controller::constant(54.0, 0, 75), 0.6, 10.0, 0.1);
    REQUIRE(tr.size() == 101);
    double dev = 0.0;
    for (double x : tr.states) dev = std::max(dev, std::abs(x - 0.6));
    CHECK(dev <= 1e-3);
    CHECK(tr.times.back() == doctest::Approx(10.0));
    CHECK(tr.x0 == 0.6);
    CHECK(tr.h_int == default_integrator_step);
}

TEST_CASE("zero flow drains monotonically and matches the closed form") {
    PlantSpec p;
    const auto tr = simulate(p, Controller::constant(0.0, 0, 75), 0.75, 10.0, 0.1);
    for (std::size_t i = 1; i < tr.size(); ++i) {
        CHECK(tr.states[i] < tr.states[i - 1]);
        CHECK(tr.states[i] == doctest::Approx(decay(0.75, 2.0, tr.times[i])).epsilon(1e-9));
    }
}

TEST_CASE("MPC closed loop reaches the set point") {
    MpcSpec s;
    const auto tr = simulate(s.plant, Controller::mpc(s), 0.75, 10.0, 0.1);
    CHECK(std::abs(tr.states.back() - 0.6) <= 0.01);
    for (double u : tr.controls) {
        CHECK(u >= s.u_lb);
        CHECK(u <= s.u_ub);
    }
}

TEST_CASE("RK4 global error is fourth order") {
    PlantSpec p;
    const double x0 = 0.9, T = 5.0, h = default_integrator_step;
    for (double u : {0.0, 10.0}) {
        const double ref = integrate(p, x0, u, T, h / 64.0);
        const double e1 = std::abs(integrate(p, x0, u, T, h) - ref);
        const double e2 = std::abs(integrate(p, x0, u, T, h / 2.0) - ref);
        REQUIRE(e2 > 0.0);
        const double ratio = e1 / e2;
        CAPTURE(u);
        CAPTURE(ratio);
        CHECK(ratio >= 8.0);
        CHECK(ratio <= 32.0);
    }
    // u = 0 has a closed form
    const double exact = decay(x0, 2.0, T);
    CHECK(std::abs(integrate(p, x0, 0.0, T, h) - exact) < 1e-10);
}

TEST_CASE("learned controllers are clipped to the input box") {
    PlantSpec p;
    const auto c = Controller::model(step_model(-20.0, 300.0, 0.6), 0.0, 75.0);
    CHECK(c(0.3) == 0.0);
    CHECK(c(0.7) == 75.0);
    const auto tr = simulate(p, c, 0.75, 5.0, 0.1);
    for (double u : tr.controls) CHECK((u == 0.0 || u == 75.0));
    CHECK(Controller::constant(120.0, 0, 75)(0.5) == 75.0);
}

TEST_CASE("simulation is deterministic") {
    PlantSpec p;
    const auto c = Controller::model(reference_reactor_tree(), 0.0, 75.0);
    const auto a = simulate(p, c, 0.75, 10.0, 0.1);
    const auto b = simulate(p, c, 0.75, 10.0, 0.1);
    CHECK(a.states == b.states);
    CHECK(a.controls == b.controls);
    CHECK(a.times == b.times);
}

TEST_CASE("controller failures carry the state and time") {
    PlantSpec p;
    const auto c = Controller::model(reference_reactor_tree(), 0.0, 75.0);
    try {
        simulate(p, c, 0.0, 1.0, 0.1);
        FAIL("expected ControllerError");
    } catch (const ControllerError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("x = 0") != std::string::npos);
        CHECK(msg.find("t = 0") != std::string::npos);
    }
    MpcSpec s;
    CHECK_THROWS_AS(Controller::mpc(s)(1.5), ControllerError);
}

TEST_CASE("simulation preconditions") {
    PlantSpec p;
    const auto c = Controller::constant(10.0, 0, 75);
    CHECK_THROWS_AS(simulate(p, c, 0.5, 1.0, 0.0), PreconditionError);
    CHECK_THROWS_AS(simulate(p, c, 0.5, 0.05, 0.1), PreconditionError);
    CHECK_THROWS_AS(Controller::constant(1.0, 5.0, 5.0), ConfigError);
}

TEST_CASE("integral absolute error") {
    SimTrace flat;
    flat.states = {0.6, 0.6, 0.6};
    CHECK(iae(flat, 0.6) == 0.0);
    SimTrace two;
    two.states = {0.7, 0.5};
    CHECK(iae(two, 0.6) == doctest::Approx(0.2));
}

TEST_CASE("mean absolute error") {
    const Dataset d = Dataset::from_columns({0.2, 0.8}, {10.0, 40.0});
    CHECK(mae(Controller::model(step_model(10.0, 40.0, 0.5), 0, 75), d) == 0.0);
    const Dataset sat = Dataset::from_columns({0.1, 0.5, 0.9}, {75.0, 75.0, 75.0});
    CHECK(mae(Controller::constant(0.0, 0, 75), sat) == 75.0);
}

TEST_CASE("controller latency") {
    MpcSpec s;
    const auto tree = simulate(s.plant, Controller::model(reference_reactor_tree(), 0, 75), 0.75, 10.0, 0.1);
    const auto mpc = simulate(s.plant, Controller::mpc(s), 0.75, 10.0, 0.1);
    const auto cst = simulate(s.plant, Controller::constant(54.0, 0, 75), 0.75, 10.0, 0.1);
    const auto [tm, tx] = latency_stats(tree);
    CHECK(tm <= 1e-3);
    CHECK(tx >= tm);
    CHECK(latency_stats(cst).first >= 0.0);
    CHECK(latency_stats(mpc).first >= tm);
    CHECK_THROWS_AS(latency_stats(SimTrace{}), PreconditionError);
}

TEST_CASE("trace CSV") {
    PlantSpec p;
    const auto tr = simulate(p, Controller::constant(54.0, 0, 75), 0.6, 0.2, 0.1);
    const std::string csv = trace_to_csv(tr, {"run a"});
    CHECK(csv.rfind("# run a\nt,x,u,latency_s\n0,0.6,54,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}
