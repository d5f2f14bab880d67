// Acceptance run: one PASS/FAIL line per criterion; exit status 1 if any fail.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "learner_oracle.hpp"
#include "lp_oracle.hpp"
#include "milp_oracle.hpp"
#include "sdt/baselines.hpp"
#include "sdt/cli.hpp"
#include "sdt/closed_loop.hpp"
#include "sdt/format.hpp"
#include "sdt/milp.hpp"
#include "sdt/tree.hpp"

using namespace sdt;
namespace fs = std::filesystem;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

int failures = 0;

void verdict(int id, const std::string& title, bool ok, const std::string& detail) {
    if (!ok) ++failures;
    std::cout << (ok ? "PASS" : "FAIL") << "  criterion " << id << " (" << title << "): " << detail << std::endl;
}

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

double predict1(const TreeModel& m, double x) {
    const double v[] = {x};
    return m.predict(v);
}

// ---------------------------------------------------------------- 1

void milp_fidelity() {
    const fs::path dir = fs::temp_directory_path() / ("sdt_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    std::ostringstream out, err;
    const auto t0 = clock_type::now();
    const int code = run({"export-milp", "--out", (dir / "canonical.mps").string(), "--counts",
                          (dir / "counts.json").string()},
                         out, err);
    const double elapsed = seconds_since(t0);
    if (code != 0) {
        fs::remove_all(dir);
        verdict(1, "MILP fidelity", false, "export-milp exited " + std::to_string(code) + ": " + err.str());
        return;
    }
    std::ifstream f(dir / "counts.json");
    const auto counts = nlohmann::json::parse(f);
    fs::remove_all(dir);
    const long vars = counts["variables"], bins = counts["binaries"], rows = counts["rows"];
    const bool ok = std::labs(vars - 1615) <= 5 && std::labs(bins - 363) <= 5 && std::labs(rows - 3662) <= 10 &&
                    elapsed < 5.0;
    verdict(1, "MILP fidelity", ok,
            "variables " + std::to_string(vars) + " (1615 +-5), binaries " + std::to_string(bins) +
                " (363 +-5), rows " + std::to_string(rows) + " (3662 +-10), " + fmt(elapsed, 3) + " s (< 5 s)");
}

// ---------------------------------------------------------------- 2

void learner_equivalence() {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    const std::vector<std::string> forms{"1", "x", "exp(-x)"};
    double worst_brute = 0.0, worst_milp = 0.0;
    const auto t0 = clock_type::now();
    for (int t = 0; t < 20; ++t) {
        const int n = 2 + t % 7;  // 2..8 points
        std::vector<double> x, y;
        while (static_cast<int>(x.size()) < n) {
            const double v = std::round(u(rng) * 100.0) / 100.0;
            if (std::find(x.begin(), x.end(), v) != x.end()) continue;
            x.push_back(v);
            y.push_back(std::round(20.0 * u(rng)) / 2.0);
        }
        const Dataset d = Dataset::from_columns(x, y);
        const int k = 1 + static_cast<int>(rng() % 2);
        const long first = static_cast<long>(rng() % 2);
        const BasisSet basis = BasisSet::from_forms({forms.begin() + first, forms.begin() + first + k});
        LearnConfig cfg;
        cfg.depth = 1;
        cfg.lambda_c = t % 2 == 0 ? 0.05 : 0.01;
        cfg.lambda_m = t % 3 == 0 ? 0.0 : 0.01;
        const double fit = fit_tree(d, basis, cfg).objective;
        const double brute = oracle::depth1_partition_optimum(d, basis, cfg);
        const double milp = oracle::solve_tiny_milp(build_milp(d, basis, cfg)).objective;
        worst_brute = std::max(worst_brute, std::abs(fit - brute));
        worst_milp = std::max(worst_milp, std::abs(fit - milp));
    }
    const double elapsed = seconds_since(t0);
    verdict(2, "exact learner vs oracles", worst_brute <= 1e-8 && worst_milp <= 1e-6 && elapsed < 120.0,
            "20 instances, max |fit - brute force| " + fmt(worst_brute, 3) + " (<= 1e-8), max |fit - tiny MILP| " +
                fmt(worst_milp, 3) + " (<= 1e-6), " + fmt(elapsed, 3) + " s (< 120 s)");
}

// ---------------------------------------------------------------- 3

void in_class_recovery() {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> coef(-3.0, 3.0), cut(0.2, 0.8);
    const BasisSet basis = BasisSet::from_forms({"1", "x", "x^2*exp(x)"});
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        TreeModel truth(2, basis, ModelBounds{-100, 100, -1e3, 1e3});
        const double root = cut(rng);
        truth.set_branch(1, {0, root});
        truth.set_branch(2, {0, 0.1 + (root - 0.1) * 0.5});
        truth.set_branch(3, {0, root + (0.9 - root) * 0.5});
        for (int leaf = 4; leaf <= 7; ++leaf) truth.set_leaf(leaf, {{coef(rng), coef(rng), coef(rng)}});
        std::vector<double> x, y;
        for (int i = 0; i < 30; ++i) {
            x.push_back(0.1 + 0.8 * i / 29.0);
            y.push_back(predict1(truth, x.back()));
        }
        LearnConfig cfg;
        cfg.depth = 2;
        cfg.lambda_c = 0.0;
        cfg.lambda_m = 0.0;
        worst = std::max(worst, fit_tree(Dataset::from_columns(x, y), basis, cfg).objective);
    }
    verdict(3, "in-class recovery", worst <= 1e-8,
            "5 random depth-2 trees, worst fitted objective " + fmt(worst, 3) + " (<= 1e-8)");
}

// ---------------------------------------------------------------- 4

void reference_tree() {
    const TreeModel m = reference_reactor_tree();
    double worst = 0.0;
    for (int i = 0; i <= 190; ++i) worst = std::max(worst, std::abs(predict1(m, 0.70 + 0.19 * i / 190.0) - 75.0));
    verdict(4, "published tree near 75", worst <= 0.1,
            "max |prediction - 75| on 191 points of [0.70, 0.89] = " + fmt(worst, 3) + " (<= 0.1)");
}

// ---------------------------------------------------------------- 5

void mpc_sanity() {
    const MpcSpec s;
    const double first = solve_mpc(s, 0.6).first_action;

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(0.05, 0.95), uu(s.u_lb, s.u_ub);
    double grad_err = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const double x0 = ux(rng);
        std::vector<double> u(static_cast<std::size_t>(s.n_controls()));
        for (double& v : u) v = uu(rng);
        const auto r = rollout(s, x0, u);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            auto up = u, dn = u;
            up[i] += 1e-6;
            dn[i] -= 1e-6;
            const double fd = (rollout(s, x0, up).objective - rollout(s, x0, dn).objective) / 2e-6;
            num = std::max(num, std::abs(fd - r.gradient[i]));
            den = std::max(den, std::abs(fd));
        }
        grad_err = std::max(grad_err, num / std::max(den, 1e-8));
    }

    // Independent feasibility check of returned solutions.
    double violation = 0.0;
    for (int i = 0; i <= 40; ++i) {
        const double x0 = 0.05 + 0.9 * i / 40.0;
        const MpcSolution sol = solve_mpc(s, x0);
        const auto& u = sol.controls;
        for (std::size_t t = 0; t < u.size(); ++t) {
            violation = std::max({violation, s.u_lb - u[t], u[t] - s.u_ub});
            if (t + 1 < u.size()) violation = std::max(violation, std::abs(u[t + 1] - u[t]) - s.step * s.u_rate_max);
        }
        const auto states = rollout(s, x0, u).states;
        for (std::size_t t = 1; t < states.size(); ++t)
            violation = std::max({violation, s.x_lb - states[t], states[t] - s.x_ub});
    }
    violation = std::max(violation, 0.0);
    verdict(5, "MPC oracle sanity", std::abs(first - 54.0) <= 2.0 && grad_err <= 1e-5 && violation <= 1e-6,
            "first action at x0 = 0.6 is " + fmt(first, 6) + " (54 +- 2), gradient rel. error " + fmt(grad_err, 3) +
                " over 100 points (<= 1e-5), max constraint violation over 41 solves " + fmt(violation, 3) +
                " (<= 1e-6)");
}

// ---------------------------------------------------------------- 6, 7

struct Trained {
    std::string name;
    TreeModel model;
    double mae = 0.0;
};

void end_to_end() {
    const RunConfig cfg;
    const auto t0 = clock_type::now();
    const auto [train, test] = make_datasets(cfg);
    std::vector<Trained> models;
    models.push_back({"symbolic tree", fit_tree(train, canonical_basis(), cfg.learn).model});
    models.push_back({"linear tree", fit_cart_linear(train, cfg.learn.depth)});
    models.push_back({"sparse", fit_sparse(train, canonical_basis(), cfg.learn.lambda_m,
                                           {cfg.learn.c_lb, cfg.learn.c_ub})
                                    .model});
    models.push_back({"constant tree", fit_cart_constant(train, cfg.learn.depth)});
    std::string maes;
    for (auto& m : models) {
        m.mae = mae(Controller::model(m.model, cfg.mpc.u_lb, cfg.mpc.u_ub), test);
        maes += (maes.empty() ? "" : ", ") + m.name + " " + fmt(m.mae);
    }
    const double elapsed = seconds_since(t0);
    const bool ordered = models[0].mae < models[1].mae && models[1].mae < models[2].mae && models[2].mae < models[3].mae;
    verdict(6, "end-to-end test-MAE ordering", ordered && models[0].mae <= 0.15 && elapsed <= 900.0,
            "test MAE " + maes + "; ordering " + (ordered ? "holds" : "violated") + ", symbolic <= 0.15 " +
                (models[0].mae <= 0.15 ? "holds" : "violated") + ", " + fmt(elapsed, 3) + " s (<= 900 s)");

    const auto& s = cfg.sim;
    auto closed_loop = [&](const Controller& c) { return simulate(cfg.mpc.plant, c, s.x0, s.t_final, s.dt_sample); };
    const SimTrace mpc_trace = closed_loop(Controller::mpc(cfg.mpc));
    const double iae_mpc = iae(mpc_trace, cfg.mpc.setpoint);
    const double lat_mpc = latency_stats(mpc_trace).first;
    std::vector<double> iaes;
    double lat_tree = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const SimTrace tr = closed_loop(Controller::model(models[i].model, cfg.mpc.u_lb, cfg.mpc.u_ub));
        iaes.push_back(iae(tr, cfg.mpc.setpoint));
        if (i == 0) lat_tree = latency_stats(tr).first;
    }
    const bool ratio_ok = iaes[0] <= 1.10 * iae_mpc;
    const bool lin_ok = iaes[1] > iaes[0];
    const bool sparse_ok = iaes[2] > iaes[0];
    const bool latency_ok = lat_tree <= 1e-3 && lat_tree <= lat_mpc;
    verdict(7, "closed loop", ratio_ok && lin_ok && sparse_ok && latency_ok,
            "IAE mpc " + fmt(iae_mpc) + ", symbolic " + fmt(iaes[0]) + " (ratio " + fmt(iaes[0] / iae_mpc) +
                ", <= 1.10 " + (ratio_ok ? "holds" : "violated") + "), linear tree " + fmt(iaes[1]) + " (> symbolic " +
                (lin_ok ? "holds" : "violated") + "), sparse " + fmt(iaes[2]) + " (> symbolic " +
                (sparse_ok ? "holds" : "violated") + "); mean latency tree " + fmt(lat_tree, 3) + " s, mpc " +
                fmt(lat_mpc, 3) + " s (" + (latency_ok ? "holds" : "violated") + ")");
}

// ---------------------------------------------------------------- 8

TreeModel random_tree(std::mt19937_64& rng, int depth, int n_features, const BasisSet& basis) {
    std::uniform_real_distribution<double> unit(0.0, 1.0), coef(-5.0, 5.0);
    std::uniform_int_distribution<int> feat(0, n_features - 1);
    TreeModel m(depth, basis, ModelBounds{-10.0, 10.0, -100.0, 100.0});
    m.set_branch(1, {feat(rng), unit(rng)});
    for (int n = 2; n <= m.node_count(); ++n) {
        if (m.kind(topology::parent(n)) != NodeKind::branch) continue;
        if (!topology::is_terminal(n, depth) && unit(rng) < 0.5) {
            m.set_branch(n, {feat(rng), unit(rng)});
        } else {
            LeafExpression e;
            for (std::size_t k = 0; k < basis.size(); ++k) e.coefficients.push_back(coef(rng));
            m.set_leaf(n, e);
        }
    }
    return m;
}

void property_suites() {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::string> broken;

    // routing totality and ties-go-right
    bool routing = true, roundtrip = true;
    for (int trial = 0; trial < 200; ++trial) {
        const TreeModel m = random_tree(rng, 1 + trial % 4, 2, linear_basis(2));
        for (int s = 0; s < 20; ++s) {
            const double x[] = {unit(rng), unit(rng)};
            routing &= m.kind(m.route(x)) == NodeKind::leaf;
        }
        double x[] = {0.5, 0.5};
        x[m.rule(1).feature] = m.rule(1).threshold;
        const auto lefts = topology::left_ancestors(m.route(x));
        routing &= std::find(lefts.begin(), lefts.end(), 1) == lefts.end();
        const TreeModel wide = random_tree(rng, 1 + trial % 3, 1, canonical_basis());
        roundtrip &= deserialize(serialize(wide, trial % 2 == 0 ? -1 : 2)) == wide;
        roundtrip &= deserialize(serialize(m)) == m;
    }
    roundtrip &= deserialize(serialize(reference_reactor_tree())) == reference_reactor_tree();
    if (!routing) broken.push_back("routing");
    if (!roundtrip) broken.push_back("serialization");

    // simplex vs vertex enumeration
    double lp_gap = 0.0;
    bool lp_status = true;
    std::uniform_int_distribution<int> coef(-5, 5);
    for (int trial = 0; trial < 200; ++trial) {
        LpProblem p(4);
        for (int j = 0; j < 4; ++j) {
            p.objective[j] = coef(rng);
            p.lower[j] = -5.0 + 5.0 * unit(rng);
            p.upper[j] = p.lower[j] + 1.0 + 6.0 * unit(rng);
        }
        for (int i = 0; i < 4; ++i) {
            std::vector<double> a(4);
            for (auto& v : a) v = coef(rng);
            const double rhs = coef(rng);
            const Relation rel[] = {Relation::less_equal, Relation::greater_equal, Relation::equal};
            p.add_row({a, rel[i % 3], rhs});
        }
        const LpSolution s = solve_lp(p);
        const auto ref = oracle::vertex_enumeration(p);
        if (!ref) {
            lp_status &= s.status == LpStatus::infeasible;
            continue;
        }
        lp_status &= s.status == LpStatus::optimal && max_violation(p, s.x) <= lp_feas_tol;
        if (s.status == LpStatus::optimal) lp_gap = std::max(lp_gap, std::abs(s.objective - *ref));
    }
    if (!lp_status || lp_gap > 1e-7) broken.push_back("LP vs vertex enumeration (gap " + fmt(lp_gap, 3) + ")");

    // RK4 order
    const PlantSpec plant;
    double ratio_lo = 1e300, ratio_hi = 0.0;
    for (double u : {0.0, 10.0, 40.0}) {
        const double h = default_integrator_step;
        const double ref = integrate(plant, 0.9, u, 5.0, h / 64.0);
        const double r = std::abs(integrate(plant, 0.9, u, 5.0, h) - ref) /
                         std::abs(integrate(plant, 0.9, u, 5.0, h / 2.0) - ref);
        ratio_lo = std::min(ratio_lo, r);
        ratio_hi = std::max(ratio_hi, r);
    }
    if (!(ratio_lo >= 8.0 && ratio_hi <= 32.0)) broken.push_back("RK4 ratio");

    // fit_l1 monotone in the magnitude weight
    bool monotone = true;
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::MatrixXd Phi(12, 4);
        Eigen::VectorXd y(12);
        for (int i = 0; i < 12; ++i) {
            const double x = 0.1 + 0.8 * unit(rng);
            Phi.row(i) << 1.0, x, x * x, std::exp(-x);
            y(i) = std::sin(5 * x) + 0.1 * unit(rng);
        }
        double prev_loss = -1.0, prev_mag = 1e300;
        for (double lambda : {0.0, 1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.5, 1.0, 10.0}) {
            const L1Fit f = fit_l1(Phi, y, 1.0 / 12.0, lambda, {-100, 100});
            double mag = 0.0;
            for (double c : f.coefficients) mag += std::abs(c);
            monotone &= f.loss >= prev_loss - 1e-12 && mag <= prev_mag + 1e-7;
            prev_loss = f.loss;
            prev_mag = mag;
        }
    }
    if (!monotone) broken.push_back("fit_l1 monotonicity");

    std::string failed;
    for (const auto& b : broken) failed += (failed.empty() ? "" : ", ") + b;
    verdict(8, "property suites", broken.empty(),
            "routing totality/ties right, serialization round trip, 200 LPs vs vertex enumeration (max gap " +
                fmt(lp_gap, 3) + "), RK4 ratios in [" + fmt(ratio_lo) + ", " + fmt(ratio_hi) +
                "], fit_l1 monotone in lambda" + (broken.empty() ? "" : "; failed: " + failed));
}

template <class F>
void guarded(int id, const std::string& title, F&& f) {
    try {
        f();
    } catch (const std::exception& e) {
        verdict(id, title, false, std::string("threw: ") + e.what());
    }
}

}  // namespace

int main() {
    guarded(1, "MILP fidelity", milp_fidelity);
    guarded(2, "exact learner vs oracles", learner_equivalence);
    guarded(3, "in-class recovery", in_class_recovery);
    guarded(4, "published tree near 75", reference_tree);
    guarded(5, "MPC oracle sanity", mpc_sanity);
    guarded(6, "end-to-end test-MAE ordering", end_to_end);
    guarded(8, "property suites", property_suites);
    std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << std::endl;
    return failures == 0 ? 0 : 1;
}
