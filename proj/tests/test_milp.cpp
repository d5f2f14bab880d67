#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "milp_oracle.hpp"
#include "sdt/errors.hpp"
#include "sdt/format.hpp"
#include "sdt/milp.hpp"

using namespace sdt;

namespace {

LearnConfig config(int depth, double lc = 1e-2, double lm = 1e-2) {
    LearnConfig c;
    c.depth = depth;
    c.lambda_c = lc;
    c.lambda_m = lm;
    return c;
}

Dataset grid_data(int n, int features = 1) {
    Eigen::MatrixXd X(n, features);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        for (int f = 0; f < features; ++f) X(i, f) = 0.1 + 0.8 * (i + 0.37 * f) / std::max(1, n - 1) * 0.9;
        y(i) = 40.0 + 10.0 * std::sin(5.0 * X(i, 0));
    }
    return {X, y};
}

// Value vector for a named assignment; unnamed variables stay 0.
std::vector<double> assemble(const MilpArtifact& art, const std::map<std::string, double>& v) {
    std::vector<double> x(art.variables.size(), 0.0);
    for (const auto& [name, val] : v) {
        const int j = art.index_of(name);
        REQUIRE_MESSAGE(j >= 0, name);
        x[static_cast<std::size_t>(j)] = val;
    }
    return x;
}

std::vector<std::pair<std::string, double>> as_pairs(const MilpArtifact& art, const std::vector<double>& x) {
    std::vector<std::pair<std::string, double>> out;
    for (std::size_t j = 0; j < x.size(); ++j) out.emplace_back(art.variables[j].name, x[j]);
    return out;
}

// Two points, constant basis, depth 1: a hand-built feasible point sending
// (0.2, 1) left and (0.6, 3) right with leaf constants 1 and 3.
struct HandPoint {
    MilpArtifact art;
    std::map<std::string, double> values;
};

HandPoint hand_point() {
    HandPoint h{build_milp(Dataset::from_columns({0.2, 0.6}, {1.0, 3.0}), BasisSet::from_forms({"1"}), config(1)), {}};
    h.values = {{"d[1]", 1}, {"a[1,1]", 1}, {"b[1]", 0.4},   {"z[1,2]", 1},  {"z[2,3]", 1},
                {"c[1,2]", 1}, {"c[1,3]", 3}, {"c_pos[1,2]", 1}, {"c_pos[1,3]", 3},
                {"yhat[1,2]", 1}, {"yhat[1,3]", 3}, {"yhat[2,2]", 1}, {"yhat[2,3]", 3},
                {"delta[1,2]", 1}, {"delta[2,3]", 3}, {"ypred[1]", 1}, {"ypred[2]", 3}};
    return h;
}

}  // namespace

TEST_CASE("canonical MILP counts") {
    const MilpCounts formula = milp_counts(50, 1, 2, 19);
    CHECK(formula == MilpCounts{1612, 360, 3663});
    const MilpArtifact art = build_milp(grid_data(50), canonical_basis(), config(2));
    CHECK(art.counts() == formula);
    // published figures: 1615 variables, 363 binaries, 3662 rows
    CHECK(std::abs(art.counts().variables - 1615) <= 5);
    CHECK(std::abs(art.counts().binaries - 363) <= 5);
    CHECK(std::abs(art.counts().rows - 3662) <= 10);
}

TEST_CASE("count formulas hold for random sizes") {
    std::mt19937_64 rng(4);
    const std::vector<std::string> forms{"1", "x", "exp(-x)"};
    for (int t = 0; t < 25; ++t) {
        const int n = 1 + static_cast<int>(rng() % 6), f = 1 + static_cast<int>(rng() % 2);
        const int depth = 1 + static_cast<int>(rng() % 3), k = 1 + static_cast<int>(rng() % 3);
        const MilpArtifact art = build_milp(grid_data(n, f), BasisSet::from_forms({forms.begin(), forms.begin() + k}),
                                            config(depth));
        CAPTURE(n);
        CAPTURE(depth);
        CHECK(art.counts() == milp_counts(n, f, depth, k));
        const int nodes = (1 << (depth + 1)) - 1, internal = (1 << depth) - 1;
        CHECK(art.counts().binaries == nodes * (1 + n) + f * internal);
        CHECK(art.counts().variables - art.counts().binaries ==
              2 * n * nodes + n + 2 * n + 3 * k * nodes + internal);
    }
}

TEST_CASE("smallest MILP, variable by variable") {
    const MilpArtifact art = build_milp(Dataset::from_columns({0.5}, {2.0}), BasisSet::from_forms({"1"}), config(1));
    const MilpCounts c = art.counts();
    CHECK(c.binaries == 7);
    CHECK(c.variables - c.binaries == 19);
    std::vector<std::string> names;
    for (const auto& v : art.variables) names.push_back(v.name);
    CHECK(names == std::vector<std::string>{"d[1]", "d[2]", "d[3]", "z[1,1]", "z[1,2]", "z[1,3]", "a[1,1]",
                                            "b[1]", "c[1,1]", "c[1,2]", "c[1,3]", "yhat[1,1]", "yhat[1,2]",
                                            "yhat[1,3]", "delta[1,1]", "delta[1,2]", "delta[1,3]", "ypred[1]",
                                            "eps_pos[1]", "eps_neg[1]", "c_pos[1,1]", "c_pos[1,2]",
                                            "c_pos[1,3]", "c_neg[1,1]", "c_neg[1,2]", "c_neg[1,3]"});
}

TEST_CASE("objective row") {
    const Dataset d = grid_data(3);
    const MilpArtifact plain = build_milp(d, canonical_basis(), config(1, 0.0, 0.0));
    for (const auto& v : plain.variables) {
        const bool error_term = v.name.rfind("eps_", 0) == 0;
        CHECK(v.cost == (error_term ? 1.0 / 3.0 : 0.0));
    }
    const MilpArtifact weighted = build_milp(d, canonical_basis(), config(1, 0.5, 0.25));
    CHECK(weighted.variables[weighted.index_of("d[2]")].cost == 0.5);
    CHECK(weighted.variables[weighted.index_of("c_neg[19,3]")].cost == 0.25);
}

TEST_CASE("big-M must dominate the routing range") {
    const Dataset d = Dataset::from_columns({0.0, 0.9}, {0.0, 0.5});
    LearnConfig cfg = config(1);
    cfg.big_m = 0.8;
    CHECK_THROWS_AS(build_milp(d, BasisSet::from_forms({"1"}), cfg), ConfigError);
}

TEST_CASE("hand-built feasible point decodes and re-scores") {
    HandPoint h = hand_point();
    const std::vector<double> x = assemble(h.art, h.values);
    CHECK(oracle::artifact_violation(h.art, x) <= 1e-12);
    // objective row by hand: lambda_c * 1 branch + lambda_m * (1 + 3)
    CHECK(h.art.objective_at(x) == doctest::Approx(0.05).epsilon(1e-12));

    auto pairs = as_pairs(h.art, x);
    pairs.emplace_back("objective", 0.05);
    const SolutionReport rep = read_solution(h.art, pairs);
    REQUIRE(rep.row_objective);
    CHECK(std::abs(rep.objective - *rep.row_objective) <= 1e-8);
    CHECK(rep.claimed_objective == 0.05);
    CHECK(rep.model.rule(1).threshold == 0.4);
    CHECK(rep.model.leaf(2).coefficients == std::vector<double>{1.0});
    CHECK(rep.model.leaf(3).coefficients == std::vector<double>{3.0});
    CHECK(rep.model.validate().empty());
}

TEST_CASE("solutions by MPS name, with comments and partial continuous values") {
    HandPoint h = hand_point();
    const std::vector<double> x = assemble(h.art, h.values);
    std::string text = "# Objective value = 0.05\n";
    for (std::size_t j = 0; j < x.size(); ++j)
        if (h.art.variables[j].kind == VarKind::binary)  // binaries only: the rest is rebuilt
            text += mps_column_name(static_cast<int>(j)) + " " + format_double(x[j]) + "  # " +
                    h.art.variables[j].name + "\n";
    const SolutionReport rep = read_solution(h.art, parse_assignments(text));
    CHECK(rep.claimed_objective == 0.05);
    CHECK(!rep.row_objective);
    CHECK(rep.model.rule(1).threshold == doctest::Approx(0.4));
    CHECK(rep.objective == doctest::Approx(0.05).epsilon(1e-9));
    CHECK_THROWS_AS(parse_assignments("d[1]\n"), ParseError);
    CHECK_THROWS_AS(parse_assignments("d[1] one\n"), ParseError);
    CHECK_THROWS_AS(read_solution(h.art, {{"nonsense", 1.0}}), ParseError);
}

TEST_CASE("structural and integrality violations") {
    HandPoint h = hand_point();
    auto with = [&](const std::string& name, double v) {
        auto values = h.values;
        values[name] = v;
        return as_pairs(h.art, assemble(h.art, values));
    };
    CHECK_THROWS_AS(read_solution(h.art, with("d[1]", 0)), StructureError);
    CHECK_THROWS_AS(read_solution(h.art, with("d[3]", 1)), StructureError);
    CHECK_THROWS_AS(read_solution(h.art, with("z[1,3]", 1)), StructureError);  // assigned twice
    CHECK_THROWS_AS(read_solution(h.art, with("z[1,2]", 0.5)), IntegralityError);
    CHECK_NOTHROW(read_solution(h.art, with("z[1,2]", 1.0 - 5e-6)));
    auto missing = as_pairs(h.art, assemble(h.art, h.values));
    std::erase_if(missing, [](const auto& p) { return p.first == "z[2,1]"; });
    CHECK_THROWS_AS(read_solution(h.art, missing), StructureError);
}

TEST_CASE("all-zero leaves on zero data cost only the branch penalty") {
    const Dataset d = Dataset::from_columns({0.2, 0.5, 0.8}, {0.0, 0.0, 0.0});
    const MilpArtifact art = build_milp(d, canonical_basis(), config(2, 0.3, 0.1));
    // root and node 3 branch; samples land in leaves 2, 6, 7
    std::map<std::string, double> v{{"d[1]", 1}, {"d[3]", 1}, {"a[1,1]", 1}, {"a[1,3]", 1}, {"b[1]", 0.3},
                                    {"b[2]", 0.2}, {"b[3]", 0.6}, {"z[1,2]", 1}, {"z[2,6]", 1}, {"z[3,7]", 1}};
    const auto x = assemble(art, v);
    CHECK(oracle::artifact_violation(art, x) <= 1e-12);
    const SolutionReport rep = read_solution(art, as_pairs(art, x));
    CHECK(rep.objective == doctest::Approx(0.6));
    CHECK(rep.breakdown.complexity == 2);
    CHECK(rep.model.kind(4) == NodeKind::inactive);
}

TEST_CASE("tiny MILPs: exhaustive optimum equals the exact learner") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    const std::vector<std::string> forms{"1", "x", "exp(-x)"};
    for (int t = 0; t < 20; ++t) {
        const int n = 2 + static_cast<int>(rng() % 5);
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
        const LearnConfig cfg = config(1, 0.05, t % 3 == 0 ? 0.0 : 0.01);
        const MilpArtifact art = build_milp(d, basis, cfg);
        const auto opt = oracle::solve_tiny_milp(art);
        const FitReport fit = fit_tree(d, basis, cfg);
        CAPTURE(t);
        REQUIRE(std::isfinite(opt.objective));
        CHECK(std::abs(opt.objective - fit.objective) <= 1e-6);
        // decoding the solver's point gives a valid tree scoring the same
        const SolutionReport rep = read_solution(art, as_pairs(art, opt.values));
        CHECK(rep.model.validate().empty());
        CHECK(std::abs(rep.objective - opt.objective) <= 1e-6);
    }
}

TEST_CASE("tiny depth-2 MILP agrees with the exact learner") {
    const Dataset d = Dataset::from_columns({0.1, 0.4, 0.7}, {1.0, 4.0, 2.0});
    const BasisSet basis = BasisSet::from_forms({"1"});
    const LearnConfig cfg = config(2, 0.1, 0.01);
    const auto opt = oracle::solve_tiny_milp(build_milp(d, basis, cfg));
    CHECK(std::abs(opt.objective - fit_tree(d, basis, cfg).objective) <= 1e-6);
}

TEST_CASE("MPS text round-trips through the reader") {
    const MilpArtifact art = build_milp(grid_data(50), canonical_basis(), config(2));
    const std::string text = to_mps(art, "SDTREE", {"generated for a test"});
    CHECK(text.rfind("* generated for a test\nNAME          SDTREE\nROWS\n N  OBJ\n", 0) == 0);
    CHECK(text.find("RANGES") == std::string::npos);
    const MpsModel m = parse_mps(text);
    CHECK(m.counts() == art.counts());
    CHECK(m.objective_row == "OBJ");
    // fixed columns: every data line fits in 61 characters, names in 8
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) CHECK(line.size() <= 61);
    // spot-check coefficients and bounds against the artifact
    for (std::size_t r = 0; r < art.rows.size(); r += 97)
        for (const auto& [j, v] : art.rows[r].terms) {
            const double read = m.coefficients.at(mps_column_name(j)).at(mps_row_name(static_cast<int>(r)));
            CHECK(read == doctest::Approx(v).epsilon(1e-9));
        }
    for (std::size_t j = 0; j < art.variables.size(); ++j) {
        const auto [lo, hi] = m.bounds.at(mps_column_name(static_cast<int>(j)));
        CHECK(lo == doctest::Approx(art.variables[j].lower).epsilon(1e-10));
        if (std::isinf(art.variables[j].upper)) CHECK(std::isinf(hi));
        else CHECK(hi == doctest::Approx(art.variables[j].upper).epsilon(1e-10));
    }
}

TEST_CASE("tiny MPS lists every variable in COLUMNS") {
    const MilpArtifact art = build_milp(Dataset::from_columns({0.5}, {2.0}), BasisSet::from_forms({"1"}), config(1));
    const MpsModel m = parse_mps(to_mps(art));
    CHECK(m.columns.size() == art.variables.size());
    CHECK(m.binaries.size() == 7);
    CHECK(m.rows.size() == art.rows.size());
    CHECK_THROWS_AS(to_mps(MilpArtifact{}), ModelInvalidError);
}

TEST_CASE("MPS reader rejects malformed text") {
    CHECK_THROWS_AS(parse_mps("NAME X\nROWS\n N OBJ\n"), ParseError);
    CHECK_THROWS_AS(parse_mps("NAME X\nROWS\n Q R1\nENDATA\n"), ParseError);
    CHECK_THROWS_AS(parse_mps("NAME X\nROWS\n N OBJ\nCOLUMNS\n    C1  R9  1\nENDATA\n"), ParseError);
    CHECK_THROWS_AS(parse_mps("NAME X\nROWS\n N OBJ\nRANGES\nENDATA\n"), ParseError);
    const MpsModel m = parse_mps(
        "NAME X\nROWS\n N OBJ\n L R1\nCOLUMNS\n    MARKER  'MARKER'  'INTORG'\n    C1  R1  1\n"
        "    MARKER  'MARKER'  'INTEND'\n    C2  R1  2\nRHS\n    RHS  R1  3\nBOUNDS\n UP BND  C1  1\nENDATA\n");
    CHECK(m.counts() == MilpCounts{2, 1, 1});
    CHECK(m.rhs.at("R1") == 3.0);
}

TEST_CASE("MPS files and the name map") {
    const auto dir = std::filesystem::temp_directory_path() / "sdt_test_milp";
    std::filesystem::create_directories(dir);
    const auto path = dir / "tiny.mps";
    const MilpArtifact art = build_milp(Dataset::from_columns({0.5}, {2.0}), BasisSet::from_forms({"1"}), config(1));
    write_mps(art, path, {"note"}, {{"tool", "test"}});
    CHECK(read_mps(path).counts() == art.counts());
    std::ifstream f(names_path(path));
    const auto names = nlohmann::json::parse(f);
    CHECK(names["columns"]["C0000001"] == "d[1]");
    CHECK(names["rows"]["R0000003"] == "root");
    CHECK(names["provenance"]["tool"] == "test");
    // identical inputs, identical bytes
    CHECK(to_mps(art) == to_mps(build_milp(Dataset::from_columns({0.5}, {2.0}), BasisSet::from_forms({"1"}), config(1))));
    CHECK_THROWS_AS(read_mps(dir / "missing.mps"), IoError);
    std::filesystem::remove_all(dir);
}
