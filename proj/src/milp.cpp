#include "sdt/milp.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>

#include "sdt/errors.hpp"
#include "sdt/format.hpp"

namespace sdt {

namespace {

std::string indexed(const std::string& family, std::initializer_list<int> idx) {
    std::string s = family + "[";
    bool first = true;
    for (int i : idx) {
        if (!first) s += ',';
        s += std::to_string(i);
        first = false;
    }
    return s + "]";
}

class Builder {
public:
    explicit Builder(MilpArtifact& art) : art_(art) {}

    int var(std::string name, VarKind kind, double lo, double hi, double cost = 0.0) {
        const int id = static_cast<int>(art_.variables.size());
        art_.by_name.emplace(name, id);
        art_.variables.push_back({std::move(name), kind, lo, hi, cost});
        return id;
    }

    void row(std::string name, std::vector<std::pair<int, double>> terms, RowSense sense, double rhs) {
        std::erase_if(terms, [](const auto& t) { return t.second == 0.0; });
        std::sort(terms.begin(), terms.end());
        art_.rows.push_back({std::move(name), std::move(terms), sense, rhs});
    }

private:
    MilpArtifact& art_;
};

}  // namespace

MilpCounts MilpArtifact::counts() const {
    MilpCounts c;
    c.variables = static_cast<int>(variables.size());
    c.binaries = static_cast<int>(std::count_if(variables.begin(), variables.end(),
                                                [](const MilpVariable& v) { return v.kind == VarKind::binary; }));
    c.rows = static_cast<int>(rows.size());
    return c;
}

int MilpArtifact::index_of(const std::string& structured_name) const {
    auto it = by_name.find(structured_name);
    return it == by_name.end() ? -1 : it->second;
}

double MilpArtifact::objective_at(const std::vector<double>& values) const {
    if (values.size() != variables.size()) throw DimensionError("objective_at needs one value per variable");
    double s = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) s += variables[j].cost * values[j];
    return s;
}

MilpCounts milp_counts(int n_data, int n_features, int depth, int n_basis) {
    const int nodes = topology::node_count(depth);
    const int internal = topology::first_terminal(depth) - 1;
    const int terminal = nodes - internal;
    int ancestor_pairs = 0;
    for (int n = 1; n <= nodes; ++n) ancestor_pairs += static_cast<int>(topology::ancestors(n).size());

    MilpCounts c;
    c.binaries = nodes * (1 + n_data) + n_features * internal;
    const int continuous = 2 * n_data * nodes + n_data + 2 * n_data + 3 * n_basis * nodes + internal;
    c.variables = c.binaries + continuous;
    c.rows = (2 * internal + 1 + terminal)      // structure
             + n_data * nodes                   // no data at branch nodes
             + n_data                           // every sample assigned
             + n_data * ancestor_pairs          // ancestors branch
             + internal                         // one feature per branch
             + n_data * ancestor_pairs          // routing
             + n_data * nodes                   // node expressions
             + 2 * n_basis * nodes              // zero constants at branch nodes
             + 4 * n_data * nodes               // linearized prediction
             + n_data + n_data + n_basis * nodes;  // prediction, |error|, |c|
    return c;
}

MilpArtifact build_milp(const Dataset& data, const BasisSet& basis, const LearnConfig& cfg) {
    data.check();
    cfg.check();
    if (basis.size() == 0) throw ConfigError("empty basis");
    if (basis.max_coordinate() >= data.n_features())
        throw DimensionError("basis refers to a feature the data does not have");

    MilpArtifact art;
    art.data = data;
    art.basis = basis;
    art.config = cfg;
    art.bounds = cfg.resolve_bounds(data);
    const ModelBounds& mb = art.bounds;
    const double M = cfg.big_m, eps = cfg.eps_routing;

    const Eigen::MatrixXd phi = basis_matrix(basis, data.X);
    const int N = static_cast<int>(data.size());
    const int F = static_cast<int>(data.n_features());
    const int K = static_cast<int>(basis.size());
    const int D = cfg.depth;
    const int nodes = topology::node_count(D);
    const int internal = topology::first_terminal(D) - 1;

    // A threshold box wide enough for every partition, including "all left".
    const double x_lo = data.X.minCoeff(), x_hi = data.X.maxCoeff();
    const double b_lo = x_lo, b_hi = x_hi + eps;
    const double reach = std::max(x_hi - b_lo, b_hi - x_lo) + eps;
    if (!(M >= reach))
        throw ConfigError("big_M = " + format_double(M) + " does not dominate the routing range " + format_double(reach));

    Builder b(art);
    std::vector<int> d(static_cast<std::size_t>(nodes + 1)), bvar(static_cast<std::size_t>(internal + 1));
    std::vector<std::vector<int>> z(static_cast<std::size_t>(N), std::vector<int>(static_cast<std::size_t>(nodes + 1)));
    std::vector<std::vector<int>> a(static_cast<std::size_t>(F), std::vector<int>(static_cast<std::size_t>(internal + 1)));
    std::vector<std::vector<int>> c(static_cast<std::size_t>(K), std::vector<int>(static_cast<std::size_t>(nodes + 1)));
    auto cp = c, cm = c;
    auto yhat = z, delta = z;
    std::vector<int> ypred(static_cast<std::size_t>(N)), ep(ypred), em(ypred);

    for (int n = 1; n <= nodes; ++n) d[n] = b.var(indexed("d", {n}), VarKind::binary, 0, 1, cfg.lambda_c);
    for (int i = 0; i < N; ++i)
        for (int n = 1; n <= nodes; ++n) z[i][n] = b.var(indexed("z", {i + 1, n}), VarKind::binary, 0, 1);
    for (int f = 0; f < F; ++f)
        for (int n = 1; n <= internal; ++n) a[f][n] = b.var(indexed("a", {f + 1, n}), VarKind::binary, 0, 1);
    for (int n = 1; n <= internal; ++n) bvar[n] = b.var(indexed("b", {n}), VarKind::continuous, b_lo, b_hi);
    for (int k = 0; k < K; ++k)
        for (int n = 1; n <= nodes; ++n) c[k][n] = b.var(indexed("c", {k + 1, n}), VarKind::continuous, mb.c_lb, mb.c_ub);
    for (int i = 0; i < N; ++i)
        for (int n = 1; n <= nodes; ++n) yhat[i][n] = b.var(indexed("yhat", {i + 1, n}), VarKind::continuous, -M, M);
    for (int i = 0; i < N; ++i)
        for (int n = 1; n <= nodes; ++n)
            delta[i][n] = b.var(indexed("delta", {i + 1, n}), VarKind::continuous, std::min(mb.y_lb, 0.0),
                                std::max(mb.y_ub, 0.0));
    for (int i = 0; i < N; ++i) ypred[i] = b.var(indexed("ypred", {i + 1}), VarKind::continuous, mb.y_lb, mb.y_ub);
    const double w = 1.0 / N;
    for (int i = 0; i < N; ++i) ep[i] = b.var(indexed("eps_pos", {i + 1}), VarKind::continuous, 0, lp_infinity, w);
    for (int i = 0; i < N; ++i) em[i] = b.var(indexed("eps_neg", {i + 1}), VarKind::continuous, 0, lp_infinity, w);
    for (int k = 0; k < K; ++k)
        for (int n = 1; n <= nodes; ++n)
            cp[k][n] = b.var(indexed("c_pos", {k + 1, n}), VarKind::continuous, 0, lp_infinity, cfg.lambda_m);
    for (int k = 0; k < K; ++k)
        for (int n = 1; n <= nodes; ++n)
            cm[k][n] = b.var(indexed("c_neg", {k + 1, n}), VarKind::continuous, 0, lp_infinity, cfg.lambda_m);

    using S = RowSense;
    // tree structure
    for (int n = 1; n <= internal; ++n) {
        b.row(indexed("parent", {2 * n}), {{d[2 * n], 1}, {d[n], -1}}, S::less_equal, 0);
        b.row(indexed("parent", {2 * n + 1}), {{d[2 * n + 1], 1}, {d[n], -1}}, S::less_equal, 0);
    }
    b.row("root", {{d[1], 1}}, S::equal, 1);
    for (int n = internal + 1; n <= nodes; ++n) b.row(indexed("terminal", {n}), {{d[n], 1}}, S::equal, 0);
    // no data at branch nodes
    for (int i = 0; i < N; ++i)
        for (int n = 1; n <= nodes; ++n)
            b.row(indexed("leaf_only", {i + 1, n}), {{z[i][n], 1}, {d[n], 1}}, S::less_equal, 1);
    // each sample lands somewhere
    for (int i = 0; i < N; ++i) {
        std::vector<std::pair<int, double>> t;
        for (int n = 1; n <= nodes; ++n) t.emplace_back(z[i][n], 1);
        b.row(indexed("assign", {i + 1}), t, S::equal, 1);
    }
    // ancestors of an occupied node branch
    for (int i = 0; i < N; ++i)
        for (int n = 1; n <= nodes; ++n)
            for (int m : topology::ancestors(n))
                b.row(indexed("ancestor", {i + 1, n, m}), {{z[i][n], 1}, {d[m], -1}}, S::less_equal, 0);
    // one feature per branch node
    for (int n = 1; n <= internal; ++n) {
        std::vector<std::pair<int, double>> t;
        for (int f = 0; f < F; ++f) t.emplace_back(a[f][n], 1);
        t.emplace_back(d[n], -1);
        b.row(indexed("feature", {n}), t, S::equal, 0);
    }
    // routing: left needs a.x <= b - eps, right a.x >= b, when z = 1
    for (int i = 0; i < N; ++i)
        for (int n = 1; n <= nodes; ++n)
            for (int m : topology::ancestors(n)) {
                const bool left = topology::node_depth(n) > topology::node_depth(m) &&
                                  (n >> (topology::node_depth(n) - topology::node_depth(m) - 1)) == 2 * m;
                std::vector<std::pair<int, double>> t;
                for (int f = 0; f < F; ++f) t.emplace_back(a[f][m], data.X(i, f));
                t.emplace_back(bvar[m], -1);
                if (left) {
                    t.emplace_back(z[i][n], M);
                    b.row(indexed("route_left", {i + 1, n, m}), t, S::less_equal, M - eps);
                } else {
                    t.emplace_back(z[i][n], -M);
                    b.row(indexed("route_right", {i + 1, n, m}), t, S::greater_equal, -M);
                }
            }
    // node expressions
    for (int i = 0; i < N; ++i)
        for (int n = 1; n <= nodes; ++n) {
            std::vector<std::pair<int, double>> t{{yhat[i][n], 1}};
            for (int k = 0; k < K; ++k) t.emplace_back(c[k][n], -phi(i, k));
            b.row(indexed("expr", {i + 1, n}), t, S::equal, 0);
        }
    // branch nodes carry no constants
    for (int k = 0; k < K; ++k)
        for (int n = 1; n <= nodes; ++n) {
            b.row(indexed("c_upper", {k + 1, n}), {{c[k][n], 1}, {d[n], mb.c_ub}}, S::less_equal, mb.c_ub);
            b.row(indexed("c_lower", {k + 1, n}), {{c[k][n], 1}, {d[n], mb.c_lb}}, S::greater_equal, mb.c_lb);
        }
    // delta = yhat * z
    for (int i = 0; i < N; ++i)
        for (int n = 1; n <= nodes; ++n) {
            const int dl = delta[i][n], zz = z[i][n], yh = yhat[i][n];
            b.row(indexed("delta_ub", {i + 1, n}), {{dl, 1}, {zz, -mb.y_ub}}, S::less_equal, 0);
            b.row(indexed("delta_lb", {i + 1, n}), {{dl, 1}, {zz, -mb.y_lb}}, S::greater_equal, 0);
            b.row(indexed("delta_le", {i + 1, n}), {{dl, 1}, {yh, -1}, {zz, M}}, S::less_equal, M);
            b.row(indexed("delta_ge", {i + 1, n}), {{dl, 1}, {yh, -1}, {zz, -M}}, S::greater_equal, -M);
        }
    // tree output, absolute error and |c| splits
    for (int i = 0; i < N; ++i) {
        std::vector<std::pair<int, double>> t{{ypred[i], 1}};
        for (int n = 1; n <= nodes; ++n) t.emplace_back(delta[i][n], -1);
        b.row(indexed("pred", {i + 1}), t, S::equal, 0);
    }
    for (int i = 0; i < N; ++i)
        b.row(indexed("abs_err", {i + 1}), {{ep[i], 1}, {em[i], -1}, {ypred[i], 1}}, S::equal, data.y(i));
    for (int k = 0; k < K; ++k)
        for (int n = 1; n <= nodes; ++n)
            b.row(indexed("abs_c", {k + 1, n}), {{cp[k][n], 1}, {cm[k][n], -1}, {c[k][n], -1}}, S::equal, 0);
    return art;
}

// ---------------------------------------------------------------- MPS out

std::string mps_row_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "R%07d", index + 1);
    return buf;
}

std::string mps_column_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "C%07d", index + 1);
    return buf;
}

namespace {

// Fixed MPS value fields are 12 characters wide.
std::string mps_number(double v) {
    std::string s = format_double(v);
    if (s.size() <= 12) return s;
    char buf[64];
    for (int p = 12; p >= 1; --p) {
        std::snprintf(buf, sizeof buf, "%.*g", p, v);
        if (std::strlen(buf) <= 12) return buf;
    }
    throw DomainError("cannot print " + s + " in 12 columns");
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

// Fields at columns 2-3, 5-12, 15-22, 25-36.
std::string mps_line(const std::string& f1, const std::string& f2, const std::string& f3 = {},
                     const std::string& f4 = {}) {
    std::string line = " " + pad(f1, 2) + " " + pad(f2, 8);
    if (!f3.empty()) line += "  " + pad(f3, 8);
    if (!f4.empty()) line += "  " + f4;
    while (!line.empty() && line.back() == ' ') line.pop_back();
    return line;
}

}  // namespace

std::string to_mps(const MilpArtifact& art, const std::string& problem_name,
                   const std::vector<std::string>& comment_lines) {
    if (art.rows.empty()) throw ModelInvalidError("MILP has no rows");
    std::ostringstream out;
    for (const auto& c : comment_lines) out << "* " << c << '\n';
    out << "NAME          " << problem_name << '\n';
    out << "ROWS\n";
    out << mps_line("N", "OBJ") << '\n';
    for (std::size_t r = 0; r < art.rows.size(); ++r) {
        const char* s = art.rows[r].sense == RowSense::less_equal ? "L"
                        : art.rows[r].sense == RowSense::equal    ? "E"
                                                                  : "G";
        out << mps_line(s, mps_row_name(static_cast<int>(r))) << '\n';
    }

    std::vector<std::vector<std::pair<int, double>>> by_col(art.variables.size());
    for (std::size_t r = 0; r < art.rows.size(); ++r)
        for (const auto& [j, v] : art.rows[r].terms) by_col[static_cast<std::size_t>(j)].emplace_back(static_cast<int>(r), v);

    out << "COLUMNS\n";
    for (std::size_t j = 0; j < art.variables.size(); ++j) {
        const std::string col = mps_column_name(static_cast<int>(j));
        const double cost = art.variables[j].cost;
        // a column in no row still gets an objective entry so it is declared
        if (cost != 0.0 || by_col[j].empty()) out << mps_line("", col, "OBJ", mps_number(cost)) << '\n';
        for (const auto& [r, v] : by_col[j]) out << mps_line("", col, mps_row_name(r), mps_number(v)) << '\n';
    }

    out << "RHS\n";
    for (std::size_t r = 0; r < art.rows.size(); ++r)
        if (art.rows[r].rhs != 0.0)
            out << mps_line("", "RHS", mps_row_name(static_cast<int>(r)), mps_number(art.rows[r].rhs)) << '\n';

    out << "BOUNDS\n";
    for (std::size_t j = 0; j < art.variables.size(); ++j) {
        const auto& v = art.variables[j];
        const std::string col = mps_column_name(static_cast<int>(j));
        if (v.kind == VarKind::binary) {
            out << mps_line("BV", "BND", col) << '\n';
            continue;
        }
        const bool lo_inf = std::isinf(v.lower), hi_inf = std::isinf(v.upper);
        if (!lo_inf && !hi_inf && v.lower == v.upper) {
            out << mps_line("FX", "BND", col, mps_number(v.lower)) << '\n';
        } else if (lo_inf && hi_inf) {
            out << mps_line("FR", "BND", col) << '\n';
        } else {
            if (lo_inf) out << mps_line("MI", "BND", col) << '\n';
            else if (v.lower != 0.0) out << mps_line("LO", "BND", col, mps_number(v.lower)) << '\n';
            if (!hi_inf) out << mps_line("UP", "BND", col, mps_number(v.upper)) << '\n';
        }
    }
    out << "ENDATA\n";
    return out.str();
}

nlohmann::json name_map(const MilpArtifact& art) {
    nlohmann::json rows = nlohmann::json::object(), cols = nlohmann::json::object();
    for (std::size_t r = 0; r < art.rows.size(); ++r) rows[mps_row_name(static_cast<int>(r))] = art.rows[r].name;
    for (std::size_t j = 0; j < art.variables.size(); ++j)
        cols[mps_column_name(static_cast<int>(j))] = art.variables[j].name;
    return {{"objective", "OBJ"}, {"rows", rows}, {"columns", cols}};
}

std::filesystem::path names_path(const std::filesystem::path& mps_path) {
    return mps_path.string() + ".names.json";
}

void write_mps(const MilpArtifact& art, const std::filesystem::path& path,
               const std::vector<std::string>& comment_lines, const nlohmann::json& provenance) {
    const std::string text = to_mps(art, "SDTREE", comment_lines);
    nlohmann::json names = name_map(art);
    if (!provenance.is_null()) names["provenance"] = provenance;
    for (const auto& [p, body] : {std::pair{path, text}, std::pair{names_path(path), names.dump(1) + "\n"}}) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw IoError("cannot write " + p.string());
        f << body;
        if (!f) throw IoError("failed writing " + p.string());
    }
}

// ---------------------------------------------------------------- MPS in

MilpCounts MpsModel::counts() const {
    return {static_cast<int>(columns.size()), static_cast<int>(binaries.size()), static_cast<int>(rows.size())};
}

MpsModel parse_mps(const std::string& text) {
    MpsModel m;
    std::istringstream in(text);
    std::string line, section;
    std::map<std::string, char> row_type;
    std::vector<std::string> integer_cols;
    bool in_integer = false, ended = false;
    int line_no = 0;
    auto fail = [&](const std::string& what) {
        throw ParseError("MPS line " + std::to_string(line_no) + ": " + what);
    };
    auto number = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) fail("bad number '" + s + "'");
            return v;
        } catch (const std::logic_error&) {
            fail("bad number '" + s + "'");
        }
        return 0.0;
    };
    auto ensure_column = [&](const std::string& col) {
        if (m.coefficients.emplace(col, std::map<std::string, double>{}).second) {
            m.columns.push_back(col);
            m.bounds[col] = {0.0, lp_infinity};
            if (in_integer) integer_cols.push_back(col);
        }
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '*') continue;
        std::istringstream ls(line);
        std::vector<std::string> f;
        for (std::string tok; ls >> tok;) f.push_back(tok);
        if (f.empty()) continue;
        if (!std::isspace(static_cast<unsigned char>(line[0]))) {
            section = f[0];
            if (section == "NAME") m.name = f.size() > 1 ? f[1] : "";
            else if (section == "ENDATA") { ended = true; break; }
            else if (section == "RANGES") fail("RANGES are not supported");
            else if (section != "ROWS" && section != "COLUMNS" && section != "RHS" && section != "BOUNDS")
                fail("unknown section " + section);
            continue;
        }
        if (section == "ROWS") {
            if (f.size() != 2 || f[0].size() != 1 || std::string("NLEG").find(f[0][0]) == std::string::npos)
                fail("bad ROWS entry");
            if (row_type.count(f[1])) fail("duplicate row " + f[1]);
            row_type[f[1]] = f[0][0];
            if (f[0] == "N") {
                if (m.objective_row.empty()) m.objective_row = f[1];
            } else {
                m.rows.emplace_back(f[1], f[0][0]);
            }
        } else if (section == "COLUMNS") {
            if (f.size() >= 3 && f[1] == "'MARKER'") {
                in_integer = f[2] == "'INTORG'";
                continue;
            }
            if (f.size() != 3 && f.size() != 5) fail("bad COLUMNS entry");
            ensure_column(f[0]);
            for (std::size_t p = 1; p + 1 < f.size(); p += 2) {
                if (!row_type.count(f[p])) fail("unknown row " + f[p]);
                m.coefficients[f[0]][f[p]] = number(f[p + 1]);
            }
        } else if (section == "RHS") {
            if (f.size() != 3 && f.size() != 5) fail("bad RHS entry");
            for (std::size_t p = 1; p + 1 < f.size(); p += 2) {
                if (!row_type.count(f[p])) fail("unknown row " + f[p]);
                m.rhs[f[p]] = number(f[p + 1]);
            }
        } else if (section == "BOUNDS") {
            if (f.size() < 3) fail("bad BOUNDS entry");
            const std::string& type = f[0];
            const std::string& col = f[2];
            if (!m.coefficients.count(col)) fail("bound on unknown column " + col);
            auto& [lo, hi] = m.bounds[col];
            const bool needs_value = type == "UP" || type == "LO" || type == "FX";
            if (needs_value && f.size() != 4) fail(type + " bound needs a value");
            if (type == "UP") hi = number(f[3]);
            else if (type == "LO") lo = number(f[3]);
            else if (type == "FX") lo = hi = number(f[3]);
            else if (type == "FR") { lo = -lp_infinity; hi = lp_infinity; }
            else if (type == "MI") lo = -lp_infinity;
            else if (type == "PL") hi = lp_infinity;
            else if (type == "BV") { lo = 0.0; hi = 1.0; m.binaries.push_back(col); }
            else fail("unsupported bound type " + type);
        } else {
            fail("data outside a section");
        }
    }
    if (!ended) throw ParseError("MPS text has no ENDATA");
    for (const auto& col : integer_cols) {
        const auto [lo, hi] = m.bounds[col];
        if (lo == 0.0 && hi == 1.0 && std::find(m.binaries.begin(), m.binaries.end(), col) == m.binaries.end())
            m.binaries.push_back(col);
    }
    return m;
}

MpsModel read_mps(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_mps(ss.str());
}

// ---------------------------------------------------------------- solutions

std::vector<std::pair<std::string, double>> parse_assignments(const std::string& text) {
    static const std::regex objective_comment(R"(^#\s*objective(?:\s+value)?\s*[=:]\s*(\S+))", std::regex::icase);
    std::vector<std::pair<std::string, double>> out;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::smatch m;
        if (std::regex_search(line, m, objective_comment)) {
            try {
                out.emplace_back("objective", std::stod(m[1].str()));
            } catch (const std::logic_error&) {
                throw ParseError("solution line " + std::to_string(line_no) + ": bad objective value");
            }
            continue;
        }
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string name, value, extra;
        if (!(ls >> name)) continue;
        if (!(ls >> value) || (ls >> extra))
            throw ParseError("solution line " + std::to_string(line_no) + ": expected 'name value'");
        try {
            std::size_t used = 0;
            const double v = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
            out.emplace_back(name, v);
        } catch (const std::logic_error&) {
            throw ParseError("solution line " + std::to_string(line_no) + ": bad value '" + value + "'");
        }
    }
    return out;
}

namespace {

bool is_objective_name(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return s == "objective" || s == "obj";
}

int column_from_mps_name(const std::string& s) {
    static const std::regex pattern(R"(C(\d{7}))");
    std::smatch m;
    if (!std::regex_match(s, m, pattern)) return -1;
    return std::stoi(m[1].str()) - 1;
}

}  // namespace

SolutionReport read_solution(const MilpArtifact& art,
                             const std::vector<std::pair<std::string, double>>& assignments) {
    const auto nv = art.variables.size();
    std::vector<std::optional<double>> value(nv);
    SolutionReport rep;
    for (const auto& [name, v] : assignments) {
        if (is_objective_name(name)) {
            rep.claimed_objective = v;
            continue;
        }
        int j = art.index_of(name);
        if (j < 0) j = column_from_mps_name(name);
        if (j < 0 || static_cast<std::size_t>(j) >= nv) throw ParseError("unknown variable '" + name + "'");
        if (!std::isfinite(v)) throw ParseError("non-finite value for " + art.variables[j].name);
        value[static_cast<std::size_t>(j)] = v;
    }

    auto binary = [&](const std::string& name) {
        const int j = art.index_of(name);
        if (j < 0) throw StructureError("artifact has no variable " + name);
        const auto& v = value[static_cast<std::size_t>(j)];
        if (!v) throw StructureError("no value for binary " + name);
        const double r = std::round(*v);
        if (std::abs(*v - r) > integrality_tolerance || (r != 0.0 && r != 1.0))
            throw IntegralityError(name + " = " + format_double(*v) + " is not binary");
        return r == 1.0;
    };
    auto given = [&](const std::string& name) -> std::optional<double> {
        const int j = art.index_of(name);
        return j < 0 ? std::nullopt : value[static_cast<std::size_t>(j)];
    };

    const LearnConfig& cfg = art.config;
    const int D = cfg.depth;
    const int nodes = topology::node_count(D);
    const int internal = topology::first_terminal(D) - 1;
    const int N = static_cast<int>(art.data.size());
    const int F = static_cast<int>(art.data.n_features());
    const int K = static_cast<int>(art.basis.size());

    // every binary must be present and integral, even where unused
    for (const auto& v : art.variables)
        if (v.kind == VarKind::binary) binary(v.name);

    std::vector<char> branch(static_cast<std::size_t>(nodes + 1), 0);
    for (int n = 1; n <= nodes; ++n) branch[n] = binary(indexed("d", {n}));
    if (!branch[1]) throw StructureError("d[1] = 0: the root must branch");
    for (int n = internal + 1; n <= nodes; ++n)
        if (branch[n]) throw StructureError("d[" + std::to_string(n) + "] = 1 at a terminal node");
    for (int n = 2; n <= nodes; ++n)
        if (branch[n] && !branch[topology::parent(n)])
            throw StructureError("node " + std::to_string(n) + " branches below a non-branch node");

    TreeModel model(D, art.basis, art.bounds);
    auto active = [&](int n) { return n == 1 || branch[topology::parent(n)]; };

    std::vector<int> feature(static_cast<std::size_t>(internal + 1), -1);
    for (int n = 1; n <= internal; ++n) {
        int chosen = 0;
        for (int f = 0; f < F; ++f)
            if (binary(indexed("a", {f + 1, n}))) {
                feature[n] = f;
                ++chosen;
            }
        if (chosen != (branch[n] ? 1 : 0))
            throw StructureError("node " + std::to_string(n) + " uses " + std::to_string(chosen) +
                                 " features but d = " + std::to_string(int(branch[n])));
    }

    std::vector<int> home(static_cast<std::size_t>(N), 0);
    for (int i = 0; i < N; ++i) {
        for (int n = 1; n <= nodes; ++n)
            if (binary(indexed("z", {i + 1, n}))) {
                if (home[i]) throw StructureError("sample " + std::to_string(i + 1) + " is assigned twice");
                home[i] = n;
            }
        if (!home[i]) throw StructureError("sample " + std::to_string(i + 1) + " is not assigned");
        if (branch[home[i]] || !active(home[i]))
            throw StructureError("sample " + std::to_string(i + 1) + " is assigned to node " +
                                 std::to_string(home[i]) + ", which is not a leaf");
    }

    // thresholds: the solver's b when it routes exactly as z does, else rebuilt
    auto in_subtree = [](int n, int root) {
        while (n > root) n = topology::parent(n);
        return n == root;
    };
    for (int m = 1; m <= internal; ++m) {
        if (!branch[m]) continue;
        const int f = feature[m];
        std::vector<double> left, right;
        for (int i = 0; i < N; ++i) {
            if (in_subtree(home[i], 2 * m)) left.push_back(art.data.X(i, f));
            else if (in_subtree(home[i], 2 * m + 1)) right.push_back(art.data.X(i, f));
        }
        const double lmax = left.empty() ? -lp_infinity : *std::max_element(left.begin(), left.end());
        const double rmin = right.empty() ? lp_infinity : *std::min_element(right.begin(), right.end());
        if (!(lmax < rmin))
            throw StructureError("no threshold at node " + std::to_string(m) + " separates its assigned samples");
        double t;
        const auto b = given(indexed("b", {m}));
        if (b && lmax < *b && *b <= rmin) t = *b;
        else if (!left.empty() && !right.empty()) t = 0.5 * (lmax + rmin);
        else if (!right.empty()) t = rmin;
        else if (!left.empty()) t = lmax + cfg.eps_routing;
        else t = b ? *b : art.data.X.col(f).minCoeff();
        model.set_branch(m, {f, t});
    }

    const Eigen::MatrixXd phi = basis_matrix(art.basis, art.data.X);
    for (int n = 2; n <= nodes; ++n) {
        if (branch[n]) continue;
        if (!active(n)) {
            model.set_inactive(n);
            continue;
        }
        std::vector<double> coeffs(static_cast<std::size_t>(K));
        bool all = true;
        for (int k = 0; k < K && all; ++k) {
            const auto v = given(indexed("c", {k + 1, n}));
            if (v) coeffs[k] = std::clamp(*v, art.bounds.c_lb, art.bounds.c_ub);
            else all = false;
        }
        if (!all) {
            std::vector<int> rows;
            for (int i = 0; i < N; ++i)
                if (home[i] == n) rows.push_back(i);
            if (rows.empty()) {
                coeffs.assign(static_cast<std::size_t>(K), 0.0);
            } else {
                auto fit = fit_leaf(phi, art.data.y, rows, cfg, art.bounds);
                if (!fit) throw StructureError("leaf " + std::to_string(n) + " admits no coefficients");
                coeffs = std::move(fit->coefficients);
            }
        }
        model.set_leaf(n, {coeffs});
    }
    if (auto problems = model.validate(); !problems.empty())
        throw StructureError("decoded tree is invalid: " + problems.front());

    std::tie(rep.objective, rep.breakdown) = objective_of(model, art.data, cfg);
    rep.model = std::move(model);
    if (std::all_of(value.begin(), value.end(), [](const auto& v) { return v.has_value(); })) {
        std::vector<double> x(nv);
        for (std::size_t j = 0; j < nv; ++j) x[j] = *value[j];
        rep.row_objective = art.objective_at(x);
    }
    return rep;
}

}  // namespace sdt
