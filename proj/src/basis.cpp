#include "sdt/basis.hpp"

#include <cmath>
#include <sstream>

#include "sdt/errors.hpp"

namespace sdt {

namespace {

std::string coordinate_symbol(int coordinate) {
    return coordinate == 0 ? "x" : "x[" + std::to_string(coordinate) + "]";
}

std::string exp_argument(BasisFamily family, const std::string& sym) {
    switch (family) {
        case BasisFamily::exp_pos: return sym;
        case BasisFamily::exp_neg: return "-" + sym;
        case BasisFamily::exp_inv: return "1/" + sym;
        case BasisFamily::exp_neg_inv: return "-1/" + sym;
        case BasisFamily::power: break;
    }
    return {};
}

}  // namespace

double BasisFunction::operator()(double v) const {
    if (uses_reciprocal() && !(std::abs(v) >= x_guard)) {
        std::ostringstream msg;
        msg << "basis function " << id << " (" << form() << ") evaluated at " << v
            << ", inside the 1/x guard |x| < " << x_guard;
        throw DomainError(msg.str());
    }
    const double poly = power == 0 ? 1.0 : std::pow(v, power);
    switch (family) {
        case BasisFamily::power: return poly;
        case BasisFamily::exp_pos: return poly * std::exp(v);
        case BasisFamily::exp_neg: return poly * std::exp(-v);
        case BasisFamily::exp_inv: return poly * std::exp(1.0 / v);
        case BasisFamily::exp_neg_inv: return poly * std::exp(-1.0 / v);
    }
    return poly;
}

double BasisFunction::evaluate(std::span<const double> x) const {
    if (coordinate < 0 || static_cast<std::size_t>(coordinate) >= x.size())
        throw IndexError("basis function " + std::to_string(id) + " reads coordinate " +
                         std::to_string(coordinate) + " of a " + std::to_string(x.size()) +
                         "-dimensional input");
    return (*this)(x[coordinate]);
}

std::string BasisFunction::form() const {
    const std::string sym = coordinate_symbol(coordinate);
    std::string poly;
    if (power == 1)
        poly = sym;
    else if (power > 1)
        poly = sym + "^" + std::to_string(power);

    if (family == BasisFamily::power) return poly.empty() ? "1" : poly;
    std::string e = "exp(" + exp_argument(family, sym) + ")";
    return poly.empty() ? e : poly + "*" + e;
}

BasisFunction parse_basis_form(std::string_view text) {
    auto fail = [&]() -> BasisFunction {
        throw ParseError("unrecognized basis form '" + std::string(text) + "'");
    };
    BasisFunction f;
    std::string_view rest = text;

    // Reads "x" or "x[j]" from the front of rest.
    auto read_symbol = [&](std::string_view& s, int& coordinate) {
        if (s.empty() || s.front() != 'x') return false;
        s.remove_prefix(1);
        coordinate = 0;
        if (!s.empty() && s.front() == '[') {
            auto close = s.find(']');
            if (close == std::string_view::npos || close == 1) return false;
            int c = 0;
            for (char ch : s.substr(1, close - 1)) {
                if (ch < '0' || ch > '9') return false;
                c = c * 10 + (ch - '0');
            }
            coordinate = c;
            s.remove_prefix(close + 1);
        }
        return true;
    };

    if (rest == "1") return f;

    int poly_coordinate = -1;
    if (!rest.empty() && rest.front() == 'x') {
        if (!read_symbol(rest, poly_coordinate)) return fail();
        f.power = 1;
        if (!rest.empty() && rest.front() == '^') {
            rest.remove_prefix(1);
            int p = 0;
            std::size_t digits = 0;
            while (digits < rest.size() && rest[digits] >= '0' && rest[digits] <= '9') {
                p = p * 10 + (rest[digits] - '0');
                ++digits;
            }
            if (digits == 0) return fail();
            f.power = p;
            rest.remove_prefix(digits);
        }
        f.coordinate = poly_coordinate;
        if (rest.empty()) return f;
        if (rest.front() != '*') return fail();
        rest.remove_prefix(1);
    }

    if (!rest.starts_with("exp(") || !rest.ends_with(")")) return fail();
    std::string_view arg = rest.substr(4, rest.size() - 5);
    bool negative = false;
    bool reciprocal = false;
    if (arg.starts_with("-")) {
        negative = true;
        arg.remove_prefix(1);
    }
    if (arg.starts_with("1/")) {
        reciprocal = true;
        arg.remove_prefix(2);
    }
    int exp_coordinate = 0;
    if (!read_symbol(arg, exp_coordinate) || !arg.empty()) return fail();
    if (poly_coordinate >= 0 && poly_coordinate != exp_coordinate) return fail();
    f.coordinate = exp_coordinate;
    f.family = reciprocal ? (negative ? BasisFamily::exp_neg_inv : BasisFamily::exp_inv)
                          : (negative ? BasisFamily::exp_neg : BasisFamily::exp_pos);
    return f;
}

BasisSet BasisSet::from_forms(const std::vector<std::string>& forms) {
    BasisSet bs;
    bs.functions.reserve(forms.size());
    for (std::size_t k = 0; k < forms.size(); ++k) {
        BasisFunction f = parse_basis_form(forms[k]);
        f.id = static_cast<int>(k + 1);
        bs.functions.push_back(f);
    }
    return bs;
}

std::vector<std::string> BasisSet::forms() const {
    std::vector<std::string> out;
    out.reserve(functions.size());
    for (const auto& f : functions) out.push_back(f.form());
    return out;
}

int BasisSet::max_coordinate() const {
    int m = -1;
    for (const auto& f : functions) m = std::max(m, f.coordinate);
    return m;
}

BasisSet canonical_basis() {
    using F = BasisFamily;
    const std::pair<F, int> rows[] = {
        {F::power, 0},       {F::power, 1},       {F::power, 2},       {F::power, 3},
        {F::power, 4},       {F::power, 5},       {F::exp_pos, 0},     {F::exp_pos, 1},
        {F::exp_pos, 2},     {F::exp_pos, 3},     {F::exp_neg, 0},     {F::exp_neg, 1},
        {F::exp_neg, 2},     {F::exp_neg, 3},     {F::exp_inv, 1},     {F::exp_inv, 2},
        {F::exp_inv, 3},     {F::exp_neg_inv, 0}, {F::exp_neg_inv, 1},
    };
    BasisSet bs;
    int id = 1;
    for (auto [family, p] : rows) bs.functions.push_back({id++, family, p, 0});
    return bs;
}

BasisSet linear_basis(int n_features) {
    BasisSet bs;
    bs.functions.push_back({1, BasisFamily::power, 0, 0});
    for (int j = 0; j < n_features; ++j)
        bs.functions.push_back({j + 2, BasisFamily::power, 1, j});
    return bs;
}

BasisSet constant_basis() {
    BasisSet bs;
    bs.functions.push_back({1, BasisFamily::power, 0, 0});
    return bs;
}

std::vector<double> evaluate_basis(const BasisSet& bs, std::span<const double> x) {
    std::vector<double> out;
    out.reserve(bs.size());
    for (const auto& f : bs.functions) out.push_back(f.evaluate(x));
    return out;
}

Eigen::MatrixXd basis_matrix(const BasisSet& bs, const Eigen::MatrixXd& X) {
    Eigen::MatrixXd Phi(X.rows(), static_cast<Eigen::Index>(bs.size()));
    std::vector<double> row(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) row[j] = X(i, j);
        for (std::size_t k = 0; k < bs.size(); ++k)
            Phi(i, static_cast<Eigen::Index>(k)) = bs.functions[k].evaluate(row);
    }
    return Phi;
}

}  // namespace sdt
