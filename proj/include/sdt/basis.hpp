#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace sdt {

// Inputs whose designated coordinate is closer to zero than this are rejected
// by forms containing 1/x.
inline constexpr double x_guard = 1e-6;

enum class BasisFamily {
    power,         // x^p
    exp_pos,       // x^p * exp(x)
    exp_neg,       // x^p * exp(-x)
    exp_inv,       // x^p * exp(1/x)
    exp_neg_inv,   // x^p * exp(-1/x)
};

struct BasisFunction {
    int id = 0;  // 1-based position in the owning set
    BasisFamily family = BasisFamily::power;
    int power = 0;
    int coordinate = 0;

    bool uses_reciprocal() const {
        return family == BasisFamily::exp_inv || family == BasisFamily::exp_neg_inv;
    }

    // Raw univariate evaluation; throws DomainError inside the 1/x guard.
    double operator()(double v) const;
    double evaluate(std::span<const double> x) const;

    // Textual form, e.g. "x^2*exp(x)", "exp(-1/x)". Coordinate 0 prints as
    // "x", coordinate j > 0 as "x[j]".
    std::string form() const;

    friend bool operator==(const BasisFunction&, const BasisFunction&) = default;
};

// Parses a form string produced by BasisFunction::form(); id is left 0.
BasisFunction parse_basis_form(std::string_view text);

struct BasisSet {
    std::vector<BasisFunction> functions;

    std::size_t size() const { return functions.size(); }
    const BasisFunction& operator[](std::size_t k) const { return functions[k]; }

    // Builds a set from forms, assigning ids 1..N in order.
    static BasisSet from_forms(const std::vector<std::string>& forms);
    std::vector<std::string> forms() const;

    // Largest coordinate read by any function, or -1 for an empty set.
    int max_coordinate() const;

    friend bool operator==(const BasisSet&, const BasisSet&) = default;
};

// The 19 functions of the reactor study, in table order:
// 1, x..x^5, e^x, x e^x..x^3 e^x, e^-x..x^3 e^-x, x e^{1/x}..x^3 e^{1/x},
// e^{-1/x}, x e^{-1/x}.
BasisSet canonical_basis();

// {1, x_0, ..., x_{n-1}}: the feature set of a linear leaf.
BasisSet linear_basis(int n_features);

// {1}
BasisSet constant_basis();

std::vector<double> evaluate_basis(const BasisSet& bs, std::span<const double> x);

// Row i holds evaluate_basis(bs, X.row(i)).
Eigen::MatrixXd basis_matrix(const BasisSet& bs, const Eigen::MatrixXd& X);

}  // namespace sdt
