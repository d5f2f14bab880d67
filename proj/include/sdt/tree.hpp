#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdt/basis.hpp"

namespace sdt {

enum class NodeKind { branch, leaf, inactive };

const char* to_string(NodeKind kind);

// Node ids follow heap order: root 1, children 2n and 2n+1, parent n/2.
namespace topology {

inline int node_count(int depth) { return (1 << (depth + 1)) - 1; }
inline int first_terminal(int depth) { return 1 << depth; }
inline bool is_terminal(int node, int depth) { return node >= first_terminal(depth); }
inline int parent(int node) { return node / 2; }
inline int left_child(int node) { return 2 * node; }
inline int right_child(int node) { return 2 * node + 1; }
int node_depth(int node);

// Ancestors on the root path of `node` at which the path turns left (the
// child taken is 2m) or right (2m+1), in root-to-leaf order.
std::vector<int> left_ancestors(int node);
std::vector<int> right_ancestors(int node);
std::vector<int> ancestors(int node);

}  // namespace topology

struct BranchRule {
    int feature = 0;
    double threshold = 0.0;

    friend bool operator==(const BranchRule&, const BranchRule&) = default;
};

struct LeafExpression {
    std::vector<double> coefficients;

    friend bool operator==(const LeafExpression&, const LeafExpression&) = default;
};

struct ModelBounds {
    double c_lb = -100.0;
    double c_ub = 100.0;
    double y_lb = 0.0;
    double y_ub = 1.0;

    friend bool operator==(const ModelBounds&, const ModelBounds&) = default;
};

// Depth-capped binary tree with axis-aligned splits and leaves holding
// linear combinations of basis functions. Inactive positions are kept so node
// ids stay aligned with the heap numbering.
class TreeModel {
public:
    TreeModel() = default;
    // All nodes start inactive except the root, which is a branch.
    TreeModel(int depth, BasisSet basis, ModelBounds bounds);

    int depth() const { return depth_; }
    int node_count() const { return topology::node_count(depth_); }
    const BasisSet& basis() const { return basis_; }
    const ModelBounds& bounds() const { return bounds_; }

    NodeKind kind(int node) const;
    const std::map<int, BranchRule>& rules() const { return rules_; }
    const std::map<int, LeafExpression>& leaves() const { return leaves_; }
    const BranchRule& rule(int node) const;
    const LeafExpression& leaf(int node) const;

    void set_branch(int node, BranchRule rule);
    void set_leaf(int node, LeafExpression expr);
    void set_inactive(int node);

    int branch_count() const { return static_cast<int>(rules_.size()); }

    // Starting at the root: left when x[f] < b, right when x[f] >= b. Throws
    // ModelInvalidError on reaching an inactive node.
    int route(std::span<const double> x) const;

    // Inner product of the routed leaf's coefficients with the basis values.
    double predict(std::span<const double> x) const;

    // Empty iff every structural and bound invariant holds.
    std::vector<std::string> validate() const;

    friend bool operator==(const TreeModel&, const TreeModel&) = default;

private:
    void check_node(int node) const;

    int depth_ = 0;
    std::vector<NodeKind> kinds_;  // index 0 unused
    std::map<int, BranchRule> rules_;
    std::map<int, LeafExpression> leaves_;
    BasisSet basis_;
    ModelBounds bounds_;
};

// The depth-2 reactor law with the published split values (0.64 / 0.56 /
// 0.69) and published leaf coefficients over the canonical basis.
TreeModel reference_reactor_tree();

// JSON with schema {depth, bounds, basis:[forms], nodes:[{id, kind, feature?,
// threshold?, coeffs?}]}; numbers use round-trip precision. A top-level
// "provenance" object is allowed and ignored by deserialize.
nlohmann::json to_json(const TreeModel& model);
TreeModel from_json(const nlohmann::json& doc);
std::string serialize(const TreeModel& model, int indent = 2);
TreeModel deserialize(const std::string& text);

}  // namespace sdt
