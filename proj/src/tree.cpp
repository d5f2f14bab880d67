#include "sdt/tree.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "sdt/errors.hpp"

namespace sdt {

const char* to_string(NodeKind kind) {
    switch (kind) {
        case NodeKind::branch: return "branch";
        case NodeKind::leaf: return "leaf";
        case NodeKind::inactive: return "inactive";
    }
    return "?";
}

namespace topology {

int node_depth(int node) {
    int d = 0;
    while (node > 1) {
        node /= 2;
        ++d;
    }
    return d;
}

std::vector<int> ancestors(int node) {
    std::vector<int> out;
    for (int m = node / 2; m >= 1; m /= 2) out.insert(out.begin(), m);
    return out;
}

std::vector<int> left_ancestors(int node) {
    std::vector<int> out;
    for (int child = node; child > 1; child /= 2)
        if (child % 2 == 0) out.insert(out.begin(), child / 2);
    return out;
}

std::vector<int> right_ancestors(int node) {
    std::vector<int> out;
    for (int child = node; child > 1; child /= 2)
        if (child % 2 == 1) out.insert(out.begin(), child / 2);
    return out;
}

}  // namespace topology

TreeModel::TreeModel(int depth, BasisSet basis, ModelBounds bounds)
    : depth_(depth), basis_(std::move(basis)), bounds_(bounds) {
    if (depth < 1) throw ConfigError("tree depth must be at least 1, got " + std::to_string(depth));
    if (depth > 20) throw ConfigError("tree depth " + std::to_string(depth) + " is unreasonably large");
    kinds_.assign(static_cast<std::size_t>(node_count()) + 1, NodeKind::inactive);
    kinds_[1] = NodeKind::branch;
    rules_[1] = BranchRule{};
}

void TreeModel::check_node(int node) const {
    if (node < 1 || node > node_count())
        throw IndexError("node " + std::to_string(node) + " outside 1.." + std::to_string(node_count()));
}

NodeKind TreeModel::kind(int node) const {
    check_node(node);
    return kinds_[static_cast<std::size_t>(node)];
}

const BranchRule& TreeModel::rule(int node) const {
    auto it = rules_.find(node);
    if (it == rules_.end()) throw IndexError("node " + std::to_string(node) + " has no branch rule");
    return it->second;
}

const LeafExpression& TreeModel::leaf(int node) const {
    auto it = leaves_.find(node);
    if (it == leaves_.end()) throw IndexError("node " + std::to_string(node) + " is not a leaf");
    return it->second;
}

void TreeModel::set_branch(int node, BranchRule rule) {
    check_node(node);
    kinds_[static_cast<std::size_t>(node)] = NodeKind::branch;
    leaves_.erase(node);
    rules_[node] = rule;
}

void TreeModel::set_leaf(int node, LeafExpression expr) {
    check_node(node);
    kinds_[static_cast<std::size_t>(node)] = NodeKind::leaf;
    rules_.erase(node);
    leaves_[node] = std::move(expr);
}

void TreeModel::set_inactive(int node) {
    check_node(node);
    kinds_[static_cast<std::size_t>(node)] = NodeKind::inactive;
    rules_.erase(node);
    leaves_.erase(node);
}

int TreeModel::route(std::span<const double> x) const {
    int node = 1;
    while (true) {
        switch (kinds_[static_cast<std::size_t>(node)]) {
            case NodeKind::leaf: return node;
            case NodeKind::inactive:
                throw ModelInvalidError("routing reached inactive node " + std::to_string(node));
            case NodeKind::branch: break;
        }
        if (topology::is_terminal(node, depth_))
            throw ModelInvalidError("branch node " + std::to_string(node) + " at maximal depth");
        const BranchRule& r = rule(node);
        if (r.feature < 0 || static_cast<std::size_t>(r.feature) >= x.size())
            throw ModelInvalidError("node " + std::to_string(node) + " splits on feature " +
                                    std::to_string(r.feature) + " of a " +
                                    std::to_string(x.size()) + "-dimensional input");
        node = x[r.feature] < r.threshold ? topology::left_child(node) : topology::right_child(node);
    }
}

double TreeModel::predict(std::span<const double> x) const {
    const LeafExpression& expr = leaf(route(x));
    double sum = 0.0;
    for (std::size_t k = 0; k < basis_.size(); ++k) sum += expr.coefficients[k] * basis_[k].evaluate(x);
    return sum;
}

std::vector<std::string> TreeModel::validate() const {
    std::vector<std::string> out;
    auto report = [&](const std::string& msg) { out.push_back(msg); };

    if (depth_ < 1) {
        report("depth must be at least 1");
        return out;
    }
    if (kinds_.size() != static_cast<std::size_t>(node_count()) + 1) {
        report("node table has the wrong size for depth " + std::to_string(depth_));
        return out;
    }
    for (std::size_t k = 0; k < basis_.size(); ++k)
        if (basis_[k].id != static_cast<int>(k + 1))
            report("basis function at position " + std::to_string(k + 1) + " has id " +
                   std::to_string(basis_[k].id));
    if (!(bounds_.c_lb <= bounds_.c_ub)) report("coefficient bounds are inverted");
    if (!(bounds_.y_lb < bounds_.y_ub)) report("prediction bounds are empty or inverted");

    if (kind(1) != NodeKind::branch) report("node 1 must be a branch node (the root always splits)");
    for (int n = 1; n <= node_count(); ++n) {
        const NodeKind k = kind(n);
        const std::string id = "node " + std::to_string(n);
        if (n > 1 && k != NodeKind::inactive && kind(topology::parent(n)) != NodeKind::branch)
            report(id + " is " + to_string(k) + " but its parent " + std::to_string(topology::parent(n)) +
                   " is " + to_string(kind(topology::parent(n))) +
                   " (only children of branch nodes may be active)");
        if (k == NodeKind::branch && topology::is_terminal(n, depth_))
            report(id + " is a branch node at maximal depth");
        if (k == NodeKind::branch && !topology::is_terminal(n, depth_))
            for (int child : {topology::left_child(n), topology::right_child(n)})
                if (kind(child) == NodeKind::inactive)
                    report(id + " is a branch node but its child " + std::to_string(child) +
                           " is inactive (routing would dead-end)");

        const bool has_rule = rules_.contains(n);
        const bool has_leaf = leaves_.contains(n);
        if (k == NodeKind::branch && !has_rule) report(id + " is a branch node without a rule");
        if (k != NodeKind::branch && has_rule) report(id + " carries a rule but is " + to_string(k));
        if (k == NodeKind::leaf && !has_leaf) report(id + " is a leaf without an expression");
        if (k != NodeKind::leaf && has_leaf) report(id + " carries an expression but is " + to_string(k));

        if (has_rule) {
            const BranchRule& r = rules_.at(n);
            if (r.feature < 0) report(id + " splits on negative feature " + std::to_string(r.feature));
            if (!std::isfinite(r.threshold)) report(id + " has a non-finite threshold");
        }
        if (has_leaf) {
            const auto& c = leaves_.at(n).coefficients;
            if (c.size() != basis_.size()) {
                report(id + " has " + std::to_string(c.size()) + " coefficients for " +
                       std::to_string(basis_.size()) + " basis functions");
                continue;
            }
            for (std::size_t j = 0; j < c.size(); ++j) {
                if (!std::isfinite(c[j])) {
                    report(id + " coefficient " + std::to_string(j + 1) + " is not finite");
                } else if (c[j] < bounds_.c_lb || c[j] > bounds_.c_ub) {
                    std::ostringstream msg;
                    msg << id << " coefficient " << j + 1 << " = " << c[j] << " outside bounds ["
                        << bounds_.c_lb << ", " << bounds_.c_ub << "]";
                    report(msg.str());
                }
            }
        }
    }
    return out;
}

TreeModel reference_reactor_tree() {
    TreeModel m(2, canonical_basis(), ModelBounds{-100.0, 100.0, -7.5, 82.5});
    m.set_branch(1, {0, 0.64});
    m.set_branch(2, {0, 0.56});
    m.set_branch(3, {0, 0.69});

    // Coefficient order follows canonical_basis().
    auto leaf = [](std::map<int, double> nonzero) {
        LeafExpression e;
        e.coefficients.assign(19, 0.0);
        for (auto [row, v] : nonzero) e.coefficients[static_cast<std::size_t>(row - 1)] = v;
        return e;
    };
    m.set_leaf(4, leaf({{1, 6.241}, {10, 73.186}, {11, 53.793}, {15, 0.012}, {16, -0.262},
                        {17, 1.426}, {18, -72.367}}));
    m.set_leaf(5, leaf({{10, 50.035}, {15, -1.62}, {16, 20.739}}));
    m.set_leaf(6, leaf({{9, 80.413}, {10, 1.336}, {15, -0.454}}));
    m.set_leaf(7, leaf({{1, 71.983}, {7, 1.088}, {9, -0.407}, {15, 0.421}}));
    return m;
}

nlohmann::json to_json(const TreeModel& model) {
    using nlohmann::json;
    json doc;
    doc["depth"] = model.depth();
    const ModelBounds& b = model.bounds();
    doc["bounds"] = {{"c_lb", b.c_lb}, {"c_ub", b.c_ub}, {"y_lb", b.y_lb}, {"y_ub", b.y_ub}};
    doc["basis"] = model.basis().forms();
    json nodes = json::array();
    for (int n = 1; n <= model.node_count(); ++n) {
        json node = {{"id", n}, {"kind", to_string(model.kind(n))}};
        if (model.kind(n) == NodeKind::branch) {
            node["feature"] = model.rule(n).feature;
            node["threshold"] = model.rule(n).threshold;
        } else if (model.kind(n) == NodeKind::leaf) {
            node["coeffs"] = model.leaf(n).coefficients;
        }
        nodes.push_back(std::move(node));
    }
    doc["nodes"] = std::move(nodes);
    return doc;
}

namespace {

const nlohmann::json& field(const nlohmann::json& obj, const std::string& key, const std::string& where) {
    if (!obj.is_object()) throw ParseError(where + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
    return *it;
}

double number(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number()) throw ParseError(where + ": expected a number");
    return v.get<double>();
}

int integer(const nlohmann::json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ParseError(where + ": expected an integer");
    return v.get<int>();
}

}  // namespace

TreeModel from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ParseError("model document must be a JSON object");
    for (const auto& [key, _] : doc.items())
        if (key != "depth" && key != "bounds" && key != "basis" && key != "nodes" && key != "provenance")
            throw ParseError("unknown top-level field '" + key + "'");

    const int depth = integer(field(doc, "depth", "model"), "depth");
    if (depth < 1 || depth > 20) throw ParseError("depth: must be in 1..20, got " + std::to_string(depth));

    const auto& jb = field(doc, "bounds", "model");
    ModelBounds bounds{number(field(jb, "c_lb", "bounds"), "bounds.c_lb"),
                       number(field(jb, "c_ub", "bounds"), "bounds.c_ub"),
                       number(field(jb, "y_lb", "bounds"), "bounds.y_lb"),
                       number(field(jb, "y_ub", "bounds"), "bounds.y_ub")};

    const auto& jbasis = field(doc, "basis", "model");
    if (!jbasis.is_array()) throw ParseError("basis: expected an array of form strings");
    std::vector<std::string> forms;
    for (std::size_t k = 0; k < jbasis.size(); ++k) {
        if (!jbasis[k].is_string()) throw ParseError("basis[" + std::to_string(k) + "]: expected a string");
        forms.push_back(jbasis[k].get<std::string>());
    }
    BasisSet basis;
    try {
        basis = BasisSet::from_forms(forms);
    } catch (const ParseError& e) {
        throw ParseError(std::string("basis: ") + e.what());
    }

    TreeModel model(depth, std::move(basis), bounds);
    const auto& jnodes = field(doc, "nodes", "model");
    if (!jnodes.is_array()) throw ParseError("nodes: expected an array");
    std::set<int> seen;
    for (std::size_t idx = 0; idx < jnodes.size(); ++idx) {
        const std::string where = "nodes[" + std::to_string(idx) + "]";
        const auto& jn = jnodes[idx];
        const int id = integer(field(jn, "id", where), where + ".id");
        if (id < 1 || id > model.node_count())
            throw ParseError(where + ".id: " + std::to_string(id) + " outside 1.." +
                             std::to_string(model.node_count()));
        if (!seen.insert(id).second) throw ParseError(where + ".id: duplicate node " + std::to_string(id));
        const auto& jk = field(jn, "kind", where);
        const std::string kind = jk.is_string() ? jk.get<std::string>() : "";
        if (kind == "branch") {
            model.set_branch(id, {integer(field(jn, "feature", where), where + ".feature"),
                                  number(field(jn, "threshold", where), where + ".threshold")});
        } else if (kind == "leaf") {
            const auto& jc = field(jn, "coeffs", where);
            if (!jc.is_array()) throw ParseError(where + ".coeffs: expected an array");
            LeafExpression e;
            for (std::size_t k = 0; k < jc.size(); ++k)
                e.coefficients.push_back(number(jc[k], where + ".coeffs[" + std::to_string(k) + "]"));
            model.set_leaf(id, std::move(e));
        } else if (kind == "inactive") {
            model.set_inactive(id);
        } else {
            throw ParseError(where + ".kind: expected branch, leaf or inactive");
        }
    }
    for (int n = 1; n <= model.node_count(); ++n)
        if (!seen.contains(n)) throw ParseError("nodes: node " + std::to_string(n) + " is missing");
    return model;
}

std::string serialize(const TreeModel& model, int indent) { return to_json(model).dump(indent) + "\n"; }

TreeModel deserialize(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed model JSON: ") + e.what());
    }
    return from_json(doc);
}

}  // namespace sdt
