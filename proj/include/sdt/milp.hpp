#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sdt/basis.hpp"
#include "sdt/dataset.hpp"
#include "sdt/learner.hpp"
#include "sdt/tree.hpp"

namespace sdt {

enum class VarKind { binary, continuous };
enum class RowSense { less_equal, equal, greater_equal };

struct MilpVariable {
    std::string name;  // structured, e.g. "z[17,5]"; indices are 1-based
    VarKind kind = VarKind::continuous;
    double lower = 0.0;
    double upper = 0.0;
    double cost = 0.0;  // objective coefficient
};

struct MilpRow {
    std::string name;
    std::vector<std::pair<int, double>> terms;  // (variable index, coefficient), by index
    RowSense sense = RowSense::less_equal;
    double rhs = 0.0;
};

struct MilpCounts {
    int variables = 0;
    int binaries = 0;
    int rows = 0;

    friend bool operator==(const MilpCounts&, const MilpCounts&) = default;
};

// The tree-learning MIO over a data set: structure (d), assignment (z),
// branching (a, b), leaf expressions (c, yhat), the linearized prediction
// (delta, ypred) and the absolute-value splits (eps+/-, c+/-).
struct MilpArtifact {
    std::vector<MilpVariable> variables;
    std::vector<MilpRow> rows;
    // what the artifact was built from, for decoding solutions
    Dataset data;
    BasisSet basis;
    LearnConfig config;
    ModelBounds bounds;

    MilpCounts counts() const;
    int index_of(const std::string& structured_name) const;  // -1 if absent
    double objective_at(const std::vector<double>& values) const;

    std::map<std::string, int> by_name;
};

// Throws ConfigError when big_M cannot dominate |x| + |b| + eps or the
// prediction bounds.
MilpArtifact build_milp(const Dataset& data, const BasisSet& basis, const LearnConfig& cfg);

// Formula counts for a problem size (independent of the data values).
MilpCounts milp_counts(int n_data, int n_features, int depth, int n_basis);

// Fixed-column MPS names: R0000001..., C0000001..., in artifact order.
std::string mps_row_name(int index);
std::string mps_column_name(int index);

std::string to_mps(const MilpArtifact& art, const std::string& problem_name = "SDTREE",
                   const std::vector<std::string>& comment_lines = {});
// Writes `path` and the sidecar `<path>.names.json` (with `provenance`
// attached when it is not null).
void write_mps(const MilpArtifact& art, const std::filesystem::path& path,
               const std::vector<std::string>& comment_lines = {}, const nlohmann::json& provenance = nullptr);
std::filesystem::path names_path(const std::filesystem::path& mps_path);
nlohmann::json name_map(const MilpArtifact& art);

// What a fixed-format MPS file declares, as re-read from text.
struct MpsModel {
    std::string name;
    std::string objective_row;
    std::vector<std::pair<std::string, char>> rows;  // (name, 'L'|'E'|'G'), objective excluded
    std::vector<std::string> columns;
    std::map<std::string, std::map<std::string, double>> coefficients;  // column -> row -> value
    std::map<std::string, double> rhs;
    std::map<std::string, std::pair<double, double>> bounds;  // column -> (lower, upper)
    std::vector<std::string> binaries;

    MilpCounts counts() const;
};

MpsModel parse_mps(const std::string& text);
MpsModel read_mps(const std::filesystem::path& path);

struct SolutionReport {
    TreeModel model;
    double objective = 0.0;  // recomputed from the decoded tree
    ObjectiveBreakdown breakdown;
    std::optional<double> claimed_objective;
    std::optional<double> row_objective;  // objective row at the given values, when all were given
};

// "name value" lines; '#' starts a comment; names may be MPS or structured;
// "objective" / "OBJ" carries the solver's claimed objective.
std::vector<std::pair<std::string, double>> parse_assignments(const std::string& text);

// Decodes the tree from binaries (rounded, |v - round(v)| <= 1e-5) plus b
// and c; missing thresholds are placed between the routed data and missing
// leaf coefficients are re-fitted. The objective is always recomputed.
SolutionReport read_solution(const MilpArtifact& art, const std::vector<std::pair<std::string, double>>& assignments);

inline constexpr double integrality_tolerance = 1e-5;

}  // namespace sdt
