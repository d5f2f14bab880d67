#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdt/dataset.hpp"
#include "sdt/learner.hpp"
#include "sdt/mpc.hpp"

namespace sdt {

inline constexpr const char* tool_version = "sdt 0.1.0";

struct DataSpec {
    int n_train = 50;
    int n_test = 50;
    double lo = 0.1, hi = 0.9;
    std::uint64_t seed = 1;
    SamplingMode mode = SamplingMode::uniform_grid;  // training set; the test set is always seeded-random
};

struct SimSpec {
    double x0 = 0.75;
    double t_final = 10.0;
    double dt_sample = 0.1;
};

// Everything one run depends on. JSON sections: plant, mpc, learn, data, sim.
struct RunConfig {
    MpcSpec mpc;  // holds the plant
    LearnConfig learn;
    DataSpec data;
    SimSpec sim;

    // Starts from the defaults; unknown sections or keys throw ConfigError.
    static RunConfig from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
    // "section.key=value"; value is JSON (bare words are taken as strings).
    void apply_override(const std::string& assignment);
    void check() const;
    std::string hash() const;  // SHA-256 of the canonical JSON
};

RunConfig load_config(const std::string& path);

// Training and held-out test sets: the test points are seeded-random on the
// same range and never coincide with a training point.
std::pair<Dataset, Dataset> make_datasets(const RunConfig& cfg);

// argv without the program name. Exit codes: 0 ok, 1 usage, 2 runtime.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace sdt
