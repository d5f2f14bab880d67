#include "sdt/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "sdt/baselines.hpp"
#include "sdt/closed_loop.hpp"
#include "sdt/errors.hpp"
#include "sdt/format.hpp"
#include "sdt/milp.hpp"
#include "sdt/tree.hpp"

namespace sdt {

using nlohmann::json;

// ------------------------------------------------------------------ config

namespace {

const char* mode_name(SamplingMode m) { return m == SamplingMode::uniform_grid ? "uniform-grid" : "seeded-random"; }

SamplingMode parse_mode(const std::string& s) {
    if (s == "uniform-grid") return SamplingMode::uniform_grid;
    if (s == "seeded-random") return SamplingMode::seeded_random;
    throw ConfigError("data.mode must be \"uniform-grid\" or \"seeded-random\", got \"" + s + "\"");
}

// Reads one section, rejecting keys it does not know.
class Section {
public:
    Section(const json& doc, const std::string& name) : name_(name) {
        if (!doc.contains(name)) return;
        node_ = &doc.at(name);
        if (!node_->is_object()) throw ConfigError("config section '" + name + "' must be an object");
    }

    template <class T>
    void get(const std::string& key, T& into) {
        seen_.push_back(key);
        if (!node_ || !node_->contains(key)) return;
        try {
            into = node_->at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError("config key " + name_ + "." + key + " has the wrong type");
        }
    }

    void pair(const std::string& key, double& lo, double& hi) {
        std::vector<double> v{lo, hi};
        get(key, v);
        if (v.size() != 2) throw ConfigError("config key " + name_ + "." + key + " must be [lower, upper]");
        lo = v[0];
        hi = v[1];
    }

    void finish() const {
        if (!node_) return;
        for (const auto& [key, value] : node_->items())
            if (std::find(seen_.begin(), seen_.end(), key) == seen_.end())
                throw ConfigError("unknown config key " + name_ + "." + key);
    }

    const json* node() const { return node_; }

private:
    std::string name_;
    const json* node_ = nullptr;
    std::vector<std::string> seen_;
};

}  // namespace

RunConfig RunConfig::from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : doc.items())
        if (key != "plant" && key != "mpc" && key != "learn" && key != "data" && key != "sim")
            throw ConfigError("unknown config section '" + key + "'");

    RunConfig c;
    Section plant(doc, "plant");
    plant.get("V", c.mpc.plant.volume);
    plant.get("x_f", c.mpc.plant.feed_concentration);
    plant.get("k", c.mpc.plant.rate_constant);
    plant.finish();

    Section mpc(doc, "mpc");
    mpc.get("T", c.mpc.horizon);
    mpc.get("h", c.mpc.step);
    mpc.get("P", c.mpc.terminal_weight);
    mpc.get("x_sp", c.mpc.setpoint);
    mpc.get("u_rate_max", c.mpc.u_rate_max);
    mpc.pair("x_bounds", c.mpc.x_lb, c.mpc.x_ub);
    mpc.pair("u_bounds", c.mpc.u_lb, c.mpc.u_ub);
    mpc.finish();

    Section learn(doc, "learn");
    learn.get("depth", c.learn.depth);
    learn.get("lambda_c", c.learn.lambda_c);
    learn.get("lambda_m", c.learn.lambda_m);
    learn.pair("c_bounds", c.learn.c_lb, c.learn.c_ub);
    json yb = nullptr;
    learn.get("y_bounds", yb);
    if (!yb.is_null()) {
        if (!yb.is_array() || yb.size() != 2 || !yb[0].is_number() || !yb[1].is_number())
            throw ConfigError("config key learn.y_bounds must be null or [lower, upper]");
        c.learn.y_lb = yb[0].get<double>();
        c.learn.y_ub = yb[1].get<double>();
    }
    learn.get("eps", c.learn.eps_routing);
    learn.get("big_M", c.learn.big_m);
    learn.finish();

    Section data(doc, "data");
    data.get("n_train", c.data.n_train);
    data.get("n_test", c.data.n_test);
    data.pair("range", c.data.lo, c.data.hi);
    data.get("seed", c.data.seed);
    std::string mode = mode_name(c.data.mode);
    data.get("mode", mode);
    c.data.mode = parse_mode(mode);
    data.finish();

    Section sim(doc, "sim");
    sim.get("x0", c.sim.x0);
    sim.get("t_final", c.sim.t_final);
    sim.get("dt_sample", c.sim.dt_sample);
    sim.finish();

    c.check();
    return c;
}

json RunConfig::to_json() const {
    json yb = nullptr;
    if (learn.y_lb && learn.y_ub) yb = {*learn.y_lb, *learn.y_ub};
    return {
        {"plant", {{"V", mpc.plant.volume}, {"x_f", mpc.plant.feed_concentration}, {"k", mpc.plant.rate_constant}}},
        {"mpc",
         {{"T", mpc.horizon},
          {"h", mpc.step},
          {"P", mpc.terminal_weight},
          {"x_sp", mpc.setpoint},
          {"u_rate_max", mpc.u_rate_max},
          {"x_bounds", {mpc.x_lb, mpc.x_ub}},
          {"u_bounds", {mpc.u_lb, mpc.u_ub}}}},
        {"learn",
         {{"depth", learn.depth},
          {"lambda_c", learn.lambda_c},
          {"lambda_m", learn.lambda_m},
          {"c_bounds", {learn.c_lb, learn.c_ub}},
          {"y_bounds", yb},
          {"eps", learn.eps_routing},
          {"big_M", learn.big_m}}},
        {"data",
         {{"n_train", data.n_train},
          {"n_test", data.n_test},
          {"range", {data.lo, data.hi}},
          {"seed", data.seed},
          {"mode", mode_name(data.mode)}}},
        {"sim", {{"x0", sim.x0}, {"t_final", sim.t_final}, {"dt_sample", sim.dt_sample}}},
    };
}

void RunConfig::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw ConfigError("override must look like section.key=value, got '" + assignment + "'");
    const std::string section = assignment.substr(0, dot);
    const std::string key = assignment.substr(dot + 1, eq - dot - 1);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    json doc = to_json();
    if (!doc.contains(section)) throw ConfigError("unknown config section '" + section + "'");
    if (!doc[section].contains(key)) throw ConfigError("unknown config key " + section + "." + key);
    doc[section][key] = value;
    *this = from_json(doc);
}

void RunConfig::check() const {
    mpc.check();
    learn.check();
    if (data.n_train < 1 || data.n_test < 1) throw ConfigError("data sizes must be positive");
    if (!(data.lo < data.hi)) throw ConfigError("data.range must satisfy lower < upper");
    if (!(sim.dt_sample > 0.0) || !(sim.t_final >= sim.dt_sample))
        throw ConfigError("sim needs dt_sample > 0 and t_final >= dt_sample");
}

std::string RunConfig::hash() const { return sha256_hex(to_json().dump()); }

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot read config " + path);
    json doc = json::parse(f, nullptr, false);
    if (doc.is_discarded()) throw ParseError("config " + path + " is not valid JSON");
    return RunConfig::from_json(doc);
}

std::pair<Dataset, Dataset> make_datasets(const RunConfig& cfg) {
    const auto& d = cfg.data;
    Dataset train = generate_dataset(cfg.mpc, d.n_train, d.lo, d.hi, d.mode, d.seed);
    std::vector<double> taken(train.X.data(), train.X.data() + train.X.size());
    Dataset test = generate_dataset(cfg.mpc, d.n_test, d.lo, d.hi, SamplingMode::seeded_random, d.seed, taken);
    return {std::move(train), std::move(test)};
}

// ------------------------------------------------------------------ commands

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot write " + path);
    f << text;
    if (!f) throw IoError("failed writing " + path);
}

json provenance(const RunConfig& cfg, const std::string& dataset_sha, const std::string& kind) {
    json p = {{"tool_version", tool_version}, {"config_sha256", cfg.hash()}, {"kind", kind}};
    p["dataset_sha256"] = dataset_sha.empty() ? json(nullptr) : json(dataset_sha);
    return p;
}

std::vector<std::string> comment_lines(const json& prov) {
    std::vector<std::string> lines;
    for (const auto& [k, v] : prov.items()) lines.push_back(k + ": " + (v.is_string() ? v.get<std::string>() : v.dump()));
    return lines;
}

void write_model(const std::string& path, const TreeModel& model, const json& prov) {
    json doc = to_json(model);
    doc["provenance"] = prov;
    write_text(path, doc.dump(2) + "\n");
}

struct LoadedModel {
    TreeModel model;
    json provenance;
};

// "@reference" names the stored published model.
LoadedModel load_model(const std::string& path) {
    if (path == "@reference") return {reference_reactor_tree(), nullptr};
    const std::string text = read_text(path);
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ParseError(path + " is not valid JSON");
    LoadedModel m{from_json(doc), doc.value("provenance", json(nullptr))};
    return m;
}

Controller make_controller(const std::string& spec, const RunConfig& cfg) {
    if (spec == "mpc") return Controller::mpc(cfg.mpc);
    if (spec.rfind("model:", 0) == 0)
        return Controller::model(load_model(spec.substr(6)).model, cfg.mpc.u_lb, cfg.mpc.u_ub);
    if (spec.rfind("const:", 0) == 0) {
        const std::string v = spec.substr(6);
        try {
            std::size_t used = 0;
            const double u = std::stod(v, &used);
            if (used == v.size()) return Controller::constant(u, cfg.mpc.u_lb, cfg.mpc.u_ub);
        } catch (const std::logic_error&) {
        }
        throw UsageError("bad constant controller value '" + v + "'");
    }
    throw UsageError("controller must be mpc, model:<path> or const:<value>, got '" + spec + "'");
}

Dataset data_or_generate(const std::string& path, const RunConfig& cfg) {
    if (!path.empty()) return read_csv(path);
    return generate_dataset(cfg.mpc, cfg.data.n_train, cfg.data.lo, cfg.data.hi, cfg.data.mode, cfg.data.seed);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct Options {
    std::string config_path;
    std::vector<std::string> overrides;
    // gen-data
    std::string train_out = "train.csv", test_out = "test.csv";
    // shared
    std::string data, out, report, kind, sol, controller = "mpc", metrics, test, csv, counts;
    std::vector<std::string> models;
    std::vector<double> xs;
};

RunConfig resolve_config(const Options& o) {
    RunConfig cfg = o.config_path.empty() ? RunConfig{} : load_config(o.config_path);
    for (const auto& s : o.overrides) {
        try {
            cfg.apply_override(s);
        } catch (const ConfigError& e) {
            throw UsageError(e.what());
        }
    }
    cfg.check();
    return cfg;
}

void cmd_gen_data(const Options& o, std::ostream& out) {
    const RunConfig cfg = resolve_config(o);
    const auto [train, test] = make_datasets(cfg);
    write_csv(train, o.train_out, comment_lines(provenance(cfg, dataset_hash(train), "train")));
    write_csv(test, o.test_out, comment_lines(provenance(cfg, dataset_hash(test), "test")));
    out << "wrote " << o.train_out << " (" << train.size() << " rows) and " << o.test_out << " (" << test.size()
        << " rows)\n";
}

void cmd_train(const Options& o, std::ostream& out) {
    const RunConfig cfg = resolve_config(o);
    const Dataset data = read_csv(o.data);
    const FitReport fit = fit_tree(data, canonical_basis(), cfg.learn);
    const json prov = provenance(cfg, dataset_hash(data), "symbolic");
    write_model(o.out.empty() ? "model.tree.json" : o.out, fit.model, prov);
    const std::string report = o.report.empty() ? "fit.json" : o.report;
    json rep = {{"objective", fit.objective},
                {"accuracy", fit.breakdown.accuracy},
                {"complexity", fit.breakdown.complexity},
                {"magnitude", fit.breakdown.magnitude},
                {"subproblems_solved", fit.subproblems_solved},
                {"wall_time_s", fit.wall_time_s},
                {"provenance", prov}};
    write_text(report, rep.dump(2) + "\n");
    out << "objective " << format_double(fit.objective) << " with " << fit.breakdown.complexity << " branch nodes";
    for (const auto& [node, rule] : fit.model.rules()) out << (node == 1 ? ", splits " : " ") << format_double(rule.threshold);
    out << '\n';
}

void cmd_baseline(const Options& o, std::ostream& out) {
    const RunConfig cfg = resolve_config(o);
    const Dataset data = read_csv(o.data);
    TreeModel model;
    if (o.kind == "sparse")
        model = fit_sparse(data, canonical_basis(), cfg.learn.lambda_m, {cfg.learn.c_lb, cfg.learn.c_ub}).model;
    else if (o.kind == "cart") model = fit_cart_constant(data, cfg.learn.depth);
    else if (o.kind == "lintree") model = fit_cart_linear(data, cfg.learn.depth);
    else throw UsageError("--kind must be sparse, cart or lintree");
    const std::string path = o.out.empty() ? o.kind + ".tree.json" : o.out;
    write_model(path, model, provenance(cfg, dataset_hash(data), o.kind));
    out << "wrote " << path << '\n';
}

void cmd_export_milp(const Options& o, std::ostream& out) {
    const RunConfig cfg = resolve_config(o);
    const Dataset data = data_or_generate(o.data, cfg);
    const MilpArtifact art = build_milp(data, canonical_basis(), cfg.learn);
    const json prov = provenance(cfg, dataset_hash(data), "milp");
    const std::string path = o.out.empty() ? "model.mps" : o.out;
    write_mps(art, path, comment_lines(prov), prov);
    const MilpCounts c = art.counts();
    const json counts = {{"variables", c.variables},
                         {"binaries", c.binaries},
                         {"continuous", c.variables - c.binaries},
                         {"rows", c.rows},
                         {"provenance", prov}};
    write_text(o.counts.empty() ? "counts.json" : o.counts, counts.dump(2) + "\n");
    out << "variables " << c.variables << " binaries " << c.binaries << " rows " << c.rows << '\n';
}

void cmd_import_sol(const Options& o, std::ostream& out) {
    const RunConfig cfg = resolve_config(o);
    const Dataset data = data_or_generate(o.data, cfg);
    const MilpArtifact art = build_milp(data, canonical_basis(), cfg.learn);
    const SolutionReport rep = read_solution(art, parse_assignments(read_text(o.sol)));
    json prov = provenance(cfg, dataset_hash(data), "milp-solution");
    write_model(o.out.empty() ? "model.tree.json" : o.out, rep.model, prov);
    out << "objective " << format_double(rep.objective);
    if (rep.claimed_objective) out << " (solver claimed " << format_double(*rep.claimed_objective) << ")";
    out << '\n';
}

void cmd_predict(const Options& o, std::ostream& out) {
    const TreeModel model = load_model(o.models.front()).model;
    for (double x : o.xs) out << format_double(model.predict(std::span<const double>(&x, 1))) << '\n';
}

json trace_metrics(const SimTrace& tr, double setpoint, double mae_test) {
    const auto [mean, peak] = latency_stats(tr);
    return {{"iae", iae(tr, setpoint)},
            {"mae_test", number_or_null(mae_test)},
            {"latency_mean_s", mean},
            {"latency_max_s", peak}};
}

void cmd_simulate(const Options& o, std::ostream& out) {
    const RunConfig cfg = resolve_config(o);
    const Controller ctrl = make_controller(o.controller, cfg);
    const SimTrace tr = simulate(cfg.mpc.plant, ctrl, cfg.sim.x0, cfg.sim.t_final, cfg.sim.dt_sample);
    double test_mae = NAN;
    std::string test_sha;
    if (!o.test.empty()) {
        const Dataset test = read_csv(o.test);
        test_mae = mae(ctrl, test);
        test_sha = dataset_hash(test);
    }
    const json prov = provenance(cfg, test_sha, "simulation:" + o.controller);
    write_trace_csv(tr, o.out.empty() ? "trace.csv" : o.out, comment_lines(prov));
    json metrics = trace_metrics(tr, cfg.mpc.setpoint, test_mae);
    metrics["provenance"] = prov;
    write_text(o.metrics.empty() ? "metrics.json" : o.metrics, metrics.dump(2) + "\n");
    out << "iae " << format_double(metrics["iae"].get<double>()) << " final state "
        << format_double(tr.states.back()) << '\n';
}

void cmd_report(const Options& o, std::ostream& out) {
    const RunConfig cfg = resolve_config(o);
    const Dataset test = read_csv(o.test);

    std::vector<std::pair<std::string, LoadedModel>> models;
    std::string train_sha;
    for (const auto& path : o.models) {
        LoadedModel m = load_model(path);
        const json& p = m.provenance;
        if (!p.is_object() || !p.contains("dataset_sha256") || !p["dataset_sha256"].is_string())
            throw ProvenanceError(path + " carries no training-data hash");
        const std::string sha = p["dataset_sha256"].get<std::string>();
        if (train_sha.empty()) train_sha = sha;
        else if (sha != train_sha)
            throw ProvenanceError(path + " was trained on data " + sha.substr(0, 12) + "..., not " +
                                  train_sha.substr(0, 12) + "...; refusing to compare");
        std::string name = p.value("kind", std::filesystem::path(path).stem().string());
        models.emplace_back(std::move(name), std::move(m));
    }

    const double sp = cfg.mpc.setpoint;
    const auto& s = cfg.sim;
    const SimTrace mpc_trace = simulate(cfg.mpc.plant, Controller::mpc(cfg.mpc), s.x0, s.t_final, s.dt_sample);
    const double mpc_iae = iae(mpc_trace, sp);

    json rows = json::array();
    std::ostringstream csv;
    const json prov = provenance(cfg, train_sha, "report");
    for (const auto& c : comment_lines(prov)) csv << "# " << c << '\n';
    csv << "model,mae_test,iae,iae_ratio_to_mpc,latency_mean_s,latency_max_s\n";
    auto add = [&](const std::string& name, const Controller& ctrl, const SimTrace& tr) {
        json m = trace_metrics(tr, sp, mae(ctrl, test));
        m["model"] = name;
        m["iae_ratio_to_mpc"] = m["iae"].get<double>() / mpc_iae;
        csv << name << ',' << format_double(m["mae_test"].get<double>()) << ',' << format_double(m["iae"].get<double>())
            << ',' << format_double(m["iae_ratio_to_mpc"].get<double>()) << ','
            << format_double(m["latency_mean_s"].get<double>()) << ',' << format_double(m["latency_max_s"].get<double>())
            << '\n';
        rows.push_back(std::move(m));
    };
    add("mpc", Controller::mpc(cfg.mpc), mpc_trace);
    for (const auto& [name, m] : models) {
        const Controller ctrl = Controller::model(m.model, cfg.mpc.u_lb, cfg.mpc.u_ub);
        add(name, ctrl, simulate(cfg.mpc.plant, ctrl, s.x0, s.t_final, s.dt_sample));
    }
    json doc = {{"models", rows}, {"test_sha256", dataset_hash(test)}, {"provenance", prov}};
    write_text(o.out.empty() ? "report.json" : o.out, doc.dump(2) + "\n");
    write_text(o.csv.empty() ? "report.csv" : o.csv, csv.str());
    for (const auto& r : rows)
        out << r["model"].get<std::string>() << ": mae_test " << format_double(r["mae_test"].get<double>())
            << ", iae " << format_double(r["iae"].get<double>()) << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Symbolic decision-tree surrogates of an MPC law", "sdt"};
    app.require_subcommand(1);
    app.set_version_flag("--version", tool_version);
    Options o;
    app.add_option("--config", o.config_path, "Run configuration (JSON)")->check(CLI::ExistingFile);
    app.add_option("--set", o.overrides, "Override a config value: section.key=value")->take_all();

    auto* gen = app.add_subcommand("gen-data", "Generate MPC-labelled training and test sets");
    gen->add_option("--train", o.train_out, "Training CSV")->capture_default_str();
    gen->add_option("--test", o.test_out, "Test CSV")->capture_default_str();

    auto* train = app.add_subcommand("train", "Fit the globally optimal symbolic tree");
    train->add_option("--data", o.data, "Training CSV")->required();
    train->add_option("--out", o.out, "Model file (default model.tree.json)");
    train->add_option("--report", o.report, "Fit report JSON (default fit.json)");

    auto* base = app.add_subcommand("baseline", "Fit a comparison model");
    base->add_option("--kind", o.kind, "sparse | cart | lintree")
        ->required()
        ->check(CLI::IsMember({"sparse", "cart", "lintree"}));
    base->add_option("--data", o.data, "Training CSV")->required();
    base->add_option("--out", o.out, "Model file (default <kind>.tree.json)");

    auto* exp = app.add_subcommand("export-milp", "Write the learning MILP as fixed-format MPS");
    exp->add_option("--data", o.data, "Training CSV (default: generate from the config)");
    exp->add_option("--out", o.out, "MPS file (default model.mps; name map alongside)");
    exp->add_option("--counts", o.counts, "Counts JSON (default counts.json)");

    auto* imp = app.add_subcommand("import-sol", "Decode and re-score an external MILP solution");
    imp->add_option("--data", o.data, "Training CSV the MILP was built from (default: generate)");
    imp->add_option("--sol", o.sol, "Solution file: 'name value' lines")->required();
    imp->add_option("--out", o.out, "Model file (default model.tree.json)");

    auto* pred = app.add_subcommand("predict", "Evaluate a model");
    pred->add_option("--model", o.models, "Model file, or @reference for the published model")
        ->required()
        ->expected(1);
    pred->add_option("--x", o.xs, "State value (repeatable)")->required();

    auto* sim = app.add_subcommand("simulate", "Closed-loop simulation");
    sim->add_option("--controller", o.controller, "mpc | model:<path> | const:<value>")->capture_default_str();
    sim->add_option("--out", o.out, "Trace CSV (default trace.csv)");
    sim->add_option("--metrics", o.metrics, "Metrics JSON (default metrics.json)");
    sim->add_option("--test", o.test, "Test CSV for mae_test");

    auto* rep = app.add_subcommand("report", "Compare models: test MAE, closed-loop IAE and latency");
    rep->add_option("--model", o.models, "Model file (repeatable)")->required();
    rep->add_option("--test", o.test, "Test CSV")->required();
    rep->add_option("--out", o.out, "Report JSON (default report.json)");
    rep->add_option("--csv", o.csv, "Report CSV (default report.csv)");

    auto synopsis = [&](const CLI::App* target) { err << target->help(); };
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        const CLI::App* target = &app;
        for (const auto* s : app.get_subcommands()) target = s;
        out << target->help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << tool_version << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        const CLI::App* target = &app;
        for (const auto* s : app.get_subcommands()) target = s;
        synopsis(target);
        return 1;
    }

    const CLI::App* chosen = app.get_subcommands().front();
    try {
        const std::string name = chosen->get_name();
        if (name == "gen-data") cmd_gen_data(o, out);
        else if (name == "train") cmd_train(o, out);
        else if (name == "baseline") cmd_baseline(o, out);
        else if (name == "export-milp") cmd_export_milp(o, out);
        else if (name == "import-sol") cmd_import_sol(o, out);
        else if (name == "predict") cmd_predict(o, out);
        else if (name == "simulate") cmd_simulate(o, out);
        else cmd_report(o, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        synopsis(chosen);
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace sdt
