#include "cli.hpp"

#include "landsel/bbob.hpp"
#include "landsel/common.hpp"
#include "landsel/ela.hpp"
#include "landsel/forest.hpp"
#include "landsel/io.hpp"
#include "landsel/pipeline.hpp"
#include "landsel/portfolio.hpp"
#include "landsel/selector.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace landsel::cli {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string RunConfig::canonical_json() const {
    json j{
        {"seed", seed},
        {"dim", dim},
        {"fids", {fid_min, fid_max}},
        {"iids", {iid_min, iid_max}},
        {"sample_sizes", sample_sizes},
        {"reps", reps},
        {"budgets", budgets},
        {"clamp", clamp},
        {"threshold", threshold},
        {"threshold_grid", threshold_grid},
    };
    if (performance_input)
        j["performance_input"] = performance_input->string();
    else
        j["solvers"] = solvers;
    return j.dump();
}

std::string RunConfig::hash() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canonical_json())));
    return buf;
}

void load_config_file(const fs::path& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw MissingInput("cannot open config file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("config file " + path.string() + ": " + e.what());
    }
    auto range = [&](const char* key, int& lo, int& hi) {
        if (!j.contains(key)) return;
        const auto v = j.at(key).get<std::vector<int>>();
        if (v.size() != 2) throw ParseError(std::string("config key '") + key + "' must be [min, max]");
        lo = v[0];
        hi = v[1];
    };
    try {
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("dim")) cfg.dim = j.at("dim").get<int>();
        range("fids", cfg.fid_min, cfg.fid_max);
        range("iids", cfg.iid_min, cfg.iid_max);
        if (j.contains("sample_sizes")) cfg.sample_sizes = j.at("sample_sizes").get<std::vector<int>>();
        if (j.contains("reps")) cfg.reps = j.at("reps").get<int>();
        if (j.contains("budgets")) cfg.budgets = j.at("budgets").get<std::vector<int>>();
        if (j.contains("clamp")) cfg.clamp = j.at("clamp").get<double>();
        if (j.contains("threshold")) cfg.threshold = j.at("threshold").get<double>();
        if (j.contains("threshold_grid")) cfg.threshold_grid = j.at("threshold_grid").get<std::vector<double>>();
        if (j.contains("solvers")) cfg.solvers = j.at("solvers").get<std::vector<std::string>>();
        if (j.contains("performance_input")) cfg.performance_input = j.at("performance_input").get<std::string>();
        if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
        if (j.contains("jobs")) cfg.jobs = j.at("jobs").get<unsigned>();
    } catch (const json::exception& e) {
        throw ParseError("config file " + path.string() + ": " + e.what());
    }
}

fs::path default_out_dir() {
    if (const char* env = std::getenv("LANDSEL_OUT"); env && *env) return env;
    return "landsel-out";
}

std::string frequency_file(int budget, int sample_size) {
    return "frequency_b" + std::to_string(budget) + "_s" + std::to_string(sample_size) + ".csv";
}

namespace {

std::vector<std::string> preamble(const RunConfig& cfg, const std::string& command) {
    return {"landsel " + command + " config_hash=" + cfg.hash() + " seed=" + std::to_string(cfg.seed)};
}

void validate(const RunConfig& cfg) {
    if (cfg.dim < 2) throw Error("--dim must be >= 2");
    if (cfg.fid_min < 1 || cfg.fid_max > bbob::kFunctionCount || cfg.fid_min > cfg.fid_max)
        throw Error("function range must lie within 1..24");
    if (cfg.iid_min < 1 || cfg.iid_min > cfg.iid_max) throw Error("instance range must start at 1 or above");
    if (cfg.reps < 1) throw Error("--reps must be >= 1");
    if (cfg.sample_sizes.empty()) throw Error("--sample-sizes must not be empty");
    for (int n : cfg.sample_sizes)
        if (n < cfg.dim + 2) throw SampleSizeError("sample size " + std::to_string(n) + " is below dim + 2");
    if (cfg.budgets.empty()) throw Error("--budgets must not be empty");
    for (int b : cfg.budgets)
        if (b < 1) throw Error("budgets must be positive");
    if (!(cfg.clamp > 0.0)) throw Error("--clamp must be positive");
    if (!std::isfinite(cfg.threshold) || cfg.threshold < 0.0) throw Error("--threshold must be finite and >= 0");
}

std::vector<bbob::ProblemInstance> instances(const RunConfig& cfg) {
    std::vector<bbob::ProblemInstance> out;
    for (int fid = cfg.fid_min; fid <= cfg.fid_max; ++fid)
        for (int iid = cfg.iid_min; iid <= cfg.iid_max; ++iid) out.push_back(bbob::make_instance(fid, iid, cfg.dim));
    return out;
}

std::vector<portfolio::SolverSpec> solvers(const RunConfig& cfg) {
    std::vector<portfolio::SolverSpec> out;
    std::set<std::string> seen;
    for (const auto& name : cfg.solvers) {
        if (!seen.insert(name).second) throw Error("solver '" + name + "' listed twice");
        out.push_back(portfolio::make_solver(name, cfg.seed));
    }
    if (out.empty()) throw Error("no solvers configured");
    return out;
}

fs::path output(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out);
    return cfg.out / name;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path.string());
    return os;
}

std::ifstream open_in(const RunConfig& cfg, const char* name, const std::string& producer) {
    const fs::path path = cfg.out / name;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInput(path.string() + " not found; run `landsel " + producer + "` first");
    return in;
}

std::vector<ela::FeatureVector> load_features(const RunConfig& cfg) {
    auto in = open_in(cfg, kFeaturesFile, "features");
    return io::read_features(in);
}

std::vector<PerformanceRecord> load_performance(const RunConfig& cfg, std::ostream& log) {
    auto in = open_in(cfg, kPerformanceFile, "runs` or `landsel ingest");
    auto result = portfolio::ingest_performance(in);
    for (const auto& w : result.warnings) log << "warning: " << w << '\n';
    if (!result.rejected.empty()) {
        std::string msg = "performance table has invalid rows:";
        for (const auto& r : result.rejected) msg += "\n  " + r;
        throw ParseError(msg);
    }
    return std::move(result.records);
}

std::vector<pipeline::CvPredictions> load_predictions(const RunConfig& cfg) {
    auto in = open_in(cfg, kPredictionsFile, "train");
    return io::read_predictions(in);
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
    auto os = open_out(path);
    writer(os);
    os.close();
    if (!os) throw Error("failed writing " + path.string());
}

void write_performance_checked(const RunConfig& cfg, const std::vector<PerformanceRecord>& records,
                               std::vector<std::string> pre, std::ostream& log) {
    const auto path = output(cfg, kPerformanceFile);
    write_file(path, [&](std::ostream& os) { io::write_performance(os, records, pre); });
    std::ifstream in(path, std::ios::binary);
    if (portfolio::ingest_performance(in).records.size() != records.size())
        throw Error("validation of " + path.string() + " failed");
    log << "wrote " << path.string() << " (" << records.size() << " records)\n";
}

json quality_json(const pipeline::Quality& q) { return {{"rmse", q.rmse}, {"log_rmse", q.log_rmse}}; }

}  // namespace

void cmd_features(const RunConfig& cfg, std::ostream& log) {
    validate(cfg);
    const auto insts = instances(cfg);
    std::vector<ela::FeatureVector> features(insts.size() * cfg.sample_sizes.size());
    parallel_for(features.size(), cfg.jobs, [&](std::size_t t) {
        const auto& inst = insts[t / cfg.sample_sizes.size()];
        const int n = cfg.sample_sizes[t % cfg.sample_sizes.size()];
        features[t] = ela::compute_features(inst, n, cfg.reps, cfg.seed);
    });
    const auto path = output(cfg, kFeaturesFile);
    write_file(path, [&](std::ostream& os) { io::write_features(os, features, preamble(cfg, "features")); });
    std::ifstream in(path, std::ios::binary);
    if (io::read_features(in).size() != features.size()) throw Error("validation of " + path.string() + " failed");
    log << "wrote " << path.string() << " (" << features.size() << " feature vectors)\n";
}

void cmd_runs(const RunConfig& cfg, std::ostream& log) {
    validate(cfg);
    const auto specs = solvers(cfg);
    const auto records = portfolio::generate_table(specs, instances(cfg), cfg.budgets, cfg.jobs);
    auto pre = preamble(cfg, "runs");
    for (const auto& s : specs)
        pre.push_back("solver " + s.name + " kind=" + std::string(portfolio::to_string(s.kind)) +
                      " seed=" + std::to_string(s.seed) + " step=" + format17(s.step));
    write_performance_checked(cfg, records, pre, log);
}

void cmd_ingest(const RunConfig& cfg, std::ostream& log) {
    if (!cfg.performance_input) throw Error("ingest needs --perf <performance CSV>");
    auto result = portfolio::ingest_performance(*cfg.performance_input);
    for (const auto& w : result.warnings) log << "warning: " << w << '\n';
    for (const auto& r : result.rejected) log << "rejected: " << r << '\n';
    auto pre = preamble(cfg, "ingest");
    pre.push_back("source " + cfg.performance_input->string());
    write_performance_checked(cfg, result.records, pre, log);
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
    validate(cfg);
    const auto features = load_features(cfg);
    const auto perf = load_performance(cfg, log);
    if (perf.empty()) throw IncompleteSuite("performance table is empty");

    // Train on the configured budgets and sample sizes that the data covers;
    // an ingested table may hold fewer budgets than the defaults.
    std::set<std::string> algorithm_set;
    std::set<InstanceKey> instance_set;
    std::set<int> budget_set, size_set;
    for (const auto& r : perf) {
        algorithm_set.insert(r.algorithm);
        instance_set.insert(r.instance());
        if (std::find(cfg.budgets.begin(), cfg.budgets.end(), r.budget) != cfg.budgets.end()) budget_set.insert(r.budget);
    }
    for (const auto& f : features)
        if (std::find(cfg.sample_sizes.begin(), cfg.sample_sizes.end(), f.sample_size) != cfg.sample_sizes.end())
            size_set.insert(f.sample_size);
    if (budget_set.empty()) throw DataJoinError("performance table has none of the configured budgets");
    if (size_set.empty()) throw DataJoinError("feature table has none of the configured sample sizes");
    const std::vector<std::string> algorithms(algorithm_set.begin(), algorithm_set.end());
    const auto folds = pipeline::make_folds({instance_set.begin(), instance_set.end()});
    const auto configs = forest::enumerate_configs(cfg.seed);
    constexpr pipeline::TargetMode kModes[] = {pipeline::TargetMode::Unscaled, pipeline::TargetMode::Log10};

    // One dataset per (algorithm, budget, sample size, mode), shared by all models.
    std::vector<pipeline::Dataset> datasets;
    for (const auto& a : algorithms)
        for (int b : budget_set)
            for (int n : size_set)
                for (auto m : kModes) datasets.push_back(pipeline::build_dataset(features, perf, a, b, n, m, cfg.clamp));

    std::vector<pipeline::CvPredictions> predictions(configs.size() * datasets.size());
    parallel_for(predictions.size(), cfg.jobs, [&](std::size_t t) {
        predictions[t] = pipeline::cross_validate(configs[t / datasets.size()], datasets[t % datasets.size()], folds);
    });

    const auto path = output(cfg, kPredictionsFile);
    write_file(path, [&](std::ostream& os) { io::write_predictions(os, predictions, preamble(cfg, "train")); });
    std::ifstream in(path, std::ios::binary);
    if (io::read_predictions(in).size() != predictions.size())
        throw Error("validation of " + path.string() + " failed");
    log << "wrote " << path.string() << " (" << configs.size() << " models x " << datasets.size() << " datasets)\n";
}

void cmd_select(const RunConfig& cfg, std::ostream& log) {
    validate(cfg);
    const auto predictions = load_predictions(cfg);
    const auto perf = load_performance(cfg, log);
    const auto report = selector::evaluate_selectors(predictions, perf, {cfg.threshold}, cfg.clamp);

    const auto pre = preamble(cfg, "select");
    const auto path = output(cfg, kSelectorsFile);
    write_file(path, [&](std::ostream& os) { io::write_selectors(os, report, pre); });
    log << "wrote " << path.string() << '\n';
    for (const auto& sc : report.scenarios) {
        const auto fpath = output(cfg, frequency_file(sc.budget, sc.sample_size));
        write_file(fpath, [&](std::ostream& os) { io::write_frequency(os, sc, pre); });
        log << "wrote " << fpath.string() << '\n';
    }
    if (!cfg.threshold_grid.empty()) {
        const auto sweep = selector::threshold_sweep(predictions, perf, cfg.threshold_grid, cfg.clamp);
        const auto spath = output(cfg, kThresholdSweepFile);
        write_file(spath, [&](std::ostream& os) {
            for (const auto& line : pre) os << "# " << line << '\n';
            os << "model_id,threshold,budget,sample_size,rmse,log_rmse\n";
            for (const auto& p : sweep)
                os << p.model_id << ',' << format17(p.threshold) << ',' << p.budget << ',' << p.sample_size << ','
                   << format17(p.quality.rmse) << ',' << format17(p.quality.log_rmse) << '\n';
        });
        log << "wrote " << spath.string() << '\n';
    }
}

void cmd_report(const RunConfig& cfg, std::ostream& log) {
    validate(cfg);
    const auto predictions = load_predictions(cfg);
    const auto perf = load_performance(cfg, log);
    const auto regression = pipeline::regression_report(predictions, cfg.clamp);
    const auto selectors = selector::evaluate_selectors(predictions, perf, {cfg.threshold}, cfg.clamp);

    json meta{
        {"config", json::parse(cfg.canonical_json())},
        {"config_hash", cfg.hash()},
        {"seed", cfg.seed},
        {"clamp", cfg.clamp},
        {"threshold", cfg.threshold},
        {"log_clamp_policy", "precisions are floored at clamp before log10 (truths and predictions alike)"},
        {"log_back_transform", "10^p, no bias correction"},
        {"model_id_convention", "ids follow the grid order (crit, minsplit, nest) within each family"},
    };
    if (!cfg.performance_input) {
        json specs = json::array();
        for (const auto& s : solvers(cfg))
            specs.push_back({{"name", s.name}, {"kind", portfolio::to_string(s.kind)}, {"seed", s.seed}, {"step", s.step}});
        meta["solvers"] = specs;
    }

    json models = json::array();
    for (const auto& c : forest::enumerate_configs(cfg.seed)) {
        json m{{"id", c.id()}, {"family", forest::to_string(c.family)}, {"crit", forest::to_string(c.crit)},
               {"minsplit", c.minsplit}, {"describe", c.describe()}};
        if (c.family != forest::Family::DecisionTree) m["nest"] = c.nest;
        models.push_back(m);
    }

    json reg = json::array();
    for (const auto& r : regression) {
        json all = json::array();
        for (const auto& m : r.models)
            all.push_back({{"model_id", m.model_id}, {"rmse", m.quality.rmse}, {"log_rmse", m.quality.log_rmse},
                           {"predictions", m.predictions}});
        reg.push_back({{"algorithm", r.algorithm},
                       {"budget", r.budget},
                       {"sample_size", r.sample_size},
                       {"target_mode", pipeline::to_string(r.mode)},
                       {"best_rmse", {{"model_id", r.best_rmse_model}, {"value", r.best_rmse}}},
                       {"best_log_rmse", {{"model_id", r.best_log_rmse_model}, {"value", r.best_log_rmse}}},
                       {"incomplete", r.incomplete},
                       {"models", all}});
    }

    json sel = json::array();
    for (const auto& sc : selectors.scenarios) {
        json rows = json::array();
        json baselines = json::object();
        for (const auto& r : sc.rows) {
            json row{{"model_id", r.model_id}, {"approach", r.approach}, {"rmse", r.quality.rmse},
                     {"log_rmse", r.quality.log_rmse}, {"pareto", r.pareto}};
            rows.push_back(row);
            if (r.approach == "baseline") baselines[r.model_id] = row;
        }
        json freq = json::object();
        for (const auto& [approach, f] : sc.frequency) {
            json entries = json::array();
            for (const auto& [algorithm, per_instance] : f)
                for (const auto& [k, count] : per_instance)
                    entries.push_back({{"algorithm", algorithm}, {"fid", k.fid}, {"iid", k.iid}, {"count", count}});
            freq[std::string(selector::to_string(approach))] = entries;
        }
        sel.push_back({{"budget", sc.budget},
                       {"sample_size", sc.sample_size},
                       {"algorithms", sc.algorithms},
                       {"sbs_rmse", sc.sbs_rmse},
                       {"sbs_log", sc.sbs_log},
                       {"models_scored", sc.models.size()},
                       {"baselines", baselines},
                       {"rows", rows},
                       {"frequency", freq}});
    }

    json report{{"meta", meta}, {"models", models}, {"regression", reg}, {"selectors", sel}};
    if (!cfg.threshold_grid.empty()) {
        json sweep = json::array();
        for (const auto& p : selector::threshold_sweep(predictions, perf, cfg.threshold_grid, cfg.clamp))
            sweep.push_back({{"model_id", p.model_id}, {"threshold", p.threshold}, {"budget", p.budget},
                             {"sample_size", p.sample_size}, {"quality", quality_json(p.quality)}});
        report["threshold_sweep"] = sweep;
    }

    const auto path = output(cfg, kReportFile);
    write_file(path, [&](std::ostream& os) { os << report.dump(2) << '\n'; });
    {
        std::ifstream in(path, std::ios::binary);
        if (!json::parse(in).contains("regression")) throw Error("validation of " + path.string() + " failed");
    }
    log << "wrote " << path.string() << '\n';

    const auto tpath = output(cfg, kBestModelsFile);
    write_file(tpath, [&](std::ostream& os) {
        for (const auto& line : preamble(cfg, "report")) os << "# " << line << '\n';
        os << pipeline::render_best_model_table(regression, pipeline::TargetMode::Log10);
        os << pipeline::render_best_model_table(regression, pipeline::TargetMode::Unscaled);
    });
    log << "wrote " << tpath.string() << '\n';
}

void cmd_all(const RunConfig& cfg, std::ostream& log) {
    cmd_features(cfg, log);
    if (cfg.performance_input)
        cmd_ingest(cfg, log);
    else
        cmd_runs(cfg, log);
    cmd_train(cfg, log);
    cmd_select(cfg, log);
    cmd_report(cfg, log);
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Landscape-aware performance regression and algorithm selection"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> dim, reps;
    std::optional<double> threshold, clamp;
    std::optional<unsigned> jobs;
    std::vector<int> sample_sizes, budgets, fids, iids;
    std::vector<double> threshold_grid;
    std::vector<std::string> solver_names;
    std::string perf, out_dir;

    app.add_option("--config", config_path, "JSON config file; flags override its values");
    app.add_option("--seed", seed, "Master seed");
    app.add_option("--dim", dim, "Problem dimension");
    app.add_option("--sample-sizes", sample_sizes, "Feature sample sizes")->delimiter(',');
    app.add_option("--reps", reps, "Feature replicates per instance");
    app.add_option("--budgets", budgets, "Evaluation budgets")->delimiter(',');
    app.add_option("--threshold", threshold, "Combined-selector threshold on predicted precision");
    app.add_option("--threshold-grid", threshold_grid, "Optional thresholds to sweep")->delimiter(',');
    app.add_option("--clamp", clamp, "Precision floor before log10");
    app.add_option("--jobs", jobs, "Worker threads");
    app.add_option("--out", out_dir, "Output directory (default $LANDSEL_OUT or landsel-out)");
    app.add_option("--fids", fids, "Function id range as min,max")->delimiter(',')->expected(2);
    app.add_option("--iids", iids, "Instance id range as min,max")->delimiter(',')->expected(2);
    app.add_option("--solvers", solver_names, "Built-in solvers to run")->delimiter(',');
    app.add_option("--perf", perf, "Performance CSV to ingest instead of running solvers");

    struct Command {
        const char* name;
        const char* help;
        void (*fn)(const RunConfig&, std::ostream&);
    };
    const Command commands[] = {
        {"features", "Compute landscape features", cmd_features},
        {"runs", "Run the built-in solver portfolio", cmd_runs},
        {"ingest", "Validate and import a performance CSV", cmd_ingest},
        {"train", "Cross-validate all 30 regression models", cmd_train},
        {"select", "Evaluate the algorithm selectors", cmd_select},
        {"report", "Write the JSON report and best-model table", cmd_report},
        {"all", "Run the whole pipeline", cmd_all},
    };
    for (const auto& c : commands) app.add_subcommand(c.name, c.help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        RunConfig cfg;
        cfg.out = default_out_dir();
        if (!config_path.empty()) load_config_file(config_path, cfg);
        if (seed) cfg.seed = *seed;
        if (dim) cfg.dim = *dim;
        if (reps) cfg.reps = *reps;
        if (threshold) cfg.threshold = *threshold;
        if (clamp) cfg.clamp = *clamp;
        if (jobs) cfg.jobs = *jobs;
        if (!sample_sizes.empty()) cfg.sample_sizes = sample_sizes;
        if (!budgets.empty()) cfg.budgets = budgets;
        if (!threshold_grid.empty()) cfg.threshold_grid = threshold_grid;
        if (!solver_names.empty()) cfg.solvers = solver_names;
        if (!fids.empty()) std::tie(cfg.fid_min, cfg.fid_max) = std::pair{fids[0], fids[1]};
        if (!iids.empty()) std::tie(cfg.iid_min, cfg.iid_max) = std::pair{iids[0], iids[1]};
        if (!perf.empty()) cfg.performance_input = perf;
        if (!out_dir.empty()) cfg.out = out_dir;

        for (const auto& c : commands)
            if (app.got_subcommand(c.name)) c.fn(cfg, out);
        return 0;
    } catch (const std::exception& e) {
        err << "landsel: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace landsel::cli
