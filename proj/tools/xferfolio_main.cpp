#include <CLI11.hpp>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>
#include <thread>
#include <vector>

#include "xferfolio/data_io.hpp"
#include "xferfolio/errors.hpp"
#include "xferfolio/experiments.hpp"
#include "xferfolio/moments.hpp"
#include "xferfolio/solver.hpp"
#include "xferfolio/timestamps.hpp"
#include "xferfolio/transfer_risk.hpp"
#include "xferfolio/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNoConvergence = 3;

struct SolverFlags {
    int max_iterations = 5000;
    double step_size = 0.05;
    double tolerance = 1e-8;
    int restarts = 8;

    void attach(CLI::App* cmd) {
        cmd->add_option("--max-iters", max_iterations, "Solver iteration cap");
        cmd->add_option("--step", step_size, "Gradient step size");
        cmd->add_option("--tol", tolerance, "Iterate-change stopping tolerance");
        cmd->add_option("--restarts", restarts, "Restart count (uniform start included)");
    }

    xferfolio::SolverConfig config() const {
        return xferfolio::SolverConfig{max_iterations, step_size, tolerance, restarts};
    }
};

int resolve_threads(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("XFERFOLIO_THREADS")) {
        int parsed = 0;
        const auto [ptr, ec] = std::from_chars(env, env + std::string(env).size(), parsed);
        if (ec == std::errc() && parsed > 0) return parsed;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

json weights_json(const xferfolio::Portfolio& p) {
    json out = json::array();
    for (Eigen::Index i = 0; i < p.d(); ++i) out.push_back(p.weights()[i]);
    return out;
}

json risk_json(const xferfolio::TransferRiskReport& r) {
    return json{{"r1", r.r1},
                {"r2", r.r2},
                {"r_trans", r.r_trans},
                {"source_sharpe", r.source_sharpe},
                {"degenerate_source", r.degenerate_source}};
}

xferfolio::MomentEstimate moments_of_file(const std::string& path,
                                          const xferfolio::Frequency& freq) {
    const xferfolio::Dataset ds = xferfolio::load_returns_csv(path, freq);
    return xferfolio::estimate_moments(ds.series, freq.is_intraday());
}

// ---------------------------------------------------------------- optimize --
int cmd_optimize(const std::string& returns_path, const std::string& frequency,
                 const SolverFlags& solver) {
    const xferfolio::Frequency freq = xferfolio::Frequency::parse(frequency);
    const xferfolio::Dataset ds = xferfolio::load_returns_csv(returns_path, freq);
    const xferfolio::MomentEstimate m =
        xferfolio::estimate_moments(ds.series, freq.is_intraday());
    const xferfolio::SolveResult res = xferfolio::optimize_direct(m, solver.config());

    json out{{"asset_ids", ds.series.asset_ids()},
             {"weights", weights_json(res.portfolio)},
             {"sharpe", xferfolio::portfolio_sharpe(res.portfolio, m)},
             {"iterations_used", res.iterations_used},
             {"converged", res.converged}};
    std::cout << out.dump(2) << '\n';
    return res.converged ? kExitOk : kExitNoConvergence;
}

// ---------------------------------------------------------------- transfer --
int cmd_transfer(const std::string& source_path, const std::string& train_path,
                 const std::string& test_path, double lambda, const std::string& frequency,
                 const SolverFlags& solver) {
    const xferfolio::Frequency freq = xferfolio::Frequency::parse(frequency);
    const xferfolio::SolverConfig cfg = solver.config();

    const xferfolio::Dataset source = xferfolio::load_returns_csv(source_path, freq);
    const xferfolio::Dataset train = xferfolio::load_returns_csv(train_path, freq);
    const xferfolio::Dataset test = xferfolio::load_returns_csv(test_path, freq);

    const xferfolio::MomentEstimate source_m =
        xferfolio::estimate_moments(source.series, freq.is_intraday());
    const xferfolio::MomentEstimate train_m =
        xferfolio::estimate_moments(train.series, freq.is_intraday());
    const xferfolio::MomentEstimate test_m =
        xferfolio::estimate_moments(test.series, freq.is_intraday());

    const xferfolio::SolveResult pre = xferfolio::optimize_source(source_m, cfg);
    const xferfolio::SolveResult direct = xferfolio::optimize_direct(train_m, cfg);
    const xferfolio::SolveResult trans =
        xferfolio::optimize_transfer(train_m, pre.portfolio, lambda, cfg);

    const xferfolio::TransferRiskReport risk =
        xferfolio::transfer_risk(pre.portfolio, source_m, test_m);

    json out{{"pretrained_weights", weights_json(pre.portfolio)},
             {"transferred_weights", weights_json(trans.portfolio)},
             {"direct_weights", weights_json(direct.portfolio)},
             {"sharpe_transfer", xferfolio::portfolio_sharpe(trans.portfolio, test_m)},
             {"sharpe_direct", xferfolio::portfolio_sharpe(direct.portfolio, test_m)},
             {"transfer_risk", risk_json(risk)},
             {"lambda", lambda},
             {"converged", pre.converged && direct.converged && trans.converged}};
    std::cout << out.dump(2) << '\n';
    return (pre.converged && direct.converged && trans.converged) ? kExitOk
                                                                  : kExitNoConvergence;
}

// -------------------------------------------------------------------- risk --
int cmd_risk(const std::string& source_path, const std::string& target_path,
             const std::string& frequency, const SolverFlags& solver) {
    const xferfolio::Frequency freq = xferfolio::Frequency::parse(frequency);
    const xferfolio::Dataset source = xferfolio::load_returns_csv(source_path, freq);
    const xferfolio::MomentEstimate source_m =
        xferfolio::estimate_moments(source.series, freq.is_intraday());
    const xferfolio::MomentEstimate target_m = moments_of_file(target_path, freq);

    const xferfolio::SolveResult pre = xferfolio::optimize_source(source_m, solver.config());
    const xferfolio::TransferRiskReport risk =
        xferfolio::transfer_risk(pre.portfolio, source_m, target_m);

    std::cout << risk_json(risk).dump(2) << '\n';
    return pre.converged ? kExitOk : kExitNoConvergence;
}

// -------------------------------------------------------------- experiment --
struct ExperimentFlags {
    std::string manifest_path;
    std::string replay_path;
    bool synthetic = false;
    bool similarity_sweep = false;
    int reps = 0;
    std::uint64_t seed = 0;
    std::string out_dir;
    int threads = 0;
    int assets = 10;
    double lambda = 0.2;
    long horizon = 2520;
    std::string frequency = "1-day";
    std::string risk_moments = "target_test";
    SolverFlags solver;
};

json config_to_json(const xferfolio::ExperimentConfig& cfg) {
    return json{{"n_repetitions", cfg.n_repetitions},
                {"n_assets", cfg.n_assets},
                {"lambda", cfg.lambda},
                {"seed", cfg.seed},
                {"risk_moment_source",
                 cfg.risk_moment_source == xferfolio::RiskMomentSource::TargetTest
                     ? "target_test"
                     : "target_train"},
                {"solver",
                 {{"max_iterations", cfg.solver.max_iterations},
                  {"step_size", cfg.solver.step_size},
                  {"tolerance", cfg.solver.tolerance},
                  {"restarts", cfg.solver.restarts}}}};
}

xferfolio::ExperimentConfig config_from_json(const json& j) {
    xferfolio::ExperimentConfig cfg;
    cfg.n_repetitions = j.at("n_repetitions").get<int>();
    cfg.n_assets = j.at("n_assets").get<int>();
    cfg.lambda = j.at("lambda").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    const std::string rms = j.at("risk_moment_source").get<std::string>();
    cfg.risk_moment_source = rms == "target_train" ? xferfolio::RiskMomentSource::TargetTrain
                                                   : xferfolio::RiskMomentSource::TargetTest;
    const json& s = j.at("solver");
    cfg.solver.max_iterations = s.at("max_iterations").get<int>();
    cfg.solver.step_size = s.at("step_size").get<double>();
    cfg.solver.tolerance = s.at("tolerance").get<double>();
    cfg.solver.restarts = s.at("restarts").get<int>();
    return cfg;
}

void print_correlation_table(const std::vector<std::string>& targets,
                             const std::vector<double>& correlations,
                             const std::vector<bool>& defined) {
    std::printf("%-24s %s\n", "Target", "Correlation");
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (defined[i]) {
            std::printf("%-24s %.4f\n", targets[i].c_str(), correlations[i]);
        } else {
            std::printf("%-24s %s\n", targets[i].c_str(), "n/a");
        }
    }
}

/// Removes every file written so far if the run fails; partial output
/// directories are worse than no output when sweeps feed plotting scripts.
class OutputSet {
public:
    std::string claim(const fs::path& path) {
        written_.push_back(path);
        return path.string();
    }
    void discard_all() {
        for (const fs::path& p : written_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }

private:
    std::vector<fs::path> written_;
};

int run_experiment(const ExperimentFlags& flags) {
    xferfolio::ExperimentConfig cfg;
    std::string mode;
    std::string manifest_path;
    long horizon = flags.horizon;
    std::string frequency = flags.frequency;

    if (!flags.replay_path.empty()) {
        std::ifstream in(flags.replay_path);
        if (!in) throw xferfolio::ParseError("cannot open run manifest " + flags.replay_path);
        json doc;
        in >> doc;
        mode = doc.at("mode").get<std::string>();
        cfg = config_from_json(doc.at("config"));
        if (mode == "manifest") {
            manifest_path = doc.at("manifest_path").get<std::string>();
        } else {
            horizon = doc.at("synthetic").at("horizon_periods").get<long>();
            frequency = doc.at("synthetic").at("frequency").get<std::string>();
        }
    } else {
        if (flags.synthetic == !flags.manifest_path.empty()) {
            throw xferfolio::InvalidSpec(
                "exactly one of --manifest and --synthetic is required");
        }
        mode = flags.synthetic ? "synthetic" : "manifest";
        manifest_path = flags.manifest_path;
        cfg.n_repetitions = flags.reps;
        cfg.n_assets = flags.assets;
        cfg.lambda = flags.lambda;
        cfg.seed = flags.seed;
        cfg.solver = flags.solver.config();
        cfg.risk_moment_source = flags.risk_moments == "target_train"
                                     ? xferfolio::RiskMomentSource::TargetTrain
                                     : xferfolio::RiskMomentSource::TargetTest;
    }
    if (cfg.n_repetitions < 2) {
        throw xferfolio::InvalidSpec("need >= 2 repetitions");
    }
    if (flags.risk_moments != "target_test" && flags.risk_moments != "target_train") {
        throw xferfolio::InvalidSpec("--risk-moments must be target_test or target_train");
    }

    const int threads = resolve_threads(flags.threads);
    const fs::path out_dir = flags.out_dir;
    fs::create_directories(out_dir);

    const auto started = std::chrono::steady_clock::now();
    OutputSet outputs;
    try {
        std::vector<xferfolio::LabeledRecord> labeled;
        std::map<std::pair<std::string, std::string>, std::vector<xferfolio::ExperimentRecord>>
            by_pair;
        std::vector<std::string> table_targets;
        std::vector<double> table_correlations;
        std::vector<bool> table_defined;
        json synthetic_info;

        if (mode == "synthetic") {
            const xferfolio::Frequency freq = xferfolio::Frequency::parse(frequency);
            const xferfolio::SimilaritySweepResult sweep =
                xferfolio::run_similarity_sweep(cfg, horizon, freq, threads);
            for (const xferfolio::ExperimentRecord& r : sweep.records) {
                labeled.push_back({"synthetic", "similarity-sweep", r});
            }
            by_pair[{"synthetic", "similarity-sweep"}] = sweep.records;
            table_targets = {"similarity-sweep"};
            table_correlations = {sweep.correlation};
            table_defined = {sweep.correlation_defined};
            synthetic_info = json{{"horizon_periods", horizon},
                                  {"frequency", frequency},
                                  {"similarity_sweep", true}};
            std::cerr << "similarity sweep: " << cfg.n_repetitions << " repetitions, "
                      << sweep.degenerate_count << " degenerate\n";
        } else {
            const std::vector<xferfolio::ManifestEntry> entries =
                xferfolio::load_manifest(manifest_path);
            std::vector<std::pair<std::string, xferfolio::Dataset>> sources;
            std::map<std::string, xferfolio::Dataset> train_sets;
            std::map<std::string, xferfolio::Dataset> test_sets;
            for (const xferfolio::ManifestEntry& e : entries) {
                xferfolio::Dataset ds = xferfolio::load_returns_csv(e.path, e.frequency);
                ds.label = e.label;
                if (e.role == "source_train") {
                    sources.emplace_back(e.label, std::move(ds));
                } else if (e.role == "target_train") {
                    train_sets.emplace(e.label, std::move(ds));
                } else {
                    test_sets.emplace(e.label, std::move(ds));
                }
            }
            if (sources.empty()) {
                throw xferfolio::InvalidSpec("manifest has no source_train datasets");
            }
            for (const auto& [label, train] : train_sets) {
                const auto test_it = test_sets.find(label);
                if (test_it == test_sets.end()) {
                    throw xferfolio::InvalidSpec("target '" + label + "' has no target_test");
                }
                for (const auto& [source_label, source] : sources) {
                    std::vector<xferfolio::ExperimentRecord> records = xferfolio::run_repeated(
                        source, train, test_it->second, cfg, threads);
                    for (const xferfolio::ExperimentRecord& r : records) {
                        labeled.push_back({source_label, label, r});
                    }
                    by_pair[{source_label, label}] = std::move(records);
                }
            }
            if (by_pair.empty()) {
                throw xferfolio::InvalidSpec("manifest has no target train/test pairs");
            }
        }

        const xferfolio::GridSummary grid = xferfolio::summarize_grid(by_pair);
        xferfolio::write_records_csv(outputs.claim(out_dir / "records.csv"), labeled);
        xferfolio::write_records_jsonl(outputs.claim(out_dir / "records.jsonl"), labeled);
        xferfolio::write_grid_summary_json(outputs.claim(out_dir / "grid_summary.json"), grid);
        xferfolio::write_heatmap_csv(outputs.claim(out_dir / "heatmap_risk.csv"),
                                     grid.labels_source, grid.labels_target, grid.rescaled_risk);
        xferfolio::write_heatmap_csv(outputs.claim(out_dir / "heatmap_sharpe.csv"),
                                     grid.labels_source, grid.labels_target,
                                     grid.rescaled_sharpe);

        if (mode == "manifest") {
            table_targets = grid.labels_target;
            table_correlations = grid.correlations_per_target;
            table_defined = grid.correlation_defined;
        }
        print_correlation_table(table_targets, table_correlations, table_defined);

        const double duration =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        json manifest{{"tool", "xferfolio"},
                      {"tool_version", xferfolio::kVersion},
                      {"mode", mode},
                      {"config", config_to_json(cfg)},
                      {"out_dir", fs::absolute(out_dir).string()},
                      {"duration_seconds", duration}};
        if (mode == "manifest") {
            manifest["manifest_path"] = fs::absolute(manifest_path).string();
        } else {
            manifest["synthetic"] = synthetic_info;
        }
        const fs::path final_path = out_dir / "run_manifest.json";
        const fs::path tmp_path = out_dir / "run_manifest.json.tmp";
        {
            std::ofstream out(tmp_path, std::ios::binary);
            out << manifest.dump(2) << '\n';
        }
        fs::rename(tmp_path, final_path);
    } catch (...) {
        outputs.discard_all();
        throw;
    }
    return kExitOk;
}

// ------------------------------------------------------------------- clean --
int cmd_clean(const std::string& in_path, const std::string& out_path) {
    std::ifstream in(in_path, std::ios::binary);
    if (!in) throw xferfolio::ParseError("cannot open " + in_path);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw xferfolio::ParseError("cannot write " + out_path);

    std::string line;
    if (!std::getline(in, line)) {
        throw xferfolio::ParseError(in_path + ": empty file");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t columns = 1;
    for (char c : line) {
        if (c == ',') ++columns;
    }
    if (columns < 2 || line.rfind("timestamp,", 0) != 0) {
        throw xferfolio::ParseError(in_path + ": header must be 'timestamp,<asset ids...>'");
    }
    out << line << '\n';

    std::size_t kept = 0, dropped = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                cells.push_back(line.substr(start));
                break;
            }
            cells.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        bool ok = cells.size() == columns;
        if (ok) {
            try {
                xferfolio::parse_timestamp(cells[0]);
            } catch (const xferfolio::ParseError&) {
                ok = false;
            }
        }
        for (std::size_t i = 1; ok && i < cells.size(); ++i) {
            double v = 0.0;
            const char* b = cells[i].data();
            const char* e = b + cells[i].size();
            const auto [p, ec] = std::from_chars(b, e, v);
            ok = ec == std::errc() && p == e && std::isfinite(v);
        }
        if (ok) {
            out << line << '\n';
            ++kept;
        } else {
            ++dropped;
        }
    }
    std::cerr << "kept " << kept << " rows, dropped " << dropped << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transfer learning for simplex-constrained Sharpe portfolios"};
    app.set_version_flag("--version", std::string("xferfolio ") + xferfolio::kVersion);
    app.require_subcommand(1);

    // optimize
    auto* optimize = app.add_subcommand("optimize", "Maximum-Sharpe portfolio from a returns CSV");
    std::string opt_returns, opt_frequency = "1-day";
    optimize->add_option("--returns", opt_returns, "Returns CSV")->required();
    optimize->add_option("--frequency", opt_frequency, "Bar frequency, e.g. 1-day or 5-minute");
    SolverFlags opt_solver;
    opt_solver.attach(optimize);

    // transfer
    auto* transfer = app.add_subcommand("transfer", "Pretrain, fine-tune, and evaluate");
    std::string tr_source, tr_train, tr_test, tr_frequency = "1-day";
    double tr_lambda = 0.2;
    transfer->add_option("--source", tr_source, "Source training returns CSV")->required();
    transfer->add_option("--target-train", tr_train, "Target training returns CSV")->required();
    transfer->add_option("--target-test", tr_test, "Target testing returns CSV")->required();
    transfer->add_option("--lambda", tr_lambda, "Proximity penalty weight");
    transfer->add_option("--frequency", tr_frequency, "Bar frequency for all three files");
    SolverFlags tr_solver;
    tr_solver.attach(transfer);

    // risk
    auto* risk = app.add_subcommand("risk", "Transfer-risk score for a source/target pair");
    std::string rk_source, rk_target, rk_frequency = "1-day";
    risk->add_option("--source", rk_source, "Source returns CSV")->required();
    risk->add_option("--target", rk_target, "Target returns CSV")->required();
    risk->add_option("--frequency", rk_frequency, "Bar frequency for both files");
    SolverFlags rk_solver;
    rk_solver.attach(risk);

    // experiment
    auto* experiment = app.add_subcommand("experiment", "Repeated-transfer sweeps and summaries");
    ExperimentFlags ex;
    experiment->add_option("--manifest", ex.manifest_path, "Dataset manifest JSON");
    experiment->add_option("--replay", ex.replay_path, "Re-run from a run_manifest.json");
    experiment->add_flag("--synthetic", ex.synthetic, "Use the seeded synthetic generator");
    experiment->add_flag("--similarity-sweep", ex.similarity_sweep,
                         "Synthetic mode: draw a similarity per repetition (always on)");
    experiment->add_option("--reps", ex.reps, "Repetitions per source/target pair");
    experiment->add_option("--seed", ex.seed, "Experiment seed");
    experiment->add_option("--out", ex.out_dir, "Output directory")->required();
    experiment->add_option("--threads", ex.threads,
                           "Worker threads (default: XFERFOLIO_THREADS or all cores)");
    experiment->add_option("--assets", ex.assets, "Assets per repetition (d)");
    experiment->add_option("--lambda", ex.lambda, "Proximity penalty weight");
    experiment->add_option("--horizon", ex.horizon, "Synthetic horizon in periods");
    experiment->add_option("--frequency", ex.frequency, "Synthetic bar frequency");
    experiment->add_option("--risk-moments", ex.risk_moments,
                           "Target moments for the risk score: target_test or target_train");
    ex.solver.attach(experiment);

    // clean
    auto* clean = app.add_subcommand("clean", "Drop incomplete CSV rows explicitly");
    std::string cl_in, cl_out;
    clean->add_option("--in", cl_in, "Input CSV")->required();
    clean->add_option("--out", cl_out, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n';
        return kExitInput;
    }

    try {
        if (optimize->parsed()) return cmd_optimize(opt_returns, opt_frequency, opt_solver);
        if (transfer->parsed()) {
            return cmd_transfer(tr_source, tr_train, tr_test, tr_lambda, tr_frequency, tr_solver);
        }
        if (risk->parsed()) return cmd_risk(rk_source, rk_target, rk_frequency, rk_solver);
        if (experiment->parsed()) return run_experiment(ex);
        if (clean->parsed()) return cmd_clean(cl_in, cl_out);
    } catch (const xferfolio::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitOk;
}
