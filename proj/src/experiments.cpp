#include "xferfolio/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <nlohmann/json.hpp>
#include <set>
#include <thread>

#include "xferfolio/errors.hpp"
#include "xferfolio/moments.hpp"
#include "xferfolio/timestamps.hpp"
#include "xferfolio/rng.hpp"

namespace xferfolio {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kRepetitionStream = 0x5245504554ull;
constexpr std::uint64_t kSweepSimilarityStream = 0x53494D494Cull;
constexpr std::uint64_t kSweepBaseRegimeStream = 0x42415345ull;
constexpr std::uint64_t kSweepPairSeedStream = 0x5041495253ull;

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.n_assets < 2) {
        throw InvalidSpec("n_assets must be at least 2");
    }
    if (cfg.lambda < 0.0) {
        throw NegativeLambda("lambda is " + std::to_string(cfg.lambda));
    }
}

MomentEstimate moments_of(const Dataset& dataset) {
    // Overnight bars never enter intraday estimation; daily data has none.
    return estimate_moments(dataset.series, dataset.series.frequency().is_intraday());
}

/// Runs `count` index-tagged jobs on up to `threads` workers and rethrows the
/// first failure. Each job writes only its own slot, so scheduling cannot
/// change results.
template <typename Job>
void run_indexed(int count, int threads, const Job& job) {
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&]() {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                job(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min(threads, count);
    pool.reserve(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

double correlation_of_records(const std::vector<ExperimentRecord>& records, bool& defined) {
    std::vector<double> risks;
    std::vector<double> sharpes;
    for (const ExperimentRecord& r : records) {
        if (r.transfer_risk.degenerate_source) continue;
        risks.push_back(r.transfer_risk.r_trans);
        sharpes.push_back(r.sharpe_transfer);
    }
    defined = false;
    if (risks.size() < 2) return kNaN;
    try {
        const double c = pearson_correlation(risks, sharpes);
        defined = true;
        return c;
    } catch (const ConstantInput&) {
        return kNaN;
    }
}

std::string format_g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

nlohmann::json record_to_json(const LabeledRecord& lr) {
    const ExperimentRecord& r = lr.record;
    return nlohmann::json{
        {"source_label", lr.source_label},
        {"target_label", lr.target_label},
        {"repetition_index", r.repetition_index},
        {"source_asset_ids", r.source_asset_ids},
        {"transfer_risk",
         {{"r1", r.transfer_risk.r1},
          {"r2", r.transfer_risk.r2},
          {"r_trans", r.transfer_risk.r_trans},
          {"source_sharpe", r.transfer_risk.source_sharpe},
          {"degenerate_source", r.transfer_risk.degenerate_source}}},
        {"sharpe_transfer", r.sharpe_transfer},
        {"sharpe_direct", r.sharpe_direct},
        {"outperformed_direct", r.outperformed_direct}};
}

}  // namespace

ExperimentRecord run_single_transfer(const Dataset& source, const Dataset& target_train,
                                     const Dataset& target_test, const ExperimentConfig& cfg) {
    validate_config(cfg);
    if (target_train.series.asset_count() != target_test.series.asset_count()) {
        throw DimensionMismatch("target train and test disagree on asset count");
    }
    if (source.series.asset_count() != target_train.series.asset_count()) {
        throw DimensionMismatch("source and target disagree on asset count");
    }

    const MomentEstimate source_m = moments_of(source);
    const SolveResult pretrain = optimize_source(source_m, cfg.solver);

    const MomentEstimate train_m = moments_of(target_train);
    const SolveResult direct = optimize_direct(train_m, cfg.solver);
    const SolveResult transferred =
        optimize_transfer(train_m, pretrain.portfolio, cfg.lambda, cfg.solver);

    const MomentEstimate test_m = moments_of(target_test);

    ExperimentRecord record;
    record.source_asset_ids = source.series.asset_ids();
    record.sharpe_transfer = portfolio_sharpe(transferred.portfolio, test_m);
    record.sharpe_direct = portfolio_sharpe(direct.portfolio, test_m);
    record.outperformed_direct = record.sharpe_transfer > record.sharpe_direct;
    const MomentEstimate& risk_m =
        cfg.risk_moment_source == RiskMomentSource::TargetTest ? test_m : train_m;
    record.transfer_risk = transfer_risk(pretrain.portfolio, source_m, risk_m);
    return record;
}

std::vector<ExperimentRecord> run_repeated(const Dataset& universe_source,
                                           const Dataset& target_train,
                                           const Dataset& target_test,
                                           const ExperimentConfig& cfg, int threads) {
    validate_config(cfg);
    if (cfg.n_repetitions < 2) {
        throw InvalidSpec("need at least 2 repetitions");
    }
    const std::size_t universe = static_cast<std::size_t>(universe_source.series.asset_count());
    const std::size_t want = static_cast<std::size_t>(cfg.n_assets);
    if (universe < want) {
        throw UniverseTooSmall("universe has " + std::to_string(universe) + " assets, need " +
                               std::to_string(want));
    }
    if (target_train.series.asset_count() != cfg.n_assets ||
        target_test.series.asset_count() != cfg.n_assets) {
        throw DimensionMismatch("target datasets must have exactly n_assets columns");
    }

    std::vector<ExperimentRecord> records(static_cast<std::size_t>(cfg.n_repetitions));
    run_indexed(cfg.n_repetitions, threads, [&](int rep) {
        CounterRng rng(cfg.seed, {kRepetitionStream, static_cast<std::uint64_t>(rep)});
        const std::vector<std::size_t> columns = rng.sample_without_replacement(universe, want);
        Dataset source{select_assets(universe_source.series, columns), universe_source.label};
        ExperimentRecord record = run_single_transfer(source, target_train, target_test, cfg);
        record.repetition_index = rep;
        records[static_cast<std::size_t>(rep)] = std::move(record);
    });
    return records;
}

double pearson_correlation(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) {
        throw LengthMismatch("lists have sizes " + std::to_string(xs.size()) + " and " +
                             std::to_string(ys.size()));
    }
    const std::size_t n = xs.size();
    if (n < 2) {
        throw LengthMismatch("correlation needs at least 2 points");
    }
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mean_x;
        const double dy = ys[i] - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw ConstantInput("correlation input is constant");
    }
    const double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

GridSummary summarize_grid(
    const std::map<std::pair<std::string, std::string>, std::vector<ExperimentRecord>>&
        records_by_pair) {
    std::set<std::string> sources, targets;
    for (const auto& [key, _] : records_by_pair) {
        sources.insert(key.first);
        targets.insert(key.second);
    }
    GridSummary g;
    g.labels_source.assign(sources.begin(), sources.end());
    g.labels_target.assign(targets.begin(), targets.end());
    const Eigen::Index rows = static_cast<Eigen::Index>(g.labels_source.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(g.labels_target.size());
    if (rows == 0 || cols == 0) {
        throw EmptyCell("grid has no records");
    }
    g.mean_risk.setConstant(rows, cols, kNaN);
    g.mean_sharpe.setConstant(rows, cols, kNaN);
    g.degenerate_counts.setZero(rows, cols);

    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            const auto it = records_by_pair.find(
                {g.labels_source[static_cast<std::size_t>(i)],
                 g.labels_target[static_cast<std::size_t>(j)]});
            if (it == records_by_pair.end() || it->second.empty()) {
                throw EmptyCell("no records for (" +
                                g.labels_source[static_cast<std::size_t>(i)] + ", " +
                                g.labels_target[static_cast<std::size_t>(j)] + ")");
            }
            double risk_sum = 0.0, sharpe_sum = 0.0;
            int used = 0, degenerate = 0;
            for (const ExperimentRecord& r : it->second) {
                if (r.transfer_risk.degenerate_source) {
                    ++degenerate;
                    continue;
                }
                risk_sum += r.transfer_risk.r_trans;
                sharpe_sum += r.sharpe_transfer;
                ++used;
            }
            g.degenerate_counts(i, j) = degenerate;
            if (used > 0) {
                g.mean_risk(i, j) = risk_sum / used;
                g.mean_sharpe(i, j) = sharpe_sum / used;
            }
        }
    }

    const auto rescale = [&](const Eigen::MatrixXd& m) {
        Eigen::MatrixXd out = m;
        for (Eigen::Index j = 0; j < cols; ++j) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < rows; ++i) {
                if (std::isfinite(m(i, j))) {
                    lo = std::min(lo, m(i, j));
                    hi = std::max(hi, m(i, j));
                }
            }
            for (Eigen::Index i = 0; i < rows; ++i) {
                if (!std::isfinite(m(i, j))) continue;
                out(i, j) = hi > lo ? (m(i, j) - lo) / (hi - lo) : 0.5;
            }
        }
        return out;
    };
    g.rescaled_risk = rescale(g.mean_risk);
    g.rescaled_sharpe = rescale(g.mean_sharpe);

    g.correlations_per_target.assign(static_cast<std::size_t>(cols), kNaN);
    g.correlation_defined.assign(static_cast<std::size_t>(cols), false);
    for (Eigen::Index j = 0; j < cols; ++j) {
        std::vector<double> risks, sharpes;
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (std::isfinite(g.mean_risk(i, j)) && std::isfinite(g.mean_sharpe(i, j))) {
                risks.push_back(g.mean_risk(i, j));
                sharpes.push_back(g.mean_sharpe(i, j));
            }
        }
        if (risks.size() < 2) continue;
        try {
            g.correlations_per_target[static_cast<std::size_t>(j)] =
                pearson_correlation(risks, sharpes);
            g.correlation_defined[static_cast<std::size_t>(j)] = true;
        } catch (const ConstantInput&) {
            // leave the flagged null in place
        }
    }
    return g;
}

SimilaritySweepResult run_similarity_sweep(const ExperimentConfig& cfg,
                                           Eigen::Index horizon_periods, Frequency frequency,
                                           int threads) {
    validate_config(cfg);
    if (cfg.n_repetitions < 2) {
        throw InvalidSpec("need at least 2 repetitions");
    }
    if (horizon_periods < 5) {
        throw InvalidSpec("horizon_periods must be at least 5");
    }
    // The protocol's layout: the target market is fixed for the whole sweep
    // and the repetitions vary the source. Each repetition interpolates the
    // source regime between an independent redraw and the target regime by
    // that repetition's similarity draw. The target training window is
    // deliberately data-poor (a tenth of the horizon), the setting where the
    // pretrained anchor has something to add; the test window is half the
    // horizon so the out-of-sample score is stable.
    CounterRng base_rng(cfg.seed, {kSweepBaseRegimeStream});
    auto [target_mu, target_sigma] = random_regime(cfg.n_assets, base_rng);
    const Eigen::Index train_rows =
        std::max<Eigen::Index>(cfg.n_assets + 2, horizon_periods / 10);
    const Eigen::Index test_rows = std::max<Eigen::Index>(cfg.n_assets + 2, horizon_periods / 2);
    const Dataset target_train =
        sample_regime_dataset(target_mu, target_sigma, train_rows, frequency,
                              days_from_civil(2015, 2, 2), "sweep-target-train",
                              base_rng.next_u64());
    const Dataset target_test =
        sample_regime_dataset(target_mu, target_sigma, test_rows, frequency,
                              days_from_civil(2020, 2, 3), "sweep-target-test",
                              base_rng.next_u64());

    SimilaritySweepResult result;
    result.records.resize(static_cast<std::size_t>(cfg.n_repetitions));
    result.similarities.resize(static_cast<std::size_t>(cfg.n_repetitions));

    run_indexed(cfg.n_repetitions, threads, [&](int rep) {
        CounterRng sim_rng(cfg.seed, {kSweepSimilarityStream, static_cast<std::uint64_t>(rep)});
        const double similarity = sim_rng.uniform();
        CounterRng source_rng(cfg.seed, {kSweepPairSeedStream, static_cast<std::uint64_t>(rep)});
        auto [redraw_mu, redraw_sigma] = random_regime(cfg.n_assets, source_rng);
        const Eigen::VectorXd source_mu =
            (1.0 - similarity) * redraw_mu + similarity * target_mu;
        const Eigen::MatrixXd source_sigma =
            (1.0 - similarity) * redraw_sigma + similarity * target_sigma;
        const Dataset source =
            sample_regime_dataset(source_mu, source_sigma, horizon_periods, frequency,
                                  days_from_civil(2000, 1, 3), "sweep-source",
                                  source_rng.next_u64());

        ExperimentRecord record = run_single_transfer(source, target_train, target_test, cfg);
        record.repetition_index = rep;
        result.records[static_cast<std::size_t>(rep)] = std::move(record);
        result.similarities[static_cast<std::size_t>(rep)] = similarity;
    });

    for (const ExperimentRecord& r : result.records) {
        if (r.transfer_risk.degenerate_source) ++result.degenerate_count;
    }
    result.correlation = correlation_of_records(result.records, result.correlation_defined);
    return result;
}

void write_records_csv(const std::string& path, const std::vector<LabeledRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot write " + path);
    }
    out << "source_label,target_label,repetition_index,source_asset_ids,r1,r2,r_trans,"
           "source_sharpe,degenerate_source,sharpe_transfer,sharpe_direct,outperformed_direct\n";
    for (const LabeledRecord& lr : records) {
        const ExperimentRecord& r = lr.record;
        out << lr.source_label << ',' << lr.target_label << ',' << r.repetition_index << ',';
        for (std::size_t i = 0; i < r.source_asset_ids.size(); ++i) {
            if (i) out << ';';
            out << r.source_asset_ids[i];
        }
        out << ',' << format_g17(r.transfer_risk.r1) << ',' << format_g17(r.transfer_risk.r2)
            << ',' << format_g17(r.transfer_risk.r_trans) << ','
            << format_g17(r.transfer_risk.source_sharpe) << ','
            << (r.transfer_risk.degenerate_source ? "true" : "false") << ','
            << format_g17(r.sharpe_transfer) << ',' << format_g17(r.sharpe_direct) << ','
            << (r.outperformed_direct ? "true" : "false") << '\n';
    }
}

void write_records_jsonl(const std::string& path, const std::vector<LabeledRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot write " + path);
    }
    for (const LabeledRecord& lr : records) {
        out << record_to_json(lr).dump() << '\n';
    }
}

void write_grid_summary_json(const std::string& path, const GridSummary& summary) {
    const auto matrix_to_json = [](const Eigen::MatrixXd& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
            rows.push_back(std::move(row));
        }
        return rows;
    };
    nlohmann::json counts = nlohmann::json::array();
    for (Eigen::Index i = 0; i < summary.degenerate_counts.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < summary.degenerate_counts.cols(); ++j) {
            row.push_back(summary.degenerate_counts(i, j));
        }
        counts.push_back(std::move(row));
    }
    nlohmann::json doc{{"labels_source", summary.labels_source},
                       {"labels_target", summary.labels_target},
                       {"mean_risk", matrix_to_json(summary.mean_risk)},
                       {"mean_sharpe", matrix_to_json(summary.mean_sharpe)},
                       {"rescaled_risk", matrix_to_json(summary.rescaled_risk)},
                       {"rescaled_sharpe", matrix_to_json(summary.rescaled_sharpe)},
                       {"degenerate_counts", counts},
                       {"correlations_per_target", summary.correlations_per_target},
                       {"correlation_defined", summary.correlation_defined}};
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot write " + path);
    }
    out << doc.dump(2) << '\n';
}

void write_heatmap_csv(const std::string& path, const std::vector<std::string>& labels_source,
                       const std::vector<std::string>& labels_target,
                       const Eigen::MatrixXd& matrix) {
    if (matrix.rows() != static_cast<Eigen::Index>(labels_source.size()) ||
        matrix.cols() != static_cast<Eigen::Index>(labels_target.size())) {
        throw DimensionMismatch("heat-map labels do not match matrix shape");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot write " + path);
    }
    out << "source";
    for (const std::string& t : labels_target) out << ',' << t;
    out << '\n';
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
        out << labels_source[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
            out << ',' << format_g17(matrix(i, j));
        }
        out << '\n';
    }
}

}  // namespace xferfolio
