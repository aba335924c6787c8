#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "xferfolio/data_io.hpp"
#include "xferfolio/solver.hpp"
#include "xferfolio/transfer_risk.hpp"
#include "xferfolio/types.hpp"

namespace xferfolio {

/// Which target moments feed the transfer-risk score. The protocol computes
/// risk from source training data and target *testing* data; target training
/// data is available behind this switch for sensitivity studies.
enum class RiskMomentSource {
    TargetTest,
    TargetTrain,
};

struct ExperimentConfig {
    int n_repetitions = 200;
    int n_assets = 10;
    double lambda = 0.2;
    std::uint64_t seed = 0;
    SolverConfig solver{};
    RiskMomentSource risk_moment_source = RiskMomentSource::TargetTest;
};

/// One (transfer risk, out-of-sample Sharpe) observation.
struct ExperimentRecord {
    int repetition_index = 0;
    std::vector<std::string> source_asset_ids;
    TransferRiskReport transfer_risk;
    double sharpe_transfer = 0.0;
    double sharpe_direct = 0.0;
    bool outperformed_direct = false;
};

/// A record tagged with the (source, target) pair it belongs to; the unit of
/// the emitted CSV / JSONL files.
struct LabeledRecord {
    std::string source_label;
    std::string target_label;
    ExperimentRecord record;
};

/// Per-pair aggregation across a grid of transfers. Cells whose repetitions
/// were all degenerate hold NaN and are skipped by rescaling and correlation.
struct GridSummary {
    std::vector<std::string> labels_source;
    std::vector<std::string> labels_target;
    Eigen::MatrixXd mean_risk;
    Eigen::MatrixXd mean_sharpe;
    Eigen::MatrixXd rescaled_risk;    // per target column, min 0 / max 1; 0.5 when constant
    Eigen::MatrixXd rescaled_sharpe;
    Eigen::MatrixXi degenerate_counts;
    std::vector<double> correlations_per_target;  // NaN when undefined
    std::vector<bool> correlation_defined;
};

/// Pretrain on the source, fine-tune on target training data, evaluate both
/// the transferred and the direct portfolio on target testing data, and score
/// the transfer risk. Overnight bars are excluded from estimation whenever a
/// dataset is intraday. A degenerate source produces a flagged record, not an
/// error.
ExperimentRecord run_single_transfer(const Dataset& source, const Dataset& target_train,
                                     const Dataset& target_test, const ExperimentConfig& cfg);

/// Runs cfg.n_repetitions transfers, each drawing cfg.n_assets distinct
/// columns from the source universe through the per-repetition substream
/// (seed, repetition index). Repetitions may execute on `threads` workers;
/// results are keyed by repetition index, so the output is identical for any
/// thread count.
std::vector<ExperimentRecord> run_repeated(const Dataset& universe_source,
                                           const Dataset& target_train,
                                           const Dataset& target_test,
                                           const ExperimentConfig& cfg, int threads = 1);

/// Sample Pearson correlation, clamped to [-1, 1]. Throws ConstantInput when
/// either list has zero variance and LengthMismatch on unequal or too-short
/// lists.
double pearson_correlation(const std::vector<double>& xs, const std::vector<double>& ys);

/// Per-pair means (degenerate-source records excluded, counts reported),
/// per-target min-max rescaling, and the per-target correlation across
/// source labels between mean risk and mean Sharpe. A constant column yields
/// a flagged undefined correlation instead of aborting the grid.
GridSummary summarize_grid(
    const std::map<std::pair<std::string, std::string>, std::vector<ExperimentRecord>>&
        records_by_pair);

/// Result of the synthetic similarity sweep: per repetition, a similarity
/// drawn uniformly in [0, 1] dials how close the target regime is to the
/// source regime, and the whole pipeline runs on the generated triple.
struct SimilaritySweepResult {
    std::vector<ExperimentRecord> records;
    std::vector<double> similarities;
    double correlation = 0.0;  // risk vs out-of-sample Sharpe, non-degenerate records
    bool correlation_defined = false;
    int degenerate_count = 0;
};

SimilaritySweepResult run_similarity_sweep(const ExperimentConfig& cfg,
                                           Eigen::Index horizon_periods, Frequency frequency,
                                           int threads = 1);

// -- emission (the formats downstream plotting consumes) ---------------------
void write_records_csv(const std::string& path, const std::vector<LabeledRecord>& records);
void write_records_jsonl(const std::string& path, const std::vector<LabeledRecord>& records);
void write_grid_summary_json(const std::string& path, const GridSummary& summary);
/// Heat-map matrix with source labels as rows and target labels as columns.
void write_heatmap_csv(const std::string& path, const std::vector<std::string>& labels_source,
                       const std::vector<std::string>& labels_target,
                       const Eigen::MatrixXd& matrix);

}  // namespace xferfolio
