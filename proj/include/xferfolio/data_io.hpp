#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "xferfolio/rng.hpp"
#include "xferfolio/types.hpp"

namespace xferfolio {

struct Dataset {
    ReturnSeries series;
    std::string label;
};

/// Recipe for a seeded synthetic market: a base annualized regime, a
/// similarity dial in [0, 1] controlling how close the target regime is to
/// the source regime (1 = identical, 0 = independent redraw), and a horizon.
/// Identical specs produce bit-identical datasets.
struct SyntheticMarketSpec {
    Eigen::Index d = 10;
    Eigen::VectorXd regime_mu;     // annualized mean returns
    Eigen::MatrixXd regime_sigma;  // annualized covariance, SPD
    double similarity = 1.0;
    Eigen::Index horizon_periods = 2520;
    Frequency frequency{};
    std::uint64_t seed = 0;
};

/// Generator output: the three datasets of the experiment protocol plus the
/// true regimes they were sampled from. The true regimes are what similarity
/// interpolates, so distribution-level checks can use them directly instead
/// of re-estimating.
struct SyntheticPair {
    Dataset source;
    Dataset target_train;
    Dataset target_test;
    MomentEstimate source_regime;
    MomentEstimate target_regime;
};

/// Dataset manifest entry: {label, frequency, path, role}.
struct ManifestEntry {
    std::string label;
    Frequency frequency;
    std::string path;
    std::string role;  // source_train | target_train | target_test
};

/// Loads a returns CSV: header "timestamp,<id1>,...,<idd>", body rows of an
/// ISO-8601 instant followed by d decimal returns. Session boundaries are
/// inferred from calendar-date changes when the frequency is intraday.
Dataset load_returns_csv(const std::string& path, Frequency frequency);

/// Same shape with positive prices; converts to simple returns
/// r_t = p_t / p_{t-1} - 1, so the output has one row fewer.
Dataset load_prices_csv(const std::string& path, Frequency frequency);

/// Writes a returns CSV with 17-significant-digit values; loading the result
/// reproduces the dataset exactly.
void save_returns_csv(const std::string& path, const Dataset& dataset);

/// Partitions by half-open timestamp intervals: rows before boundaries[0],
/// then [boundaries[i], boundaries[i+1]), then rows from the last boundary
/// on. Throws EmptySplit when any interval captures zero rows.
std::vector<Dataset> split_by_dates(const Dataset& dataset,
                                    const std::vector<std::int64_t>& boundaries);

/// Column subset of a series, preserving row order and metadata.
ReturnSeries select_assets(const ReturnSeries& series, const std::vector<std::size_t>& columns);

/// Draws an annualized (mu, sigma) regime from the generator's fixed
/// hyper-distribution: means near 8% with 12% spread, lognormal vols around
/// 20%, and a random full-rank correlation structure.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> random_regime(Eigen::Index d, CounterRng& rng);

/// Samples the source / target-train / target-test triple. The target regime
/// is the convex combination (1-s) * independent redraw + s * source regime;
/// target_train and target_test split the horizon 80/20. All randomness is
/// counter-based from spec.seed.
SyntheticPair generate_synthetic_pair(const SyntheticMarketSpec& spec);

/// One dataset of i.i.d. rows from an annualized regime, on a weekday
/// calendar beginning at start_day (days since epoch). The building block
/// behind generate_synthetic_pair, exposed so harnesses can assemble other
/// source/target layouts from the same machinery.
Dataset sample_regime_dataset(const Eigen::VectorXd& mu_annual,
                              const Eigen::MatrixXd& sigma_annual, Eigen::Index rows,
                              Frequency frequency, std::int64_t start_day,
                              const std::string& label, std::uint64_t seed);

/// Parses a JSON manifest (array of {label, frequency, path, role}); relative
/// paths are resolved against the manifest's directory.
std::vector<ManifestEntry> load_manifest(const std::string& path);

/// First-bar-of-day indices for intraday data; empty for daily data.
std::vector<Eigen::Index> infer_session_boundaries(const std::vector<std::int64_t>& timestamps,
                                                   Frequency frequency);

}  // namespace xferfolio
