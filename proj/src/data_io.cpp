#include "xferfolio/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "xferfolio/errors.hpp"
#include "xferfolio/timestamps.hpp"

namespace xferfolio {

namespace {

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open " + path);
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::vector<std::string> split_csv_row(const std::string& line) {
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
    return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col,
                  const std::string& asset_id) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw ParseError("bad numeric cell at row " + std::to_string(row) + ", column " +
                         std::to_string(col) + " (" + asset_id + "): '" + cell + "'");
    }
    return value;
}

struct RawTable {
    std::vector<std::string> asset_ids;
    std::vector<std::int64_t> timestamps;
    Eigen::MatrixXd values;
};

// Shared CSV body for both returns and prices files. Row numbers in
// diagnostics are 1-based and count the header.
RawTable parse_table(const std::string& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) {
        throw ParseError(path + ": empty file");
    }
    std::vector<std::string> header = split_csv_row(lines[0]);
    if (header.size() < 2 || header[0] != "timestamp") {
        throw ParseError(path + ": header must be 'timestamp,<asset ids...>'");
    }
    RawTable table;
    table.asset_ids.assign(header.begin() + 1, header.end());
    const std::size_t d = table.asset_ids.size();

    std::vector<std::string> body;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (!lines[i].empty()) body.push_back(lines[i]);
    }
    table.values.resize(static_cast<Eigen::Index>(body.size()), static_cast<Eigen::Index>(d));
    table.timestamps.reserve(body.size());

    for (std::size_t r = 0; r < body.size(); ++r) {
        const std::size_t row_number = r + 2;
        const std::vector<std::string> cells = split_csv_row(body[r]);
        if (cells.size() != d + 1) {
            throw RaggedRow(path + ": row " + std::to_string(row_number) + " has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(d + 1));
        }
        std::int64_t ts = 0;
        try {
            ts = parse_timestamp(cells[0]);
        } catch (const ParseError&) {
            throw ParseError(path + ": bad timestamp at row " + std::to_string(row_number) +
                             ": '" + cells[0] + "'");
        }
        table.timestamps.push_back(ts);
        for (std::size_t c = 0; c < d; ++c) {
            table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                parse_cell(cells[c + 1], row_number, c + 2, table.asset_ids[c]);
        }
    }
    return table;
}

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

constexpr std::int64_t kSecondsPerMinute = 60;
constexpr int kSessionOpenMinutes = 9 * 60 + 30;  // bars stamped from 09:30 UTC

bool is_weekend(std::int64_t day) {
    const std::int64_t dow = ((day % 7) + 7) % 7;  // 1970-01-01 is a Thursday: 2=Sat, 3=Sun
    return dow == 2 || dow == 3;
}

std::int64_t next_trading_day(std::int64_t day) {
    ++day;
    while (is_weekend(day)) ++day;
    return day;
}

// Bar-close timestamps: `count` bars starting on start_day, bars_per_day per
// session, advancing over weekdays.
std::vector<std::int64_t> synthetic_timestamps(Frequency frequency, std::int64_t start_day,
                                               Eigen::Index count) {
    std::vector<std::int64_t> out;
    out.reserve(static_cast<std::size_t>(count));
    std::int64_t day = start_day;
    while (is_weekend(day)) day = next_trading_day(day);
    int bar = 0;
    const int bars = frequency.bars_per_day();
    const std::int64_t bar_seconds = frequency.minutes_per_bar() * kSecondsPerMinute;
    for (Eigen::Index i = 0; i < count; ++i) {
        out.push_back(day * 86400 + kSessionOpenMinutes * kSecondsPerMinute +
                      static_cast<std::int64_t>(bar + 1) * bar_seconds);
        if (++bar == bars) {
            bar = 0;
            day = next_trading_day(day);
        }
    }
    return out;
}

Eigen::MatrixXd psd_sqrt_factor(const Eigen::MatrixXd& sigma) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
    Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

Dataset sample_dataset(const Eigen::VectorXd& mu_period, const Eigen::MatrixXd& sqrt_period,
                       Eigen::Index rows, Frequency frequency, std::int64_t start_day,
                       const std::vector<std::string>& ids, const std::string& label,
                       CounterRng rng) {
    const Eigen::Index d = mu_period.size();
    Eigen::MatrixXd values(rows, d);
    for (Eigen::Index r = 0; r < rows; ++r) {
        Eigen::VectorXd z(d);
        for (Eigen::Index c = 0; c < d; ++c) z[c] = rng.gaussian();
        values.row(r) = (mu_period + sqrt_period * z).transpose();
    }
    std::vector<std::int64_t> ts = synthetic_timestamps(frequency, start_day, rows);
    std::vector<Eigen::Index> boundaries = infer_session_boundaries(ts, frequency);
    return Dataset{ReturnSeries(ids, std::move(ts), std::move(values), frequency,
                                std::move(boundaries)),
                   label};
}

}  // namespace

std::vector<Eigen::Index> infer_session_boundaries(const std::vector<std::int64_t>& timestamps,
                                                   Frequency frequency) {
    std::vector<Eigen::Index> boundaries;
    if (!frequency.is_intraday() || timestamps.empty()) {
        return boundaries;
    }
    boundaries.push_back(0);
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
        if (day_number(timestamps[i]) != day_number(timestamps[i - 1])) {
            boundaries.push_back(static_cast<Eigen::Index>(i));
        }
    }
    return boundaries;
}

Dataset load_returns_csv(const std::string& path, Frequency frequency) {
    RawTable table = parse_table(path);
    std::vector<Eigen::Index> boundaries = infer_session_boundaries(table.timestamps, frequency);
    return Dataset{ReturnSeries(std::move(table.asset_ids), std::move(table.timestamps),
                                std::move(table.values), frequency, std::move(boundaries)),
                   std::filesystem::path(path).stem().string()};
}

Dataset load_prices_csv(const std::string& path, Frequency frequency) {
    RawTable table = parse_table(path);
    const Eigen::Index t = table.values.rows();
    if (t < 2) {
        throw InsufficientData(path + ": need at least two price rows");
    }
    for (Eigen::Index r = 0; r < t; ++r) {
        for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
            if (table.values(r, c) <= 0.0) {
                throw NonPositivePrice(path + ": price at row " + std::to_string(r + 2) +
                                       ", column " + std::to_string(c + 2) + " is " +
                                       format_value(table.values(r, c)));
            }
        }
    }
    Eigen::MatrixXd returns =
        (table.values.bottomRows(t - 1).array() / table.values.topRows(t - 1).array() - 1.0)
            .matrix();
    std::vector<std::int64_t> ts(table.timestamps.begin() + 1, table.timestamps.end());
    std::vector<Eigen::Index> boundaries = infer_session_boundaries(ts, frequency);
    return Dataset{ReturnSeries(std::move(table.asset_ids), std::move(ts), std::move(returns),
                                frequency, std::move(boundaries)),
                   std::filesystem::path(path).stem().string()};
}

void save_returns_csv(const std::string& path, const Dataset& dataset) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot write " + path);
    }
    const ReturnSeries& s = dataset.series;
    out << "timestamp";
    for (const std::string& id : s.asset_ids()) out << ',' << id;
    out << '\n';
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
        out << format_timestamp(s.timestamps()[static_cast<std::size_t>(r)]);
        for (Eigen::Index c = 0; c < s.asset_count(); ++c) {
            out << ',' << format_value(s.values()(r, c));
        }
        out << '\n';
    }
    if (!out) {
        throw ParseError("write failed: " + path);
    }
}

std::vector<Dataset> split_by_dates(const Dataset& dataset,
                                    const std::vector<std::int64_t>& boundaries) {
    for (std::size_t i = 1; i < boundaries.size(); ++i) {
        if (boundaries[i] <= boundaries[i - 1]) {
            throw InvalidSpec("split boundaries must be strictly increasing");
        }
    }
    const ReturnSeries& s = dataset.series;
    const std::vector<std::int64_t>& ts = s.timestamps();

    std::vector<std::pair<Eigen::Index, Eigen::Index>> ranges;  // [first, last)
    Eigen::Index cursor = 0;
    for (std::int64_t boundary : boundaries) {
        Eigen::Index end = cursor;
        while (end < s.rows() && ts[static_cast<std::size_t>(end)] < boundary) ++end;
        ranges.emplace_back(cursor, end);
        cursor = end;
    }
    ranges.emplace_back(cursor, s.rows());

    std::vector<Dataset> out;
    out.reserve(ranges.size());
    for (std::size_t k = 0; k < ranges.size(); ++k) {
        const auto [first, last] = ranges[k];
        if (last <= first) {
            throw EmptySplit("split interval " + std::to_string(k) + " captures zero rows");
        }
        std::vector<std::int64_t> sub_ts(ts.begin() + first, ts.begin() + last);
        std::vector<Eigen::Index> sub_bounds = infer_session_boundaries(sub_ts, s.frequency());
        out.push_back(Dataset{ReturnSeries(s.asset_ids(), std::move(sub_ts),
                                           s.values().middleRows(first, last - first),
                                           s.frequency(), std::move(sub_bounds)),
                              dataset.label});
    }
    return out;
}

ReturnSeries select_assets(const ReturnSeries& series, const std::vector<std::size_t>& columns) {
    if (columns.empty()) {
        throw DimensionMismatch("asset selection is empty");
    }
    std::vector<std::string> ids;
    ids.reserve(columns.size());
    Eigen::MatrixXd values(series.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t k = 0; k < columns.size(); ++k) {
        if (columns[k] >= static_cast<std::size_t>(series.asset_count())) {
            throw DimensionMismatch("asset column index out of range");
        }
        ids.push_back(series.asset_ids()[columns[k]]);
        values.col(static_cast<Eigen::Index>(k)) =
            series.values().col(static_cast<Eigen::Index>(columns[k]));
    }
    return ReturnSeries(std::move(ids), series.timestamps(), std::move(values),
                        series.frequency(), series.session_boundaries());
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> random_regime(Eigen::Index d, CounterRng& rng) {
    // Annualized means near 8% with a 12% spread, lognormal vols around 20%,
    // and a random dense correlation structure: each regime draw has clear
    // winners, so its optimal portfolio is distinctive.
    Eigen::VectorXd mu(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        mu[i] = 0.08 + 0.16 * rng.gaussian();
    }
    Eigen::VectorXd vol(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        vol[i] = std::exp(std::log(0.20) + 0.30 * rng.gaussian());
    }
    Eigen::MatrixXd g(d, d);
    for (Eigen::Index r = 0; r < d; ++r) {
        for (Eigen::Index c = 0; c < d; ++c) g(r, c) = rng.gaussian();
    }
    Eigen::MatrixXd gram = g * g.transpose();
    gram += 0.5 * static_cast<double>(d) * Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd scale = gram.diagonal().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd corr = scale.asDiagonal() * gram * scale.asDiagonal();
    Eigen::MatrixXd sigma = vol.asDiagonal() * corr * vol.asDiagonal();
    return {std::move(mu), ((sigma + sigma.transpose()) * 0.5).eval()};
}

SyntheticPair generate_synthetic_pair(const SyntheticMarketSpec& spec) {
    const Eigen::Index d = spec.d;
    if (d < 1 || spec.regime_mu.size() != d || spec.regime_sigma.rows() != d ||
        spec.regime_sigma.cols() != d) {
        throw InvalidSpec("regime dimensions do not match d");
    }
    if (!(spec.similarity >= 0.0 && spec.similarity <= 1.0)) {
        throw InvalidSpec("similarity must lie in [0, 1]");
    }
    if (spec.horizon_periods < 5) {
        throw InvalidSpec("horizon_periods must be at least 5");
    }
    if (!spec.regime_mu.allFinite() || !spec.regime_sigma.allFinite()) {
        throw NonFinite("regime contains non-finite values");
    }
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
            (spec.regime_sigma + spec.regime_sigma.transpose()) * 0.5);
        if (eig.eigenvalues().minCoeff() <= 0.0) {
            throw InvalidSpec("regime_sigma must be strictly positive definite");
        }
    }

    CounterRng root(spec.seed, {0x53594E5448ull});
    CounterRng redraw_rng = root.substream(1);
    auto [mu_new, sigma_new] = random_regime(d, redraw_rng);

    const double s = spec.similarity;
    const Eigen::VectorXd mu_target = (1.0 - s) * mu_new + s * spec.regime_mu;
    const Eigen::MatrixXd sigma_target = (1.0 - s) * sigma_new + s * spec.regime_sigma;

    const double annualization = spec.frequency.periods_per_year();
    const Eigen::VectorXd mu_src_p = spec.regime_mu / annualization;
    const Eigen::MatrixXd sqrt_src_p = psd_sqrt_factor(spec.regime_sigma / annualization);
    const Eigen::VectorXd mu_tgt_p = mu_target / annualization;
    const Eigen::MatrixXd sqrt_tgt_p = psd_sqrt_factor(sigma_target / annualization);

    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < d; ++i) {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "A%02lld", static_cast<long long>(i));
        ids.emplace_back(buf);
    }

    const Eigen::Index train_rows = (spec.horizon_periods * 8) / 10;
    const Eigen::Index test_rows = spec.horizon_periods - train_rows;

    // Calendars echo the protocol's layout: a long source history, then a
    // target train window with the test window following it.
    const std::int64_t source_start = days_from_civil(2000, 1, 3);
    const std::int64_t train_start = days_from_civil(2015, 2, 2);

    Dataset source = sample_dataset(mu_src_p, sqrt_src_p, spec.horizon_periods, spec.frequency,
                                    source_start, ids, "synthetic-source", root.substream(2));
    Dataset train = sample_dataset(mu_tgt_p, sqrt_tgt_p, train_rows, spec.frequency, train_start,
                                   ids, "synthetic-target-train", root.substream(3));
    const std::int64_t test_start =
        next_trading_day(day_number(train.series.timestamps().back()));
    Dataset test = sample_dataset(mu_tgt_p, sqrt_tgt_p, test_rows, spec.frequency, test_start,
                                  ids, "synthetic-target-test", root.substream(4));

    return SyntheticPair{std::move(source), std::move(train), std::move(test),
                         MomentEstimate(spec.regime_mu, spec.regime_sigma),
                         MomentEstimate(mu_target, sigma_target)};
}

Dataset sample_regime_dataset(const Eigen::VectorXd& mu_annual,
                              const Eigen::MatrixXd& sigma_annual, Eigen::Index rows,
                              Frequency frequency, std::int64_t start_day,
                              const std::string& label, std::uint64_t seed) {
    const Eigen::Index d = mu_annual.size();
    if (d < 1 || sigma_annual.rows() != d || sigma_annual.cols() != d || rows < 1) {
        throw InvalidSpec("regime dimensions do not match, or rows < 1");
    }
    if (!mu_annual.allFinite() || !sigma_annual.allFinite()) {
        throw NonFinite("regime contains non-finite values");
    }
    const double annualization = frequency.periods_per_year();
    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < d; ++i) {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "A%02lld", static_cast<long long>(i));
        ids.emplace_back(buf);
    }
    return sample_dataset(mu_annual / annualization,
                          psd_sqrt_factor(sigma_annual / annualization), rows, frequency,
                          start_day, ids, label, CounterRng(seed, {0x53414D504Cull}));
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open manifest " + path);
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("manifest " + path + ": " + e.what());
    }
    if (!doc.is_array()) {
        throw InvalidSpec("manifest " + path + " must be a JSON array of dataset entries");
    }
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    std::vector<ManifestEntry> entries;
    for (const auto& item : doc) {
        if (!item.is_object() || !item.contains("label") || !item.contains("frequency") ||
            !item.contains("path") || !item.contains("role")) {
            throw InvalidSpec("manifest entries need label, frequency, path, role");
        }
        ManifestEntry entry;
        entry.label = item.at("label").get<std::string>();
        entry.frequency = Frequency::parse(item.at("frequency").get<std::string>());
        entry.role = item.at("role").get<std::string>();
        if (entry.role != "source_train" && entry.role != "target_train" &&
            entry.role != "target_test") {
            throw InvalidSpec("unknown role '" + entry.role + "' in manifest");
        }
        std::filesystem::path p = item.at("path").get<std::string>();
        entry.path = p.is_absolute() ? p.string() : (base / p).string();
        entries.push_back(std::move(entry));
    }
    return entries;
}

}  // namespace xferfolio
