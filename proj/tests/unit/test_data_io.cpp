#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "builders.hpp"
#include "xferfolio/data_io.hpp"
#include "xferfolio/errors.hpp"
#include "xferfolio/moments.hpp"
#include "xferfolio/rng.hpp"
#include "xferfolio/timestamps.hpp"
#include "xferfolio/transfer_risk.hpp"

using namespace xferfolio;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        root_ = fs::temp_directory_path() /
                ("xferfolio_test_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter_++));
        fs::create_directories(root_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(root_, ec);
    }
    std::string file(const std::string& name) const { return (root_ / name).string(); }

private:
    static inline int counter_ = 0;
    fs::path root_;
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

}  // namespace

TEST_CASE("timestamp parsing and formatting round trip") {
    CHECK(parse_timestamp("1970-01-01T00:00:00Z") == 0);
    CHECK(parse_timestamp("2020-02-03T00:00:00Z") == parse_timestamp("2020-02-03"));
    const std::int64_t t = parse_timestamp("2021-09-30T15:55:00Z");
    CHECK(format_timestamp(t) == "2021-09-30T15:55:00Z");
    CHECK_THROWS_AS(parse_timestamp("02/03/2020"), ParseError);
    CHECK_THROWS_AS(parse_timestamp("2020-13-01"), ParseError);
    CHECK_THROWS_AS(parse_timestamp("2020-02-03T25:00:00"), ParseError);
}

TEST_CASE("returns csv smoke parse") {
    TempDir dir;
    const std::string path = dir.file("returns.csv");
    write_file(path,
               "timestamp,AAA,BBB\n"
               "2020-02-03T00:00:00Z,0.0012,-0.0034\n"
               "2020-02-04T00:00:00Z,0.001,0.002\n"
               "2020-02-05T00:00:00Z,-0.002,0.0\n");
    const Dataset ds = load_returns_csv(path, Frequency{});
    CHECK(ds.series.rows() == 3);
    CHECK(ds.series.asset_count() == 2);
    CHECK(ds.series.asset_ids()[1] == "BBB");
    CHECK(ds.series.values()(0, 1) == -0.0034);
    CHECK(ds.label == "returns");
    CHECK(ds.series.session_boundaries().empty());
}

TEST_CASE("returns csv rejections name the offending cell") {
    TempDir dir;
    const std::string nan_path = dir.file("nan.csv");
    write_file(nan_path,
               "timestamp,AAA,BBB\n"
               "2020-02-03T00:00:00Z,0.001,0.002\n"
               "2020-02-04T00:00:00Z,NaN,0.002\n");
    CHECK_THROWS_WITH_AS(load_returns_csv(nan_path, Frequency{}),
                         doctest::Contains("row 3, column 2 (AAA)"), ParseError);

    const std::string ragged = dir.file("ragged.csv");
    write_file(ragged,
               "timestamp,AAA,BBB\n"
               "2020-02-03T00:00:00Z,0.001\n");
    CHECK_THROWS_AS(load_returns_csv(ragged, Frequency{}), RaggedRow);

    const std::string backwards = dir.file("backwards.csv");
    write_file(backwards,
               "timestamp,AAA\n"
               "2020-02-04T00:00:00Z,0.001\n"
               "2020-02-03T00:00:00Z,0.001\n");
    CHECK_THROWS_AS(load_returns_csv(backwards, Frequency{}), NonMonotoneTimestamps);

    CHECK_THROWS_AS(load_returns_csv(dir.file("absent.csv"), Frequency{}), ParseError);

    const std::string bad_header = dir.file("header.csv");
    write_file(bad_header, "time,AAA\n2020-02-03,0.001\n");
    CHECK_THROWS_AS(load_returns_csv(bad_header, Frequency{}), ParseError);
}

TEST_CASE("intraday session boundaries come from calendar date changes") {
    TempDir dir;
    const std::string path = dir.file("intraday.csv");
    write_file(path,
               "timestamp,AAA\n"
               "2020-02-03T14:35:00Z,0.001\n"
               "2020-02-03T14:40:00Z,0.002\n"
               "2020-02-04T14:35:00Z,-0.001\n"
               "2020-02-04T14:40:00Z,0.001\n"
               "2020-02-04T14:45:00Z,0.0\n");
    const Dataset ds = load_returns_csv(path, Frequency(FrequencyKind::Min5));
    REQUIRE(ds.series.session_boundaries().size() == 2);
    CHECK(ds.series.session_boundaries()[0] == 0);
    CHECK(ds.series.session_boundaries()[1] == 2);
}

TEST_CASE("prices csv converts to simple returns") {
    TempDir dir;
    const std::string two = dir.file("p2.csv");
    write_file(two,
               "timestamp,AAA\n"
               "2020-02-03T00:00:00Z,100\n"
               "2020-02-04T00:00:00Z,101\n");
    const Dataset ds2 = load_prices_csv(two, Frequency{});
    CHECK(ds2.series.rows() == 1);
    CHECK(ds2.series.values()(0, 0) == doctest::Approx(0.01).epsilon(1e-14));

    const std::string zero = dir.file("p0.csv");
    write_file(zero,
               "timestamp,AAA\n"
               "2020-02-03T00:00:00Z,100\n"
               "2020-02-04T00:00:00Z,0\n");
    CHECK_THROWS_AS(load_prices_csv(zero, Frequency{}), NonPositivePrice);

    const std::string three = dir.file("p3.csv");
    write_file(three,
               "timestamp,AAA\n"
               "2020-02-03T00:00:00Z,100\n"
               "2020-02-04T00:00:00Z,110\n"
               "2020-02-05T00:00:00Z,99\n");
    const Dataset ds3 = load_prices_csv(three, Frequency{});
    CHECK(ds3.series.rows() == 2);
    CHECK(ds3.series.values()(0, 0) == doctest::Approx(0.10).epsilon(1e-14));
    CHECK(ds3.series.values()(1, 0) == doctest::Approx(-0.10).epsilon(1e-14));
}

TEST_CASE("split_by_dates partitions on half-open intervals") {
    Eigen::MatrixXd values(100, 2);
    CounterRng rng(51);
    for (Eigen::Index r = 0; r < 100; ++r) {
        values(r, 0) = 0.01 * rng.gaussian();
        values(r, 1) = 0.01 * rng.gaussian();
    }
    const Dataset ds{testsupport::daily_series(values), "demo"};
    const std::vector<std::int64_t>& ts = ds.series.timestamps();

    const auto halves = split_by_dates(ds, {ts[50]});
    REQUIRE(halves.size() == 2);
    CHECK(halves[0].series.rows() == 50);
    CHECK(halves[1].series.rows() == 50);
    CHECK(halves[1].series.values()(0, 0) == values(50, 0));
    CHECK(halves[0].label == "demo");

    const auto quarters = split_by_dates(ds, {ts[10], ts[40], ts[75]});
    REQUIRE(quarters.size() == 4);
    Eigen::Index total = 0;
    for (const Dataset& part : quarters) total += part.series.rows();
    CHECK(total == 100);

    CHECK_THROWS_AS(split_by_dates(ds, {ts[0] - 86400}), EmptySplit);
    CHECK_THROWS_AS(split_by_dates(ds, {ts[40], ts[10]}), InvalidSpec);
}

TEST_CASE("split recomputes intraday session boundaries per part") {
    const Frequency freq(FrequencyKind::Min130);
    Eigen::MatrixXd values = Eigen::MatrixXd::Constant(12, 1, 0.001);  // 4 sessions of 3 bars
    const Dataset ds{testsupport::intraday_series(values, freq), "intra"};
    const auto parts = split_by_dates(ds, {ds.series.timestamps()[6]});
    REQUIRE(parts.size() == 2);
    CHECK(parts[0].series.session_boundaries() == std::vector<Eigen::Index>{0, 3});
    CHECK(parts[1].series.session_boundaries() == std::vector<Eigen::Index>{0, 3});
}

TEST_CASE("asset column selection") {
    Eigen::MatrixXd values(5, 3);
    values << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15;
    values *= 1e-3;
    const ReturnSeries series = testsupport::daily_series(values);
    const ReturnSeries picked = select_assets(series, {0, 2});
    CHECK(picked.asset_count() == 2);
    CHECK(picked.asset_ids()[1] == "T2");
    CHECK(picked.values()(1, 1) == values(1, 2));
    CHECK_THROWS_AS(select_assets(series, {5}), DimensionMismatch);
    CHECK_THROWS_AS(select_assets(series, {}), DimensionMismatch);
}

TEST_CASE("save then load reproduces a dataset exactly") {
    TempDir dir;
    CounterRng rng(52);
    Eigen::MatrixXd values(40, 3);
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            // Mix magnitudes so the 17-digit serialization actually works for it.
            values(r, c) = std::ldexp(rng.gaussian(), static_cast<int>(rng.below(40)) - 20);
        }
    }
    const Frequency freq(FrequencyKind::Min65);
    const Dataset ds{testsupport::intraday_series(values, freq), "roundtrip"};
    const std::string path = dir.file("roundtrip.csv");
    save_returns_csv(path, ds);
    const Dataset loaded = load_returns_csv(path, freq);

    CHECK(loaded.series.asset_ids() == ds.series.asset_ids());
    CHECK(loaded.series.timestamps() == ds.series.timestamps());
    CHECK(loaded.series.session_boundaries() == ds.series.session_boundaries());
    REQUIRE(loaded.series.values().rows() == values.rows());
    CHECK((loaded.series.values().array() == values.array()).all());
}

TEST_CASE("synthetic generation is bit-deterministic") {
    CounterRng rng(53);
    auto [mu0, sigma0] = random_regime(6, rng);
    SyntheticMarketSpec spec;
    spec.d = 6;
    spec.regime_mu = mu0;
    spec.regime_sigma = sigma0;
    spec.similarity = 0.4;
    spec.horizon_periods = 300;
    spec.seed = 777;

    const SyntheticPair a = generate_synthetic_pair(spec);
    const SyntheticPair b = generate_synthetic_pair(spec);
    CHECK((a.source.series.values().array() == b.source.series.values().array()).all());
    CHECK((a.target_train.series.values().array() == b.target_train.series.values().array()).all());
    CHECK((a.target_test.series.values().array() == b.target_test.series.values().array()).all());
    CHECK(a.source.series.timestamps() == b.source.series.timestamps());

    CHECK(a.target_train.series.rows() == 240);
    CHECK(a.target_test.series.rows() == 60);
    // Test window starts after the train window ends.
    CHECK(a.target_test.series.timestamps().front() >
          a.target_train.series.timestamps().back());
}

TEST_CASE("synthetic similarity endpoints") {
    CounterRng rng(54);
    auto [mu0, sigma0] = random_regime(4, rng);
    SyntheticMarketSpec spec;
    spec.d = 4;
    spec.regime_mu = mu0;
    spec.regime_sigma = sigma0;
    spec.similarity = 1.0;
    spec.horizon_periods = 100000;
    spec.seed = 99;

    const SyntheticPair pair = generate_synthetic_pair(spec);
    // Interpolation endpoint: the target regime equals the source regime exactly.
    CHECK((pair.target_regime.mu().array() == pair.source_regime.mu().array()).all());
    CHECK((pair.target_regime.sigma().array() == pair.source_regime.sigma().array()).all());

    // Same-regime sampling error at T = 1e5, measured through the estimates.
    const MomentEstimate est_source = estimate_moments(pair.source.series, false);
    const MomentEstimate est_train = estimate_moments(pair.target_train.series, false);
    CHECK(gaussian_w2(est_source, est_train) < 0.05);
}

TEST_CASE("mean regime distance is non-increasing in similarity") {
    const double levels[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    double previous = 1e300;
    for (double s : levels) {
        double total = 0.0;
        for (int seed = 0; seed < 50; ++seed) {
            CounterRng rng(1000 + static_cast<std::uint64_t>(seed));
            auto [mu0, sigma0] = random_regime(10, rng);
            SyntheticMarketSpec spec;
            spec.d = 10;
            spec.regime_mu = mu0;
            spec.regime_sigma = sigma0;
            spec.similarity = s;
            spec.horizon_periods = 50;
            spec.seed = 7000 + static_cast<std::uint64_t>(seed);
            const SyntheticPair pair = generate_synthetic_pair(spec);
            total += gaussian_w2(pair.source_regime, pair.target_regime);
        }
        const double mean = total / 50.0;
        CHECK(mean <= previous + 1e-12);
        previous = mean;
    }
    CHECK(previous <= 1e-9);  // similarity 1 collapses the distance entirely
}

TEST_CASE("invalid synthetic specs are rejected") {
    CounterRng rng(55);
    auto [mu0, sigma0] = random_regime(3, rng);
    SyntheticMarketSpec spec;
    spec.d = 3;
    spec.regime_mu = mu0;
    spec.regime_sigma = sigma0;
    spec.similarity = 1.5;
    CHECK_THROWS_AS(generate_synthetic_pair(spec), InvalidSpec);
    spec.similarity = 0.5;
    spec.horizon_periods = 2;
    CHECK_THROWS_AS(generate_synthetic_pair(spec), InvalidSpec);
    spec.horizon_periods = 100;
    spec.regime_sigma = Eigen::MatrixXd::Zero(3, 3);
    CHECK_THROWS_AS(generate_synthetic_pair(spec), InvalidSpec);
}

TEST_CASE("manifest loading resolves relative paths and validates roles") {
    TempDir dir;
    write_file(dir.file("a.csv"), "timestamp,AAA\n2020-02-03,0.001\n");
    const std::string manifest = dir.file("manifest.json");
    write_file(manifest,
               R"([{"label": "US", "frequency": "1-day", "path": "a.csv", "role": "source_train"}])");
    const auto entries = load_manifest(manifest);
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].label == "US");
    CHECK(entries[0].frequency == Frequency{});
    CHECK(fs::path(entries[0].path).is_absolute());
    CHECK(fs::exists(entries[0].path));

    const std::string bad_role = dir.file("bad_role.json");
    write_file(bad_role,
               R"([{"label": "US", "frequency": "1-day", "path": "a.csv", "role": "holdout"}])");
    CHECK_THROWS_AS(load_manifest(bad_role), InvalidSpec);

    const std::string not_array = dir.file("not_array.json");
    write_file(not_array, R"({"datasets": []})");
    CHECK_THROWS_AS(load_manifest(not_array), InvalidSpec);

    const std::string garbage = dir.file("garbage.json");
    write_file(garbage, "{{{");
    CHECK_THROWS_AS(load_manifest(garbage), ParseError);
}
