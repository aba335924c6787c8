#pragma once

#include <cstdint>
#include <string>

namespace xferfolio {

/// Bar frequencies supported by the return pipeline. A trading session is
/// 390 minutes, so each intraday kind divides it evenly.
enum class FrequencyKind {
    Min1,
    Min5,
    Min10,
    Min30,
    Min65,
    Min130,
    Day1,
};

class Frequency {
public:
    Frequency() : kind_(FrequencyKind::Day1) {}
    explicit Frequency(FrequencyKind kind) : kind_(kind) {}

    FrequencyKind kind() const { return kind_; }

    /// Bars per 390-minute session: 390, 78, 39, 13, 6, 3 intraday, 1 for daily.
    int bars_per_day() const;

    /// Bar length in minutes; 390 for daily (one bar spans the session).
    int minutes_per_bar() const;

    bool is_intraday() const { return kind_ != FrequencyKind::Day1; }

    /// Annualization factor: 252 trading days times bars per day.
    double periods_per_year() const { return 252.0 * bars_per_day(); }

    /// Canonical spelling, e.g. "5-minute" or "1-day".
    std::string name() const;

    /// Parses the canonical spelling. Throws ParseError on unknown input.
    static Frequency parse(const std::string& text);

    bool operator==(const Frequency& other) const { return kind_ == other.kind_; }
    bool operator!=(const Frequency& other) const { return kind_ != other.kind_; }

private:
    FrequencyKind kind_;
};

}  // namespace xferfolio
