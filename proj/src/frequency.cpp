#include "xferfolio/frequency.hpp"

#include "xferfolio/errors.hpp"

namespace xferfolio {

int Frequency::bars_per_day() const {
    switch (kind_) {
        case FrequencyKind::Min1: return 390;
        case FrequencyKind::Min5: return 78;
        case FrequencyKind::Min10: return 39;
        case FrequencyKind::Min30: return 13;
        case FrequencyKind::Min65: return 6;
        case FrequencyKind::Min130: return 3;
        case FrequencyKind::Day1: return 1;
    }
    return 1;
}

int Frequency::minutes_per_bar() const {
    switch (kind_) {
        case FrequencyKind::Min1: return 1;
        case FrequencyKind::Min5: return 5;
        case FrequencyKind::Min10: return 10;
        case FrequencyKind::Min30: return 30;
        case FrequencyKind::Min65: return 65;
        case FrequencyKind::Min130: return 130;
        case FrequencyKind::Day1: return 390;
    }
    return 390;
}

std::string Frequency::name() const {
    switch (kind_) {
        case FrequencyKind::Min1: return "1-minute";
        case FrequencyKind::Min5: return "5-minute";
        case FrequencyKind::Min10: return "10-minute";
        case FrequencyKind::Min30: return "30-minute";
        case FrequencyKind::Min65: return "65-minute";
        case FrequencyKind::Min130: return "130-minute";
        case FrequencyKind::Day1: return "1-day";
    }
    return "1-day";
}

Frequency Frequency::parse(const std::string& text) {
    if (text == "1-minute") return Frequency(FrequencyKind::Min1);
    if (text == "5-minute") return Frequency(FrequencyKind::Min5);
    if (text == "10-minute") return Frequency(FrequencyKind::Min10);
    if (text == "30-minute") return Frequency(FrequencyKind::Min30);
    if (text == "65-minute") return Frequency(FrequencyKind::Min65);
    if (text == "130-minute") return Frequency(FrequencyKind::Min130);
    if (text == "1-day") return Frequency(FrequencyKind::Day1);
    throw ParseError("unknown frequency: " + text);
}

}  // namespace xferfolio
