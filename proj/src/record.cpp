#include "sepvote/record.hpp"

#include <algorithm>
#include <map>

#include "sepvote/error.hpp"

namespace sepvote {

std::optional<Variable> variable_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kVariableCount; ++i)
        if (kVariableNames[i] == name) return static_cast<Variable>(i);
    return std::nullopt;
}

std::string_view variable_name(Variable v) {
    return kVariableNames[static_cast<std::size_t>(v)];
}

std::size_t HourRow::missing_count() const {
    std::size_t n = 0;
    for (const auto& v : values)
        if (!v.has_value()) ++n;
    return n;
}

void EventTimeline::validate() const {
    for (const auto& [start, end] : iv_antibiotic_intervals) {
        if (start < 0 || end < 0)
            throw DataError("antibiotic interval hours must be >= 0");
        if (start > end)
            throw DataError("antibiotic interval has start > end");
    }
    for (int h : culture_hours)
        if (h < 0) throw DataError("culture hour must be >= 0");
    int prev = -1;
    for (const auto& [hour, score] : sofa_series) {
        if (hour < 0) throw DataError("sofa hour must be >= 0");
        if (hour <= prev) throw DataError("sofa series must be sorted by hour");
        prev = hour;
        (void)score;
    }
}

Hospital Hospital::from_string(std::string_view s) {
    if (s == "A") return {Kind::A, {}};
    if (s == "B") return {Kind::B, {}};
    if (s == "C") return {Kind::C, {}};
    return {Kind::Other, std::string(s)};
}

std::string Hospital::to_string() const {
    switch (kind) {
        case Kind::A: return "A";
        case Kind::B: return "B";
        case Kind::C: return "C";
        case Kind::Other: return name;
    }
    return {};
}

std::vector<std::pair<double, double>>
empirical_cdf(const std::vector<PatientRecord>& cohort, Variable variable) {
    std::map<double, std::size_t> counts;
    std::size_t total = 0;
    for (const auto& record : cohort) {
        for (const auto& row : record.hours) {
            if (auto v = row.get(variable)) {
                ++counts[*v];
                ++total;
            }
        }
    }
    std::vector<std::pair<double, double>> cdf;
    cdf.reserve(counts.size());
    std::size_t seen = 0;
    for (const auto& [value, count] : counts) {
        seen += count;
        cdf.emplace_back(value, static_cast<double>(seen) / static_cast<double>(total));
    }
    return cdf;
}

} // namespace sepvote
