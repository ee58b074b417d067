#include "sepvote/labeler.hpp"

#include <algorithm>
#include <limits>

namespace sepvote {

namespace {

constexpr int kCultureAfterAbxWindow = 24;
constexpr int kAbxAfterCultureWindow = 72;
constexpr int kMinCourseHours = 72;

std::optional<int> earliest_qualifying_pair(const EventTimeline& events,
                                            bool require_course_length) {
    std::optional<int> best;
    for (const auto& [abx_start, abx_end] : events.iv_antibiotic_intervals) {
        if (require_course_length && abx_end - abx_start < kMinCourseHours) continue;
        for (int culture : events.culture_hours) {
            bool qualifies;
            if (abx_start <= culture)
                qualifies = culture - abx_start <= kCultureAfterAbxWindow;
            else
                qualifies = abx_start - culture <= kAbxAfterCultureWindow;
            if (!qualifies) continue;
            int t = std::min(abx_start, culture);
            if (!best || t < *best) best = t;
        }
    }
    return best;
}

} // namespace

std::optional<int> suspicion_time(const EventTimeline& events) {
    return earliest_qualifying_pair(events, true);
}

std::optional<int> suspicion_time_ignoring_course_length(const EventTimeline& events) {
    return earliest_qualifying_pair(events, false);
}

bool short_course_affected(const EventTimeline& events) {
    auto strict = suspicion_time(events);
    auto relaxed = suspicion_time_ignoring_course_length(events);
    if (!relaxed) return false;
    return !strict || *relaxed < *strict;
}

std::optional<int> sofa_time(const EventTimeline& events) {
    const auto& series = events.sofa_series;
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto [t, score] = series[i];
        int window_min = std::numeric_limits<int>::max();
        for (std::size_t j = 0; j <= i; ++j) {
            const auto [s, prior] = series[j];
            if (s >= t - 24 && s <= t) window_min = std::min(window_min, prior);
        }
        if (score - window_min >= 2) return t;
    }
    return std::nullopt;
}

std::optional<int> sepsis_onset(std::optional<int> t_suspicion, std::optional<int> t_sofa) {
    if (!t_suspicion || !t_sofa) return std::nullopt;
    if (*t_sofa < *t_suspicion - 24 || *t_sofa > *t_suspicion + 12) return std::nullopt;
    return std::min(*t_suspicion, *t_sofa);
}

std::vector<int> hourly_labels(const PatientRecord& record, std::optional<int> t_sepsis,
                               int lead) {
    std::vector<int> labels(record.hours.size(), 0);
    if (!t_sepsis) return labels;
    for (int h = 1; h <= record.hour_count(); ++h)
        if (h >= *t_sepsis - lead) labels[static_cast<std::size_t>(h - 1)] = 1;
    return labels;
}

bool include_record(const PatientRecord& record, std::optional<int> t_sepsis) {
    if (record.hour_count() < 8) return false;
    if (t_sepsis && *t_sepsis < 4) return false;
    return true;
}

LabelTimeline label_patient(const PatientRecord& record, int lead) {
    LabelTimeline timeline;
    timeline.t_suspicion = suspicion_time(record.events);
    timeline.t_sofa = sofa_time(record.events);
    timeline.t_sepsis = sepsis_onset(timeline.t_suspicion, timeline.t_sofa);
    timeline.labels = hourly_labels(record, timeline.t_sepsis, lead);
    return timeline;
}

} // namespace sepvote
