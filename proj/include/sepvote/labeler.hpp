#pragma once

#include <optional>
#include <vector>

#include "sepvote/record.hpp"

namespace sepvote {

/// Sepsis-3 label times for one patient plus the derived hourly labels.
/// When t_sepsis is present it equals min(t_suspicion, t_sofa) and the two
/// component times are within the [-24h, +12h] pairing window.
struct LabelTimeline {
    std::optional<int> t_suspicion;
    std::optional<int> t_sofa;
    std::optional<int> t_sepsis;
    std::vector<int> labels;

    int hour_count() const { return static_cast<int>(labels.size()); }
    bool septic() const { return t_sepsis.has_value(); }
};

/// Hours before onset at which positive labels begin.
inline constexpr int kDefaultLabelLead = 6;

/// Earliest qualifying (antibiotics, culture) pair:
///  - antibiotics first: culture drawn within 24 h of the course start;
///  - culture first: course start within 72 h of the draw;
///  - either way the course spans at least 72 consecutive hours.
/// Returns the earlier timestamp of the pair, or nullopt when none qualifies.
std::optional<int> suspicion_time(const EventTimeline& events);

/// Variant that ignores the 72-hour course-length requirement. Used to flag
/// records whose suspicion outcome hinges on a short terminal course.
std::optional<int> suspicion_time_ignoring_course_length(const EventTimeline& events);

/// True when the record's suspicion outcome would change if courses shorter
/// than 72 h qualified (earlier time, or a time where none exists).
bool short_course_affected(const EventTimeline& events);

/// Earliest measured hour t whose SOFA score is at least 2 points above the
/// minimum measured score in the window [t-24, t].
std::optional<int> sofa_time(const EventTimeline& events);

/// min(t_suspicion, t_sofa) when both exist and
/// t_sofa is within [t_suspicion - 24, t_suspicion + 12]; otherwise nullopt.
std::optional<int> sepsis_onset(std::optional<int> t_suspicion, std::optional<int> t_sofa);

/// Hour h gets label 1 iff h >= t_sepsis - lead, clipped to the record; all
/// zeros when t_sepsis is absent.
std::vector<int> hourly_labels(const PatientRecord& record, std::optional<int> t_sepsis,
                               int lead = kDefaultLabelLead);

/// Cohort inclusion: at least 8 hourly windows, and any sepsis onset at least
/// 4 hours after ICU admission.
bool include_record(const PatientRecord& record, std::optional<int> t_sepsis);

/// Full per-patient labeling from the record's event timeline.
LabelTimeline label_patient(const PatientRecord& record, int lead = kDefaultLabelLead);

} // namespace sepvote
