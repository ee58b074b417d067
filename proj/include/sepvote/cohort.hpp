#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sepvote/labeler.hpp"
#include "sepvote/psv_io.hpp"
#include "sepvote/record.hpp"

namespace sepvote {

/// Label timelines keyed by patient id. std::map keeps every cohort-level
/// reduction in patient-id order, independent of load order.
using CohortLabels = std::map<std::string, LabelTimeline>;

/// One algorithm's prediction streams over a cohort, keyed by patient id.
struct PredictionBundle {
    std::string algorithm_id;
    std::map<std::string, PredictionStream> by_patient;
};

/// All algorithms' bundles, keyed by algorithm id.
using BundleSet = std::map<std::string, PredictionBundle>;

/// Loads every <id>.psv under dir (with optional <id>.evt.psv sidecars),
/// sorted by patient id. Files parsed in parallel across `workers`.
std::vector<PatientRecord> load_patient_dir(const std::filesystem::path& dir,
                                            const PatientParseOptions& options = {},
                                            unsigned workers = 1);

/// Loads <pid>.label.psv (or plain <pid>.psv) label files and reconstructs
/// each timeline: t_sepsis is the first positive hour plus `lead` when any
/// label is set. Exact inverse of hourly_labels except when the positive
/// region was clipped at hour 1.
CohortLabels load_label_dir(const std::filesystem::path& dir, int lead = kDefaultLabelLead);

/// Loads preds_dir/<algorithm>/<pid>.psv into a BundleSet.
BundleSet load_prediction_dir(const std::filesystem::path& preds_dir, unsigned workers = 1);

/// Checks that every algorithm covers exactly the given patient set and that
/// stream lengths match the label vectors. Throws DataError listing every
/// missing (algorithm, patient) pair.
void check_coverage(const BundleSet& bundles, const CohortLabels& labels);

/// Checks that all bundles cover the same patient set (no labels required).
void check_coverage(const BundleSet& bundles);

} // namespace sepvote
