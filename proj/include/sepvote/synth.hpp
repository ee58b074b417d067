#pragma once

#include <cstdint>
#include <vector>

#include "sepvote/cohort.hpp"
#include "sepvote/labeler.hpp"

namespace sepvote {

// Noisy-oracle error model for one generated algorithm.
struct ErrorModel {
    double fp_rate = 0.1;
    double fn_rate = 0.1;
    int lag_min = 0; // detection lag drawn uniformly per patient, in hours
    int lag_max = 0;
};

struct SynthConfig {
    int patients = 100;
    int min_len = 8;
    int max_len = 72;
    double prevalence = 0.3;
    std::uint64_t seed = 1;
    int label_lead = kDefaultLabelLead;

    int algorithms = 5;
    double rho = 0.0; // shared-noise correlation: 0 independent, 1 identical
    ErrorModel error;
    // optional per-algorithm override; empty means every algorithm uses
    // `error`, otherwise size must equal `algorithms`
    std::vector<ErrorModel> per_algorithm;

    void validate() const;
    const ErrorModel& model_for(int algorithm) const;
};

struct SynthCohort {
    std::vector<PatientRecord> records;
    CohortLabels labels;
};

// Deterministic synthetic cohort. Septic patients carry event sidecars
// constructed so the labeler recovers the intended onset hour; every record
// passes the inclusion rules by construction. Per-patient sub-seeds make the
// output independent of worker scheduling.
SynthCohort generate_cohort(const SynthConfig& config, unsigned workers = 1);

// k noisy oracles over a generated cohort. Each algorithm sees the true
// labels (shifted by its detection lag), then flips hours at its error rates.
// The flip coin is a per-hour shared draw with probability rho, a private
// draw otherwise, so rho tunes error concordance across algorithms.
BundleSet generate_predictors(const SynthCohort& cohort, const SynthConfig& config,
                              unsigned workers = 1);

} // namespace sepvote
