#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sepvote/cohort.hpp"
#include "sepvote/labeler.hpp"

namespace sepvote {

// Time-dependent payoff configuration. Window offsets are signed hours
// relative to sepsis onset; payoffs are free real parameters.
struct UtilityParams {
    int dt_early = -12;
    int dt_optimal = -6;
    int dt_late = 3;
    double u_tp_max = 1.0;
    double u_fn_min = -2.0;
    double u_fp = -0.05;
    double u_tn = 0.0;

    // Throws ConfigError unless dt_early < dt_optimal <= dt_late and
    // u_fn_min <= 0 <= u_tp_max.
    void validate() const;
};

// Built-in preset mirroring the 2019 PhysioNet challenge convention. These
// numbers are a convention, not a measured quantity; every field can be
// overridden through config.
UtilityParams challenge_2019_default();

// Per-hour utility values for one prediction stream plus their sum.
struct UtilityTrace {
    std::vector<double> values;
    double total = 0.0;
};

// Payoff for a single hourly prediction. `t` is the 1-based hour, matching
// ICULOS. Septic patients earn a piecewise-linear ramp around onset; positives
// more than -dt_early hours before onset count as false alarms, and hours past
// t_sepsis + dt_late carry no payoff either way. Non-septic patients earn
// u_fp per positive and u_tn per negative.
double hourly_utility(int t, int prediction, std::optional<int> t_sepsis,
                      const UtilityParams& params);

// Scores every hour of one stream against one label timeline.
UtilityTrace score_stream(const std::vector<int>& predictions,
                          const LabelTimeline& timeline,
                          const UtilityParams& params);

struct CohortScore {
    double observed = 0.0;
    double inaction = 0.0;
    double perfect = 0.0;
    double normalized = 0.0;
};

// Cohort-level normalized utility of one prediction bundle:
// (observed - inaction) / (perfect - inaction), where inaction is the
// all-negative predictor and perfect copies the label vector. Throws
// DataError when the cohort is degenerate (perfect == inaction) or when a
// stream is missing or mismatched in length.
CohortScore normalized_score(const PredictionBundle& bundle,
                             const CohortLabels& labels,
                             const UtilityParams& params,
                             unsigned workers = 1);

} // namespace sepvote
