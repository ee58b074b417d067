#include "sepvote/utility.hpp"

#include <cmath>

#include "sepvote/error.hpp"
#include "sepvote/parallel.hpp"

namespace sepvote {

void UtilityParams::validate() const {
    if (!(dt_early < dt_optimal))
        throw ConfigError("dt_early must be < dt_optimal");
    if (!(dt_optimal <= dt_late))
        throw ConfigError("dt_optimal must be <= dt_late");
    if (!(u_fn_min <= 0.0))
        throw ConfigError("u_fn_min must be <= 0");
    if (!(0.0 <= u_tp_max))
        throw ConfigError("u_tp_max must be >= 0");
}

UtilityParams challenge_2019_default() {
    return UtilityParams{};
}

double hourly_utility(int t, int prediction, std::optional<int> t_sepsis,
                      const UtilityParams& params) {
    if (!t_sepsis.has_value())
        return prediction ? params.u_fp : params.u_tn;

    const double rel = static_cast<double>(t - *t_sepsis);
    const double early = params.dt_early;
    const double optimal = params.dt_optimal;
    const double late = params.dt_late;

    if (rel < early)
        return prediction ? params.u_fp : 0.0;
    if (rel > late)
        return 0.0;

    if (prediction) {
        if (rel <= optimal)
            return params.u_tp_max * (rel - early) / (optimal - early);
        if (optimal == late)
            return params.u_tp_max;
        return params.u_tp_max * (late - rel) / (late - optimal);
    }
    return params.u_fn_min * (rel - early) / (late - early);
}

UtilityTrace score_stream(const std::vector<int>& predictions,
                          const LabelTimeline& timeline,
                          const UtilityParams& params) {
    if (predictions.size() != timeline.labels.size())
        throw DataError("prediction stream length " + std::to_string(predictions.size()) +
                        " != label timeline length " + std::to_string(timeline.labels.size()));
    UtilityTrace trace;
    trace.values.resize(predictions.size());
    for (std::size_t k = 0; k < predictions.size(); ++k) {
        const int hour = static_cast<int>(k) + 1;
        trace.values[k] = hourly_utility(hour, predictions[k], timeline.t_sepsis, params);
        trace.total += trace.values[k];
    }
    return trace;
}

CohortScore normalized_score(const PredictionBundle& bundle,
                             const CohortLabels& labels,
                             const UtilityParams& params,
                             unsigned workers) {
    params.validate();

    struct Slot {
        double observed = 0.0;
        double inaction = 0.0;
        double perfect = 0.0;
    };

    std::vector<const std::string*> ids;
    std::vector<const LabelTimeline*> timelines;
    ids.reserve(labels.size());
    for (const auto& [pid, timeline] : labels) {
        ids.push_back(&pid);
        timelines.push_back(&timeline);
    }

    std::vector<Slot> slots(ids.size());
    parallel_for(ids.size(), workers, [&](std::size_t i) {
        const auto it = bundle.by_patient.find(*ids[i]);
        if (it == bundle.by_patient.end())
            throw DataError("no prediction stream for patient " + *ids[i] +
                            " in algorithm " + bundle.algorithm_id);
        const LabelTimeline& timeline = *timelines[i];
        const std::vector<int> zeros(timeline.labels.size(), 0);
        slots[i].observed = score_stream(it->second.labels, timeline, params).total;
        slots[i].inaction = score_stream(zeros, timeline, params).total;
        slots[i].perfect = score_stream(timeline.labels, timeline, params).total;
    });

    CohortScore score;
    for (const Slot& s : slots) {
        score.observed += s.observed;
        score.inaction += s.inaction;
        score.perfect += s.perfect;
    }
    const double denom = score.perfect - score.inaction;
    if (denom == 0.0)
        throw DataError("degenerate cohort: perfect and inaction utilities coincide");
    score.normalized = (score.observed - score.inaction) / denom;
    return score;
}

} // namespace sepvote
