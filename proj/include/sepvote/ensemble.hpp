#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sepvote/cohort.hpp"
#include "sepvote/utility.hpp"

namespace sepvote {

enum class Regime { familiar, unfamiliar };

Regime regime_from_name(const std::string& name);
std::string regime_name(Regime regime);

struct VoteRule {
    enum class Kind { threshold_fraction, all_but_one };
    Kind kind = Kind::threshold_fraction;
    double theta = 0.5;

    void validate() const;

    static VoteRule majority() { return {Kind::threshold_fraction, 0.5}; }
    static VoteRule all_but_one() { return {Kind::all_but_one, 0.0}; }
};

// Weighted member multiset plus the vote rule to apply in each regime.
struct EnsembleSpec {
    std::map<std::string, int> members; // id -> multiplicity (weight)
    std::map<Regime, VoteRule> rule_per_regime;

    void validate() const;
    int total_weight() const;
};

EnsembleSpec default_spec();

// Single-hour vote. threshold_fraction fires when the weighted positive share
// reaches theta (ties count positive); all_but_one fires when at most one
// distinct member id votes 0, ignoring weights.
int vote(const std::map<std::string, int>& predictions, const EnsembleSpec& spec,
         Regime regime);

// Hour-by-hour vote over a cohort. The probability channel carries the
// weighted positive share per hour (the ensemble's agreement level).
PredictionBundle apply_ensemble(const EnsembleSpec& spec, const BundleSet& bundles,
                                Regime regime, unsigned workers = 1);

struct GreedyOptions {
    double tolerance = 1e-9;
    int max_members = 128;
    unsigned workers = 1;
};

struct GreedyResult {
    EnsembleSpec spec;
    std::vector<double> trajectory; // training score after each addition
    double final_score = 0.0;
};

// Selection with replacement: starting from the empty multiset, repeatedly
// add the candidate whose addition maximizes the voted ensemble's normalized
// training score, breaking ties toward the lexicographically smallest id;
// stop when no addition improves by more than options.tolerance. Candidates
// whose individual training score is not positive are excluded up front.
GreedyResult greedy_select(const std::vector<std::string>& candidates,
                           const BundleSet& bundles,
                           const CohortLabels& labels,
                           const UtilityParams& params,
                           const VoteRule& rule,
                           const GreedyOptions& options = {});

struct RegimeSelector {
    double tau = 0.8;
    std::optional<Regime> manual_override;
};

// Mean pairwise prediction similarity at or above tau reads as a familiar,
// mutually-agreeing population and selects the conservative all-but-one
// regime (`unfamiliar` deployment); below tau, majority voting (`familiar`).
Regime select_regime(const BundleSet& bundles, const RegimeSelector& selector,
                     unsigned workers = 1);

// Spec file format: `rule|<regime>|<kind>|<theta>` and `member|<id>|<weight>`
// lines, pipe separated.
std::string serialize_spec(const EnsembleSpec& spec);
EnsembleSpec parse_spec(const std::string& text);
EnsembleSpec read_spec_file(const std::filesystem::path& path);

} // namespace sepvote
