#include "sepvote/ensemble.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "sepvote/diversity.hpp"
#include "sepvote/error.hpp"
#include "sepvote/parallel.hpp"
#include "sepvote/psv_io.hpp"

namespace sepvote {

Regime regime_from_name(const std::string& name) {
    if (name == "familiar") return Regime::familiar;
    if (name == "unfamiliar") return Regime::unfamiliar;
    throw ConfigError("unknown regime: " + name);
}

std::string regime_name(Regime regime) {
    return regime == Regime::familiar ? "familiar" : "unfamiliar";
}

void VoteRule::validate() const {
    if (kind == Kind::threshold_fraction && !(theta > 0.0 && theta <= 1.0))
        throw ConfigError("vote threshold must lie in (0, 1]");
}

void EnsembleSpec::validate() const {
    if (members.empty())
        throw ConfigError("ensemble has no members");
    for (const auto& [id, weight] : members)
        if (weight < 1)
            throw ConfigError("member weight must be >= 1: " + id);
    for (const auto& [regime, rule] : rule_per_regime)
        rule.validate();
}

int EnsembleSpec::total_weight() const {
    int total = 0;
    for (const auto& [id, weight] : members) total += weight;
    return total;
}

EnsembleSpec default_spec() {
    EnsembleSpec spec;
    spec.rule_per_regime[Regime::familiar] = VoteRule::majority();
    spec.rule_per_regime[Regime::unfamiliar] = VoteRule::all_but_one();
    return spec;
}

namespace {

const VoteRule& rule_for(const EnsembleSpec& spec, Regime regime) {
    auto it = spec.rule_per_regime.find(regime);
    if (it == spec.rule_per_regime.end())
        throw ConfigError("no vote rule configured for regime " + regime_name(regime));
    return it->second;
}

int decide(const VoteRule& rule, int sum_w, int sum_wx, int zero_members) {
    if (rule.kind == VoteRule::Kind::all_but_one)
        return zero_members <= 1 ? 1 : 0;
    return static_cast<double>(sum_wx) >= rule.theta * static_cast<double>(sum_w) ? 1 : 0;
}

} // namespace

int vote(const std::map<std::string, int>& predictions, const EnsembleSpec& spec,
         Regime regime) {
    spec.validate();
    const VoteRule& rule = rule_for(spec, regime);
    int sum_w = 0;
    int sum_wx = 0;
    int zero_members = 0;
    for (const auto& [id, weight] : spec.members) {
        auto it = predictions.find(id);
        if (it == predictions.end())
            throw DataError("no prediction from member algorithm " + id);
        sum_w += weight;
        if (it->second)
            sum_wx += weight;
        else
            ++zero_members;
    }
    return decide(rule, sum_w, sum_wx, zero_members);
}

PredictionBundle apply_ensemble(const EnsembleSpec& spec, const BundleSet& bundles,
                                Regime regime, unsigned workers) {
    spec.validate();
    const VoteRule& rule = rule_for(spec, regime);

    std::vector<std::pair<const PredictionBundle*, int>> members;
    for (const auto& [id, weight] : spec.members) {
        auto it = bundles.find(id);
        if (it == bundles.end())
            throw DataError("no prediction bundle for member algorithm " + id);
        members.emplace_back(&it->second, weight);
    }

    std::vector<const std::string*> patients;
    for (const auto& [pid, stream] : members[0].first->by_patient)
        patients.push_back(&pid);

    std::vector<PredictionStream> voted(patients.size());
    parallel_for(patients.size(), workers, [&](std::size_t i) {
        const std::string& pid = *patients[i];
        std::vector<std::pair<const std::vector<int>*, int>> streams;
        for (const auto& [bundle, weight] : members) {
            auto it = bundle->by_patient.find(pid);
            if (it == bundle->by_patient.end())
                throw DataError("no prediction stream for patient " + pid +
                                " in algorithm " + bundle->algorithm_id);
            streams.emplace_back(&it->second.labels, weight);
        }
        const std::size_t hours = streams[0].first->size();
        for (const auto& [labels, weight] : streams)
            if (labels->size() != hours)
                throw DataError("member stream lengths differ for patient " + pid);

        PredictionStream& out = voted[i];
        out.algorithm_id = "ensemble";
        out.patient_id = pid;
        out.labels.resize(hours);
        out.probabilities.resize(hours);
        int sum_w = 0;
        for (const auto& [labels, weight] : streams) sum_w += weight;
        for (std::size_t h = 0; h < hours; ++h) {
            int sum_wx = 0;
            int zero_members = 0;
            for (const auto& [labels, weight] : streams) {
                if ((*labels)[h])
                    sum_wx += weight;
                else
                    ++zero_members;
            }
            out.labels[h] = decide(rule, sum_w, sum_wx, zero_members);
            out.probabilities[h] = static_cast<double>(sum_wx) / static_cast<double>(sum_w);
        }
    });

    PredictionBundle result;
    result.algorithm_id = "ensemble";
    for (auto& s : voted) {
        std::string pid = s.patient_id;
        result.by_patient.emplace(std::move(pid), std::move(s));
    }
    // members must agree on the patient set, not just cover the first one's
    for (const auto& [bundle, weight] : members)
        if (bundle->by_patient.size() != result.by_patient.size())
            throw DataError("member algorithms cover different patient sets");
    return result;
}

GreedyResult greedy_select(const std::vector<std::string>& candidates,
                           const BundleSet& bundles,
                           const CohortLabels& labels,
                           const UtilityParams& params,
                           const VoteRule& rule,
                           const GreedyOptions& options) {
    if (candidates.empty())
        throw DataError("empty candidate set");
    rule.validate();

    std::vector<std::string> pool = candidates;
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

    // inclusion bar: drop candidates whose own training score is not positive
    std::vector<double> solo(pool.size());
    parallel_for(pool.size(), options.workers, [&](std::size_t i) {
        auto it = bundles.find(pool[i]);
        if (it == bundles.end())
            throw DataError("no prediction bundle for candidate " + pool[i]);
        solo[i] = normalized_score(it->second, labels, params).normalized;
    });
    std::vector<std::string> eligible;
    for (std::size_t i = 0; i < pool.size(); ++i)
        if (solo[i] > 0.0) eligible.push_back(pool[i]);
    if (eligible.empty())
        throw DataError("no candidate has positive training score");

    EnsembleSpec working = default_spec();
    working.rule_per_regime[Regime::familiar] = rule;
    working.rule_per_regime[Regime::unfamiliar] = rule;

    GreedyResult result;
    double current = 0.0;
    bool have_current = false;

    while (working.total_weight() < options.max_members) {
        std::vector<double> scores(eligible.size());
        parallel_for(eligible.size(), options.workers, [&](std::size_t i) {
            EnsembleSpec trial = working;
            ++trial.members[eligible[i]];
            PredictionBundle voted = apply_ensemble(trial, bundles, Regime::familiar, 1);
            scores[i] = normalized_score(voted, labels, params).normalized;
        });
        std::size_t best = 0;
        for (std::size_t i = 1; i < eligible.size(); ++i)
            if (scores[i] > scores[best]) best = i;
        if (have_current && scores[best] - current <= options.tolerance)
            break;
        ++working.members[eligible[best]];
        current = scores[best];
        have_current = true;
        result.trajectory.push_back(current);
    }

    result.spec = default_spec();
    result.spec.members = working.members;
    result.final_score = current;
    return result;
}

Regime select_regime(const BundleSet& bundles, const RegimeSelector& selector,
                     unsigned workers) {
    if (selector.manual_override.has_value())
        return *selector.manual_override;
    if (bundles.size() < 2)
        throw DataError("regime selection needs at least 2 algorithms");
    std::vector<std::string> ids;
    for (const auto& [id, bundle] : bundles) ids.push_back(id);
    SimilarityMatrix m =
        prediction_similarity_matrix(bundles, ids, "input order", workers);
    double sum = 0.0;
    std::size_t cells = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = i + 1; j < m.size(); ++j) {
            sum += m.values[i][j];
            ++cells;
        }
    }
    const double mean = sum / static_cast<double>(cells);
    return mean >= selector.tau ? Regime::unfamiliar : Regime::familiar;
}

std::string serialize_spec(const EnsembleSpec& spec) {
    spec.validate();
    std::string out;
    for (const auto& [regime, rule] : spec.rule_per_regime) {
        out += "rule|" + regime_name(regime) + "|";
        if (rule.kind == VoteRule::Kind::all_but_one)
            out += "all_but_one|";
        else
            out += "threshold_fraction|" + format_double(rule.theta);
        out += "\n";
    }
    for (const auto& [id, weight] : spec.members)
        out += "member|" + id + "|" + std::to_string(weight) + "\n";
    return out;
}

EnsembleSpec parse_spec(const std::string& text) {
    EnsembleSpec spec;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (pos > text.size()) break;
            continue;
        }

        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t bar = line.find('|', start);
            if (bar == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, bar - start));
            start = bar + 1;
        }
        const std::string where = "spec line " + std::to_string(line_no) + ": ";
        if (fields.size() != 4 && !(fields.size() == 3 && fields[0] == "member"))
            throw FormatError(where + "expected 4 fields");
        if (fields[0] == "rule") {
            Regime regime = regime_from_name(fields[1]);
            VoteRule rule;
            if (fields[2] == "all_but_one") {
                rule = VoteRule::all_but_one();
                if (!fields[3].empty())
                    throw FormatError(where + "all_but_one takes no threshold");
            } else if (fields[2] == "threshold_fraction") {
                rule.kind = VoteRule::Kind::threshold_fraction;
                const char* first = fields[3].data();
                const char* last = first + fields[3].size();
                auto [ptr, ec] = std::from_chars(first, last, rule.theta);
                if (ec != std::errc() || ptr != last)
                    throw FormatError(where + "bad threshold: " + fields[3]);
                rule.validate();
            } else {
                throw FormatError(where + "unknown rule kind: " + fields[2]);
            }
            spec.rule_per_regime[regime] = rule;
        } else if (fields[0] == "member") {
            if (fields.size() != 3)
                throw FormatError(where + "expected member|<id>|<weight>");
            if (fields[1].empty())
                throw FormatError(where + "empty member id");
            int weight = 0;
            const char* first = fields[2].data();
            const char* last = first + fields[2].size();
            auto [ptr, ec] = std::from_chars(first, last, weight);
            if (ec != std::errc() || ptr != last || weight < 1)
                throw FormatError(where + "bad weight: " + fields[2]);
            if (spec.members.count(fields[1]))
                throw FormatError(where + "duplicate member: " + fields[1]);
            spec.members[fields[1]] = weight;
        } else {
            throw FormatError(where + "unknown line kind: " + fields[0]);
        }
    }
    if (spec.rule_per_regime.empty())
        throw FormatError("spec has no rule lines");
    spec.validate();
    return spec;
}

EnsembleSpec read_spec_file(const std::filesystem::path& path) {
    try {
        return parse_spec(read_text_file(path));
    } catch (const Error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

} // namespace sepvote
