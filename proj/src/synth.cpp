#include "sepvote/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sepvote/error.hpp"
#include "sepvote/parallel.hpp"

namespace sepvote {

namespace {

constexpr std::uint64_t kCohortStream = 0x1;
constexpr std::uint64_t kSharedStream = 0x2;
constexpr std::uint64_t kPrivateStream = 0x3;

// splitmix64 finalizer over (seed, stream, index) triples
std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
    return std::mt19937_64(mix(mix(seed, stream), index));
}

std::string padded_id(char prefix, int index, int width) {
    std::string digits = std::to_string(index);
    while (static_cast<int>(digits.size()) < width) digits.insert(digits.begin(), '0');
    return prefix + digits;
}

int digit_count(int count) {
    int width = 1;
    for (int v = count; v >= 10; v /= 10) ++width;
    return width;
}

double clamp(double v, double lo, double hi) {
    return std::min(std::max(v, lo), hi);
}

} // namespace

void SynthConfig::validate() const {
    if (patients < 1)
        throw ConfigError("patient count must be >= 1");
    if (min_len < 8)
        throw ConfigError("min record length must be >= 8 (inclusion rule)");
    if (min_len > max_len)
        throw ConfigError("min record length exceeds max");
    if (max_len > kMaxRecordHours)
        throw ConfigError("max record length exceeds " + std::to_string(kMaxRecordHours));
    if (!(prevalence >= 0.0 && prevalence <= 1.0))
        throw ConfigError("prevalence must lie in [0, 1]");
    if (label_lead < 0)
        throw ConfigError("label lead must be >= 0");
    if (algorithms < 1)
        throw ConfigError("algorithm count must be >= 1");
    if (!(rho >= 0.0 && rho <= 1.0))
        throw ConfigError("rho must lie in [0, 1]");
    if (!per_algorithm.empty() &&
        static_cast<int>(per_algorithm.size()) != algorithms)
        throw ConfigError("per-algorithm error model count must match algorithm count");
    std::vector<ErrorModel> models = per_algorithm;
    if (models.empty()) models.push_back(error);
    for (const ErrorModel& m : models) {
        if (!(m.fp_rate >= 0.0 && m.fp_rate <= 1.0))
            throw ConfigError("false-positive rate must lie in [0, 1]");
        if (!(m.fn_rate >= 0.0 && m.fn_rate <= 1.0))
            throw ConfigError("false-negative rate must lie in [0, 1]");
        if (m.lag_min > m.lag_max)
            throw ConfigError("lag_min exceeds lag_max");
    }
}

const ErrorModel& SynthConfig::model_for(int algorithm) const {
    if (per_algorithm.empty()) return error;
    return per_algorithm[static_cast<std::size_t>(algorithm)];
}

SynthCohort generate_cohort(const SynthConfig& config, unsigned workers) {
    config.validate();
    const int width = std::max(4, digit_count(config.patients));

    std::vector<PatientRecord> records(static_cast<std::size_t>(config.patients));
    parallel_for(static_cast<std::size_t>(config.patients), workers, [&](std::size_t p) {
        auto rng = make_rng(config.seed, kCohortStream, p);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_int_distribution<int> len_dist(config.min_len, config.max_len);
        std::normal_distribution<double> jitter(0.0, 1.0);

        PatientRecord& rec = records[p];
        rec.patient_id = padded_id('p', static_cast<int>(p) + 1, width);
        switch (p % 3) {
            case 0: rec.hospital.kind = Hospital::Kind::A; break;
            case 1: rec.hospital.kind = Hospital::Kind::B; break;
            default: rec.hospital.kind = Hospital::Kind::C; break;
        }
        rec.hospital.name = rec.hospital.to_string();
        rec.columns = {Variable::HR, Variable::O2Sat, Variable::Temp, Variable::SBP,
                       Variable::MAP, Variable::Resp, Variable::Age, Variable::Gender,
                       Variable::HospAdmTime, Variable::ICULOS};

        const int length = len_dist(rng);
        const bool septic = unit(rng) < config.prevalence;
        int onset = 0;
        if (septic) {
            std::uniform_int_distribution<int> onset_dist(4, length);
            onset = onset_dist(rng);
        }

        const double age = std::floor(18.0 + unit(rng) * 72.0);
        const double gender = unit(rng) < 0.5 ? 0.0 : 1.0;
        const double adm = -std::floor(unit(rng) * 240.0) / 4.0;
        const double hr0 = 70.0 + unit(rng) * 30.0;
        const double o2_0 = 94.0 + unit(rng) * 5.0;
        const double temp0 = 36.2 + unit(rng) * 1.2;
        const double sbp0 = 105.0 + unit(rng) * 30.0;
        const double map0 = 70.0 + unit(rng) * 20.0;
        const double resp0 = 14.0 + unit(rng) * 6.0;

        rec.hours.resize(static_cast<std::size_t>(length));
        for (int h = 1; h <= length; ++h) {
            HourRow& row = rec.hours[static_cast<std::size_t>(h - 1)];
            // mild deterioration after onset so the series is not pure noise
            const double drift = septic && h >= onset ? 1.0 : 0.0;
            row.set(Variable::HR, clamp(hr0 + 12.0 * drift + 3.0 * jitter(rng), 30.0, 190.0));
            row.set(Variable::O2Sat, clamp(o2_0 - 3.0 * drift + 0.8 * jitter(rng), 70.0, 100.0));
            row.set(Variable::Temp, clamp(temp0 + 0.9 * drift + 0.15 * jitter(rng), 33.0, 41.5));
            row.set(Variable::SBP, clamp(sbp0 - 15.0 * drift + 4.0 * jitter(rng), 50.0, 220.0));
            row.set(Variable::MAP, clamp(map0 - 10.0 * drift + 3.0 * jitter(rng), 35.0, 150.0));
            row.set(Variable::Resp, clamp(resp0 + 6.0 * drift + 1.0 * jitter(rng), 6.0, 50.0));
            row.set(Variable::Age, age);
            row.set(Variable::Gender, gender);
            row.set(Variable::HospAdmTime, adm);
            row.set(Variable::ICULOS, static_cast<double>(h));
        }

        if (septic) {
            // events arranged so suspicion and SOFA deterioration both land
            // on the intended hour
            rec.events.culture_hours.push_back(onset);
            rec.events.iv_antibiotic_intervals.emplace_back(onset, onset + 72);
            rec.events.sofa_series.emplace_back(std::max(1, onset - 10), 1);
            rec.events.sofa_series.emplace_back(onset, 3);
        }
        rec.events.validate();
    });

    SynthCohort cohort;
    cohort.records = std::move(records);
    for (const PatientRecord& rec : cohort.records) {
        LabelTimeline timeline = label_patient(rec, config.label_lead);
        if (!include_record(rec, timeline.t_sepsis))
            throw Error("generated record failed inclusion: " + rec.patient_id);
        cohort.labels.emplace(rec.patient_id, std::move(timeline));
    }
    return cohort;
}

BundleSet generate_predictors(const SynthCohort& cohort, const SynthConfig& config,
                              unsigned workers) {
    config.validate();
    const int awidth = std::max(2, digit_count(config.algorithms));

    std::vector<std::string> patient_ids;
    std::vector<const LabelTimeline*> timelines;
    for (const auto& [pid, timeline] : cohort.labels) {
        patient_ids.push_back(pid);
        timelines.push_back(&timeline);
    }
    const std::size_t n_patients = patient_ids.size();

    // shared per-hour coins, one stream per patient, identical for all algorithms
    std::vector<std::vector<double>> shared(n_patients);
    parallel_for(n_patients, workers, [&](std::size_t p) {
        auto rng = make_rng(config.seed, kSharedStream, p);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        shared[p].resize(timelines[p]->labels.size());
        for (double& s : shared[p]) s = unit(rng);
    });

    BundleSet bundles;
    std::vector<std::vector<PredictionStream>> streams(
        static_cast<std::size_t>(config.algorithms));
    for (auto& v : streams) v.resize(n_patients);

    const std::size_t jobs = static_cast<std::size_t>(config.algorithms) * n_patients;
    parallel_for(jobs, workers, [&](std::size_t job) {
        const std::size_t a = job / n_patients;
        const std::size_t p = job % n_patients;
        const ErrorModel& model = config.model_for(static_cast<int>(a));
        auto rng = make_rng(config.seed, kPrivateStream, mix(a, p));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::uniform_int_distribution<int> lag_dist(model.lag_min, model.lag_max);
        const int lag = lag_dist(rng);

        const LabelTimeline& timeline = *timelines[p];
        const std::size_t hours = timeline.labels.size();
        PredictionStream& out = streams[a][p];
        out.algorithm_id = padded_id('a', static_cast<int>(a) + 1, awidth);
        out.patient_id = patient_ids[p];
        out.labels.resize(hours);
        out.probabilities.resize(hours);
        for (std::size_t h = 0; h < hours; ++h) {
            int truth = timeline.labels[h];
            if (timeline.t_sepsis.has_value() && lag != 0) {
                const int hour = static_cast<int>(h) + 1;
                truth = hour >= *timeline.t_sepsis + lag - config.label_lead ? 1 : 0;
            }
            // one coin decides the flip; with probability rho it is the
            // shared draw for this hour, otherwise a private draw
            const double use_shared = unit(rng);
            const double priv = unit(rng);
            const double coin = use_shared < config.rho ? shared[p][h] : priv;
            int predicted = truth;
            if (truth) {
                if (coin < model.fn_rate) predicted = 0;
            } else {
                if (coin < model.fp_rate) predicted = 1;
            }
            out.labels[h] = predicted;
            out.probabilities[h] = static_cast<double>(predicted);
        }
    });

    for (auto& per_algo : streams) {
        PredictionBundle bundle;
        bundle.algorithm_id = per_algo[0].algorithm_id;
        for (auto& s : per_algo) {
            std::string pid = s.patient_id;
            bundle.by_patient.emplace(std::move(pid), std::move(s));
        }
        bundles.emplace(bundle.algorithm_id, std::move(bundle));
    }
    return bundles;
}

} // namespace sepvote
