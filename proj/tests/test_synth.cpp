#include <doctest.h>

#include <set>

#include "sepvote/diversity.hpp"
#include "sepvote/error.hpp"
#include "sepvote/synth.hpp"

using namespace sepvote;

namespace {

SynthConfig small_config() {
    SynthConfig c;
    c.patients = 40;
    c.min_len = 8;
    c.max_len = 30;
    c.prevalence = 0.4;
    c.seed = 7;
    c.algorithms = 4;
    return c;
}

bool same_records(const std::vector<PatientRecord>& a, const std::vector<PatientRecord>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].patient_id != b[i].patient_id) return false;
        if (a[i].hour_count() != b[i].hour_count()) return false;
        for (int h = 0; h < a[i].hour_count(); ++h)
            for (std::size_t v = 0; v < kVariableCount; ++v) {
                const auto x = a[i].hours[static_cast<std::size_t>(h)].values[v];
                const auto y = b[i].hours[static_cast<std::size_t>(h)].values[v];
                if (x != y) return false;
            }
        if (a[i].events.culture_hours != b[i].events.culture_hours) return false;
        if (a[i].events.iv_antibiotic_intervals != b[i].events.iv_antibiotic_intervals)
            return false;
        if (a[i].events.sofa_series != b[i].events.sofa_series) return false;
    }
    return true;
}

bool same_bundles(const BundleSet& a, const BundleSet& b) {
    if (a.size() != b.size()) return false;
    for (const auto& [aid, bundle] : a) {
        auto it = b.find(aid);
        if (it == b.end()) return false;
        for (const auto& [pid, stream] : bundle.by_patient) {
            auto jt = it->second.by_patient.find(pid);
            if (jt == it->second.by_patient.end()) return false;
            if (stream.labels != jt->second.labels) return false;
        }
    }
    return true;
}

double mean_pairwise_similarity(const BundleSet& bundles) {
    std::vector<std::string> ids;
    for (const auto& [aid, b] : bundles) ids.push_back(aid);
    const auto m = prediction_similarity_matrix(bundles, ids, "id ascending", 4);
    double sum = 0.0;
    std::size_t cells = 0;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = i + 1; j < m.size(); ++j) {
            sum += m.values[i][j];
            ++cells;
        }
    return sum / static_cast<double>(cells);
}

} // namespace

TEST_CASE("cohort generation is deterministic") {
    const auto config = small_config();
    const auto one = generate_cohort(config, 1);
    const auto two = generate_cohort(config, 1);
    const auto parallel = generate_cohort(config, 6);
    CHECK(same_records(one.records, two.records));
    CHECK(same_records(one.records, parallel.records));

    const auto p1 = generate_predictors(one, config, 1);
    const auto p2 = generate_predictors(two, config, 6);
    CHECK(same_bundles(p1, p2));

    SynthConfig other = config;
    other.seed = 8;
    CHECK(!same_records(generate_cohort(other).records, one.records));
}

TEST_CASE("generated records respect the requested shape") {
    auto config = small_config();
    config.patients = 150;
    const auto cohort = generate_cohort(config, 4);
    REQUIRE(cohort.records.size() == 150);
    CHECK(cohort.records.front().patient_id == "p0001");
    CHECK(cohort.records.back().patient_id == "p0150");

    std::set<std::string> ids;
    for (const auto& rec : cohort.records) {
        ids.insert(rec.patient_id);
        CHECK(rec.hour_count() >= config.min_len);
        CHECK(rec.hour_count() <= config.max_len);
        const auto& timeline = cohort.labels.at(rec.patient_id);
        CHECK(include_record(rec, timeline.t_sepsis));
        CHECK(timeline.hour_count() == rec.hour_count());
        // hourly rows carry the expected column set
        for (const auto& row : rec.hours) {
            CHECK(row.get(Variable::HR).has_value());
            CHECK(row.get(Variable::ICULOS).has_value());
            CHECK(!row.get(Variable::Lactate).has_value());
        }
    }
    CHECK(ids.size() == 150);
}

TEST_CASE("labeling round trip recovers the sampled onset") {
    auto config = small_config();
    config.patients = 120;
    const auto cohort = generate_cohort(config);
    int septic = 0;
    for (const auto& rec : cohort.records) {
        const auto& timeline = cohort.labels.at(rec.patient_id);
        const auto again = label_patient(rec, config.label_lead);
        CHECK(again.t_sepsis == timeline.t_sepsis);
        CHECK(again.labels == timeline.labels);
        if (timeline.septic()) {
            ++septic;
            CHECK(rec.events.culture_hours == std::vector<int>{*timeline.t_sepsis});
            CHECK(*timeline.t_sepsis >= 4);
            CHECK(*timeline.t_sepsis <= rec.hour_count());
        } else {
            CHECK(rec.events.culture_hours.empty());
        }
    }
    CHECK(septic > 0);
}

TEST_CASE("prevalence controls the septic fraction") {
    auto config = small_config();
    config.patients = 2000;
    config.max_len = 16;

    config.prevalence = 0.0;
    for (const auto& [pid, t] : generate_cohort(config, 8).labels) CHECK(!t.septic());

    config.prevalence = 1.0;
    for (const auto& [pid, t] : generate_cohort(config, 8).labels) CHECK(t.septic());

    config.prevalence = 0.3;
    int septic = 0;
    const auto cohort = generate_cohort(config, 8);
    for (const auto& [pid, t] : cohort.labels) septic += t.septic() ? 1 : 0;
    const double fraction = static_cast<double>(septic) / 2000.0;
    CHECK(fraction > 0.25);
    CHECK(fraction < 0.35);
}

TEST_CASE("error-free predictors copy the labels") {
    auto config = small_config();
    config.error.fp_rate = 0.0;
    config.error.fn_rate = 0.0;
    const auto cohort = generate_cohort(config);
    const auto bundles = generate_predictors(cohort, config, 3);
    REQUIRE(bundles.size() == 4);
    CHECK(bundles.count("a01") == 1);
    CHECK(bundles.count("a04") == 1);
    for (const auto& [aid, bundle] : bundles)
        for (const auto& [pid, stream] : bundle.by_patient)
            CHECK(stream.labels == cohort.labels.at(pid).labels);
}

TEST_CASE("fully shared noise makes the predictors identical") {
    auto config = small_config();
    config.rho = 1.0;
    config.error.fp_rate = 0.3;
    config.error.fn_rate = 0.3;
    const auto cohort = generate_cohort(config);
    const auto bundles = generate_predictors(cohort, config, 3);
    const auto& first = bundles.begin()->second;
    bool any_error = false;
    for (const auto& [aid, bundle] : bundles)
        for (const auto& [pid, stream] : bundle.by_patient) {
            CHECK(stream.labels == first.by_patient.at(pid).labels);
            any_error |= stream.labels != cohort.labels.at(pid).labels;
        }
    CHECK(any_error); // the noise itself still fires
}

TEST_CASE("shared-noise level orders the population similarity") {
    auto config = small_config();
    config.patients = 200;
    config.max_len = 48;
    config.algorithms = 5;
    config.error.fp_rate = 0.25;
    config.error.fn_rate = 0.25;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        config.seed = seed;
        const auto cohort = generate_cohort(config, 8);
        std::vector<double> sims;
        for (double rho : {0.0, 0.5, 1.0}) {
            config.rho = rho;
            sims.push_back(mean_pairwise_similarity(generate_predictors(cohort, config, 8)));
        }
        CHECK(sims[0] < sims[1]);
        CHECK(sims[1] < sims[2]);
        CHECK(sims[2] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("detection lag shifts the predicted onset") {
    auto config = small_config();
    config.prevalence = 1.0;
    config.error.fp_rate = 0.0;
    config.error.fn_rate = 0.0;
    config.error.lag_min = 3;
    config.error.lag_max = 3;
    const auto cohort = generate_cohort(config);
    const auto bundles = generate_predictors(cohort, config);
    for (const auto& [aid, bundle] : bundles) {
        for (const auto& [pid, stream] : bundle.by_patient) {
            const auto& timeline = cohort.labels.at(pid);
            REQUIRE(timeline.septic());
            for (int h = 1; h <= timeline.hour_count(); ++h) {
                const int want =
                    h >= *timeline.t_sepsis + 3 - config.label_lead ? 1 : 0;
                CHECK(stream.labels[static_cast<std::size_t>(h - 1)] == want);
            }
        }
    }
}

TEST_CASE("per-algorithm error models apply independently") {
    auto config = small_config();
    config.prevalence = 0.0; // only false positives can fire
    config.algorithms = 2;
    config.patients = 300;
    config.per_algorithm = {ErrorModel{0.0, 0.0, 0, 0}, ErrorModel{0.5, 0.0, 0, 0}};
    const auto cohort = generate_cohort(config, 4);
    const auto bundles = generate_predictors(cohort, config, 4);

    long long clean = 0, noisy = 0;
    for (const auto& [pid, stream] : bundles.at("a01").by_patient)
        for (int x : stream.labels) clean += x;
    for (const auto& [pid, stream] : bundles.at("a02").by_patient)
        for (int x : stream.labels) noisy += x;
    CHECK(clean == 0);
    CHECK(noisy > 0);
}

TEST_CASE("configuration validation") {
    CHECK_NOTHROW(SynthConfig{}.validate());

    auto bad = small_config();
    bad.patients = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = small_config();
    bad.min_len = 7;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = small_config();
    bad.min_len = 20;
    bad.max_len = 10;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = small_config();
    bad.max_len = 400;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = small_config();
    bad.prevalence = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = small_config();
    bad.rho = -0.1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = small_config();
    bad.error.fp_rate = 1.2;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = small_config();
    bad.error.lag_min = 5;
    bad.error.lag_max = 2;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = small_config();
    bad.algorithms = 3;
    bad.per_algorithm = {ErrorModel{}, ErrorModel{}};
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    bad = small_config();
    bad.label_lead = -1;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
