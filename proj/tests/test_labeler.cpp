#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "sepvote/labeler.hpp"

using namespace sepvote;

namespace {

PatientRecord make_record(int hours, EventTimeline events = {}) {
    PatientRecord rec;
    rec.patient_id = "p";
    rec.hours.resize(static_cast<std::size_t>(hours));
    rec.events = std::move(events);
    return rec;
}

EventTimeline shifted(const EventTimeline& ev, int k) {
    EventTimeline out;
    for (const auto& [s, e] : ev.iv_antibiotic_intervals)
        out.iv_antibiotic_intervals.emplace_back(s + k, e + k);
    for (int h : ev.culture_hours) out.culture_hours.push_back(h + k);
    for (const auto& [h, s] : ev.sofa_series) out.sofa_series.emplace_back(h + k, s);
    return out;
}

} // namespace

TEST_CASE("suspicion time") {
    SUBCASE("antibiotics first, culture inside 24h") {
        EventTimeline ev;
        ev.iv_antibiotic_intervals = {{10, 82}};
        ev.culture_hours = {20};
        CHECK(suspicion_time(ev) == 10);
    }
    SUBCASE("culture first but start beyond 72h") {
        EventTimeline ev;
        ev.culture_hours = {5};
        ev.iv_antibiotic_intervals = {{80, 160}};
        CHECK(!suspicion_time(ev).has_value());
    }
    SUBCASE("culture first inside 72h takes the culture hour") {
        EventTimeline ev;
        ev.culture_hours = {5};
        ev.iv_antibiotic_intervals = {{70, 150}};
        CHECK(suspicion_time(ev) == 5);
    }
    SUBCASE("culture more than 24h after the course start") {
        EventTimeline ev;
        ev.iv_antibiotic_intervals = {{10, 82}};
        ev.culture_hours = {35};
        CHECK(!suspicion_time(ev).has_value());
    }
    SUBCASE("short course never qualifies") {
        EventTimeline ev;
        ev.iv_antibiotic_intervals = {{10, 81}};
        ev.culture_hours = {20};
        CHECK(!suspicion_time(ev).has_value());
        ev.iv_antibiotic_intervals = {{10, 82}};
        CHECK(suspicion_time(ev) == 10);
    }
    SUBCASE("earliest qualifying pair wins") {
        EventTimeline ev;
        ev.iv_antibiotic_intervals = {{40, 120}, {15, 90}};
        ev.culture_hours = {50, 16};
        CHECK(suspicion_time(ev) == 15);
    }
    SUBCASE("no events") {
        CHECK(!suspicion_time(EventTimeline{}).has_value());
    }
}

TEST_CASE("short course sensitivity") {
    EventTimeline ev;
    ev.iv_antibiotic_intervals = {{10, 50}};
    ev.culture_hours = {20};
    CHECK(!suspicion_time(ev).has_value());
    CHECK(suspicion_time_ignoring_course_length(ev) == 10);
    CHECK(short_course_affected(ev));

    EventTimeline full;
    full.iv_antibiotic_intervals = {{10, 82}};
    full.culture_hours = {20};
    CHECK(!short_course_affected(full));
    CHECK(!short_course_affected(EventTimeline{}));

    // short course earlier than an independently qualifying long course
    EventTimeline mixed;
    mixed.iv_antibiotic_intervals = {{5, 20}, {30, 110}};
    mixed.culture_hours = {6, 31};
    CHECK(suspicion_time(mixed) == 6);
    CHECK(suspicion_time_ignoring_course_length(mixed) == 5);
    CHECK(short_course_affected(mixed));
}

TEST_CASE("sofa deterioration time") {
    SUBCASE("two point rise inside the window") {
        EventTimeline ev;
        ev.sofa_series = {{0, 2}, {10, 5}};
        CHECK(sofa_time(ev) == 10);
    }
    SUBCASE("baseline outside the 24h window") {
        EventTimeline ev;
        ev.sofa_series = {{0, 5}, {30, 7}};
        CHECK(!sofa_time(ev).has_value());
    }
    SUBCASE("window boundary is inclusive") {
        EventTimeline ev;
        ev.sofa_series = {{0, 2}, {24, 4}};
        CHECK(sofa_time(ev) == 24);
        ev.sofa_series = {{0, 2}, {25, 4}};
        CHECK(!sofa_time(ev).has_value());
    }
    SUBCASE("earliest qualifying hour wins") {
        EventTimeline ev;
        ev.sofa_series = {{0, 1}, {5, 3}, {9, 6}};
        CHECK(sofa_time(ev) == 5);
    }
    SUBCASE("rises smaller than two points never fire") {
        EventTimeline ev;
        ev.sofa_series = {{0, 3}, {6, 4}, {12, 4}};
        CHECK(!sofa_time(ev).has_value());
    }
    SUBCASE("no scores") {
        CHECK(!sofa_time(EventTimeline{}).has_value());
    }
}

TEST_CASE("sepsis onset pairing") {
    CHECK(sepsis_onset(100, 90) == 90);
    CHECK(!sepsis_onset(100, 130).has_value());
    CHECK(sepsis_onset(100, 76) == 76);   // t_sofa at t_susp - 24
    CHECK(sepsis_onset(100, 112) == 100); // t_sofa at t_susp + 12
    CHECK(!sepsis_onset(100, 75).has_value());
    CHECK(!sepsis_onset(100, 113).has_value());
    CHECK(!sepsis_onset(std::nullopt, 90).has_value());
    CHECK(!sepsis_onset(100, std::nullopt).has_value());
    CHECK(!sepsis_onset(std::nullopt, std::nullopt).has_value());
}

TEST_CASE("hourly labels") {
    SUBCASE("ten hour record with onset at 8") {
        const auto labels = hourly_labels(make_record(10), 8, 6);
        CHECK(labels == std::vector<int>{0, 1, 1, 1, 1, 1, 1, 1, 1, 1});
    }
    SUBCASE("no onset means all zeros") {
        CHECK(hourly_labels(make_record(5), std::nullopt) == std::vector<int>{0, 0, 0, 0, 0});
    }
    SUBCASE("lead reaching before admission clips to hour 1") {
        CHECK(hourly_labels(make_record(4), 3, 6) == std::vector<int>{1, 1, 1, 1});
    }
    SUBCASE("zero lead starts at onset") {
        CHECK(hourly_labels(make_record(6), 4, 0) == std::vector<int>{0, 0, 0, 1, 1, 1});
    }
    SUBCASE("onset past the record end leaves all hours negative") {
        CHECK(hourly_labels(make_record(4), 20, 6) == std::vector<int>{0, 0, 0, 0});
    }
    SUBCASE("labels are monotone nondecreasing") {
        std::mt19937_64 rng(11);
        std::uniform_int_distribution<int> len(1, 60);
        std::uniform_int_distribution<int> onset(1, 80);
        std::uniform_int_distribution<int> lead(0, 12);
        for (int trial = 0; trial < 200; ++trial) {
            const auto labels = hourly_labels(make_record(len(rng)), onset(rng), lead(rng));
            for (std::size_t i = 1; i < labels.size(); ++i)
                CHECK(labels[i] >= labels[i - 1]);
        }
    }
}

TEST_CASE("inclusion rules") {
    CHECK(!include_record(make_record(7), std::nullopt));
    CHECK(!include_record(make_record(7), 7));
    CHECK(!include_record(make_record(8), 3));
    CHECK(include_record(make_record(8), 4));
    CHECK(include_record(make_record(20), std::nullopt));
    CHECK(include_record(make_record(8), std::nullopt));
}

TEST_CASE("full patient labeling") {
    EventTimeline ev;
    ev.iv_antibiotic_intervals = {{10, 82}};
    ev.culture_hours = {20};
    ev.sofa_series = {{0, 2}, {10, 5}};
    const auto timeline = label_patient(make_record(16, ev), 6);
    CHECK(timeline.t_suspicion == 10);
    CHECK(timeline.t_sofa == 10);
    CHECK(timeline.t_sepsis == 10);
    CHECK(timeline.septic());
    CHECK(timeline.hour_count() == 16);
    CHECK(timeline.labels ==
          std::vector<int>{0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1});

    const auto quiet = label_patient(make_record(10), 6);
    CHECK(!quiet.septic());
    CHECK(quiet.labels == std::vector<int>(10, 0));
}

TEST_CASE("labeler agrees with the enumerating reference") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 20000; ++trial) {
        const auto ev = oracles::random_events(rng);
        CHECK(suspicion_time(ev) == oracles::suspicion(ev));
        CHECK(suspicion_time_ignoring_course_length(ev) == oracles::suspicion(ev, false));
        CHECK(sofa_time(ev) == oracles::sofa(ev));
        CHECK(sepsis_onset(suspicion_time(ev), sofa_time(ev)) == oracles::onset(ev));
    }
}

TEST_CASE("event times shift with the clock") {
    std::mt19937_64 rng(55);
    std::uniform_int_distribution<int> shift(1, 40);
    for (int trial = 0; trial < 500; ++trial) {
        const auto ev = oracles::random_events(rng);
        const int k = shift(rng);
        const auto moved = shifted(ev, k);
        auto plus = [&](std::optional<int> t) -> std::optional<int> {
            if (!t.has_value()) return std::nullopt;
            return *t + k;
        };
        CHECK(suspicion_time(moved) == plus(suspicion_time(ev)));
        CHECK(sofa_time(moved) == plus(sofa_time(ev)));
        CHECK(sepsis_onset(suspicion_time(moved), sofa_time(moved)) ==
              plus(sepsis_onset(suspicion_time(ev), sofa_time(ev))));
    }
}
