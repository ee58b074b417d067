#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sepvote {

/// The 40 hourly clinical variables, in canonical column order.
/// 8 vital signs, 28 laboratory values, 6 demographic values.
inline constexpr std::size_t kVariableCount = 40;

inline constexpr std::array<std::string_view, kVariableCount> kVariableNames = {
    "HR",           "O2Sat",        "Temp",            "SBP",
    "MAP",          "DBP",          "Resp",            "EtCO2",
    "BaseExcess",   "HCO3",         "FiO2",            "pH",
    "PaCO2",        "SaO2",         "AST",             "BUN",
    "Alkalinephos", "Calcium",      "Chloride",        "Creatinine",
    "Bilirubin-direct", "Glucose",  "Lactate",         "Magnesium",
    "Phosphate",    "Potassium",    "Bilirubin-total", "TroponinI",
    "Hct",          "Hgb",          "PTT",             "WBC",
    "Fibrinogen",   "Platelets",    "Age",             "Gender",
    "Unit1",        "Unit2",        "HospAdmTime",     "ICULOS",
};

enum class Variable : int {
    HR = 0, O2Sat, Temp, SBP, MAP, DBP, Resp, EtCO2,
    BaseExcess, HCO3, FiO2, pH, PaCO2, SaO2, AST, BUN,
    Alkalinephos, Calcium, Chloride, Creatinine, BilirubinDirect, Glucose,
    Lactate, Magnesium, Phosphate, Potassium, BilirubinTotal, TroponinI,
    Hct, Hgb, PTT, WBC, Fibrinogen, Platelets, Age, Gender,
    Unit1, Unit2, HospAdmTime, ICULOS,
};

/// Column name lookup; returns std::nullopt for unknown names.
std::optional<Variable> variable_from_name(std::string_view name);
std::string_view variable_name(Variable v);

/// One hourly row: every Table-1 variable, each possibly missing.
struct HourRow {
    std::array<std::optional<double>, kVariableCount> values{};

    std::optional<double> get(Variable v) const { return values[static_cast<std::size_t>(v)]; }
    void set(Variable v, std::optional<double> x) { values[static_cast<std::size_t>(v)] = std::move(x); }
    std::size_t missing_count() const;
};

/// Antibiotic courses, culture draws and the SOFA series for one patient.
/// Hours are non-negative; intervals satisfy start <= end.
struct EventTimeline {
    std::vector<std::pair<int, int>> iv_antibiotic_intervals;
    std::vector<int> culture_hours;
    std::vector<std::pair<int, int>> sofa_series; // (hour, integer score), sorted by hour

    void validate() const; // throws DataError on a violated invariant
};

struct Hospital {
    enum class Kind { A, B, C, Other };
    Kind kind = Kind::Other;
    std::string name; // used when kind == Other

    static Hospital from_string(std::string_view s);
    std::string to_string() const;
};

/// One ICU stay: hourly rows indexed by ICULOS (hour 1 = first row) plus the
/// event timeline. Rows are contiguous; a record holds at most 336 rows.
struct PatientRecord {
    std::string patient_id;
    std::vector<HourRow> hours;
    Hospital hospital;
    EventTimeline events;
    /// Column order of the source file; serialization preserves it.
    std::vector<Variable> columns;

    int hour_count() const { return static_cast<int>(hours.size()); }
};

/// Two-week cap on record length.
inline constexpr int kMaxRecordHours = 336;

/// One algorithm's hourly binary predictions for one patient. probabilities
/// is parallel to labels; NaN marks an absent probability.
struct PredictionStream {
    std::string algorithm_id;
    std::string patient_id;
    std::vector<int> labels;
    std::vector<double> probabilities;

    int hour_count() const { return static_cast<int>(labels.size()); }
};

/// Pooled empirical CDF of one variable over all non-missing hourly values in
/// the cohort. Step function as (value, cumulative fraction) pairs, strictly
/// increasing in value; empty when the variable was never observed.
std::vector<std::pair<double, double>>
empirical_cdf(const std::vector<PatientRecord>& cohort, Variable variable);

} // namespace sepvote
