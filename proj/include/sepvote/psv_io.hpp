#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sepvote/record.hpp"

namespace sepvote {

/// What to do with records longer than two weeks.
enum class TruncationPolicy { truncate, error };

struct PatientParseOptions {
    TruncationPolicy truncation = TruncationPolicy::truncate;
};

/// Shortest round-trip decimal form of v; missing values write as "NaN".
std::string format_double(double v);

/// Parses a pipe-separated patient file: a header of Table-1 column names
/// followed by one line per hour. Column binding is header-driven, missing
/// cells are the literal token "NaN" and stay missing. Throws FormatError
/// with a line number on malformed input.
PatientRecord parse_patient_file(std::string_view text, std::string patient_id = {},
                                 const PatientParseOptions& options = {});
PatientRecord read_patient_file(const std::filesystem::path& path,
                                const PatientParseOptions& options = {});

/// Writes the header (record.columns order) plus one line per hour.
std::string serialize_patient(const PatientRecord& record);

/// Parses an event sidecar: one event per line,
///   abx|<start>|<end>
///   culture|<hour>|
///   sofa|<hour>|<score>
EventTimeline parse_event_file(std::string_view text);
EventTimeline read_event_file(const std::filesystem::path& path);
std::string serialize_events(const EventTimeline& events);

/// Parses a prediction file: one "probability|label" line per hour, no
/// header. label is the literal 0 or 1; probability is in [0,1] or NaN.
PredictionStream parse_prediction_file(std::string_view text, std::string algorithm_id = {},
                                       std::string patient_id = {});
PredictionStream read_prediction_file(const std::filesystem::path& path,
                                      std::string algorithm_id = {}, std::string patient_id = {});
std::string serialize_prediction(const PredictionStream& stream);

/// Label files: one 0/1 line per hour, no header.
std::vector<int> parse_label_file(std::string_view text);
std::vector<int> read_label_file(const std::filesystem::path& path);
std::string serialize_labels(const std::vector<int>& labels);

/// Whole-file helpers.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

} // namespace sepvote
