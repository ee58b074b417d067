#include "sepvote/psv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "sepvote/error.hpp"

namespace sepvote {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(pos));
            break;
        }
        lines.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    for (auto& line : lines)
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (true) {
        std::size_t bar = line.find('|', pos);
        if (bar == std::string_view::npos) {
            fields.push_back(line.substr(pos));
            break;
        }
        fields.push_back(line.substr(pos, bar - pos));
        pos = bar + 1;
    }
    return fields;
}

double parse_number(std::string_view token, std::size_t line_no, std::string_view column) {
    double value = 0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value))
        throw FormatError("line " + std::to_string(line_no) + ": invalid numeric token '" +
                          std::string(token) + "' in column " + std::string(column));
    return value;
}

int parse_int(std::string_view token, std::size_t line_no, std::string_view what) {
    int value = 0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw FormatError("line " + std::to_string(line_no) + ": invalid integer '" +
                          std::string(token) + "' for " + std::string(what));
    return value;
}

void check_cell_invariants(Variable v, double value, std::size_t line_no, int row_index) {
    switch (v) {
        case Variable::Gender:
        case Variable::Unit1:
        case Variable::Unit2:
            if (value != 0.0 && value != 1.0)
                throw FormatError("line " + std::to_string(line_no) + ": " +
                                  std::string(variable_name(v)) + " must be 0 or 1");
            break;
        case Variable::Age:
            if (value < 0.0)
                throw FormatError("line " + std::to_string(line_no) + ": Age must be >= 0");
            break;
        case Variable::ICULOS:
            if (value < 1.0)
                throw FormatError("line " + std::to_string(line_no) + ": ICULOS must be >= 1");
            if (value != static_cast<double>(row_index))
                throw FormatError("line " + std::to_string(line_no) +
                                  ": ICULOS must be contiguous from 1 (expected " +
                                  std::to_string(row_index) + ")");
            break;
        default:
            break;
    }
}

} // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "NaN";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

PatientRecord parse_patient_file(std::string_view text, std::string patient_id,
                                 const PatientParseOptions& options) {
    auto lines = split_lines(text);
    if (lines.empty()) throw FormatError("empty file: missing header");

    PatientRecord record;
    record.patient_id = std::move(patient_id);

    std::unordered_set<int> seen;
    for (auto name : split_fields(lines[0])) {
        auto v = variable_from_name(name);
        if (!v) throw FormatError("unknown column: " + std::string(name));
        if (!seen.insert(static_cast<int>(*v)).second)
            throw FormatError("duplicate column: " + std::string(name));
        record.columns.push_back(*v);
    }

    if (lines.size() == 1) throw FormatError("no hourly rows");

    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        auto fields = split_fields(lines[i]);
        if (fields.size() != record.columns.size())
            throw FormatError("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(record.columns.size()) + " fields, got " +
                              std::to_string(fields.size()));
        HourRow row;
        const int row_index = static_cast<int>(i);
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (fields[c] == "NaN") continue;
            Variable v = record.columns[c];
            double value = parse_number(fields[c], line_no, variable_name(v));
            check_cell_invariants(v, value, line_no, row_index);
            row.set(v, value);
        }
        record.hours.push_back(row);
    }

    if (record.hour_count() > kMaxRecordHours) {
        if (options.truncation == TruncationPolicy::error)
            throw FormatError("record has " + std::to_string(record.hour_count()) +
                              " rows, more than the two-week maximum of " +
                              std::to_string(kMaxRecordHours));
        record.hours.resize(kMaxRecordHours);
    }
    return record;
}

PatientRecord read_patient_file(const std::filesystem::path& path,
                                const PatientParseOptions& options) {
    try {
        return parse_patient_file(read_text_file(path), path.stem().string(), options);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::string serialize_patient(const PatientRecord& record) {
    std::string out;
    for (std::size_t c = 0; c < record.columns.size(); ++c) {
        if (c) out += '|';
        out += variable_name(record.columns[c]);
    }
    out += '\n';
    for (const auto& row : record.hours) {
        for (std::size_t c = 0; c < record.columns.size(); ++c) {
            if (c) out += '|';
            auto v = row.get(record.columns[c]);
            out += v ? format_double(*v) : "NaN";
        }
        out += '\n';
    }
    return out;
}

EventTimeline parse_event_file(std::string_view text) {
    EventTimeline events;
    auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        auto fields = split_fields(lines[i]);
        if (fields.size() != 3)
            throw FormatError("line " + std::to_string(line_no) +
                              ": expected kind|a|b, got " + std::to_string(fields.size()) +
                              " fields");
        std::string_view kind = fields[0];
        if (kind == "abx") {
            int start = parse_int(fields[1], line_no, "abx start");
            int end = parse_int(fields[2], line_no, "abx end");
            events.iv_antibiotic_intervals.emplace_back(start, end);
        } else if (kind == "culture") {
            if (!fields[2].empty())
                throw FormatError("line " + std::to_string(line_no) +
                                  ": culture line must end with an empty field");
            events.culture_hours.push_back(parse_int(fields[1], line_no, "culture hour"));
        } else if (kind == "sofa") {
            int hour = parse_int(fields[1], line_no, "sofa hour");
            int score = parse_int(fields[2], line_no, "sofa score");
            events.sofa_series.emplace_back(hour, score);
        } else {
            throw FormatError("line " + std::to_string(line_no) + ": unknown event kind '" +
                              std::string(kind) + "'");
        }
    }
    events.validate();
    return events;
}

EventTimeline read_event_file(const std::filesystem::path& path) {
    try {
        return parse_event_file(read_text_file(path));
    } catch (const Error& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::string serialize_events(const EventTimeline& events) {
    std::string out;
    for (const auto& [start, end] : events.iv_antibiotic_intervals)
        out += "abx|" + std::to_string(start) + "|" + std::to_string(end) + "\n";
    for (int h : events.culture_hours)
        out += "culture|" + std::to_string(h) + "|\n";
    for (const auto& [hour, score] : events.sofa_series)
        out += "sofa|" + std::to_string(hour) + "|" + std::to_string(score) + "\n";
    return out;
}

PredictionStream parse_prediction_file(std::string_view text, std::string algorithm_id,
                                       std::string patient_id) {
    PredictionStream stream;
    stream.algorithm_id = std::move(algorithm_id);
    stream.patient_id = std::move(patient_id);
    auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        auto fields = split_fields(lines[i]);
        if (fields.size() != 2)
            throw FormatError("line " + std::to_string(line_no) +
                              ": expected probability|label");
        double prob = std::nan("");
        if (fields[0] != "NaN") {
            prob = parse_number(fields[0], line_no, "PredictedProbability");
            if (prob < 0.0 || prob > 1.0)
                throw FormatError("line " + std::to_string(line_no) +
                                  ": probability must be in [0,1]");
        }
        if (fields[1] == "0") {
            stream.labels.push_back(0);
        } else if (fields[1] == "1") {
            stream.labels.push_back(1);
        } else {
            throw FormatError("line " + std::to_string(line_no) + ": label must be 0 or 1");
        }
        stream.probabilities.push_back(prob);
    }
    return stream;
}

PredictionStream read_prediction_file(const std::filesystem::path& path,
                                      std::string algorithm_id, std::string patient_id) {
    try {
        return parse_prediction_file(read_text_file(path), std::move(algorithm_id),
                                     std::move(patient_id));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::string serialize_prediction(const PredictionStream& stream) {
    std::string out;
    for (std::size_t i = 0; i < stream.labels.size(); ++i) {
        double p = i < stream.probabilities.size() ? stream.probabilities[i] : std::nan("");
        out += format_double(p);
        out += '|';
        out += stream.labels[i] ? '1' : '0';
        out += '\n';
    }
    return out;
}

std::vector<int> parse_label_file(std::string_view text) {
    std::vector<int> labels;
    auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i] == "0") labels.push_back(0);
        else if (lines[i] == "1") labels.push_back(1);
        else
            throw FormatError("line " + std::to_string(i + 1) + ": label must be 0 or 1");
    }
    return labels;
}

std::vector<int> read_label_file(const std::filesystem::path& path) {
    try {
        return parse_label_file(read_text_file(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::string serialize_labels(const std::vector<int>& labels) {
    std::string out;
    for (int x : labels) {
        out += x ? '1' : '0';
        out += '\n';
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("short write to " + path.string());
}

} // namespace sepvote
