#include "sepvote/cohort.hpp"

#include <algorithm>

#include "sepvote/error.hpp"
#include "sepvote/parallel.hpp"

namespace sepvote {

namespace {

std::vector<std::filesystem::path> sorted_files_with_suffix(const std::filesystem::path& dir,
                                                            const std::string& suffix) {
    if (!std::filesystem::is_directory(dir))
        throw Error("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.size() > suffix.size() && name.ends_with(suffix))
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

} // namespace

std::vector<PatientRecord> load_patient_dir(const std::filesystem::path& dir,
                                            const PatientParseOptions& options,
                                            unsigned workers) {
    std::vector<std::filesystem::path> files;
    for (const auto& path : sorted_files_with_suffix(dir, ".psv")) {
        const std::string name = path.filename().string();
        if (name.ends_with(".evt.psv") || name.ends_with(".label.psv")) continue;
        files.push_back(path);
    }
    std::vector<PatientRecord> records(files.size());
    parallel_for(files.size(), workers, [&](std::size_t i) {
        records[i] = read_patient_file(files[i], options);
        auto sidecar = files[i];
        sidecar.replace_extension(".evt.psv");
        if (std::filesystem::exists(sidecar))
            records[i].events = read_event_file(sidecar);
    });
    return records;
}

CohortLabels load_label_dir(const std::filesystem::path& dir, int lead) {
    CohortLabels labels;
    for (const auto& path : sorted_files_with_suffix(dir, ".psv")) {
        std::string stem = path.filename().string();
        stem.resize(stem.size() - 4);
        if (stem.ends_with(".label")) stem.resize(stem.size() - 6);
        LabelTimeline timeline;
        timeline.labels = read_label_file(path);
        auto first = std::find(timeline.labels.begin(), timeline.labels.end(), 1);
        if (first != timeline.labels.end()) {
            int first_hour = static_cast<int>(first - timeline.labels.begin()) + 1;
            timeline.t_sepsis = first_hour + lead;
        }
        labels.emplace(std::move(stem), std::move(timeline));
    }
    return labels;
}

BundleSet load_prediction_dir(const std::filesystem::path& preds_dir, unsigned workers) {
    if (!std::filesystem::is_directory(preds_dir))
        throw Error("not a directory: " + preds_dir.string());
    std::vector<std::filesystem::path> algo_dirs;
    for (const auto& entry : std::filesystem::directory_iterator(preds_dir))
        if (entry.is_directory()) algo_dirs.push_back(entry.path());
    std::sort(algo_dirs.begin(), algo_dirs.end());

    BundleSet bundles;
    for (const auto& algo_dir : algo_dirs) {
        const std::string algo = algo_dir.filename().string();
        auto files = sorted_files_with_suffix(algo_dir, ".psv");
        std::vector<PredictionStream> streams(files.size());
        parallel_for(files.size(), workers, [&](std::size_t i) {
            streams[i] = read_prediction_file(files[i], algo, files[i].stem().string());
        });
        PredictionBundle bundle;
        bundle.algorithm_id = algo;
        for (auto& s : streams) {
            std::string pid = s.patient_id;
            bundle.by_patient.emplace(std::move(pid), std::move(s));
        }
        bundles.emplace(algo, std::move(bundle));
    }
    return bundles;
}

namespace {

void report_missing(const std::vector<std::string>& missing) {
    if (missing.empty()) return;
    std::string msg = "coverage mismatch; missing (algorithm, patient) pairs:";
    for (const auto& m : missing) msg += " " + m;
    throw DataError(msg);
}

} // namespace

void check_coverage(const BundleSet& bundles, const CohortLabels& labels) {
    std::vector<std::string> missing;
    for (const auto& [algo, bundle] : bundles) {
        for (const auto& [pid, timeline] : labels) {
            auto it = bundle.by_patient.find(pid);
            if (it == bundle.by_patient.end()) {
                missing.push_back("(" + algo + ", " + pid + ")");
            } else if (it->second.hour_count() != timeline.hour_count()) {
                throw DataError("stream length " + std::to_string(it->second.hour_count()) +
                                " != record length " + std::to_string(timeline.hour_count()) +
                                " for (" + algo + ", " + pid + ")");
            }
        }
    }
    report_missing(missing);
}

void check_coverage(const BundleSet& bundles) {
    if (bundles.empty()) return;
    std::vector<std::string> patients;
    for (const auto& [algo, bundle] : bundles)
        for (const auto& [pid, stream] : bundle.by_patient)
            if (std::find(patients.begin(), patients.end(), pid) == patients.end())
                patients.push_back(pid);
    std::sort(patients.begin(), patients.end());
    std::vector<std::string> missing;
    for (const auto& [algo, bundle] : bundles)
        for (const auto& pid : patients)
            if (!bundle.by_patient.count(pid))
                missing.push_back("(" + algo + ", " + pid + ")");
    report_missing(missing);
}

} // namespace sepvote
