#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sepvote/cohort.hpp"
#include "sepvote/diversity.hpp"
#include "sepvote/ensemble.hpp"
#include "sepvote/error.hpp"
#include "sepvote/labeler.hpp"
#include "sepvote/manifest.hpp"
#include "sepvote/parallel.hpp"
#include "sepvote/psv_io.hpp"
#include "sepvote/synth.hpp"
#include "sepvote/tree_edit.hpp"
#include "sepvote/utility.hpp"
#include "sepvote/version.hpp"

namespace fs = std::filesystem;
using namespace sepvote;

namespace {

std::string opt_str(std::optional<int> v) {
    return v.has_value() ? std::to_string(*v) : std::string();
}

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string matrix_csv(const SimilarityMatrix& m) {
    std::string out = "id";
    for (const auto& id : m.algorithm_ids) out += "," + csv_quote(id);
    out += "\n";
    for (std::size_t i = 0; i < m.size(); ++i) {
        out += csv_quote(m.algorithm_ids[i]);
        for (std::size_t j = 0; j < m.size(); ++j)
            out += "," + format_double(m.values[i][j]);
        out += "\n";
    }
    return out;
}

std::string table_csv(const std::vector<std::string>& ids,
                      const std::vector<std::vector<double>>& values) {
    std::string out = "id";
    for (const auto& id : ids) out += "," + csv_quote(id);
    out += "\n";
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out += csv_quote(ids[i]);
        for (std::size_t j = 0; j < ids.size(); ++j)
            out += "," + format_double(values[i][j]);
        out += "\n";
    }
    return out;
}

std::string matrix_meta_json(const SimilarityMatrix& m,
                             const std::map<std::string, std::string>& extra) {
    std::string out = "{\n";
    out += "  \"kind\": \"" + matrix_kind_name(m.kind) + "\",\n";
    out += "  \"ordering_key\": \"" + m.ordering_key + "\",\n";
    out += "  \"cohort_aggregation\": \"concatenation\",\n";
    for (const auto& [k, v] : extra)
        out += "  \"" + k + "\": " + v + ",\n";
    out += "  \"degenerate_cells\": [";
    for (std::size_t i = 0; i < m.degenerate_cells.size(); ++i) {
        if (i) out += ", ";
        out += "[" + std::to_string(m.degenerate_cells[i].first) + ", " +
               std::to_string(m.degenerate_cells[i].second) + "]";
    }
    out += "]\n}\n";
    return out;
}

// ranking file: scores.csv emitted by `score`, ids taken in row order
std::vector<std::string> read_rank_file(const fs::path& path) {
    const std::string text = read_text_file(path);
    std::vector<std::string> ids;
    std::size_t pos = 0;
    bool header = true;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header) { header = false; continue; }
        const std::size_t comma = line.find(',');
        ids.push_back(comma == std::string::npos ? line : line.substr(0, comma));
    }
    if (ids.empty())
        throw DataError(path.string() + ": no ranked ids");
    return ids;
}

struct UtilityFlags {
    std::string preset = "challenge-2019-default";
    UtilityParams params;

    void add_to(CLI::App* sub) {
        sub->add_option("--preset", preset, "named payoff preset")
            ->capture_default_str()
            ->check(CLI::IsMember({"challenge-2019-default"}));
        sub->add_option("--dt-early", params.dt_early,
                        "earliest rewarded hour relative to onset")->capture_default_str();
        sub->add_option("--dt-optimal", params.dt_optimal,
                        "ramp apex relative to onset")->capture_default_str();
        sub->add_option("--dt-late", params.dt_late,
                        "last scored hour relative to onset")->capture_default_str();
        sub->add_option("--u-tp-max", params.u_tp_max,
                        "payoff at the apex")->capture_default_str();
        sub->add_option("--u-fn-min", params.u_fn_min,
                        "payoff for a miss at dt-late")->capture_default_str();
        sub->add_option("--u-fp", params.u_fp,
                        "payoff per false alarm")->capture_default_str();
        sub->add_option("--u-tn", params.u_tn,
                        "payoff per true negative")->capture_default_str();
    }

    void describe(std::map<std::string, std::string>& config) const {
        config["preset"] = preset;
        config["dt_early"] = std::to_string(params.dt_early);
        config["dt_optimal"] = std::to_string(params.dt_optimal);
        config["dt_late"] = std::to_string(params.dt_late);
        config["u_tp_max"] = format_double(params.u_tp_max);
        config["u_fn_min"] = format_double(params.u_fn_min);
        config["u_fp"] = format_double(params.u_fp);
        config["u_tn"] = format_double(params.u_tn);
    }
};

void finish_manifest(RunManifest manifest, const fs::path& out_dir,
                     const std::string& manifest_path) {
    manifest.tool_version = kVersion;
    const fs::path target =
        manifest_path.empty() ? out_dir / "manifest.json" : fs::path(manifest_path);
    write_manifest(manifest, target);
}

// ---- label ----------------------------------------------------------------

struct LabelArgs {
    std::string patients, out, manifest;
    int lead = kDefaultLabelLead;
    std::string truncation = "truncate";
    unsigned threads = default_workers();
};

int run_label(const LabelArgs& args) {
    PatientParseOptions options;
    options.truncation = args.truncation == "error" ? TruncationPolicy::error
                                                    : TruncationPolicy::truncate;
    const auto records = load_patient_dir(args.patients, options, args.threads);

    const fs::path out_dir(args.out);
    fs::create_directories(out_dir / "labels");

    std::vector<LabelTimeline> timelines(records.size());
    parallel_for(records.size(), args.threads, [&](std::size_t i) {
        timelines[i] = label_patient(records[i], args.lead);
    });

    std::string summary = "patient_id,hours,t_suspicion,t_sofa,t_sepsis,"
                          "short_course,included,reason\n";
    std::size_t included = 0, short_record = 0, early_onset = 0, septic = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const PatientRecord& rec = records[i];
        const LabelTimeline& tl = timelines[i];
        std::string reason;
        if (rec.hour_count() < 8)
            reason = "short_record";
        else if (!include_record(rec, tl.t_sepsis))
            reason = "early_onset";
        const bool keep = reason.empty();
        if (keep) {
            ++included;
            if (tl.septic()) ++septic;
            write_text_file(out_dir / "labels" / (rec.patient_id + ".psv"),
                            serialize_labels(tl.labels));
        } else if (reason == "short_record") {
            ++short_record;
        } else {
            ++early_onset;
        }
        summary += csv_quote(rec.patient_id) + "," + std::to_string(rec.hour_count()) +
                   "," + opt_str(tl.t_suspicion) + "," + opt_str(tl.t_sofa) + "," +
                   opt_str(tl.t_sepsis) + "," +
                   (short_course_affected(rec.events) ? "1" : "0") + "," +
                   (keep ? "1" : "0") + "," + reason + "\n";
    }
    write_text_file(out_dir / "summary.csv", summary);

    std::string counts = "category,count\n";
    counts += "total," + std::to_string(records.size()) + "\n";
    counts += "included," + std::to_string(included) + "\n";
    counts += "included_septic," + std::to_string(septic) + "\n";
    counts += "excluded_short_record," + std::to_string(short_record) + "\n";
    counts += "excluded_early_onset," + std::to_string(early_onset) + "\n";
    write_text_file(out_dir / "counts.csv", counts);

    RunManifest manifest;
    manifest.subcommand = "label";
    manifest.config["lead"] = std::to_string(args.lead);
    manifest.config["truncation"] = args.truncation;
    manifest.inputs["patients"] = digest_directory(args.patients);
    finish_manifest(std::move(manifest), out_dir, args.manifest);
    return 0;
}

// ---- score ----------------------------------------------------------------

struct ScoreArgs {
    std::string labels, preds, out, manifest;
    int lead = kDefaultLabelLead;
    bool traces = false;
    UtilityFlags utility;
    unsigned threads = default_workers();
};

int run_score(const ScoreArgs& args) {
    args.utility.params.validate();
    const CohortLabels labels = load_label_dir(args.labels, args.lead);
    const BundleSet bundles = load_prediction_dir(args.preds, args.threads);
    check_coverage(bundles, labels);

    const fs::path out_dir(args.out);
    fs::create_directories(out_dir);

    struct Row {
        std::string id;
        CohortScore score;
    };
    std::vector<Row> rows;
    for (const auto& [id, bundle] : bundles) {
        Row row;
        row.id = id;
        row.score = normalized_score(bundle, labels, args.utility.params, args.threads);
        rows.push_back(std::move(row));
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.score.normalized != b.score.normalized)
            return a.score.normalized > b.score.normalized;
        return a.id < b.id;
    });

    std::string table = "algorithm,observed,inaction,perfect,normalized\n";
    for (const Row& row : rows) {
        table += csv_quote(row.id) + "," + format_double(row.score.observed) + "," +
                 format_double(row.score.inaction) + "," +
                 format_double(row.score.perfect) + "," +
                 format_double(row.score.normalized) + "\n";
    }
    write_text_file(out_dir / "scores.csv", table);

    if (args.traces) {
        for (const auto& [id, bundle] : bundles) {
            fs::create_directories(out_dir / "traces" / id);
            for (const auto& [pid, stream] : bundle.by_patient) {
                const UtilityTrace trace =
                    score_stream(stream.labels, labels.at(pid), args.utility.params);
                std::string text = "hour|u_k\n";
                for (std::size_t k = 0; k < trace.values.size(); ++k)
                    text += std::to_string(k + 1) + "|" + format_double(trace.values[k]) + "\n";
                write_text_file(out_dir / "traces" / id / (pid + ".psv"), text);
            }
        }
    }

    RunManifest manifest;
    manifest.subcommand = "score";
    manifest.config["lead"] = std::to_string(args.lead);
    manifest.config["traces"] = args.traces ? "true" : "false";
    args.utility.describe(manifest.config);
    manifest.inputs["labels"] = digest_directory(args.labels);
    manifest.inputs["preds"] = digest_directory(args.preds);
    finish_manifest(std::move(manifest), out_dir, args.manifest);
    return 0;
}

// ---- similarity -----------------------------------------------------------

struct SimilarityArgs {
    std::string kind = "unweighted";
    std::string labels, preds, out, manifest, rank_by;
    int lead = kDefaultLabelLead;
    UtilityFlags utility;
    unsigned threads = default_workers();
};

int run_similarity(const SimilarityArgs& args) {
    const BundleSet bundles = load_prediction_dir(args.preds, args.threads);
    check_coverage(bundles);

    std::vector<std::string> ids;
    std::string ordering_key;
    if (!args.rank_by.empty()) {
        ids = read_rank_file(args.rank_by);
        ordering_key = "rank file order";
        for (const auto& id : ids)
            if (!bundles.count(id))
                throw DataError("ranked id not in predictions: " + id);
    } else {
        for (const auto& [id, bundle] : bundles) ids.push_back(id);
        ordering_key = "algorithm id asc";
    }

    SimilarityMatrix m;
    if (args.kind == "weighted") {
        if (args.labels.empty())
            throw ConfigError("--kind weighted requires --labels");
        args.utility.params.validate();
        const CohortLabels labels = load_label_dir(args.labels, args.lead);
        check_coverage(bundles, labels);
        m = trace_similarity_matrix(bundles, labels, args.utility.params, ids,
                                    ordering_key, args.threads);
    } else {
        m = prediction_similarity_matrix(bundles, ids, ordering_key, args.threads);
    }

    const fs::path out_dir(args.out);
    fs::create_directories(out_dir);
    write_text_file(out_dir / "similarity.csv", matrix_csv(m));
    write_text_file(out_dir / "similarity_meta.json", matrix_meta_json(m, {}));

    RunManifest manifest;
    manifest.subcommand = "similarity";
    manifest.config["kind"] = args.kind;
    manifest.config["lead"] = std::to_string(args.lead);
    if (args.kind == "weighted") args.utility.describe(manifest.config);
    manifest.inputs["preds"] = digest_directory(args.preds);
    if (!args.labels.empty())
        manifest.inputs["labels"] = digest_directory(args.labels);
    if (!args.rank_by.empty())
        manifest.inputs["rank_by"] = digest_file(args.rank_by);
    finish_manifest(std::move(manifest), out_dir, args.manifest);
    return 0;
}

// ---- kappa ----------------------------------------------------------------

struct KappaArgs {
    std::string preds, out, manifest, rank_by;
    int top = 0;
    std::size_t bins = 20;
    unsigned threads = default_workers();
};

int run_kappa(const KappaArgs& args) {
    const BundleSet bundles = load_prediction_dir(args.preds, args.threads);
    check_coverage(bundles);

    std::vector<std::string> subset;
    if (!args.rank_by.empty()) {
        subset = read_rank_file(args.rank_by);
        for (const auto& id : subset)
            if (!bundles.count(id))
                throw DataError("ranked id not in predictions: " + id);
        if (args.top > 0) {
            if (static_cast<std::size_t>(args.top) > subset.size())
                throw DataError("--top exceeds ranked id count");
            subset.resize(static_cast<std::size_t>(args.top));
        }
    } else {
        for (const auto& [id, bundle] : bundles) subset.push_back(id);
    }

    const KappaDistribution dist =
        kappa_distribution(bundles, subset, args.bins, args.threads);

    const fs::path out_dir(args.out);
    fs::create_directories(out_dir);

    std::string table = "patient_id,kappa\n";
    for (std::size_t i = 0; i < dist.patient_ids.size(); ++i)
        table += csv_quote(dist.patient_ids[i]) + "," +
                 format_double(dist.kappas[i]) + "\n";
    write_text_file(out_dir / "kappa.csv", table);

    std::string hist = "bin_low,bin_high,count\n";
    const double step = 2.0 / static_cast<double>(dist.histogram.size());
    for (std::size_t i = 0; i < dist.histogram.size(); ++i) {
        hist += format_double(-1.0 + step * static_cast<double>(i)) + "," +
                format_double(-1.0 + step * static_cast<double>(i + 1)) + "," +
                std::to_string(dist.histogram[i]) + "\n";
    }
    write_text_file(out_dir / "histogram.csv", hist);

    std::string members = "algorithm\n";
    for (const auto& id : subset) members += csv_quote(id) + "\n";
    write_text_file(out_dir / "subset.csv", members);

    RunManifest manifest;
    manifest.subcommand = "kappa";
    manifest.config["top"] = std::to_string(args.top);
    manifest.config["bins"] = std::to_string(args.bins);
    manifest.inputs["preds"] = digest_directory(args.preds);
    if (!args.rank_by.empty())
        manifest.inputs["rank_by"] = digest_file(args.rank_by);
    finish_manifest(std::move(manifest), out_dir, args.manifest);
    return 0;
}

// ---- tree-dist ------------------------------------------------------------

struct TreeDistArgs {
    std::string trees, out, manifest;
    EditCosts costs;
    unsigned threads = default_workers();
};

int run_tree_dist(const TreeDistArgs& args) {
    if (!fs::is_directory(args.trees))
        throw DataError("not a directory: " + args.trees);
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(args.trees))
        if (entry.is_regular_file() && entry.path().extension() == ".ast")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw DataError("no .ast files under " + args.trees);

    std::vector<std::string> ids;
    std::vector<AstTree> trees;
    for (const auto& f : files) {
        ids.push_back(f.stem().string());
        try {
            trees.push_back(parse_tree(read_text_file(f)));
        } catch (const Error& e) {
            throw FormatError(f.string() + ": " + e.what());
        }
    }

    const CodeSimilarityResult result =
        code_similarity_matrix(trees, ids, "file name asc", args.costs, args.threads);

    const fs::path out_dir(args.out);
    fs::create_directories(out_dir);
    write_text_file(out_dir / "distance.csv", table_csv(ids, result.distances));
    write_text_file(out_dir / "similarity.csv", matrix_csv(result.similarity));
    write_text_file(out_dir / "similarity_meta.json",
                    matrix_meta_json(result.similarity,
                                     {{"zero_distance_cap", format_double(result.cap)}}));

    RunManifest manifest;
    manifest.subcommand = "tree-dist";
    manifest.config["insert"] = format_double(args.costs.insert_cost);
    manifest.config["delete"] = format_double(args.costs.delete_cost);
    manifest.config["relabel"] = format_double(args.costs.relabel_cost);
    manifest.inputs["trees"] = digest_directory(args.trees);
    finish_manifest(std::move(manifest), out_dir, args.manifest);
    return 0;
}

// ---- ensemble-build -------------------------------------------------------

struct BuildArgs {
    std::string labels, preds, out, manifest;
    std::string rule = "majority";
    double theta = 0.5;
    double tolerance = 1e-9;
    int max_members = 128;
    int lead = kDefaultLabelLead;
    UtilityFlags utility;
    unsigned threads = default_workers();
};

int run_ensemble_build(const BuildArgs& args) {
    args.utility.params.validate();
    const CohortLabels labels = load_label_dir(args.labels, args.lead);
    const BundleSet bundles = load_prediction_dir(args.preds, args.threads);
    check_coverage(bundles, labels);

    VoteRule rule;
    if (args.rule == "majority") {
        rule = VoteRule::majority();
    } else if (args.rule == "all-but-one") {
        rule = VoteRule::all_but_one();
    } else {
        rule = VoteRule{VoteRule::Kind::threshold_fraction, args.theta};
    }

    std::vector<std::string> candidates;
    for (const auto& [id, bundle] : bundles) candidates.push_back(id);

    GreedyOptions options;
    options.tolerance = args.tolerance;
    options.max_members = args.max_members;
    options.workers = args.threads;
    const GreedyResult result =
        greedy_select(candidates, bundles, labels, args.utility.params, rule, options);

    const fs::path out_dir(args.out);
    fs::create_directories(out_dir);
    write_text_file(out_dir / "ensemble.spec", serialize_spec(result.spec));

    std::string trajectory = "step,score\n";
    for (std::size_t i = 0; i < result.trajectory.size(); ++i)
        trajectory += std::to_string(i + 1) + "," +
                      format_double(result.trajectory[i]) + "\n";
    write_text_file(out_dir / "trajectory.csv", trajectory);

    RunManifest manifest;
    manifest.subcommand = "ensemble-build";
    manifest.config["rule"] = args.rule;
    manifest.config["theta"] = format_double(args.theta);
    manifest.config["tolerance"] = format_double(args.tolerance);
    manifest.config["max_members"] = std::to_string(args.max_members);
    manifest.config["lead"] = std::to_string(args.lead);
    args.utility.describe(manifest.config);
    manifest.inputs["labels"] = digest_directory(args.labels);
    manifest.inputs["preds"] = digest_directory(args.preds);
    finish_manifest(std::move(manifest), out_dir, args.manifest);
    return 0;
}

// ---- ensemble-apply -------------------------------------------------------

struct ApplyArgs {
    std::string spec, preds, out, manifest;
    std::string regime = "auto";
    double tau = 0.8;
    unsigned threads = default_workers();
};

int run_ensemble_apply(const ApplyArgs& args) {
    const EnsembleSpec spec = read_spec_file(args.spec);
    const BundleSet bundles = load_prediction_dir(args.preds, args.threads);
    check_coverage(bundles);

    Regime regime;
    if (args.regime == "auto") {
        RegimeSelector selector;
        selector.tau = args.tau;
        regime = select_regime(bundles, selector, args.threads);
    } else {
        regime = regime_from_name(args.regime);
    }

    const PredictionBundle voted = apply_ensemble(spec, bundles, regime, args.threads);

    const fs::path out_dir(args.out);
    fs::create_directories(out_dir / "voted");
    for (const auto& [pid, stream] : voted.by_patient)
        write_text_file(out_dir / "voted" / (pid + ".psv"), serialize_prediction(stream));

    RunManifest manifest;
    manifest.subcommand = "ensemble-apply";
    manifest.config["regime_flag"] = args.regime;
    manifest.config["regime_used"] = regime_name(regime);
    manifest.config["tau"] = format_double(args.tau);
    manifest.inputs["spec"] = digest_file(args.spec);
    manifest.inputs["preds"] = digest_directory(args.preds);
    finish_manifest(std::move(manifest), out_dir, args.manifest);
    return 0;
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
    std::string out, manifest;
    SynthConfig config;
    unsigned threads = default_workers();
};

int run_synth(const SynthArgs& args) {
    const SynthCohort cohort = generate_cohort(args.config, args.threads);
    const BundleSet bundles = generate_predictors(cohort, args.config, args.threads);

    const fs::path out_dir(args.out);
    fs::create_directories(out_dir / "patients");
    fs::create_directories(out_dir / "labels");
    for (const PatientRecord& rec : cohort.records) {
        write_text_file(out_dir / "patients" / (rec.patient_id + ".psv"),
                        serialize_patient(rec));
        if (!rec.events.iv_antibiotic_intervals.empty() ||
            !rec.events.culture_hours.empty() || !rec.events.sofa_series.empty()) {
            write_text_file(out_dir / "patients" / (rec.patient_id + ".evt.psv"),
                            serialize_events(rec.events));
        }
        write_text_file(out_dir / "labels" / (rec.patient_id + ".psv"),
                        serialize_labels(cohort.labels.at(rec.patient_id).labels));
    }
    for (const auto& [algo, bundle] : bundles) {
        fs::create_directories(out_dir / "preds" / algo);
        for (const auto& [pid, stream] : bundle.by_patient)
            write_text_file(out_dir / "preds" / algo / (pid + ".psv"),
                            serialize_prediction(stream));
    }

    RunManifest manifest;
    manifest.subcommand = "synth";
    manifest.seed = args.config.seed;
    manifest.config["patients"] = std::to_string(args.config.patients);
    manifest.config["min_len"] = std::to_string(args.config.min_len);
    manifest.config["max_len"] = std::to_string(args.config.max_len);
    manifest.config["prevalence"] = format_double(args.config.prevalence);
    manifest.config["lead"] = std::to_string(args.config.label_lead);
    manifest.config["algorithms"] = std::to_string(args.config.algorithms);
    manifest.config["rho"] = format_double(args.config.rho);
    manifest.config["fp"] = format_double(args.config.error.fp_rate);
    manifest.config["fn"] = format_double(args.config.error.fn_rate);
    manifest.config["lag_min"] = std::to_string(args.config.error.lag_min);
    manifest.config["lag_max"] = std::to_string(args.config.error.lag_max);
    finish_manifest(std::move(manifest), out_dir, args.manifest);
    return 0;
}

// ---- stats ----------------------------------------------------------------

struct StatsArgs {
    std::string patients, out, manifest;
    std::vector<std::string> variables;
    std::string truncation = "truncate";
    unsigned threads = default_workers();
};

int run_stats(const StatsArgs& args) {
    PatientParseOptions options;
    options.truncation = args.truncation == "error" ? TruncationPolicy::error
                                                    : TruncationPolicy::truncate;
    const auto records = load_patient_dir(args.patients, options, args.threads);

    std::vector<Variable> wanted;
    if (args.variables.empty()) {
        for (std::size_t i = 0; i < kVariableCount; ++i)
            wanted.push_back(static_cast<Variable>(i));
    } else {
        for (const auto& name : args.variables) {
            const auto v = variable_from_name(name);
            if (!v.has_value())
                throw ConfigError("unknown variable: " + name);
            wanted.push_back(*v);
        }
    }

    const fs::path out_dir(args.out);
    fs::create_directories(out_dir / "cdf");
    for (Variable v : wanted) {
        const auto cdf = empirical_cdf(records, v);
        if (cdf.empty()) continue;
        std::string table = "value,fraction\n";
        for (const auto& [value, fraction] : cdf)
            table += format_double(value) + "," + format_double(fraction) + "\n";
        write_text_file(out_dir / "cdf" / (std::string(variable_name(v)) + ".csv"), table);
    }

    RunManifest manifest;
    manifest.subcommand = "stats";
    manifest.config["truncation"] = args.truncation;
    std::string joined;
    for (const auto& name : args.variables) {
        if (!joined.empty()) joined += ",";
        joined += name;
    }
    manifest.config["variables"] = joined.empty() ? "all" : joined;
    manifest.inputs["patients"] = digest_directory(args.patients);
    finish_manifest(std::move(manifest), out_dir, args.manifest);
    return 0;
}

void add_common(CLI::App* sub, std::string* out, std::string* manifest_path,
                unsigned* threads) {
    sub->add_option("--out", *out, "output directory")->required();
    sub->add_option("--manifest", *manifest_path,
                    "manifest path (default: <out>/manifest.json)");
    sub->add_option("--threads", *threads, "worker threads")->capture_default_str();
    sub->set_config("--config", "", "read options from a TOML/INI file");
}

// CLI11 only consults config files attached to the root app, so the
// per-subcommand --config is applied by hand: flat key=value lines fill in
// options the command line left unset.
void apply_config_file(CLI::App* sub) {
    CLI::Option* cfg = sub->get_config_ptr();
    if (cfg == nullptr || cfg->count() == 0) return;
    const auto path = cfg->as<std::string>();
    for (const auto& item : sub->get_config_formatter()->from_file(path)) {
        if (!item.parents.empty())
            throw ConfigError("config file sections are not supported: " +
                              item.fullname());
        CLI::Option* op = sub->get_option_no_throw("--" + item.name);
        if (op == nullptr || op == cfg)
            throw ConfigError("unknown config key: " + item.name);
        if (op->count() > 0) continue; // explicit flags beat the file
        for (const auto& input : item.inputs) op->add_result(input);
        op->run_callback();
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sepsis prediction ensemble toolkit"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    app.set_version_flag("--version", kVersion);

    LabelArgs label_args;
    auto* label_cmd = app.add_subcommand("label", "derive hourly sepsis labels");
    label_cmd->add_option("--patients", label_args.patients, "patient .psv directory")
        ->required();
    label_cmd->add_option("--lead", label_args.lead, "hours of early labeling")
        ->capture_default_str();
    label_cmd->add_option("--truncation", label_args.truncation,
                          "overlong record policy")
        ->check(CLI::IsMember({"truncate", "error"}))->capture_default_str();
    add_common(label_cmd, &label_args.out, &label_args.manifest, &label_args.threads);

    ScoreArgs score_args;
    auto* score_cmd = app.add_subcommand("score", "utility-score prediction streams");
    score_cmd->add_option("--labels", score_args.labels, "label directory")->required();
    score_cmd->add_option("--preds", score_args.preds, "predictions directory")->required();
    score_cmd->add_option("--lead", score_args.lead, "lead used when labels were made")
        ->capture_default_str();
    score_cmd->add_flag("--traces", score_args.traces, "write per-patient utility traces");
    score_args.utility.add_to(score_cmd);
    add_common(score_cmd, &score_args.out, &score_args.manifest, &score_args.threads);

    SimilarityArgs sim_args;
    auto* sim_cmd = app.add_subcommand("similarity", "pairwise similarity matrix");
    sim_cmd->add_option("--kind", sim_args.kind, "similarity kind")
        ->check(CLI::IsMember({"unweighted", "weighted"}))->capture_default_str();
    sim_cmd->add_option("--preds", sim_args.preds, "predictions directory")->required();
    sim_cmd->add_option("--labels", sim_args.labels, "label directory (weighted kind)");
    sim_cmd->add_option("--rank-by", sim_args.rank_by, "scores.csv fixing row order");
    sim_cmd->add_option("--lead", sim_args.lead, "lead used when labels were made")
        ->capture_default_str();
    sim_args.utility.add_to(sim_cmd);
    add_common(sim_cmd, &sim_args.out, &sim_args.manifest, &sim_args.threads);

    KappaArgs kappa_args;
    auto* kappa_cmd = app.add_subcommand("kappa", "per-patient inter-rater agreement");
    kappa_cmd->add_option("--preds", kappa_args.preds, "predictions directory")->required();
    auto* rank_opt =
        kappa_cmd->add_option("--rank-by", kappa_args.rank_by, "scores.csv ranking file");
    kappa_cmd->add_option("--top", kappa_args.top, "restrict to the N top-ranked")
        ->needs(rank_opt);
    kappa_cmd->add_option("--bins", kappa_args.bins, "histogram bin count")
        ->capture_default_str();
    add_common(kappa_cmd, &kappa_args.out, &kappa_args.manifest, &kappa_args.threads);

    TreeDistArgs tree_args;
    auto* tree_cmd = app.add_subcommand("tree-dist", "tree edit distances over .ast files");
    tree_cmd->add_option("--trees", tree_args.trees, ".ast directory")->required();
    tree_cmd->add_option("--insert", tree_args.costs.insert_cost, "insert cost")
        ->capture_default_str();
    tree_cmd->add_option("--delete", tree_args.costs.delete_cost, "delete cost")
        ->capture_default_str();
    tree_cmd->add_option("--relabel", tree_args.costs.relabel_cost, "relabel cost")
        ->capture_default_str();
    add_common(tree_cmd, &tree_args.out, &tree_args.manifest, &tree_args.threads);

    BuildArgs build_args;
    auto* build_cmd = app.add_subcommand("ensemble-build", "greedy voting-ensemble selection");
    build_cmd->add_option("--labels", build_args.labels, "label directory")->required();
    build_cmd->add_option("--preds", build_args.preds, "predictions directory")->required();
    build_cmd->add_option("--rule", build_args.rule, "training vote rule")
        ->check(CLI::IsMember({"majority", "all-but-one", "threshold"}))
        ->capture_default_str();
    build_cmd->add_option("--theta", build_args.theta, "threshold fraction")
        ->capture_default_str();
    build_cmd->add_option("--tol", build_args.tolerance, "stopping tolerance")
        ->capture_default_str();
    build_cmd->add_option("--max-members", build_args.max_members, "member cap")
        ->capture_default_str();
    build_cmd->add_option("--lead", build_args.lead, "lead used when labels were made")
        ->capture_default_str();
    build_args.utility.add_to(build_cmd);
    add_common(build_cmd, &build_args.out, &build_args.manifest, &build_args.threads);

    ApplyArgs apply_args;
    auto* apply_cmd = app.add_subcommand("ensemble-apply", "apply a voting ensemble");
    apply_cmd->add_option("--spec", apply_args.spec, "ensemble spec file")->required();
    apply_cmd->add_option("--preds", apply_args.preds, "predictions directory")->required();
    apply_cmd->add_option("--regime", apply_args.regime, "vote regime")
        ->check(CLI::IsMember({"familiar", "unfamiliar", "auto"}))->capture_default_str();
    apply_cmd->add_option("--tau", apply_args.tau, "similarity threshold for auto regime")
        ->capture_default_str();
    add_common(apply_cmd, &apply_args.out, &apply_args.manifest, &apply_args.threads);

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic cohort");
    synth_cmd->add_option("--patients", synth_args.config.patients, "patient count")
        ->capture_default_str();
    synth_cmd->add_option("--min-len", synth_args.config.min_len, "min record hours")
        ->capture_default_str();
    synth_cmd->add_option("--max-len", synth_args.config.max_len, "max record hours")
        ->capture_default_str();
    synth_cmd->add_option("--prevalence", synth_args.config.prevalence, "septic fraction")
        ->capture_default_str();
    synth_cmd->add_option("--seed", synth_args.config.seed, "RNG seed")
        ->capture_default_str();
    synth_cmd->add_option("--lead", synth_args.config.label_lead, "label lead hours")
        ->capture_default_str();
    synth_cmd->add_option("--algorithms", synth_args.config.algorithms, "predictor count")
        ->capture_default_str();
    synth_cmd->add_option("--rho", synth_args.config.rho, "shared-noise correlation")
        ->capture_default_str();
    synth_cmd->add_option("--fp", synth_args.config.error.fp_rate, "false-positive rate")
        ->capture_default_str();
    synth_cmd->add_option("--fn", synth_args.config.error.fn_rate, "false-negative rate")
        ->capture_default_str();
    synth_cmd->add_option("--lag-min", synth_args.config.error.lag_min, "min detection lag")
        ->capture_default_str();
    synth_cmd->add_option("--lag-max", synth_args.config.error.lag_max, "max detection lag")
        ->capture_default_str();
    add_common(synth_cmd, &synth_args.out, &synth_args.manifest, &synth_args.threads);

    StatsArgs stats_args;
    auto* stats_cmd = app.add_subcommand("stats", "empirical variable CDFs");
    stats_cmd->add_option("--patients", stats_args.patients, "patient .psv directory")
        ->required();
    stats_cmd->add_option("--variables", stats_args.variables, "variable subset")
        ->delimiter(',');
    stats_cmd->add_option("--truncation", stats_args.truncation, "overlong record policy")
        ->check(CLI::IsMember({"truncate", "error"}))->capture_default_str();
    add_common(stats_cmd, &stats_args.out, &stats_args.manifest, &stats_args.threads);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        for (CLI::App* sub : app.get_subcommands()) apply_config_file(sub);
        if (label_cmd->parsed()) return run_label(label_args);
        if (score_cmd->parsed()) return run_score(score_args);
        if (sim_cmd->parsed()) return run_similarity(sim_args);
        if (kappa_cmd->parsed()) return run_kappa(kappa_args);
        if (tree_cmd->parsed()) return run_tree_dist(tree_args);
        if (build_cmd->parsed()) return run_ensemble_build(build_args);
        if (apply_cmd->parsed()) return run_ensemble_apply(apply_args);
        if (synth_cmd->parsed()) return run_synth(synth_args);
        if (stats_cmd->parsed()) return run_stats(stats_args);
    } catch (const ConfigError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
