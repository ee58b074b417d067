#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sepvote/diversity.hpp"
#include "sepvote/error.hpp"
#include "sepvote/ensemble.hpp"
#include "sepvote/labeler.hpp"
#include "sepvote/synth.hpp"
#include "sepvote/tree_edit.hpp"
#include "sepvote/utility.hpp"
#include "sepvote/version.hpp"

namespace py = pybind11;
using namespace sepvote;

namespace {

// bundles as {algorithm: {patient: [0/1, ...]}}, labels as
// {patient: (labels, t_sepsis)}; keeps the python surface plain data
BundleSet to_bundles(const std::map<std::string, std::map<std::string, std::vector<int>>>& raw) {
    BundleSet bundles;
    for (const auto& [algo, patients] : raw) {
        PredictionBundle bundle;
        bundle.algorithm_id = algo;
        for (const auto& [pid, labels] : patients) {
            PredictionStream stream;
            stream.algorithm_id = algo;
            stream.patient_id = pid;
            stream.labels = labels;
            stream.probabilities.assign(labels.size(),
                                        std::numeric_limits<double>::quiet_NaN());
            bundle.by_patient.emplace(pid, std::move(stream));
        }
        bundles.emplace(algo, std::move(bundle));
    }
    return bundles;
}

CohortLabels to_labels(
    const std::map<std::string, std::pair<std::vector<int>, std::optional<int>>>& raw) {
    CohortLabels labels;
    for (const auto& [pid, entry] : raw) {
        LabelTimeline timeline;
        timeline.labels = entry.first;
        timeline.t_sepsis = entry.second;
        labels.emplace(pid, std::move(timeline));
    }
    return labels;
}

UtilityParams params_from_dict(const py::dict& overrides) {
    UtilityParams params;
    for (auto item : overrides) {
        const std::string key = py::cast<std::string>(item.first);
        if (key == "dt_early") params.dt_early = py::cast<int>(item.second);
        else if (key == "dt_optimal") params.dt_optimal = py::cast<int>(item.second);
        else if (key == "dt_late") params.dt_late = py::cast<int>(item.second);
        else if (key == "u_tp_max") params.u_tp_max = py::cast<double>(item.second);
        else if (key == "u_fn_min") params.u_fn_min = py::cast<double>(item.second);
        else if (key == "u_fp") params.u_fp = py::cast<double>(item.second);
        else if (key == "u_tn") params.u_tn = py::cast<double>(item.second);
        else throw ConfigError("unknown utility parameter: " + key);
    }
    params.validate();
    return params;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "sepsis prediction ensemble toolkit core";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "SepvoteError");

    m.def("unweighted_similarity",
          [](const std::vector<int>& x, const std::vector<int>& y) {
              return unweighted_similarity(x, y);
          },
          py::arg("x"), py::arg("y"),
          "Jaccard similarity of two binary streams");

    m.def("weighted_similarity",
          [](const std::vector<double>& u, const std::vector<double>& v) {
              return weighted_similarity(u, v);
          },
          py::arg("u"), py::arg("v"),
          "1 - normalized L1 distance between utility traces");

    m.def("fleiss_kappa",
          [](const std::vector<std::vector<int>>& ratings) {
              return fleiss_kappa(ratings);
          },
          py::arg("ratings"), "two-category Fleiss' kappa, raters x windows");

    m.def("tree_edit_distance",
          [](const std::string& t1, const std::string& t2) {
              return tree_edit_distance(parse_tree(t1), parse_tree(t2));
          },
          py::arg("tree1"), py::arg("tree2"),
          "unit-cost ordered tree edit distance between serialized trees");

    m.def("hourly_utility",
          [](int t, int prediction, std::optional<int> t_sepsis, const py::dict& params) {
              return hourly_utility(t, prediction, t_sepsis, params_from_dict(params));
          },
          py::arg("t"), py::arg("prediction"), py::arg("t_sepsis") = std::nullopt,
          py::arg("params") = py::dict(),
          "per-hour utility payoff");

    m.def("normalized_score",
          [](const std::map<std::string, std::vector<int>>& streams,
             const std::map<std::string, std::pair<std::vector<int>, std::optional<int>>>& labels,
             const py::dict& params) {
              PredictionBundle bundle;
              bundle.algorithm_id = "py";
              for (const auto& [pid, labels_vec] : streams) {
                  PredictionStream s;
                  s.algorithm_id = "py";
                  s.patient_id = pid;
                  s.labels = labels_vec;
                  s.probabilities.assign(labels_vec.size(),
                                         std::numeric_limits<double>::quiet_NaN());
                  bundle.by_patient.emplace(pid, std::move(s));
              }
              return normalized_score(bundle, to_labels(labels),
                                      params_from_dict(params)).normalized;
          },
          py::arg("streams"), py::arg("labels"), py::arg("params") = py::dict(),
          "cohort-normalized utility of one predictor");

    m.def("majority_vote",
          [](const std::map<std::string, std::map<std::string, std::vector<int>>>& raw,
             double theta) {
              EnsembleSpec spec = default_spec();
              spec.rule_per_regime[Regime::familiar] =
                  VoteRule{VoteRule::Kind::threshold_fraction, theta};
              BundleSet bundles = to_bundles(raw);
              for (const auto& [algo, bundle] : bundles) spec.members[algo] = 1;
              PredictionBundle voted =
                  apply_ensemble(spec, bundles, Regime::familiar);
              std::map<std::string, std::vector<int>> out;
              for (const auto& [pid, stream] : voted.by_patient)
                  out[pid] = stream.labels;
              return out;
          },
          py::arg("bundles"), py::arg("theta") = 0.5,
          "hourly threshold vote across algorithms, ties positive");

    m.def("label_hours",
          [](const std::vector<std::pair<int, int>>& abx, const std::vector<int>& cultures,
             const std::vector<std::pair<int, int>>& sofa, int hours, int lead) {
              PatientRecord rec;
              rec.patient_id = "py";
              rec.hours.resize(static_cast<std::size_t>(hours));
              rec.events.iv_antibiotic_intervals = abx;
              rec.events.culture_hours = cultures;
              rec.events.sofa_series = sofa;
              rec.events.validate();
              LabelTimeline tl = label_patient(rec, lead);
              return py::make_tuple(tl.labels, tl.t_suspicion, tl.t_sofa, tl.t_sepsis);
          },
          py::arg("abx"), py::arg("cultures"), py::arg("sofa"), py::arg("hours"),
          py::arg("lead") = kDefaultLabelLead,
          "hourly labels plus (t_suspicion, t_sofa, t_sepsis) from raw events");

    m.def("synth_cohort",
          [](int patients, double prevalence, std::uint64_t seed, int algorithms,
             double rho, double fp, double fn) {
              SynthConfig config;
              config.patients = patients;
              config.prevalence = prevalence;
              config.seed = seed;
              config.algorithms = algorithms;
              config.rho = rho;
              config.error.fp_rate = fp;
              config.error.fn_rate = fn;
              SynthCohort cohort = generate_cohort(config);
              BundleSet bundles = generate_predictors(cohort, config);
              std::map<std::string, std::pair<std::vector<int>, std::optional<int>>> labels;
              for (const auto& [pid, tl] : cohort.labels)
                  labels[pid] = {tl.labels, tl.t_sepsis};
              std::map<std::string, std::map<std::string, std::vector<int>>> preds;
              for (const auto& [algo, bundle] : bundles)
                  for (const auto& [pid, stream] : bundle.by_patient)
                      preds[algo][pid] = stream.labels;
              return py::make_tuple(labels, preds);
          },
          py::arg("patients") = 50, py::arg("prevalence") = 0.3, py::arg("seed") = 1,
          py::arg("algorithms") = 5, py::arg("rho") = 0.0, py::arg("fp") = 0.1,
          py::arg("fn") = 0.1,
          "deterministic synthetic labels and noisy-oracle predictions");
}
