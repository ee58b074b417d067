#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sepvote/cohort.hpp"
#include "sepvote/utility.hpp"

namespace sepvote {

enum class MatrixKind { unweighted, weighted, code, kappa_summary };

std::string matrix_kind_name(MatrixKind kind);

// Symmetric pairwise-similarity table over a set of algorithm ids.
// degenerate_cells lists (i, j) index pairs where a zero-denominator or
// zero-distance convention fired instead of the plain formula.
struct SimilarityMatrix {
    std::vector<std::string> algorithm_ids;
    std::vector<std::vector<double>> values;
    MatrixKind kind = MatrixKind::unweighted;
    std::string ordering_key;
    std::vector<std::pair<std::size_t, std::size_t>> degenerate_cells;

    std::size_t size() const { return algorithm_ids.size(); }
};

// Jaccard index over binary streams: sum(x & y) / sum(x | y). Both streams
// all-negative is defined as 1 (identical behavior reads as maximal
// similarity); *degenerate is set when that convention fires.
double unweighted_similarity(std::span<const int> x, std::span<const int> y,
                             bool* degenerate = nullptr);

// 1 - sum|u - v| / sum(|u| + |v|) over utility traces. Identically-zero pair
// is defined as 1, flagged via *degenerate.
double weighted_similarity(std::span<const double> u, std::span<const double> v,
                           bool* degenerate = nullptr);

// Eq.-style cohort matrices: per-patient sequences are concatenated across
// the whole cohort (patients in sorted-id order) before the pairwise formula
// is applied once. `ids` fixes the row/column order.
SimilarityMatrix prediction_similarity_matrix(const BundleSet& bundles,
                                              const std::vector<std::string>& ids,
                                              const std::string& ordering_key,
                                              unsigned workers = 1);

SimilarityMatrix trace_similarity_matrix(const BundleSet& bundles,
                                         const CohortLabels& labels,
                                         const UtilityParams& params,
                                         const std::vector<std::string>& ids,
                                         const std::string& ordering_key,
                                         unsigned workers = 1);

// Two-category Fleiss' kappa. ratings[r][w] in {0,1}: rater r's call on
// hourly window w. Requires >= 2 raters and >= 1 window. When every window is
// unanimous in a single category the expected agreement hits 1 and the
// formula is 0/0; that case is defined as kappa = 1 and flagged.
double fleiss_kappa(const std::vector<std::vector<int>>& ratings,
                    bool* degenerate = nullptr);

struct KappaDistribution {
    std::vector<std::string> patient_ids;
    std::vector<double> kappas;
    // histogram over [-1, 1]; bin i covers [-1 + 2i/n, -1 + 2(i+1)/n)
    std::vector<std::size_t> histogram;
};

// Per-patient kappa across the given algorithm subset, plus plot-ready
// histogram counts (default 20 bins spanning [-1, 1]).
KappaDistribution kappa_distribution(const BundleSet& bundles,
                                     const std::vector<std::string>& subset,
                                     std::size_t bins = 20,
                                     unsigned workers = 1);

} // namespace sepvote
