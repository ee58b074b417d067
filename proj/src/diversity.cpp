#include "sepvote/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "sepvote/error.hpp"
#include "sepvote/parallel.hpp"

namespace sepvote {

std::string matrix_kind_name(MatrixKind kind) {
    switch (kind) {
        case MatrixKind::unweighted: return "unweighted";
        case MatrixKind::weighted: return "weighted";
        case MatrixKind::code: return "code";
        case MatrixKind::kappa_summary: return "kappa_summary";
    }
    throw Error("unknown matrix kind");
}

double unweighted_similarity(std::span<const int> x, std::span<const int> y,
                             bool* degenerate) {
    if (x.size() != y.size())
        throw DataError("binary streams differ in length");
    long long num = 0;
    long long den = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        num += (x[k] != 0 && y[k] != 0) ? 1 : 0;
        den += (x[k] != 0 || y[k] != 0) ? 1 : 0;
    }
    if (den == 0) {
        if (degenerate) *degenerate = true;
        return 1.0;
    }
    if (degenerate) *degenerate = false;
    return static_cast<double>(num) / static_cast<double>(den);
}

double weighted_similarity(std::span<const double> u, std::span<const double> v,
                           bool* degenerate) {
    if (u.size() != v.size())
        throw DataError("trace vectors differ in length");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        num += std::abs(u[k] - v[k]);
        den += std::abs(u[k]) + std::abs(v[k]);
    }
    if (den == 0.0) {
        if (degenerate) *degenerate = true;
        return 1.0;
    }
    if (degenerate) *degenerate = false;
    return 1.0 - num / den;
}

namespace {

// Concatenated per-patient sequences, patients visited in sorted-id order.
template <typename T, typename Fetch>
std::vector<std::vector<T>> concatenate(const BundleSet& bundles,
                                        const std::vector<std::string>& ids,
                                        const Fetch& fetch) {
    std::vector<std::vector<T>> rows(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto it = bundles.find(ids[i]);
        if (it == bundles.end())
            throw DataError("unknown algorithm id: " + ids[i]);
        for (const auto& [pid, stream] : it->second.by_patient) {
            auto piece = fetch(it->second, pid, stream);
            rows[i].insert(rows[i].end(), piece.begin(), piece.end());
        }
    }
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].size() != rows[0].size())
            throw DataError("algorithms cover different cohorts: " + ids[i] +
                            " vs " + ids[0]);
    return rows;
}

template <typename Row, typename Cell>
SimilarityMatrix build_matrix(const std::vector<Row>& rows,
                              const std::vector<std::string>& ids,
                              MatrixKind kind,
                              const std::string& ordering_key,
                              unsigned workers,
                              const Cell& cell) {
    const std::size_t n = ids.size();
    SimilarityMatrix m;
    m.algorithm_ids = ids;
    m.kind = kind;
    m.ordering_key = ordering_key;
    m.values.assign(n, std::vector<double>(n, 0.0));

    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            cells.emplace_back(i, j);

    std::vector<char> flagged(cells.size(), 0);
    parallel_for(cells.size(), workers, [&](std::size_t c) {
        const auto [i, j] = cells[c];
        bool degenerate = false;
        const double v = cell(rows[i], rows[j], &degenerate);
        m.values[i][j] = v;
        m.values[j][i] = v;
        flagged[c] = degenerate ? 1 : 0;
    });
    for (std::size_t c = 0; c < cells.size(); ++c)
        if (flagged[c]) m.degenerate_cells.push_back(cells[c]);
    return m;
}

} // namespace

SimilarityMatrix prediction_similarity_matrix(const BundleSet& bundles,
                                              const std::vector<std::string>& ids,
                                              const std::string& ordering_key,
                                              unsigned workers) {
    auto rows = concatenate<int>(bundles, ids,
        [](const PredictionBundle&, const std::string&, const PredictionStream& s) {
            return s.labels;
        });
    return build_matrix(rows, ids, MatrixKind::unweighted, ordering_key, workers,
        [](const std::vector<int>& a, const std::vector<int>& b, bool* d) {
            return unweighted_similarity(a, b, d);
        });
}

SimilarityMatrix trace_similarity_matrix(const BundleSet& bundles,
                                         const CohortLabels& labels,
                                         const UtilityParams& params,
                                         const std::vector<std::string>& ids,
                                         const std::string& ordering_key,
                                         unsigned workers) {
    auto rows = concatenate<double>(bundles, ids,
        [&](const PredictionBundle&, const std::string& pid, const PredictionStream& s) {
            auto it = labels.find(pid);
            if (it == labels.end())
                throw DataError("no label timeline for patient " + pid);
            return score_stream(s.labels, it->second, params).values;
        });
    return build_matrix(rows, ids, MatrixKind::weighted, ordering_key, workers,
        [](const std::vector<double>& a, const std::vector<double>& b, bool* d) {
            return weighted_similarity(a, b, d);
        });
}

double fleiss_kappa(const std::vector<std::vector<int>>& ratings, bool* degenerate) {
    const std::size_t n = ratings.size();
    if (n < 2)
        throw DataError("fleiss kappa needs at least 2 raters");
    const std::size_t m = ratings[0].size();
    if (m < 1)
        throw DataError("fleiss kappa needs at least 1 window");
    for (const auto& row : ratings)
        if (row.size() != m)
            throw DataError("raters disagree on window count");

    // P_i per window, category proportions over all assignments
    double sum_p = 0.0;
    double pos_total = 0.0;
    const double nn = static_cast<double>(n);
    for (std::size_t w = 0; w < m; ++w) {
        double pos = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            pos += ratings[r][w] != 0 ? 1.0 : 0.0;
        const double neg = nn - pos;
        sum_p += (pos * (pos - 1.0) + neg * (neg - 1.0)) / (nn * (nn - 1.0));
        pos_total += pos;
    }
    const double p_bar = sum_p / static_cast<double>(m);
    const double p1 = pos_total / (nn * static_cast<double>(m));
    const double p0 = 1.0 - p1;
    const double p_e = p1 * p1 + p0 * p0;
    if (p_e == 1.0) {
        if (degenerate) *degenerate = true;
        return 1.0;
    }
    if (degenerate) *degenerate = false;
    return (p_bar - p_e) / (1.0 - p_e);
}

KappaDistribution kappa_distribution(const BundleSet& bundles,
                                     const std::vector<std::string>& subset,
                                     std::size_t bins,
                                     unsigned workers) {
    if (subset.size() < 2)
        throw DataError("kappa distribution needs at least 2 algorithms");
    std::vector<const PredictionBundle*> members;
    for (const auto& id : subset) {
        auto it = bundles.find(id);
        if (it == bundles.end())
            throw DataError("unknown algorithm id: " + id);
        members.push_back(&it->second);
    }

    std::vector<std::string> patients;
    for (const auto& [pid, stream] : members[0]->by_patient)
        patients.push_back(pid);

    KappaDistribution dist;
    dist.patient_ids = patients;
    dist.kappas.resize(patients.size());
    parallel_for(patients.size(), workers, [&](std::size_t i) {
        std::vector<std::vector<int>> ratings;
        ratings.reserve(members.size());
        for (const PredictionBundle* b : members) {
            auto it = b->by_patient.find(patients[i]);
            if (it == b->by_patient.end())
                throw DataError("no prediction stream for patient " + patients[i] +
                                " in algorithm " + b->algorithm_id);
            ratings.push_back(it->second.labels);
        }
        dist.kappas[i] = fleiss_kappa(ratings);
    });

    dist.histogram.assign(bins, 0);
    for (double k : dist.kappas) {
        double pos = (k + 1.0) / 2.0 * static_cast<double>(bins);
        auto bin = static_cast<long long>(std::floor(pos));
        if (bin < 0) bin = 0;
        if (bin >= static_cast<long long>(bins)) bin = static_cast<long long>(bins) - 1;
        ++dist.histogram[static_cast<std::size_t>(bin)];
    }
    return dist;
}

} // namespace sepvote
