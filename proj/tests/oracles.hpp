// Independent reference implementations used to cross-check the library.
// Everything here is written straight from the rule definitions, favoring
// exhaustive enumeration over cleverness, and is kept free of library
// internals beyond the plain data types.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sepvote/ensemble.hpp"
#include "sepvote/record.hpp"
#include "sepvote/tree_edit.hpp"
#include "sepvote/utility.hpp"

namespace oracles {

// ---- labeling rules, enumerated literally ----------------------------------

inline std::optional<int> suspicion(const sepvote::EventTimeline& ev,
                                    bool require_course = true) {
    std::optional<int> best;
    for (const auto& [start, end] : ev.iv_antibiotic_intervals) {
        if (require_course && end - start < 72) continue;
        for (int culture : ev.culture_hours) {
            const bool abx_first = start <= culture && culture - start <= 24;
            const bool culture_first = culture <= start && start - culture <= 72;
            if (!abx_first && !culture_first) continue;
            const int t = std::min(start, culture);
            if (!best.has_value() || t < *best) best = t;
        }
    }
    return best;
}

inline std::optional<int> sofa(const sepvote::EventTimeline& ev) {
    for (const auto& [t, score] : ev.sofa_series) {
        int lowest = score;
        for (const auto& [s, prior] : ev.sofa_series)
            if (s >= t - 24 && s <= t) lowest = std::min(lowest, prior);
        if (score - lowest >= 2) return t;
    }
    return std::nullopt;
}

inline std::optional<int> onset(const sepvote::EventTimeline& ev) {
    const auto ts = suspicion(ev);
    const auto tf = sofa(ev);
    if (!ts.has_value() || !tf.has_value()) return std::nullopt;
    if (*tf < *ts - 24 || *tf > *ts + 12) return std::nullopt;
    return std::min(*ts, *tf);
}

inline sepvote::EventTimeline random_events(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> count(0, 3);
    std::uniform_int_distribution<int> hour(0, 100);
    std::uniform_int_distribution<int> span(0, 120);
    std::uniform_int_distribution<int> score(0, 12);
    sepvote::EventTimeline ev;
    const int n_abx = count(rng);
    for (int i = 0; i < n_abx; ++i) {
        const int start = hour(rng);
        ev.iv_antibiotic_intervals.emplace_back(start, start + span(rng));
    }
    const int n_cult = count(rng);
    for (int i = 0; i < n_cult; ++i) ev.culture_hours.push_back(hour(rng));
    std::uniform_int_distribution<int> n_sofa_dist(0, 6);
    const int n_sofa = n_sofa_dist(rng);
    std::vector<int> hours;
    for (int i = 0; i < n_sofa; ++i) hours.push_back(hour(rng));
    std::sort(hours.begin(), hours.end());
    hours.erase(std::unique(hours.begin(), hours.end()), hours.end());
    for (int h : hours) ev.sofa_series.emplace_back(h, score(rng));
    return ev;
}

// ---- utility payoff, written as explicit interpolation ----------------------

inline double lerp(double a, double b, double t) { return a + (b - a) * t; }

inline double hourly_utility(int t, int prediction, std::optional<int> t_sepsis,
                             const sepvote::UtilityParams& p) {
    if (!t_sepsis.has_value()) return prediction ? p.u_fp : p.u_tn;
    const int rel = t - *t_sepsis;
    if (rel < p.dt_early) return prediction ? p.u_fp : 0.0;
    if (rel > p.dt_late) return 0.0;
    if (!prediction) {
        const double frac = static_cast<double>(rel - p.dt_early) /
                            static_cast<double>(p.dt_late - p.dt_early);
        return lerp(0.0, p.u_fn_min, frac);
    }
    if (rel <= p.dt_optimal) {
        const double frac = static_cast<double>(rel - p.dt_early) /
                            static_cast<double>(p.dt_optimal - p.dt_early);
        return lerp(0.0, p.u_tp_max, frac);
    }
    const double frac = static_cast<double>(rel - p.dt_optimal) /
                        static_cast<double>(p.dt_late - p.dt_optimal);
    return lerp(p.u_tp_max, 0.0, frac);
}

struct CohortSums {
    double observed = 0.0;
    double inaction = 0.0;
    double perfect = 0.0;
};

inline CohortSums cohort_sums(
    const std::map<std::string, std::vector<int>>& streams,
    const std::map<std::string, std::pair<std::vector<int>, std::optional<int>>>& labels,
    const sepvote::UtilityParams& p) {
    CohortSums sums;
    for (const auto& [pid, entry] : labels) {
        const auto& [truth, t_sepsis] = entry;
        const auto& predicted = streams.at(pid);
        for (std::size_t k = 0; k < truth.size(); ++k) {
            const int hour = static_cast<int>(k) + 1;
            sums.observed += oracles::hourly_utility(hour, predicted[k], t_sepsis, p);
            sums.inaction += oracles::hourly_utility(hour, 0, t_sepsis, p);
            sums.perfect += oracles::hourly_utility(hour, truth[k], t_sepsis, p);
        }
    }
    return sums;
}

// ---- similarity formulas, evaluated directly --------------------------------

inline double jaccard(const std::vector<int>& x, const std::vector<int>& y) {
    double inter = 0.0, uni = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        inter += x[k] && y[k] ? 1.0 : 0.0;
        uni += x[k] || y[k] ? 1.0 : 0.0;
    }
    return uni == 0.0 ? 1.0 : inter / uni;
}

inline double weighted(const std::vector<double>& u, const std::vector<double>& v) {
    double diff = 0.0, mass = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        diff += std::fabs(u[k] - v[k]);
        mass += std::fabs(u[k]) + std::fabs(v[k]);
    }
    return mass == 0.0 ? 1.0 : 1.0 - diff / mass;
}

// textbook Fleiss' kappa over a subjects x categories count table
inline double fleiss_from_counts(const std::vector<std::array<int, 2>>& counts, int raters) {
    const double N = static_cast<double>(counts.size());
    const double n = raters;
    double p_bar = 0.0;
    double pj[2] = {0.0, 0.0};
    for (const auto& row : counts) {
        double pi = 0.0;
        for (int j = 0; j < 2; ++j) {
            pi += static_cast<double>(row[j]) * (row[j] - 1);
            pj[j] += row[j];
        }
        p_bar += pi / (n * (n - 1.0));
    }
    p_bar /= N;
    double pe = 0.0;
    for (int j = 0; j < 2; ++j) {
        pj[j] /= N * n;
        pe += pj[j] * pj[j];
    }
    if (pe == 1.0) return 1.0;
    return (p_bar - pe) / (1.0 - pe);
}

// ---- tree edit distance: memoized forest recursion --------------------------
// Forests are ordered lists of subtree root ids; the recursion removes the
// rightmost root (promoting its children) or matches the two rightmost trees.

class NaiveTed {
public:
    NaiveTed(const sepvote::AstTree& a, const sepvote::AstTree& b,
             const sepvote::EditCosts& costs)
        : a_(a), b_(b), costs_(costs), ca_(children(a)), cb_(children(b)) {}

    double run() {
        std::vector<int> fa, fb;
        if (!a_.empty()) fa.push_back(static_cast<int>(a_.size()) - 1);
        if (!b_.empty()) fb.push_back(static_cast<int>(b_.size()) - 1);
        return forest(fa, fb);
    }

private:
    static std::vector<std::vector<int>> children(const sepvote::AstTree& t) {
        std::vector<std::vector<int>> out(t.size());
        for (std::size_t i = 0; i < t.size(); ++i)
            if (t.parents[i] >= 0)
                out[static_cast<std::size_t>(t.parents[i])].push_back(static_cast<int>(i));
        return out;
    }

    static std::vector<int> drop_root(const std::vector<int>& f,
                                      const std::vector<std::vector<int>>& kids) {
        std::vector<int> out(f.begin(), f.end() - 1);
        const auto& promoted = kids[static_cast<std::size_t>(f.back())];
        out.insert(out.end(), promoted.begin(), promoted.end());
        return out;
    }

    double forest(const std::vector<int>& f, const std::vector<int>& g) {
        if (f.empty() && g.empty()) return 0.0;
        const auto key = std::make_pair(f, g);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;

        double best;
        if (f.empty()) {
            best = forest(f, drop_root(g, cb_)) + costs_.insert_cost;
        } else if (g.empty()) {
            best = forest(drop_root(f, ca_), g) + costs_.delete_cost;
        } else {
            const int v = f.back();
            const int w = g.back();
            best = forest(drop_root(f, ca_), g) + costs_.delete_cost;
            best = std::min(best, forest(f, drop_root(g, cb_)) + costs_.insert_cost);
            std::vector<int> f_rest(f.begin(), f.end() - 1);
            std::vector<int> g_rest(g.begin(), g.end() - 1);
            const double match =
                forest(f_rest, g_rest) +
                forest(ca_[static_cast<std::size_t>(v)], cb_[static_cast<std::size_t>(w)]) +
                costs_.relabel(a_.labels[static_cast<std::size_t>(v)],
                               b_.labels[static_cast<std::size_t>(w)]);
            best = std::min(best, match);
        }
        memo_.emplace(key, best);
        return best;
    }

    const sepvote::AstTree& a_;
    const sepvote::AstTree& b_;
    sepvote::EditCosts costs_;
    std::vector<std::vector<int>> ca_, cb_;
    std::map<std::pair<std::vector<int>, std::vector<int>>, double> memo_;
};

inline double naive_ted(const sepvote::AstTree& a, const sepvote::AstTree& b,
                        const sepvote::EditCosts& costs = {}) {
    return NaiveTed(a, b, costs).run();
}

// every serialized ordered tree with `nodes` nodes over the given labels
inline std::vector<std::string> all_trees(int nodes,
                                          const std::vector<std::string>& labels) {
    if (nodes <= 0) return {};
    std::vector<std::string> out;
    if (nodes == 1) {
        for (const auto& l : labels) out.push_back(l);
        return out;
    }
    // forests of total size nodes-1 attached under each root label
    std::vector<std::string> forests = [&] {
        std::vector<std::vector<std::string>> by_size(static_cast<std::size_t>(nodes));
        by_size[0] = {""};
        for (int size = 1; size < nodes; ++size) {
            for (int first = 1; first <= size; ++first) {
                for (const auto& tree : all_trees(first, labels)) {
                    for (const auto& rest : by_size[static_cast<std::size_t>(size - first)]) {
                        by_size[static_cast<std::size_t>(size)].push_back(
                            rest.empty() ? tree : tree + " " + rest);
                    }
                }
            }
        }
        return by_size[static_cast<std::size_t>(nodes - 1)];
    }();
    for (const auto& l : labels)
        for (const auto& f : forests)
            out.push_back(l + "(" + f + ")");
    return out;
}

inline std::string random_tree(std::mt19937_64& rng, int max_nodes,
                               const std::vector<std::string>& labels) {
    std::uniform_int_distribution<std::size_t> pick(0, labels.size() - 1);
    std::uniform_int_distribution<int> size_dist(1, max_nodes);
    const int budget = size_dist(rng);

    // recursive split of the node budget into root + child subtrees
    std::function<std::string(int)> build = [&](int nodes) -> std::string {
        std::string label = labels[pick(rng)];
        if (nodes == 1) return label;
        std::string out = label + "(";
        int remaining = nodes - 1;
        bool first = true;
        while (remaining > 0) {
            std::uniform_int_distribution<int> part(1, remaining);
            const int take = part(rng);
            if (!first) out += " ";
            out += build(take);
            remaining -= take;
            first = false;
        }
        return out + ")";
    };
    return build(budget);
}

// ---- voting recount ----------------------------------------------------------

inline int recount_vote(const std::vector<std::pair<int, int>>& weighted_votes,
                        double theta) {
    double total = 0.0, positive = 0.0;
    for (const auto& [x, w] : weighted_votes) {
        total += w;
        if (x) positive += w;
    }
    return positive >= theta * total ? 1 : 0;
}

// ---- rank statistics ----------------------------------------------------------

inline std::vector<double> average_ranks(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

// Spearman rho with average ranks for ties; 0 when either side is constant.
inline double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    const std::size_t n = xs.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) { mx += rx[i]; my += ry[i]; }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double num = 0.0, dx = 0.0, dy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (rx[i] - mx) * (ry[i] - my);
        dx += (rx[i] - mx) * (rx[i] - mx);
        dy += (ry[i] - my) * (ry[i] - my);
    }
    if (dx == 0.0 || dy == 0.0) return 0.0;
    return num / std::sqrt(dx * dy);
}

} // namespace oracles
