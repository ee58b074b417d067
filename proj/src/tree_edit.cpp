#include "sepvote/tree_edit.hpp"

#include <algorithm>
#include <cctype>

#include "sepvote/error.hpp"
#include "sepvote/parallel.hpp"

namespace sepvote {

void EditCosts::validate() const {
    if (insert_cost < 0 || delete_cost < 0 || relabel_cost < 0)
        throw ConfigError("edit costs must be non-negative");
}

namespace {

[[noreturn]] void parse_fail(std::size_t offset, const std::string& what) {
    throw FormatError("parse error at byte " + std::to_string(offset) + ": " + what);
}

struct TreeParser {
    std::string_view text;
    std::size_t pos = 0;
    AstTree tree;

    bool label_byte(char c) const {
        return c != '(' && c != ')' && !std::isspace(static_cast<unsigned char>(c));
    }

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
            ++pos;
    }

    // appends the subtree in postorder, returns its root index
    int parse_node() {
        skip_ws();
        if (pos >= text.size())
            parse_fail(pos, "expected node label");
        if (!label_byte(text[pos]))
            parse_fail(pos, "expected node label");
        const std::size_t start = pos;
        while (pos < text.size() && label_byte(text[pos])) ++pos;
        std::string label(text.substr(start, pos - start));

        std::vector<int> child_roots;
        if (pos < text.size() && text[pos] == '(') {
            ++pos;
            skip_ws();
            if (pos < text.size() && text[pos] == ')')
                parse_fail(pos, "empty child list");
            while (true) {
                child_roots.push_back(parse_node());
                skip_ws();
                if (pos >= text.size())
                    parse_fail(pos, "expected ')'");
                if (text[pos] == ')') { ++pos; break; }
            }
        }

        const int index = static_cast<int>(tree.labels.size());
        tree.labels.push_back(std::move(label));
        tree.parents.push_back(-1);
        for (int child : child_roots)
            tree.parents[static_cast<std::size_t>(child)] = index;
        return index;
    }
};

} // namespace

AstTree parse_tree(std::string_view text) {
    TreeParser p{text};
    p.parse_node();
    p.skip_ws();
    if (p.pos < text.size())
        parse_fail(p.pos, "trailing content after tree");
    return std::move(p.tree);
}

namespace {

std::vector<std::vector<int>> child_lists(const AstTree& tree) {
    std::vector<std::vector<int>> children(tree.size());
    for (std::size_t i = 0; i < tree.size(); ++i)
        if (tree.parents[i] >= 0)
            children[static_cast<std::size_t>(tree.parents[i])].push_back(static_cast<int>(i));
    return children;
}

void serialize_node(const AstTree& tree, const std::vector<std::vector<int>>& children,
                    int node, std::string& out) {
    out += tree.labels[static_cast<std::size_t>(node)];
    const auto& kids = children[static_cast<std::size_t>(node)];
    if (kids.empty()) return;
    out += '(';
    for (std::size_t i = 0; i < kids.size(); ++i) {
        if (i) out += ' ';
        serialize_node(tree, children, kids[i], out);
    }
    out += ')';
}

// postorder index of each node's leftmost leaf descendant
std::vector<int> leftmost_leaves(const AstTree& tree) {
    auto children = child_lists(tree);
    std::vector<int> lml(tree.size());
    for (std::size_t i = 0; i < tree.size(); ++i) {
        // children precede parents in postorder, so lml of the first child
        // is already final here
        lml[i] = children[i].empty() ? static_cast<int>(i)
                                     : lml[static_cast<std::size_t>(children[i][0])];
    }
    return lml;
}

// highest postorder node per distinct leftmost leaf, ascending
std::vector<int> keyroots(const std::vector<int>& lml) {
    std::vector<int> last(lml.size(), -1);
    for (std::size_t i = 0; i < lml.size(); ++i)
        last[static_cast<std::size_t>(lml[i])] = static_cast<int>(i);
    std::vector<int> roots;
    for (int v : last)
        if (v >= 0) roots.push_back(v);
    std::sort(roots.begin(), roots.end());
    return roots;
}

} // namespace

std::string serialize_tree(const AstTree& tree) {
    if (tree.empty()) return {};
    std::string out;
    serialize_node(tree, child_lists(tree), static_cast<int>(tree.size()) - 1, out);
    return out;
}

double tree_edit_distance(const AstTree& t1, const AstTree& t2, const EditCosts& costs) {
    costs.validate();
    const std::size_t n1 = t1.size();
    const std::size_t n2 = t2.size();
    if (n1 == 0) return static_cast<double>(n2) * costs.insert_cost;
    if (n2 == 0) return static_cast<double>(n1) * costs.delete_cost;

    const auto lml1 = leftmost_leaves(t1);
    const auto lml2 = leftmost_leaves(t2);
    const auto kr1 = keyroots(lml1);
    const auto kr2 = keyroots(lml2);

    std::vector<std::vector<double>> td(n1, std::vector<double>(n2, 0.0));
    std::vector<std::vector<double>> fd(n1 + 1, std::vector<double>(n2 + 1, 0.0));

    for (int k1 : kr1) {
        for (int k2 : kr2) {
            const int l1 = lml1[static_cast<std::size_t>(k1)];
            const int l2 = lml2[static_cast<std::size_t>(k2)];

            fd[0][0] = 0.0;
            for (int i = l1; i <= k1; ++i)
                fd[i - l1 + 1][0] = fd[i - l1][0] + costs.delete_cost;
            for (int j = l2; j <= k2; ++j)
                fd[0][j - l2 + 1] = fd[0][j - l2] + costs.insert_cost;

            for (int i = l1; i <= k1; ++i) {
                for (int j = l2; j <= k2; ++j) {
                    const int fi = i - l1 + 1;
                    const int fj = j - l2 + 1;
                    const double del = fd[fi - 1][fj] + costs.delete_cost;
                    const double ins = fd[fi][fj - 1] + costs.insert_cost;
                    if (lml1[static_cast<std::size_t>(i)] == l1 &&
                        lml2[static_cast<std::size_t>(j)] == l2) {
                        const double rel = fd[fi - 1][fj - 1] +
                            costs.relabel(t1.labels[static_cast<std::size_t>(i)],
                                          t2.labels[static_cast<std::size_t>(j)]);
                        const double best = std::min({del, ins, rel});
                        fd[fi][fj] = best;
                        td[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = best;
                    } else {
                        const int pi = lml1[static_cast<std::size_t>(i)] - l1;
                        const int pj = lml2[static_cast<std::size_t>(j)] - l2;
                        const double sub = fd[pi][pj] +
                            td[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                        fd[fi][fj] = std::min({del, ins, sub});
                    }
                }
            }
        }
    }
    return td[n1 - 1][n2 - 1];
}

double code_similarity(double distance, double cap, bool* capped) {
    if (distance < 0)
        throw DataError("negative tree edit distance");
    if (distance == 0.0) {
        if (capped) *capped = true;
        return cap;
    }
    if (capped) *capped = false;
    return 1.0 / distance;
}

CodeSimilarityResult code_similarity_matrix(const std::vector<AstTree>& trees,
                                            const std::vector<std::string>& ids,
                                            const std::string& ordering_key,
                                            const EditCosts& costs,
                                            unsigned workers) {
    if (trees.size() != ids.size())
        throw DataError("tree count does not match id count");
    if (trees.empty())
        throw DataError("need at least one tree");
    const std::size_t n = trees.size();

    CodeSimilarityResult result;
    result.distances.assign(n, std::vector<double>(n, 0.0));

    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            cells.emplace_back(i, j);
    parallel_for(cells.size(), workers, [&](std::size_t c) {
        const auto [i, j] = cells[c];
        const double d = i == j ? 0.0 : tree_edit_distance(trees[i], trees[j], costs);
        result.distances[i][j] = d;
        result.distances[j][i] = d;
    });

    double max_finite = 0.0;
    bool any_finite = false;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (result.distances[i][j] > 0.0) {
                max_finite = std::max(max_finite, 1.0 / result.distances[i][j]);
                any_finite = true;
            }
        }
    }
    result.cap = any_finite ? 10.0 * max_finite : 10.0;

    SimilarityMatrix& m = result.similarity;
    m.algorithm_ids = ids;
    m.kind = MatrixKind::code;
    m.ordering_key = ordering_key;
    m.values.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            bool capped = false;
            const double s = code_similarity(result.distances[i][j], result.cap, &capped);
            m.values[i][j] = s;
            m.values[j][i] = s;
            if (capped) m.degenerate_cells.emplace_back(i, j);
        }
    }
    return result;
}

} // namespace sepvote
