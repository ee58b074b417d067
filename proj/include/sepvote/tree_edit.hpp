#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "sepvote/diversity.hpp"

namespace sepvote {

// Ordered labeled tree, nodes stored in postorder. parent[i] is the postorder
// index of node i's parent, or -1 for the root (always the last node).
struct AstTree {
    std::vector<std::string> labels;
    std::vector<int> parents;

    std::size_t size() const { return labels.size(); }
    bool empty() const { return labels.empty(); }
};

struct EditCosts {
    double insert_cost = 1.0;
    double delete_cost = 1.0;
    double relabel_cost = 1.0;

    void validate() const;
    double relabel(const std::string& a, const std::string& b) const {
        return a == b ? 0.0 : relabel_cost;
    }
};

// Parses `label(child child ...)` notation; labels are non-empty runs of
// bytes other than '(', ')', and whitespace. Errors carry the byte offset.
AstTree parse_tree(std::string_view text);

std::string serialize_tree(const AstTree& tree);

// Zhang-Shasha ordered tree edit distance (keyroots over leftmost-leaf
// decomposition).
double tree_edit_distance(const AstTree& t1, const AstTree& t2,
                          const EditCosts& costs = {});

// s = 1/d; d = 0 maps to `cap` and sets *capped.
double code_similarity(double distance, double cap, bool* capped = nullptr);

struct CodeSimilarityResult {
    SimilarityMatrix similarity;           // kind = code
    std::vector<std::vector<double>> distances;
    double cap = 0.0;
};

// All-pairs distances and similarities. The zero-distance cap is 10x the
// largest finite similarity present in the matrix, falling back to 10 when
// every pair is identical; capped cells land in degenerate_cells.
CodeSimilarityResult code_similarity_matrix(const std::vector<AstTree>& trees,
                                            const std::vector<std::string>& ids,
                                            const std::string& ordering_key,
                                            const EditCosts& costs = {},
                                            unsigned workers = 1);

} // namespace sepvote
