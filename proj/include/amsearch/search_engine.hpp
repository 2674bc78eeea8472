#pragma once

#include <optional>
#include <string>
#include <vector>

#include "amsearch/brain.hpp"
#include "amsearch/evaluator.hpp"
#include "amsearch/gateway.hpp"
#include "amsearch/search_tree.hpp"

namespace amsearch {

struct SearchRequest {
    std::string query;
    HyperParams params;
    // Off: no retrieval; associative texts come from self-association alone.
    bool use_external_brain = true;
    // Off: no associative memory at all; every node carries "" and value
    // reduces to the generation score.
    bool use_association = true;
    std::optional<std::string> trace_path;   // full tree JSON on finish
    std::optional<std::string> run_log_path; // one summary line appended per run
};

struct SearchResult {
    std::string answer;
    bool completed = false;
    int rounds = 0;
    int nodes_created = 0;
    NodeId best_leaf = 0;
    SearchTree tree;
};

// Carries the tree built so far when a round dies on a terminal gateway or
// evaluator failure.
class SearchError : public std::runtime_error {
public:
    SearchError(std::string message, SearchTree partial)
        : std::runtime_error(std::move(message)), partial_(std::move(partial)) {}

    const SearchTree& partial_tree() const { return partial_; }

private:
    SearchTree partial_;
};

// Adds, scores and commits exactly K children under `leaf`. The round is
// atomic: every model call for all K children happens before the tree
// changes, so a failure leaves the tree untouched. A null `brain` switches
// association to the self-association prompt; `use_association` false skips
// the association step entirely.
std::vector<NodeId> expand_node(SearchTree& tree,
                                NodeId leaf,
                                const std::string& query,
                                Gateway& gateway,
                                const ExternalBrain* brain,
                                const Evaluator& evaluator,
                                bool use_association = true);

// Full search loop: root bootstrap, then per round select / expand / judge
// the best new child / backpropagate, until the judge accepts an answer or
// the round budget is spent. Returns the accepted answer or the best leaf.
SearchResult run_search(const SearchRequest& request,
                        Gateway& gateway,
                        const ExternalBrain* brain,
                        const Evaluator& evaluator);

} // namespace amsearch
