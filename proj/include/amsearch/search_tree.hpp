#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace amsearch {

using NodeId = std::int32_t;
inline constexpr NodeId kNoParent = -1;

enum class NodeStatus {
    kFresh,            // created, not yet scored
    kEvaluated,        // scored, never judged
    kJudgedComplete,   // judge accepted the content as a final answer
    kJudgedIncomplete, // judge rejected the content as a final answer
};

const char* to_string(NodeStatus status);
NodeStatus node_status_from_string(const std::string& text);

// Search-wide knobs. `max_rounds == -1` means unbounded.
struct HyperParams {
    int branch_factor = 3;           // children added per expansion (K)
    int max_rounds = 8;              // expansion-round budget (D)
    double exploration_weight = 1.0; // UCT exploration coefficient (w)
    double assoc_weight = 0.1;       // weight of the association score in a node value (beta)

    // Throws std::invalid_argument on out-of-range values.
    void validate() const;

    bool operator==(const HyperParams&) const = default;
};

struct SearchNode {
    NodeId id = 0;
    NodeId parent = kNoParent;
    std::vector<NodeId> children;
    int depth = 0;
    std::string generated;   // content produced at this node
    std::string associative; // retrieved or self-associated memory, "" when none
    double value = 0.0;
    int visits = 0;
    double gen_score = 0.0;
    double assoc_score = 0.0;
    NodeStatus status = NodeStatus::kFresh;

    bool is_leaf() const { return children.empty(); }
};

// Root-to-leaf path. `am_history` holds the nonempty associative texts of the
// path nodes, in path order; it is what conditions the next generation.
struct Trajectory {
    std::vector<NodeId> node_ids;
    std::vector<std::string> am_history;

    NodeId leaf() const { return node_ids.back(); }
};

// Content for one child at expansion time.
struct ChildPayload {
    std::string generated;
    std::string associative;
};

// Arena-backed tree over SearchNode. Node 0 is always the root. The type is a
// plain value: copying it snapshots the full search state.
class SearchTree {
public:
    explicit SearchTree(HyperParams params,
                        std::string root_generated = "",
                        std::string root_associative = "");

    const HyperParams& params() const { return params_; }
    NodeId root_id() const { return 0; }
    std::size_t size() const { return nodes_.size(); }

    // Throws std::out_of_range for unknown ids.
    const SearchNode& node(NodeId id) const;
    SearchNode& node_mut(NodeId id);

    // UCT(n) = V(n) + w * sqrt(ln N(parent) / N(n)).
    // Unvisited nodes rank above every visited sibling (+infinity).
    // Throws std::invalid_argument for the root and std::domain_error when the
    // parent has no visits (the log is undefined there).
    double uct(NodeId id) const;

    // Descends from the root, at each step taking the child with maximal UCT;
    // ties break toward the lowest child index. Pure: no counters change.
    Trajectory select() const;

    // Adds exactly params().branch_factor fresh children under `parent`.
    // Throws std::invalid_argument if `parent` already has children or the
    // payload count mismatches the branch factor.
    std::vector<NodeId> add_children(NodeId parent, const std::vector<ChildPayload>& payloads);

    // Records the scores and the externally computed value for a fresh node,
    // setting visits = 1. Scores must lie in [0, 1]; the value must lie in
    // [0, 1 + assoc_weight]. Throws std::invalid_argument otherwise.
    void mark_evaluated(NodeId id, double gen_score, double assoc_score, double value);

    // Flips an evaluated node to its judged status.
    void mark_judged(NodeId id, bool completed);

    // Folds the children of `parent` into it as one batch of size K:
    //   V(p) <- (V(p) * C(p) + sum of child values) / (C(p) + K),  C(p) += K
    // then walks to the root, each ancestor absorbing its updated child as a
    // batch of size 1. Returns the new root value. Throws std::logic_error if
    // `parent` has no children or any involved node is still fresh.
    double backpropagate(NodeId parent);

    // Leaf chosen as the final answer: judged-complete leaves win outright;
    // otherwise any non-fresh leaf; max value, ties toward the lowest id.
    // Throws std::runtime_error("empty search") when no leaf qualifies.
    NodeId best_answer_leaf() const;

    // Path from the root to `id`, with the nonempty AM texts along it.
    Trajectory trajectory_to(NodeId id) const;

    // Schema: {"params": {...}, "nodes": [{id, parent, depth, generated,
    // associative, value, visits, gen_score, assoc_score, status}, ...]}.
    // Round-trips exactly; dumps of equal trees are byte-identical.
    nlohmann::ordered_json to_json() const;
    static SearchTree from_json(const nlohmann::ordered_json& doc);

private:
    void check_id(NodeId id) const;

    HyperParams params_;
    std::vector<SearchNode> nodes_;
};

} // namespace amsearch
