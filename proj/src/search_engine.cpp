#include "amsearch/search_engine.hpp"

#include <chrono>
#include <fstream>

#include "json.hpp"

#include "amsearch/prompts.hpp"

namespace amsearch {

namespace {

// Generated text, associative text and both scores for one staged child.
struct StagedChild {
    ChildPayload payload;
    EvalScores scores;
};

std::string associate(const std::string& query,
                      const std::string& generated,
                      Gateway& gateway,
                      const ExternalBrain* brain) {
    if (brain != nullptr) {
        const auto hits = brain->retrieve(query + "\n" + generated);
        return brain->compose_association(generated, hits, gateway);
    }
    // Self-association: same extraction prompt, no retrieved notes.
    const PromptBundle bundle = assemble_association_prompt(generated, {});
    return resolve_association_reply(gateway.complete(bundle).text);
}

StagedChild stage_child(const std::string& query,
                        const std::string& parent_generated,
                        const std::vector<std::string>& am_history,
                        int ordinal,
                        int branch_count,
                        Gateway& gateway,
                        const ExternalBrain* brain,
                        const Evaluator& evaluator,
                        bool use_association) {
    StagedChild staged;
    const PromptBundle gen_bundle = assemble_generation_prompt(query, parent_generated,
                                                               am_history, ordinal, branch_count);
    staged.payload.generated = gateway.complete(gen_bundle).text;
    if (use_association)
        staged.payload.associative = associate(query, staged.payload.generated, gateway, brain);
    staged.scores.gen_score = evaluator.score_generation(query, staged.payload.generated, gateway);
    staged.scores.assoc_score =
        evaluator.score_association(staged.payload.generated, staged.payload.associative, gateway);
    return staged;
}

void commit_children(SearchTree& tree, NodeId leaf, const std::vector<StagedChild>& staged,
                     std::vector<NodeId>& ids) {
    std::vector<ChildPayload> payloads;
    payloads.reserve(staged.size());
    for (const StagedChild& child : staged)
        payloads.push_back(child.payload);
    ids = tree.add_children(leaf, payloads);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const double value = node_value(staged[i].scores, tree.params().assoc_weight);
        tree.mark_evaluated(ids[i], staged[i].scores.gen_score, staged[i].scores.assoc_score,
                            value);
    }
}

void write_trace(const SearchTree& tree, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write trace file: " + path);
    out << tree.to_json().dump(2) << '\n';
}

void append_run_log(const std::string& path, const std::string& query, int rounds,
                    std::size_t nodes, bool completed, std::int64_t wall_ms) {
    std::ofstream out(path, std::ios::app);
    if (!out)
        throw DataError("cannot append to run log: " + path);
    nlohmann::ordered_json line = {
        {"query_fingerprint", fnv1a64_hex(query)},
        {"rounds", rounds},
        {"nodes", nodes},
        {"completed", completed},
        {"wall_ms", wall_ms},
    };
    out << line.dump() << '\n';
}

} // namespace

std::vector<NodeId> expand_node(SearchTree& tree,
                                NodeId leaf,
                                const std::string& query,
                                Gateway& gateway,
                                const ExternalBrain* brain,
                                const Evaluator& evaluator,
                                bool use_association) {
    const SearchNode& node = tree.node(leaf);
    if (!node.is_leaf())
        throw std::invalid_argument("node " + std::to_string(leaf) + " already expanded");
    const int max_rounds = tree.params().max_rounds;
    if (max_rounds != -1 && node.depth >= max_rounds)
        throw std::logic_error("node " + std::to_string(leaf) + " is at the depth cap");

    const Trajectory path = tree.trajectory_to(leaf);
    const int k = tree.params().branch_factor;

    // Stage everything first; the tree mutates only after every call worked.
    std::vector<StagedChild> staged;
    staged.reserve(static_cast<std::size_t>(k));
    for (int ordinal = 1; ordinal <= k; ++ordinal)
        staged.push_back(stage_child(query, node.generated, path.am_history, ordinal, k, gateway,
                                     brain, evaluator, use_association));

    std::vector<NodeId> ids;
    commit_children(tree, leaf, staged, ids);
    return ids;
}

SearchResult run_search(const SearchRequest& request,
                        Gateway& gateway,
                        const ExternalBrain* brain,
                        const Evaluator& evaluator) {
    request.params.validate();
    if (request.query.empty())
        throw std::invalid_argument("query must be nonempty");
    if (!gateway.probe())
        throw GatewayError("gateway probe failed", /*transient=*/false);

    const auto start = std::chrono::steady_clock::now();
    const ExternalBrain* active_brain =
        (request.use_association && request.use_external_brain) ? brain : nullptr;

    SearchTree tree(request.params);

    SearchResult result{.answer = "", .completed = false, .rounds = 0, .nodes_created = 0,
                        .best_leaf = 0, .tree = tree};
    try {
        // Root bootstrap: generate, associate, evaluate, judge.
        {
            const PromptBundle root_bundle =
                assemble_generation_prompt(request.query, "", {}, 1, 1);
            std::string root_generated = gateway.complete(root_bundle).text;
            std::string root_associative;
            if (request.use_association)
                root_associative = associate(request.query, root_generated, gateway, active_brain);
            tree = SearchTree(request.params, std::move(root_generated),
                              std::move(root_associative));
            const SearchNode& root = tree.node(tree.root_id());
            EvalScores scores;
            scores.gen_score = evaluator.score_generation(request.query, root.generated, gateway);
            scores.assoc_score =
                evaluator.score_association(root.generated, root.associative, gateway);
            tree.mark_evaluated(tree.root_id(), scores.gen_score, scores.assoc_score,
                                node_value(scores, tree.params().assoc_weight));
            const Judgment verdict =
                evaluator.judge_complete(request.query, root.generated, gateway);
            tree.mark_judged(tree.root_id(), verdict.completed);
            if (verdict.completed) {
                result.completed = true;
                result.best_leaf = tree.root_id();
            }
        }

        const int max_rounds = tree.params().max_rounds;
        while (!result.completed &&
               (max_rounds == -1 || result.rounds < max_rounds)) {
            const Trajectory path = tree.select();
            const auto child_ids = expand_node(tree, path.leaf(), request.query, gateway,
                                               active_brain, evaluator,
                                               request.use_association);
            result.rounds += 1;

            // Judge only the most promising fresh child this round.
            NodeId best_child = child_ids.front();
            for (NodeId id : child_ids)
                if (tree.node(id).value > tree.node(best_child).value) best_child = id;
            const Judgment verdict =
                evaluator.judge_complete(request.query, tree.node(best_child).generated, gateway);
            tree.mark_judged(best_child, verdict.completed);
            if (verdict.completed) {
                result.completed = true;
                result.best_leaf = best_child;
                break;
            }
            tree.backpropagate(path.leaf());
        }
    } catch (const GatewayError& err) {
        throw SearchError(std::string("search aborted: ") + err.what(), std::move(tree));
    } catch (const EvaluationError& err) {
        throw SearchError(std::string("search aborted: ") + err.what(), std::move(tree));
    }

    if (!result.completed)
        result.best_leaf = tree.best_answer_leaf();
    result.answer = tree.node(result.best_leaf).generated;
    result.nodes_created = static_cast<int>(tree.size());
    result.tree = std::move(tree);

    const auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    if (request.trace_path)
        write_trace(result.tree, *request.trace_path);
    if (request.run_log_path)
        append_run_log(*request.run_log_path, request.query, result.rounds,
                       result.tree.size(), result.completed, wall_ms);
    return result;
}

} // namespace amsearch
