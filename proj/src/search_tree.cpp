#include "amsearch/search_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace amsearch {

namespace {

constexpr double kValueSlack = 1e-9; // tolerance on the value-bound check

} // namespace

const char* to_string(NodeStatus status) {
    switch (status) {
    case NodeStatus::kFresh: return "fresh";
    case NodeStatus::kEvaluated: return "evaluated";
    case NodeStatus::kJudgedComplete: return "judged_complete";
    case NodeStatus::kJudgedIncomplete: return "judged_incomplete";
    }
    throw std::logic_error("unknown node status");
}

NodeStatus node_status_from_string(const std::string& text) {
    if (text == "fresh") return NodeStatus::kFresh;
    if (text == "evaluated") return NodeStatus::kEvaluated;
    if (text == "judged_complete") return NodeStatus::kJudgedComplete;
    if (text == "judged_incomplete") return NodeStatus::kJudgedIncomplete;
    throw std::invalid_argument("unknown node status: " + text);
}

void HyperParams::validate() const {
    if (branch_factor < 1)
        throw std::invalid_argument("branch_factor must be >= 1");
    if (max_rounds < 1 && max_rounds != -1)
        throw std::invalid_argument("max_rounds must be >= 1 or -1 (unbounded)");
    if (!(exploration_weight >= 0.0))
        throw std::invalid_argument("exploration_weight must be >= 0");
    if (!(assoc_weight >= 0.0))
        throw std::invalid_argument("assoc_weight must be >= 0");
}

SearchTree::SearchTree(HyperParams params, std::string root_generated, std::string root_associative)
    : params_(params) {
    params_.validate();
    SearchNode root;
    root.id = 0;
    root.parent = kNoParent;
    root.depth = 0;
    root.generated = std::move(root_generated);
    root.associative = std::move(root_associative);
    nodes_.push_back(std::move(root));
}

void SearchTree::check_id(NodeId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
        throw std::out_of_range("no node with id " + std::to_string(id));
}

const SearchNode& SearchTree::node(NodeId id) const {
    check_id(id);
    return nodes_[static_cast<std::size_t>(id)];
}

SearchNode& SearchTree::node_mut(NodeId id) {
    check_id(id);
    return nodes_[static_cast<std::size_t>(id)];
}

double SearchTree::uct(NodeId id) const {
    const SearchNode& n = node(id);
    if (n.parent == kNoParent)
        throw std::invalid_argument("uct undefined for root");
    if (n.visits == 0)
        return std::numeric_limits<double>::infinity();
    const SearchNode& p = node(n.parent);
    if (p.visits == 0)
        throw std::domain_error("uct undefined under an unvisited parent");
    return n.value + params_.exploration_weight *
                         std::sqrt(std::log(static_cast<double>(p.visits)) /
                                   static_cast<double>(n.visits));
}

Trajectory SearchTree::select() const {
    NodeId current = root_id();
    while (!node(current).is_leaf()) {
        const auto& kids = node(current).children;
        NodeId best = kids.front();
        double best_score = uct(best);
        for (std::size_t i = 1; i < kids.size(); ++i) {
            double score = uct(kids[i]);
            if (score > best_score) { // ties keep the lowest child index
                best = kids[i];
                best_score = score;
            }
        }
        current = best;
    }
    return trajectory_to(current);
}

std::vector<NodeId> SearchTree::add_children(NodeId parent, const std::vector<ChildPayload>& payloads) {
    SearchNode& p = node_mut(parent);
    if (!p.children.empty())
        throw std::invalid_argument("node " + std::to_string(parent) + " already expanded");
    if (payloads.size() != static_cast<std::size_t>(params_.branch_factor))
        throw std::invalid_argument("expected " + std::to_string(params_.branch_factor) +
                                    " children, got " + std::to_string(payloads.size()));
    std::vector<NodeId> ids;
    ids.reserve(payloads.size());
    const int child_depth = p.depth + 1;
    for (const ChildPayload& payload : payloads) {
        SearchNode child;
        child.id = static_cast<NodeId>(nodes_.size());
        child.parent = parent;
        child.depth = child_depth;
        child.generated = payload.generated;
        child.associative = payload.associative;
        ids.push_back(child.id);
        nodes_.push_back(std::move(child));
        // push_back may reallocate; re-acquire the parent reference.
        nodes_[static_cast<std::size_t>(parent)].children.push_back(ids.back());
    }
    return ids;
}

void SearchTree::mark_evaluated(NodeId id, double gen_score, double assoc_score, double value) {
    SearchNode& n = node_mut(id);
    if (n.status != NodeStatus::kFresh)
        throw std::invalid_argument("node " + std::to_string(id) + " already evaluated");
    if (!(gen_score >= 0.0 && gen_score <= 1.0))
        throw std::invalid_argument("gen_score out of [0, 1]");
    if (!(assoc_score >= 0.0 && assoc_score <= 1.0))
        throw std::invalid_argument("assoc_score out of [0, 1]");
    if (!(value >= -kValueSlack && value <= 1.0 + params_.assoc_weight + kValueSlack))
        throw std::invalid_argument("value out of [0, 1 + assoc_weight]");
    n.gen_score = gen_score;
    n.assoc_score = assoc_score;
    n.value = value;
    n.visits = 1;
    n.status = NodeStatus::kEvaluated;
}

void SearchTree::mark_judged(NodeId id, bool completed) {
    SearchNode& n = node_mut(id);
    if (n.status == NodeStatus::kFresh)
        throw std::invalid_argument("cannot judge a fresh node");
    n.status = completed ? NodeStatus::kJudgedComplete : NodeStatus::kJudgedIncomplete;
}

double SearchTree::backpropagate(NodeId parent) {
    SearchNode& p = node_mut(parent);
    if (p.children.empty())
        throw std::logic_error("cannot backpropagate a node without children");
    if (p.status == NodeStatus::kFresh)
        throw std::logic_error("cannot backpropagate through a fresh node");
    double child_sum = 0.0;
    for (NodeId child : p.children) {
        const SearchNode& c = node(child);
        if (c.status == NodeStatus::kFresh)
            throw std::logic_error("cannot backpropagate a fresh child");
        child_sum += c.value;
    }
    const int batch = static_cast<int>(p.children.size());
    p.value = (p.value * p.visits + child_sum) / static_cast<double>(p.visits + batch);
    p.visits += batch;

    // Each ancestor absorbs its freshly updated child as a batch of one.
    NodeId child_id = parent;
    while (nodes_[static_cast<std::size_t>(child_id)].parent != kNoParent) {
        NodeId ancestor_id = nodes_[static_cast<std::size_t>(child_id)].parent;
        SearchNode& a = nodes_[static_cast<std::size_t>(ancestor_id)];
        if (a.status == NodeStatus::kFresh)
            throw std::logic_error("cannot backpropagate through a fresh node");
        const double child_value = nodes_[static_cast<std::size_t>(child_id)].value;
        a.value = (a.value * a.visits + child_value) / static_cast<double>(a.visits + 1);
        a.visits += 1;
        child_id = ancestor_id;
    }
    return nodes_.front().value;
}

NodeId SearchTree::best_answer_leaf() const {
    NodeId best = kNoParent;
    bool best_complete = false;
    for (const SearchNode& n : nodes_) {
        if (!n.is_leaf() || n.status == NodeStatus::kFresh)
            continue;
        const bool complete = n.status == NodeStatus::kJudgedComplete;
        if (best == kNoParent) {
            best = n.id;
            best_complete = complete;
            continue;
        }
        const SearchNode& b = nodes_[static_cast<std::size_t>(best)];
        if (complete != best_complete) {
            if (complete) {
                best = n.id;
                best_complete = true;
            }
            continue;
        }
        // Equal completeness class: higher value wins, lowest id on ties.
        if (n.value > b.value) best = n.id;
    }
    if (best == kNoParent)
        throw std::runtime_error("empty search");
    return best;
}

Trajectory SearchTree::trajectory_to(NodeId id) const {
    check_id(id);
    Trajectory t;
    for (NodeId cur = id; cur != kNoParent; cur = nodes_[static_cast<std::size_t>(cur)].parent)
        t.node_ids.push_back(cur);
    std::reverse(t.node_ids.begin(), t.node_ids.end());
    for (NodeId nid : t.node_ids) {
        const auto& am = nodes_[static_cast<std::size_t>(nid)].associative;
        if (!am.empty()) t.am_history.push_back(am);
    }
    return t;
}

nlohmann::ordered_json SearchTree::to_json() const {
    nlohmann::ordered_json doc;
    doc["params"] = {
        {"branch_factor", params_.branch_factor},
        {"max_rounds", params_.max_rounds},
        {"exploration_weight", params_.exploration_weight},
        {"assoc_weight", params_.assoc_weight},
    };
    auto nodes = nlohmann::ordered_json::array();
    for (const SearchNode& n : nodes_) {
        nlohmann::ordered_json item;
        item["id"] = n.id;
        if (n.parent == kNoParent)
            item["parent"] = nullptr;
        else
            item["parent"] = n.parent;
        item["depth"] = n.depth;
        item["generated"] = n.generated;
        item["associative"] = n.associative;
        item["value"] = n.value;
        item["visits"] = n.visits;
        item["gen_score"] = n.gen_score;
        item["assoc_score"] = n.assoc_score;
        item["status"] = to_string(n.status);
        nodes.push_back(std::move(item));
    }
    doc["nodes"] = std::move(nodes);
    return doc;
}

SearchTree SearchTree::from_json(const nlohmann::ordered_json& doc) {
    if (!doc.is_object() || !doc.contains("params") || !doc.contains("nodes"))
        throw std::invalid_argument("trace must be an object with params and nodes");
    const auto& pj = doc.at("params");
    HyperParams params;
    params.branch_factor = pj.at("branch_factor").get<int>();
    params.max_rounds = pj.at("max_rounds").get<int>();
    params.exploration_weight = pj.at("exploration_weight").get<double>();
    params.assoc_weight = pj.at("assoc_weight").get<double>();
    params.validate();

    const auto& nodes = doc.at("nodes");
    if (!nodes.is_array() || nodes.empty())
        throw std::invalid_argument("trace must contain at least the root node");

    SearchTree tree(params);
    tree.nodes_.clear();
    tree.nodes_.reserve(nodes.size());
    for (const auto& item : nodes) {
        SearchNode n;
        n.id = item.at("id").get<NodeId>();
        n.parent = item.at("parent").is_null() ? kNoParent : item.at("parent").get<NodeId>();
        n.depth = item.at("depth").get<int>();
        n.generated = item.at("generated").get<std::string>();
        n.associative = item.at("associative").get<std::string>();
        n.value = item.at("value").get<double>();
        n.visits = item.at("visits").get<int>();
        n.gen_score = item.at("gen_score").get<double>();
        n.assoc_score = item.at("assoc_score").get<double>();
        n.status = node_status_from_string(item.at("status").get<std::string>());
        if (n.id != static_cast<NodeId>(tree.nodes_.size()))
            throw std::invalid_argument("node ids must be dense and ascending from 0");
        tree.nodes_.push_back(std::move(n));
    }
    if (tree.nodes_.front().parent != kNoParent)
        throw std::invalid_argument("node 0 must be the root");
    for (const SearchNode& n : tree.nodes_) {
        if (n.id == 0) continue;
        if (n.parent < 0 || static_cast<std::size_t>(n.parent) >= tree.nodes_.size())
            throw std::invalid_argument("node " + std::to_string(n.id) + " has an unknown parent");
        SearchNode& p = tree.nodes_[static_cast<std::size_t>(n.parent)];
        if (n.depth != p.depth + 1)
            throw std::invalid_argument("node " + std::to_string(n.id) + " has an inconsistent depth");
        p.children.push_back(n.id);
    }
    return tree;
}

} // namespace amsearch
