#pragma once

#include <optional>
#include <string>

#include "amsearch/gateway.hpp"

namespace amsearch {

struct EvalScores {
    double gen_score = 0.0;
    double assoc_score = 0.0;
};

struct Judgment {
    bool completed = false;
    std::string rationale; // nonempty whenever completed is false
};

struct ScoreParse {
    double value = 0.0;
    bool clamped = false;
};

// First numeric token of `text`, clamped into [lo, hi]. nullopt when no
// number is present at all.
std::optional<ScoreParse> parse_score_text(const std::string& text, double lo, double hi);

// Two-component node value: gen_score + beta * assoc_score.
double node_value(const EvalScores& scores, double beta);

// Judge-prompt wrapper around a gateway. Every scalar query re-asks up to
// `max_reasks` times with a corrective follow-up before failing with
// EvaluationError. A distinct judge gateway may be installed; by default the
// gateway passed at each call site is used.
class Evaluator {
public:
    struct Options {
        int max_reasks = 2;
    };

    Evaluator() : Evaluator(Options{}) {}
    explicit Evaluator(Options options, Gateway* judge_override = nullptr);

    // Score in [0, 1] for content quality against the query.
    double score_generation(const std::string& query, const std::string& generated,
                            Gateway& gateway) const;

    // Score in [0, 1] for an associative text. An empty text scores 0 without
    // any model call.
    double score_association(const std::string& generated, const std::string& associative,
                             Gateway& gateway) const;

    // COMPLETE / INCOMPLETE verdict with rationale.
    Judgment judge_complete(const std::string& query, const std::string& candidate,
                            Gateway& gateway) const;

    // Scalar in [0, hi] for an arbitrary prepared scoring bundle. Shared by
    // the rubric path of the benchmark harness.
    double scalar_query(PromptBundle bundle, double lo, double hi, Gateway& gateway) const;

    const Options& options() const { return options_; }

private:
    Gateway& pick(Gateway& gateway) const {
        return judge_override_ ? *judge_override_ : gateway;
    }

    Options options_;
    Gateway* judge_override_;
};

} // namespace amsearch
