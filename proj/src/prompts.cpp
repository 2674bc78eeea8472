#include "amsearch/prompts.hpp"

#include <sstream>

namespace amsearch {

namespace {

constexpr const char* kGenerationSystem =
    "You are a careful reasoning engine. Extend the current line of reasoning "
    "toward a complete answer. Be concrete and do not repeat earlier steps.";

constexpr const char* kAssociationSystem =
    "You surface concise, novel background knowledge for an ongoing reasoning "
    "process.";

constexpr const char* kScoringSystem =
    "You are a strict judge. Follow the reply format exactly.";

std::string trim(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

} // namespace

PromptBundle assemble_generation_prompt(const std::string& query,
                                        const std::string& parent_generated,
                                        const std::vector<std::string>& am_history,
                                        int ordinal,
                                        int branch_count) {
    std::ostringstream user;
    user << "Question:\n" << query << "\n";
    if (!parent_generated.empty())
        user << "\nPrior reasoning:\n" << parent_generated << "\n";
    for (std::size_t i = 0; i < am_history.size(); ++i)
        user << "\nAssociated knowledge " << (i + 1) << ":\n" << am_history[i] << "\n";
    user << "\nWrite the next reasoning step (branch " << ordinal << " of " << branch_count
         << "). If the question can now be answered fully, give the final answer.";

    PromptBundle bundle;
    bundle.messages = {{Role::kSystem, kGenerationSystem}, {Role::kUser, user.str()}};
    bundle.temperature = kGenerationTemperature;
    bundle.max_tokens = 1024;
    bundle.tag = Tag::kGeneration;
    return bundle;
}

PromptBundle assemble_association_prompt(const std::string& generated,
                                         const std::vector<std::string>& snippets) {
    std::ostringstream user;
    user << "Reasoning step:\n" << generated << "\n";
    if (!snippets.empty()) {
        user << "\nRetrieved notes:\n";
        for (std::size_t i = 0; i < snippets.size(); ++i)
            user << "[" << (i + 1) << "] " << snippets[i] << "\n";
    }
    user << "\nExtract only key information that is new, concise and relevant to the "
            "reasoning step. Reply with that key information alone, or the single word "
            "NONE if nothing qualifies.";

    PromptBundle bundle;
    bundle.messages = {{Role::kSystem, kAssociationSystem}, {Role::kUser, user.str()}};
    bundle.temperature = kAssociationTemperature;
    bundle.max_tokens = 256;
    bundle.tag = Tag::kAssociation;
    return bundle;
}

PromptBundle assemble_generation_eval_prompt(const std::string& query,
                                             const std::string& generated) {
    std::ostringstream user;
    user << "Question:\n" << query << "\n\nResponse:\n" << generated << "\n\n"
         << "Rate how well the response advances toward a correct and complete answer. "
            "Reply with a single number between 0 and 1, using two decimals.";

    PromptBundle bundle;
    bundle.messages = {{Role::kSystem, kScoringSystem}, {Role::kUser, user.str()}};
    bundle.temperature = kScoringTemperature;
    bundle.max_tokens = 64;
    bundle.tag = Tag::kEvaluation;
    return bundle;
}

PromptBundle assemble_association_eval_prompt(const std::string& generated,
                                              const std::string& associative) {
    std::ostringstream user;
    user << "Reasoning step:\n" << generated << "\n\nAssociated note:\n" << associative
         << "\n\n"
         << "Rate the note for novelty, conciseness and relevance to the reasoning step. "
            "Reply with a single number between 0 and 1, using two decimals.";

    PromptBundle bundle;
    bundle.messages = {{Role::kSystem, kScoringSystem}, {Role::kUser, user.str()}};
    bundle.temperature = kScoringTemperature;
    bundle.max_tokens = 64;
    bundle.tag = Tag::kEvaluation;
    return bundle;
}

PromptBundle assemble_judgment_prompt(const std::string& query, const std::string& candidate) {
    std::ostringstream user;
    user << "Question:\n" << query << "\n\nCandidate answer:\n" << candidate << "\n\n"
         << "Does the candidate fully answer the question? Reply with COMPLETE or "
            "INCOMPLETE, then a one-line reason after a dash.";

    PromptBundle bundle;
    bundle.messages = {{Role::kSystem, kScoringSystem}, {Role::kUser, user.str()}};
    bundle.temperature = kScoringTemperature;
    bundle.max_tokens = 128;
    bundle.tag = Tag::kJudgment;
    return bundle;
}

PromptBundle assemble_rubric_prompt(const std::string& question,
                                    const std::string& judge_rules,
                                    double total_score,
                                    const std::string& answer) {
    std::ostringstream user;
    user << "Question:\n" << question << "\n\nScoring rules:\n" << judge_rules
         << "\n\nAnswer:\n" << answer << "\n\n"
         << "Score the answer according to the rules. Reply with a single number "
            "between 0 and " << total_score << ". Half points are allowed.";

    PromptBundle bundle;
    bundle.messages = {{Role::kSystem, kScoringSystem}, {Role::kUser, user.str()}};
    bundle.temperature = kScoringTemperature;
    bundle.max_tokens = 64;
    bundle.tag = Tag::kJudgment;
    return bundle;
}

PromptBundle assemble_comparison_prompt(const std::string& response_a,
                                        const std::string& response_b) {
    std::ostringstream user;
    user << "Response A:\n" << response_a << "\n\nResponse B:\n" << response_b << "\n\n"
         << "Which response is more comprehensive, detailed and accurate? Reply with "
            "ANSWER_A, ANSWER_B, or TIE.";

    PromptBundle bundle;
    bundle.messages = {{Role::kSystem, kScoringSystem}, {Role::kUser, user.str()}};
    bundle.temperature = kScoringTemperature;
    bundle.max_tokens = 16;
    bundle.tag = Tag::kComparison;
    return bundle;
}

std::string resolve_association_reply(const std::string& reply) {
    const std::string trimmed = trim(reply);
    std::string first_word = trimmed.substr(0, trimmed.find_first_of(" \t\r\n"));
    while (!first_word.empty() &&
           (first_word.back() == '.' || first_word.back() == ',' || first_word.back() == '!'))
        first_word.pop_back();
    if (first_word == "NONE")
        return "";
    return trimmed;
}

} // namespace amsearch
