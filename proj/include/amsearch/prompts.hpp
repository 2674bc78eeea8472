#pragma once

#include <string>
#include <vector>

#include "amsearch/gateway.hpp"

namespace amsearch {

// Template revision; bump on any wording change so cached fingerprints from
// older templates never alias new ones.
inline constexpr const char* kPromptVersion = "v1";

// Default sampling temperatures. Content-producing calls sample; scoring,
// verdicts and comparisons are deterministic.
inline constexpr double kGenerationTemperature = 0.7;
inline constexpr double kAssociationTemperature = 0.7;
inline constexpr double kScoringTemperature = 0.0;

// Next reasoning step, conditioned on the parent content and every nonempty
// associative text along the path. `ordinal`/`branch_count` name which of the
// K siblings is being produced, keeping sibling prompts distinct.
PromptBundle assemble_generation_prompt(const std::string& query,
                                        const std::string& parent_generated,
                                        const std::vector<std::string>& am_history,
                                        int ordinal = 1,
                                        int branch_count = 1);

// Associative-memory extraction for freshly generated content. `snippets`
// carries retrieved evidence; empty means self-association. The model must
// reply with key information only, or the literal token NONE.
PromptBundle assemble_association_prompt(const std::string& generated,
                                         const std::vector<std::string>& snippets);

// Scalar score in [0, 1] for how well `generated` advances on `query`.
PromptBundle assemble_generation_eval_prompt(const std::string& query,
                                             const std::string& generated);

// Scalar score in [0, 1] for novelty/conciseness/relevance of an AM text.
PromptBundle assemble_association_eval_prompt(const std::string& generated,
                                              const std::string& associative);

// COMPLETE / INCOMPLETE verdict on a candidate answer.
PromptBundle assemble_judgment_prompt(const std::string& query, const std::string& candidate);

// Scalar score in [0, total_score] against free-text scoring rules.
PromptBundle assemble_rubric_prompt(const std::string& question,
                                    const std::string& judge_rules,
                                    double total_score,
                                    const std::string& answer);

// ANSWER_A / ANSWER_B / TIE comparison of two responses.
PromptBundle assemble_comparison_prompt(const std::string& response_a,
                                        const std::string& response_b);

// "" when the model replied NONE (first word), the trimmed reply otherwise.
std::string resolve_association_reply(const std::string& reply);

} // namespace amsearch
