#include "amsearch/evaluator.hpp"

#include <algorithm>
#include <cctype>
#include <iostream>
#include <sstream>

#include "amsearch/prompts.hpp"

namespace amsearch {

std::optional<ScoreParse> parse_score_text(const std::string& text, double lo, double hi) {
    // First substring that reads as a decimal number, sign included.
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        const bool digit_start =
            std::isdigit(static_cast<unsigned char>(c)) ||
            ((c == '-' || c == '+' || c == '.') && i + 1 < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[i + 1])));
        if (!digit_start) continue;
        try {
            std::size_t consumed = 0;
            const double value = std::stod(text.substr(i), &consumed);
            (void)consumed;
            ScoreParse parse;
            parse.value = std::clamp(value, lo, hi);
            parse.clamped = value < lo || value > hi;
            return parse;
        } catch (const std::exception&) {
            continue;
        }
    }
    return std::nullopt;
}

double node_value(const EvalScores& scores, double beta) {
    return scores.gen_score + beta * scores.assoc_score;
}

Evaluator::Evaluator(Options options, Gateway* judge_override)
    : options_(options), judge_override_(judge_override) {
    if (options_.max_reasks < 0)
        throw std::invalid_argument("max_reasks must be >= 0");
}

double Evaluator::scalar_query(PromptBundle bundle, double lo, double hi,
                               Gateway& gateway) const {
    Gateway& judge = pick(gateway);
    std::string last_reply;
    for (int attempt = 0; attempt <= options_.max_reasks; ++attempt) {
        if (attempt > 0) {
            std::ostringstream correction;
            correction << "That reply could not be read as a number. Reply with only a "
                          "single number between " << lo << " and " << hi << ".";
            bundle.messages.push_back({Role::kAssistant, last_reply});
            bundle.messages.push_back({Role::kUser, correction.str()});
        }
        last_reply = judge.complete(bundle).text;
        if (auto parsed = parse_score_text(last_reply, lo, hi)) {
            if (parsed->clamped)
                std::cerr << "[warn] judge score out of [" << lo << ", " << hi
                          << "], clamped: " << last_reply << '\n';
            return parsed->value;
        }
    }
    throw EvaluationError("judge reply not numeric after " +
                          std::to_string(options_.max_reasks) + " re-asks: " + last_reply);
}

double Evaluator::score_generation(const std::string& query, const std::string& generated,
                                   Gateway& gateway) const {
    return scalar_query(assemble_generation_eval_prompt(query, generated), 0.0, 1.0, gateway);
}

double Evaluator::score_association(const std::string& generated, const std::string& associative,
                                    Gateway& gateway) const {
    if (associative.empty())
        return 0.0;
    return scalar_query(assemble_association_eval_prompt(generated, associative), 0.0, 1.0,
                        gateway);
}

namespace {

// Whole-word, case-insensitive scan. INCOMPLETE must be tested before
// COMPLETE: the latter is a substring of the former.
bool contains_word(const std::string& text, const std::string& word) {
    std::string lowered(text);
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::string needle(word);
    std::transform(needle.begin(), needle.end(), needle.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::size_t pos = 0;
    while ((pos = lowered.find(needle, pos)) != std::string::npos) {
        const bool left_ok =
            pos == 0 || !std::isalpha(static_cast<unsigned char>(lowered[pos - 1]));
        const std::size_t end = pos + needle.size();
        const bool right_ok =
            end >= lowered.size() || !std::isalpha(static_cast<unsigned char>(lowered[end]));
        if (left_ok && right_ok) return true;
        pos += 1;
    }
    return false;
}

std::string extract_rationale(const std::string& reply) {
    // Text after the first separator following the verdict token.
    static const char* separators = "-:\xE2"; // '-', ':' or the first byte of an en/em dash
    const auto pos = reply.find_first_of(separators);
    std::string rationale = pos == std::string::npos ? reply : reply.substr(pos + 1);
    // Multibyte dashes leave continuation bytes behind; strip non-text prefix.
    const auto start = rationale.find_first_not_of(" \t\r\n-:\x80\x93\x94");
    rationale = start == std::string::npos ? "" : rationale.substr(start);
    const auto last = rationale.find_last_not_of(" \t\r\n");
    rationale = last == std::string::npos ? "" : rationale.substr(0, last + 1);
    if (rationale.empty()) rationale = reply;
    if (rationale.empty()) rationale = "no rationale given";
    return rationale;
}

} // namespace

Judgment Evaluator::judge_complete(const std::string& query, const std::string& candidate,
                                   Gateway& gateway) const {
    Gateway& judge = pick(gateway);
    PromptBundle bundle = assemble_judgment_prompt(query, candidate);
    std::string last_reply;
    for (int attempt = 0; attempt <= options_.max_reasks; ++attempt) {
        if (attempt > 0) {
            bundle.messages.push_back({Role::kAssistant, last_reply});
            bundle.messages.push_back(
                {Role::kUser,
                 "That reply carried no verdict. Reply with COMPLETE or INCOMPLETE, then a "
                 "one-line reason after a dash."});
        }
        last_reply = judge.complete(bundle).text;
        Judgment judgment;
        if (contains_word(last_reply, "INCOMPLETE")) {
            judgment.completed = false;
        } else if (contains_word(last_reply, "COMPLETE")) {
            judgment.completed = true;
        } else {
            continue;
        }
        judgment.rationale = extract_rationale(last_reply);
        return judgment;
    }
    throw EvaluationError("judge reply carried no verdict after " +
                          std::to_string(options_.max_reasks) + " re-asks: " + last_reply);
}

} // namespace amsearch
