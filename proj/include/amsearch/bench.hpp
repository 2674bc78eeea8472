#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "amsearch/evaluator.hpp"
#include "amsearch/gateway.hpp"

namespace amsearch {

struct QaItem {
    std::string qid;
    std::string question;
    std::vector<std::string> golds; // at least one
};

struct CrbItem {
    std::string qid;
    std::string question;
    std::string judge_rules;
    double total_score = 0.0; // > 0
};

struct QaReport {
    double em = 0.0;
    double f1 = 0.0;
    std::size_t n = 0;
};

struct QaRow {
    std::string qid;
    double em = 0.0;
    double f1 = 0.0;
    std::string prediction;
};

struct CrbRow {
    std::string qid;
    double score = 0.0;       // judge-assigned, in [0, total]
    double total_score = 0.0; // rubric maximum for this question
};

// Pairwise comparison outcome. wins[i][j] is the expected win share of model
// i over model j, both presentation orders averaged; the diagonal is 0.5 by
// convention. n[i][j] counts the judged comparisons behind the cell, so a
// cell degraded by judge failures is visible.
struct WinMatrix {
    std::vector<std::string> model_ids;
    std::vector<std::vector<double>> wins;
    std::vector<std::vector<int>> n;
    std::vector<double> avg; // row mean, diagonal excluded
};

// Answer-matching normalization: lowercase, strip punctuation, collapse
// whitespace, drop the articles a/an/the.
std::string normalize_answer(const std::string& text);

// Exact match of normalized forms, maximized over the gold list.
double exact_match(const std::string& prediction, const std::vector<std::string>& golds);

// Token-level F1 of normalized forms, maximized over the gold list. Two
// empty normalized forms score 1; empty against nonempty scores 0.
double f1_score(const std::string& prediction, const std::vector<std::string>& golds);

// Corpus-level means over aligned predictions. Throws std::invalid_argument
// on length mismatch or empty input.
QaReport evaluate_qa(const std::vector<QaItem>& items,
                     const std::vector<std::string>& predictions,
                     std::vector<QaRow>* rows = nullptr);

// One-question rubric judging: scalar in [0, item.total_score].
double judge_rubric(const CrbItem& item, const std::string& answer, Gateway& gateway,
                    const Evaluator& evaluator);

// Mean of per-question score fractions: (1/N) * sum(score_i / total_i).
// Throws std::invalid_argument on empty input or out-of-range rows.
double rubric_average(const std::vector<CrbRow>& rows);

// Round-robin comparison over aligned answer lists (same question order per
// model). Every unordered pair is judged per question in both presentation
// orders; a judge failure on one order drops that order from the cell count.
struct CompareOptions {
    unsigned seed = 42; // order of issue only; the result set is order-free
};
WinMatrix pairwise_win_matrix(const std::map<std::string, std::vector<std::string>>& answers,
                              Gateway& gateway, const Evaluator& evaluator,
                              CompareOptions options = {});

// Loaders: one JSON object per line, or a single JSON array of objects.
// QA: {"qid", "question", "golds": [...]}; rubric: {"qid", "question",
// "judge_rules", "total_score"}. Throws DataError naming the record.
std::vector<QaItem> load_qa_items(const std::string& path);
std::vector<CrbItem> load_crb_items(const std::string& path);

// Deterministic subset: shuffles a copy with mt19937(seed) and keeps the
// first `cap` items. cap == 0 or cap >= size keeps everything (in order).
template <typename T>
std::vector<T> subset_items(std::vector<T> items, std::size_t cap, unsigned seed) {
    if (cap == 0 || cap >= items.size())
        return items;
    std::mt19937 rng(seed);
    std::shuffle(items.begin(), items.end(), rng);
    items.resize(cap);
    return items;
}

// CSV exports, header included. Fields are quoted as needed.
std::string qa_rows_csv(const std::vector<QaRow>& rows);
std::string crb_rows_csv(const std::vector<CrbRow>& rows);
std::string win_matrix_csv(const WinMatrix& matrix);

nlohmann::ordered_json qa_report_json(const QaReport& report);
nlohmann::ordered_json win_matrix_json(const WinMatrix& matrix);

} // namespace amsearch
