#include "amsearch/bench.hpp"

#include <cctype>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "amsearch/prompts.hpp"

namespace amsearch {

std::string normalize_answer(const std::string& text) {
    std::string spaced;
    spaced.reserve(text.size());
    for (unsigned char c : text) {
        if (std::isalnum(c))
            spaced.push_back(static_cast<char>(std::tolower(c)));
        else
            spaced.push_back(' ');
    }
    std::istringstream words(spaced);
    std::string word;
    std::string out;
    while (words >> word) {
        if (word == "a" || word == "an" || word == "the") continue;
        if (!out.empty()) out.push_back(' ');
        out += word;
    }
    return out;
}

namespace {

std::vector<std::string> normalized_tokens(const std::string& text) {
    std::istringstream words(normalize_answer(text));
    std::vector<std::string> tokens;
    std::string word;
    while (words >> word) tokens.push_back(std::move(word));
    return tokens;
}

double pair_f1(const std::string& prediction, const std::string& gold) {
    const auto pred_tokens = normalized_tokens(prediction);
    const auto gold_tokens = normalized_tokens(gold);
    if (pred_tokens.empty() && gold_tokens.empty()) return 1.0;
    if (pred_tokens.empty() || gold_tokens.empty()) return 0.0;
    std::map<std::string, int> gold_counts;
    for (const auto& token : gold_tokens) gold_counts[token] += 1;
    int overlap = 0;
    for (const auto& token : pred_tokens) {
        auto it = gold_counts.find(token);
        if (it != gold_counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    const double precision = static_cast<double>(overlap) / pred_tokens.size();
    const double recall = static_cast<double>(overlap) / gold_tokens.size();
    return 2.0 * precision * recall / (precision + recall);
}

void require_golds(const std::vector<std::string>& golds) {
    if (golds.empty())
        throw std::invalid_argument("gold list must be nonempty");
}

} // namespace

double exact_match(const std::string& prediction, const std::vector<std::string>& golds) {
    require_golds(golds);
    const std::string normalized = normalize_answer(prediction);
    for (const std::string& gold : golds)
        if (normalized == normalize_answer(gold)) return 1.0;
    return 0.0;
}

double f1_score(const std::string& prediction, const std::vector<std::string>& golds) {
    require_golds(golds);
    double best = 0.0;
    for (const std::string& gold : golds)
        best = std::max(best, pair_f1(prediction, gold));
    return best;
}

QaReport evaluate_qa(const std::vector<QaItem>& items,
                     const std::vector<std::string>& predictions,
                     std::vector<QaRow>* rows) {
    if (items.empty())
        throw std::invalid_argument("no QA items to evaluate");
    if (items.size() != predictions.size())
        throw std::invalid_argument("predictions (" + std::to_string(predictions.size()) +
                                    ") misaligned with items (" + std::to_string(items.size()) +
                                    ")");
    QaReport report;
    report.n = items.size();
    for (std::size_t i = 0; i < items.size(); ++i) {
        const double em = exact_match(predictions[i], items[i].golds);
        const double f1 = f1_score(predictions[i], items[i].golds);
        report.em += em;
        report.f1 += f1;
        if (rows != nullptr)
            rows->push_back({items[i].qid, em, f1, predictions[i]});
    }
    report.em /= static_cast<double>(report.n);
    report.f1 /= static_cast<double>(report.n);
    return report;
}

double judge_rubric(const CrbItem& item, const std::string& answer, Gateway& gateway,
                    const Evaluator& evaluator) {
    if (item.total_score <= 0.0)
        throw std::invalid_argument("total_score must be > 0 for qid " + item.qid);
    const PromptBundle bundle =
        assemble_rubric_prompt(item.question, item.judge_rules, item.total_score, answer);
    return evaluator.scalar_query(bundle, 0.0, item.total_score, gateway);
}

double rubric_average(const std::vector<CrbRow>& rows) {
    if (rows.empty())
        throw std::invalid_argument("no rubric rows to average");
    double sum = 0.0;
    for (const CrbRow& row : rows) {
        if (row.total_score <= 0.0)
            throw std::invalid_argument("total_score must be > 0 for qid " + row.qid);
        if (row.score < 0.0 || row.score > row.total_score)
            throw std::invalid_argument("score out of [0, total] for qid " + row.qid);
        sum += row.score / row.total_score;
    }
    return sum / static_cast<double>(rows.size());
}

namespace {

// 1.0 when the first-listed response wins, 0.0 when it loses, 0.5 on a tie;
// nullopt when the judge failed for this order.
std::optional<double> judged_outcome(const std::string& first, const std::string& second,
                                     Gateway& gateway, int max_reasks) {
    PromptBundle bundle = assemble_comparison_prompt(first, second);
    try {
        std::string reply;
        for (int attempt = 0; attempt <= max_reasks; ++attempt) {
            if (attempt > 0) {
                bundle.messages.push_back({Role::kAssistant, reply});
                bundle.messages.push_back(
                    {Role::kUser, "Reply with exactly one token: ANSWER_A, ANSWER_B, or TIE."});
            }
            reply = gateway.complete(bundle).text;
            if (reply.find("ANSWER_A") != std::string::npos) return 1.0;
            if (reply.find("ANSWER_B") != std::string::npos) return 0.0;
            if (reply.find("TIE") != std::string::npos) return 0.5;
        }
        return std::nullopt;
    } catch (const GatewayError& err) {
        std::cerr << "[warn] comparison judge failed: " << err.what() << '\n';
        return std::nullopt;
    }
}

} // namespace

WinMatrix pairwise_win_matrix(const std::map<std::string, std::vector<std::string>>& answers,
                              Gateway& gateway, const Evaluator& evaluator,
                              CompareOptions options) {
    if (answers.size() < 2)
        throw std::invalid_argument("win matrix needs at least two models");
    WinMatrix matrix;
    std::size_t question_count = 0;
    bool first = true;
    for (const auto& [model_id, list] : answers) {
        matrix.model_ids.push_back(model_id);
        if (first) {
            question_count = list.size();
            first = false;
        } else if (list.size() != question_count) {
            throw std::invalid_argument("answer list for " + model_id +
                                        " misaligned with the question list");
        }
    }
    if (question_count == 0)
        throw std::invalid_argument("answer lists are empty");

    const std::size_t m = matrix.model_ids.size();
    matrix.wins.assign(m, std::vector<double>(m, 0.0));
    matrix.n.assign(m, std::vector<int>(m, 0));
    std::mt19937 rng(options.seed);

    for (std::size_t i = 0; i < m; ++i) {
        matrix.wins[i][i] = 0.5;
        for (std::size_t j = i + 1; j < m; ++j) {
            const auto& list_i = answers.at(matrix.model_ids[i]);
            const auto& list_j = answers.at(matrix.model_ids[j]);
            double score_i = 0.0;
            int judged = 0;
            for (std::size_t q = 0; q < question_count; ++q) {
                // Both orders are always judged; the coin only decides which
                // goes first, so judge drift over time cannot favor a side.
                const bool i_first = (rng() & 1u) == 0u;
                for (int pass = 0; pass < 2; ++pass) {
                    const bool i_is_a = (pass == 0) ? i_first : !i_first;
                    const int reasks = evaluator.options().max_reasks;
                    const auto outcome =
                        i_is_a ? judged_outcome(list_i[q], list_j[q], gateway, reasks)
                               : judged_outcome(list_j[q], list_i[q], gateway, reasks);
                    if (!outcome) continue;
                    score_i += i_is_a ? *outcome : 1.0 - *outcome;
                    ++judged;
                }
            }
            const double share = judged == 0 ? 0.5 : score_i / judged;
            matrix.wins[i][j] = share;
            matrix.wins[j][i] = 1.0 - share;
            matrix.n[i][j] = judged;
            matrix.n[j][i] = judged;
            if (judged < static_cast<int>(2 * question_count))
                std::cerr << "[warn] cell " << matrix.model_ids[i] << " vs "
                          << matrix.model_ids[j] << " judged " << judged << " of "
                          << 2 * question_count << " comparisons\n";
        }
    }

    matrix.avg.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            if (j != i) sum += matrix.wins[i][j];
        matrix.avg[i] = sum / static_cast<double>(m - 1);
    }
    return matrix;
}

namespace {

std::vector<nlohmann::json> records_from_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in)
        throw DataError(std::string("cannot open ") + what + " file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    const auto first_char = text.find_first_not_of(" \t\r\n");
    if (first_char == std::string::npos)
        throw DataError(std::string(what) + " file is empty: " + path);

    std::vector<nlohmann::json> records;
    if (text[first_char] == '[') {
        auto doc = nlohmann::json::parse(text, nullptr, false);
        if (doc.is_discarded() || !doc.is_array())
            throw DataError(std::string(what) + " file is not a valid JSON array: " + path);
        for (auto& item : doc) records.push_back(std::move(item));
    } else {
        std::istringstream lines(text);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(lines, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            auto doc = nlohmann::json::parse(line, nullptr, false);
            if (doc.is_discarded())
                throw DataError(std::string(what) + " line " + std::to_string(line_no) +
                                " is not valid JSON in " + path);
            records.push_back(std::move(doc));
        }
    }
    return records;
}

} // namespace

std::vector<QaItem> load_qa_items(const std::string& path) {
    std::vector<QaItem> items;
    for (const auto& record : records_from_file(path, "QA dataset")) {
        if (!record.is_object() || !record.contains("qid") || !record.contains("question") ||
            !record.contains("golds"))
            throw DataError("QA record " + std::to_string(items.size()) +
                            " needs qid, question and golds in " + path);
        QaItem item;
        item.qid = record.at("qid").get<std::string>();
        item.question = record.at("question").get<std::string>();
        for (const auto& gold : record.at("golds"))
            item.golds.push_back(gold.get<std::string>());
        if (item.golds.empty())
            throw DataError("QA record " + item.qid + " has an empty gold list in " + path);
        items.push_back(std::move(item));
    }
    if (items.empty())
        throw DataError("QA dataset has no records: " + path);
    return items;
}

std::vector<CrbItem> load_crb_items(const std::string& path) {
    std::vector<CrbItem> items;
    for (const auto& record : records_from_file(path, "rubric dataset")) {
        if (!record.is_object() || !record.contains("qid") || !record.contains("question") ||
            !record.contains("judge_rules") || !record.contains("total_score"))
            throw DataError("rubric record " + std::to_string(items.size()) +
                            " needs qid, question, judge_rules and total_score in " + path);
        CrbItem item;
        item.qid = record.at("qid").get<std::string>();
        item.question = record.at("question").get<std::string>();
        item.judge_rules = record.at("judge_rules").get<std::string>();
        item.total_score = record.at("total_score").get<double>();
        if (item.total_score <= 0.0)
            throw DataError("rubric record " + item.qid + " has total_score <= 0 in " + path);
        items.push_back(std::move(item));
    }
    if (items.empty())
        throw DataError("rubric dataset has no records: " + path);
    return items;
}

namespace {

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) return value;
    std::string quoted = "\"";
    for (char c : value) {
        if (c == '"') quoted += "\"\"";
        else quoted.push_back(c);
    }
    quoted.push_back('"');
    return quoted;
}

std::string format_double(double value) {
    std::ostringstream out;
    out.precision(6);
    out << std::fixed << value;
    return out.str();
}

} // namespace

std::string qa_rows_csv(const std::vector<QaRow>& rows) {
    std::string out = "qid,em,f1,prediction\n";
    for (const QaRow& row : rows)
        out += csv_field(row.qid) + "," + format_double(row.em) + "," + format_double(row.f1) +
               "," + csv_field(row.prediction) + "\n";
    return out;
}

std::string crb_rows_csv(const std::vector<CrbRow>& rows) {
    std::string out = "qid,score,total_score,fraction\n";
    for (const CrbRow& row : rows)
        out += csv_field(row.qid) + "," + format_double(row.score) + "," +
               format_double(row.total_score) + "," + format_double(row.score / row.total_score) +
               "\n";
    return out;
}

std::string win_matrix_csv(const WinMatrix& matrix) {
    std::string out = "model";
    for (const auto& id : matrix.model_ids) out += "," + csv_field(id);
    out += ",avg\n";
    for (std::size_t i = 0; i < matrix.model_ids.size(); ++i) {
        out += csv_field(matrix.model_ids[i]);
        for (std::size_t j = 0; j < matrix.model_ids.size(); ++j)
            out += "," + format_double(matrix.wins[i][j]);
        out += "," + format_double(matrix.avg[i]) + "\n";
    }
    return out;
}

nlohmann::ordered_json qa_report_json(const QaReport& report) {
    return {{"em", report.em}, {"f1", report.f1}, {"n", report.n}};
}

nlohmann::ordered_json win_matrix_json(const WinMatrix& matrix) {
    nlohmann::ordered_json doc;
    doc["model_ids"] = matrix.model_ids;
    doc["wins"] = matrix.wins;
    doc["avg"] = matrix.avg;
    doc["n"] = matrix.n;
    return doc;
}

} // namespace amsearch
