#include "amsearch/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "amsearch/bench.hpp"
#include "amsearch/brain.hpp"
#include "amsearch/config.hpp"
#include "amsearch/errors.hpp"
#include "amsearch/http_backend.hpp"
#include "amsearch/scripted_backend.hpp"
#include "amsearch/search_engine.hpp"

namespace amsearch {

namespace {

struct BuiltGateway {
    std::shared_ptr<Backend> backend;
    std::unique_ptr<Gateway> gateway;
};

BuiltGateway build_gateway(const AppConfig& config) {
    BuiltGateway built;
    if (config.gateway.backend == "scripted") {
        if (config.gateway.script_path.empty())
            throw DataError("scripted backend needs gateway.script_path");
        auto scripted = ScriptedBackend::from_file(config.gateway.script_path);
        if (config.gateway.script_fallback)
            scripted->set_fallback(config.gateway.script_fallback);
        built.backend = std::move(scripted);
    } else {
        HttpBackendOptions options;
        options.base_url = config.gateway.base_url;
        options.model = config.gateway.model;
        options.api_key_env = config.gateway.api_key_env;
        built.backend = std::make_shared<HttpBackend>(options);
    }
    CacheOptions cache;
    cache.enabled = config.gateway.cache_enabled;
    cache.path = config.gateway.cache_path;
    built.gateway = std::make_unique<Gateway>(built.backend, config.gateway.retry, cache);
    return built;
}

std::optional<ExternalBrain> build_brain(const AppConfig& config) {
    if (!config.brain.enabled || config.brain.corpus_path.empty())
        return std::nullopt;
    const auto docs = load_corpus_jsonl(config.brain.corpus_path);
    Bm25Index::Params params;
    params.snippet_chars = config.brain.snippet_chars;
    auto index = std::make_shared<Bm25Index>(params);
    index->index_corpus(docs);
    ExternalBrain::Options options;
    options.top_k = config.brain.top_k;
    options.snippet_chars = config.brain.snippet_chars;
    return ExternalBrain(std::move(index), options);
}

SearchRequest make_request(const AppConfig& config, const std::string& query, bool has_brain) {
    SearchRequest request;
    request.query = query;
    request.params = config.search;
    request.use_external_brain = has_brain;
    request.use_association = config.use_association;
    request.run_log_path = config.run_log_path;
    return request;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out)
        throw DataError("cannot write file: " + path);
    out << content;
}

void write_answers_file(const std::string& path, const std::string& model_id,
                        const std::vector<std::pair<std::string, std::string>>& qid_answers) {
    nlohmann::ordered_json doc;
    doc["model_id"] = model_id;
    auto answers = nlohmann::ordered_json::array();
    for (const auto& [qid, text] : qid_answers)
        answers.push_back({{"qid", qid}, {"text", text}});
    doc["answers"] = std::move(answers);
    write_text_file(path, doc.dump(2) + "\n");
}

int cmd_ask(const AppConfig& config, const std::string& query) {
    auto built = build_gateway(config);
    const auto brain = build_brain(config);
    const Evaluator evaluator({.max_reasks = config.max_reasks});

    SearchRequest request = make_request(config, query, brain.has_value());
    request.trace_path = config.trace_path;
    const SearchResult result =
        run_search(request, *built.gateway, brain ? &*brain : nullptr, evaluator);

    std::cout << result.answer << '\n';
    std::cerr << "[info] completed=" << (result.completed ? "true" : "false")
              << " rounds=" << result.rounds << " nodes=" << result.nodes_created << '\n';
    return 0;
}

int cmd_eval(const AppConfig& config, const std::string& dataset, const std::string& kind,
             const std::string& out_path, const std::string& csv_path,
             const std::string& answers_path) {
    auto built = build_gateway(config);
    const auto brain = build_brain(config);
    const Evaluator evaluator({.max_reasks = config.max_reasks});

    const auto answer_for = [&](const std::string& question) {
        const SearchRequest request = make_request(config, question, brain.has_value());
        return run_search(request, *built.gateway, brain ? &*brain : nullptr, evaluator).answer;
    };

    std::vector<std::pair<std::string, std::string>> qid_answers;
    if (kind == "qa") {
        const auto items = subset_items(load_qa_items(dataset), config.harness.subset_cap,
                                        config.harness.seed);
        std::vector<std::string> predictions;
        predictions.reserve(items.size());
        for (const QaItem& item : items) {
            predictions.push_back(answer_for(item.question));
            qid_answers.emplace_back(item.qid, predictions.back());
        }
        std::vector<QaRow> rows;
        const QaReport report = evaluate_qa(items, predictions, &rows);
        write_text_file(out_path, qa_report_json(report).dump(2) + "\n");
        if (!csv_path.empty())
            write_text_file(csv_path, qa_rows_csv(rows));
        std::cout << "em=" << report.em << " f1=" << report.f1 << " n=" << report.n << '\n';
    } else { // "crb", enforced by the flag parser
        const auto items = subset_items(load_crb_items(dataset), config.harness.subset_cap,
                                        config.harness.seed);
        std::vector<CrbRow> rows;
        rows.reserve(items.size());
        for (const CrbItem& item : items) {
            const std::string answer = answer_for(item.question);
            qid_answers.emplace_back(item.qid, answer);
            const double score = judge_rubric(item, answer, *built.gateway, evaluator);
            rows.push_back({item.qid, score, item.total_score});
        }
        const double mean = rubric_average(rows);
        nlohmann::ordered_json report = {{"score_mean", mean}, {"n", rows.size()}};
        write_text_file(out_path, report.dump(2) + "\n");
        if (!csv_path.empty())
            write_text_file(csv_path, crb_rows_csv(rows));
        std::cout << "score_mean=" << mean << " n=" << rows.size() << '\n';
    }

    if (!answers_path.empty())
        write_answers_file(answers_path, built.backend->id(), qid_answers);
    return 0;
}

struct AnswerFile {
    std::string model_id;
    std::map<std::string, std::string> by_qid;
};

AnswerFile load_answer_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open answers file: " + path);
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("model_id") ||
        !doc.contains("answers"))
        throw DataError("answers file needs model_id and answers: " + path);
    AnswerFile file;
    file.model_id = doc.at("model_id").get<std::string>();
    for (const auto& entry : doc.at("answers")) {
        const std::string qid = entry.at("qid").get<std::string>();
        if (file.by_qid.count(qid))
            throw DataError("duplicate qid " + qid + " in " + path);
        file.by_qid[qid] = entry.at("text").get<std::string>();
    }
    if (file.by_qid.empty())
        throw DataError("answers file has no entries: " + path);
    return file;
}

int cmd_compare(const AppConfig& config, const std::vector<std::string>& paths,
                const std::string& out_path, const std::string& csv_path) {
    auto built = build_gateway(config);
    const Evaluator evaluator({.max_reasks = config.max_reasks});

    std::vector<AnswerFile> files;
    files.reserve(paths.size());
    for (const std::string& path : paths)
        files.push_back(load_answer_file(path));

    std::map<std::string, std::vector<std::string>> aligned;
    const auto& reference = files.front().by_qid;
    for (const AnswerFile& file : files) {
        if (aligned.count(file.model_id))
            throw DataError("duplicate model_id across answer files: " + file.model_id);
        if (file.by_qid.size() != reference.size())
            throw DataError("answer files disagree on the question list (" + file.model_id +
                            " has " + std::to_string(file.by_qid.size()) + " answers, expected " +
                            std::to_string(reference.size()) + ")");
        std::vector<std::string> ordered;
        ordered.reserve(reference.size());
        for (const auto& [qid, unused] : reference) {
            const auto it = file.by_qid.find(qid);
            if (it == file.by_qid.end())
                throw DataError("answer files disagree on the question list (qid " + qid +
                                " missing for " + file.model_id + ")");
            ordered.push_back(it->second);
        }
        aligned[file.model_id] = std::move(ordered);
    }

    CompareOptions options;
    options.seed = config.harness.seed;
    const WinMatrix matrix = pairwise_win_matrix(aligned, *built.gateway, evaluator, options);

    write_text_file(out_path, win_matrix_json(matrix).dump(2) + "\n");
    if (!csv_path.empty())
        write_text_file(csv_path, win_matrix_csv(matrix));
    for (std::size_t i = 0; i < matrix.model_ids.size(); ++i)
        std::cout << matrix.model_ids[i] << " avg=" << matrix.avg[i] << '\n';
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"tree search with associative memory over chat-completion models"};
    app.require_subcommand(1);

    std::string config_path;
    FlagOverrides flags;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--trace", flags.trace, "write the final search tree to this JSON file");
    app.add_option("--depth", flags.depth,
                   "expansion-round budget; -1 removes the limit");
    app.add_option("--k", flags.k, "children added per expansion");
    app.add_option("--beta", flags.beta, "association weight in node values");
    app.add_flag("--no-brain", flags.no_brain,
                 "disable associative memory; node values reduce to the content score");
    app.add_option("--subset", flags.subset,
                   "evaluate only this many items (seeded random subset)");
    app.add_option("--seed", flags.seed, "seed for subsetting and comparison order");

    auto* ask = app.add_subcommand("ask", "answer one query with the search loop");
    ask->fallthrough();
    std::string query;
    ask->add_option("query", query, "the question to answer")->required();

    auto* eval = app.add_subcommand("eval", "run a dataset and score the answers");
    eval->fallthrough();
    std::string dataset;
    std::string kind = "qa";
    std::string out_path = "report.json";
    std::string csv_path = "per_question.csv";
    std::string answers_path;
    eval->add_option("dataset", dataset, "QA or rubric dataset (JSON or JSONL)")->required();
    eval->add_option("--kind", kind, "dataset kind")->check(CLI::IsMember({"qa", "crb"}));
    eval->add_option("--out", out_path, "summary report path");
    eval->add_option("--csv", csv_path, "per-question CSV path (empty string skips it)");
    eval->add_option("--answers", answers_path, "also dump raw answers for compare");

    auto* compare = app.add_subcommand("compare", "pairwise win rates over answer files");
    compare->fallthrough();
    std::vector<std::string> answer_files;
    std::string matrix_out = "win_matrix.json";
    std::string matrix_csv;
    compare->add_option("files", answer_files, "answer files from eval --answers")
        ->required()
        ->expected(2, -1);
    compare->add_option("--out", matrix_out, "matrix JSON path");
    compare->add_option("--csv", matrix_csv, "matrix CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : 1;
    }

    try {
        const std::optional<std::string> config_file =
            config_path.empty() ? std::nullopt : std::optional<std::string>(config_path);
        const AppConfig config = load_app_config(config_file, flags);
        if (ask->parsed())
            return cmd_ask(config, query);
        if (eval->parsed())
            return cmd_eval(config, dataset, kind, out_path, csv_path, answers_path);
        if (compare->parsed())
            return cmd_compare(config, answer_files, matrix_out, matrix_csv);
        std::cerr << "error: no subcommand given\n";
        return 1;
    } catch (const SearchError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    } catch (const GatewayError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    } catch (const EvaluationError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    } catch (const DataError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("amsearch");
    for (const std::string& arg : args)
        argv.push_back(arg.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

} // namespace amsearch
