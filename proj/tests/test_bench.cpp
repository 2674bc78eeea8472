#include "doctest.h"

#include <random>

#include "amsearch/bench.hpp"
#include "amsearch/scripted_backend.hpp"
#include "test_support.hpp"

using namespace amsearch;
using testsupport::TempDir;
using testsupport::write_file;

namespace {

ScriptRule verdict_rule(std::vector<std::string> needles, std::string response) {
    ScriptRule rule;
    rule.tag = Tag::kComparison;
    rule.substrings = std::move(needles);
    rule.response = std::move(response);
    return rule;
}

} // namespace

TEST_SUITE("bench") {

TEST_CASE("normalization lowercases, strips punctuation and drops articles") {
    CHECK(normalize_answer("The  quick, brown-fox!") == "quick brown fox");
    CHECK(normalize_answer("An Answer") == "answer");
    CHECK(normalize_answer("a an the") == "");
    CHECK(normalize_answer("") == "");
    CHECK(normalize_answer("42.") == "42");
    CHECK(normalize_answer("  padded \t words \n") == "padded words");
    // article words survive inside larger tokens
    CHECK(normalize_answer("theater another") == "theater another");
}

TEST_CASE("exact match and token F1 agree with the hand oracles") {
    CHECK(exact_match("The Eiffel Tower", {"eiffel tower"}) == 1.0);
    CHECK(f1_score("The Eiffel Tower", {"eiffel tower"}) == 1.0);

    CHECK(exact_match("Paris France", {"Paris"}) == 0.0);
    CHECK(f1_score("Paris France", {"Paris"}) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-4));

    // both sides empty after normalization
    CHECK(exact_match("the", {"a"}) == 1.0);
    CHECK(f1_score("the", {"a"}) == 1.0);

    // one side empty
    CHECK(exact_match("", {"Paris"}) == 0.0);
    CHECK(f1_score("", {"Paris"}) == 0.0);
    CHECK(f1_score("Paris", {"the"}) == 0.0);

    // the best gold wins
    CHECK(exact_match("blue whale", {"red fox", "Blue Whale", "whale"}) == 1.0);
    CHECK(f1_score("blue whale shark", {"whale shark", "fox"}) ==
          doctest::Approx(0.8).epsilon(1e-12));

    // repeated tokens overlap as a multiset, not a set
    CHECK(f1_score("yes yes", {"yes"}) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    CHECK_THROWS_AS((void)exact_match("x", {}), std::invalid_argument);
    CHECK_THROWS_AS((void)f1_score("x", {}), std::invalid_argument);
}

TEST_CASE("exact match never exceeds F1 across random strings") {
    std::mt19937 rng(1234);
    const std::vector<std::string> vocabulary = {"tok0", "tok1", "tok2", "tok3",
                                                 "the",  "a",    "an",   "x,y."};
    auto random_text = [&rng, &vocabulary] {
        std::uniform_int_distribution<int> length(0, 6);
        std::uniform_int_distribution<std::size_t> pick(0, vocabulary.size() - 1);
        std::string text;
        const int n = length(rng);
        for (int i = 0; i < n; ++i) {
            if (!text.empty()) text += " ";
            text += vocabulary[pick(rng)];
        }
        return text;
    };
    for (int i = 0; i < 10000; ++i) {
        const std::string prediction = random_text();
        const std::vector<std::string> golds = {random_text()};
        const double em = exact_match(prediction, golds);
        const double f1 = f1_score(prediction, golds);
        REQUIRE(em <= f1 + 1e-12);
        REQUIRE(f1 >= 0.0);
        REQUIRE(f1 <= 1.0);
        if (em == 1.0) REQUIRE(f1 == 1.0);
        // single-gold F1 is symmetric in its two texts
        REQUIRE(f1 == doctest::Approx(f1_score(golds[0], {prediction})).epsilon(1e-12));
    }
}

TEST_CASE("corpus rollups average the rows and demand alignment") {
    const std::vector<QaItem> items = {{"q1", "?", {"eiffel tower"}},
                                       {"q2", "?", {"Paris"}}};
    std::vector<QaRow> rows;
    const QaReport report = evaluate_qa(items, {"The Eiffel Tower", "Paris France"}, &rows);
    CHECK(report.n == 2);
    CHECK(report.em == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(report.f1 == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0).epsilon(1e-9));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].qid == "q1");
    CHECK(rows[0].em == 1.0);
    CHECK(rows[1].f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK(rows[1].prediction == "Paris France");

    CHECK_THROWS_AS((void)evaluate_qa(items, {"only one"}), std::invalid_argument);
    CHECK_THROWS_AS((void)evaluate_qa({}, {}), std::invalid_argument);
}

TEST_CASE("rubric averages are score fractions with strict bounds") {
    CHECK(rubric_average({{"q1", 23.0, 23.0}}) == 1.0);
    CHECK(rubric_average({{"q1", 23.0, 23.0}, {"q2", 11.5, 23.0}}) == 0.75);
    CHECK(rubric_average({{"q1", 0.0, 23.0}}) == 0.0);
    // scale-free: fractions, not raw sums
    CHECK(rubric_average({{"q1", 1.0, 2.0}, {"q2", 50.0, 100.0}}) == 0.5);
    // permutation invariant
    CHECK(rubric_average({{"q2", 11.5, 23.0}, {"q1", 23.0, 23.0}}) == 0.75);

    CHECK_THROWS_AS((void)rubric_average({}), std::invalid_argument);
    CHECK_THROWS_AS((void)rubric_average({{"q1", 24.0, 23.0}}), std::invalid_argument);
    CHECK_THROWS_AS((void)rubric_average({{"q1", -0.5, 23.0}}), std::invalid_argument);
    CHECK_THROWS_AS((void)rubric_average({{"q1", 1.0, 0.0}}), std::invalid_argument);
}

TEST_CASE("rubric judging parses the scalar and clamps overshoot") {
    CrbItem item;
    item.qid = "q1";
    item.question = "Name the linked towns.";
    item.judge_rules = "One point per town, full marks for the connecting river.";
    item.total_score = 23.0;

    auto backend = std::make_shared<ScriptedBackend>();
    ScriptRule rule;
    rule.tag = Tag::kJudgment;
    rule.substrings = {"between 0 and 23"};
    rule.response = "17.0";
    backend->add_rule(rule);
    Gateway gateway(backend);
    const Evaluator evaluator;

    CHECK(judge_rubric(item, "both towns and the river", gateway, evaluator) == 17.0);

    auto clamping = std::make_shared<ScriptedBackend>();
    rule.response = "25";
    clamping->add_rule(rule);
    Gateway clamping_gateway(clamping);
    CHECK(judge_rubric(item, "answer", clamping_gateway, evaluator) == 23.0);

    CrbItem broken = item;
    broken.total_score = 0.0;
    CHECK_THROWS_AS((void)judge_rubric(broken, "answer", gateway, evaluator),
                    std::invalid_argument);
}

TEST_CASE("QA datasets load from JSONL and array forms with located errors") {
    TempDir dir;
    const std::string jsonl =
        R"({"qid": "q1", "question": "Tallest tower?", "golds": ["eiffel tower"]})"
        "\n\n"
        R"({"qid": "q2", "question": "Capital?", "golds": ["Paris", "paris france"]})"
        "\n";
    write_file(dir.file("qa.jsonl"), jsonl);
    const auto items = load_qa_items(dir.file("qa.jsonl"));
    REQUIRE(items.size() == 2);
    CHECK(items[0].qid == "q1");
    CHECK(items[1].golds.size() == 2);

    write_file(dir.file("qa.json"),
               R"([{"qid": "q1", "question": "Tallest tower?", "golds": ["eiffel tower"]}])");
    CHECK(load_qa_items(dir.file("qa.json")).size() == 1);

    write_file(dir.file("bad_line.jsonl"),
               R"({"qid": "q1", "question": "ok", "golds": ["x"]})"
               "\n{broken\n");
    CHECK_THROWS_WITH_AS((void)load_qa_items(dir.file("bad_line.jsonl")),
                         doctest::Contains("line 2"), DataError);

    write_file(dir.file("missing_key.jsonl"), R"({"qid": "q1", "question": "ok"})" "\n");
    CHECK_THROWS_AS((void)load_qa_items(dir.file("missing_key.jsonl")), DataError);

    write_file(dir.file("empty_golds.jsonl"),
               R"({"qid": "q1", "question": "ok", "golds": []})" "\n");
    CHECK_THROWS_AS((void)load_qa_items(dir.file("empty_golds.jsonl")), DataError);

    write_file(dir.file("empty.jsonl"), "\n  \n");
    CHECK_THROWS_AS((void)load_qa_items(dir.file("empty.jsonl")), DataError);
    CHECK_THROWS_AS((void)load_qa_items(dir.file("absent.jsonl")), DataError);
}

TEST_CASE("rubric datasets require a positive total score") {
    TempDir dir;
    write_file(dir.file("crb.jsonl"),
               R"({"qid": "r1", "question": "Describe the trade route between the two towns.",)"
               R"( "judge_rules": "Award up to 10 for naming both endpoints, up to 8 for the)"
               R"( goods carried, up to 5 for the seasonal timing.", "total_score": 23})"
               "\n");
    const auto items = load_crb_items(dir.file("crb.jsonl"));
    REQUIRE(items.size() == 1);
    CHECK(items[0].qid == "r1");
    CHECK(items[0].total_score == 23.0);
    CHECK(items[0].judge_rules.find("seasonal timing") != std::string::npos);

    write_file(dir.file("zero.jsonl"),
               R"({"qid": "r1", "question": "q", "judge_rules": "r", "total_score": 0})" "\n");
    CHECK_THROWS_AS((void)load_crb_items(dir.file("zero.jsonl")), DataError);

    write_file(dir.file("missing.jsonl"),
               R"({"qid": "r1", "question": "q", "total_score": 5})" "\n");
    CHECK_THROWS_AS((void)load_crb_items(dir.file("missing.jsonl")), DataError);
}

TEST_CASE("subsetting is deterministic per seed and a no-op at the edges") {
    std::vector<int> items(10);
    for (int i = 0; i < 10; ++i) items[static_cast<std::size_t>(i)] = i;

    CHECK(subset_items(items, 0, 7) == items);
    CHECK(subset_items(items, 10, 7) == items);
    CHECK(subset_items(items, 99, 7) == items);

    const auto first = subset_items(items, 3, 7);
    const auto second = subset_items(items, 3, 7);
    CHECK(first == second);
    CHECK(first.size() == 3);
    for (int value : first) {
        CHECK(value >= 0);
        CHECK(value <= 9);
    }
    CHECK(subset_items(items, 3, 8) != first); // another seed, another draw
}

TEST_CASE("the win matrix is complementary with a 0.5 diagonal") {
    const std::map<std::string, std::vector<std::string>> answers = {
        {"alpha", {"xa one", "xa two"}},
        {"beta", {"yb one", "yb two"}},
        {"gamma", {"zc one", "zc two"}},
    };
    auto backend = std::make_shared<ScriptedBackend>(
        std::vector<ScriptRule>{verdict_rule({"Response A:\nxa"}, "ANSWER_A"),
                                verdict_rule({"Response B:\nxa"}, "ANSWER_B")},
        std::string("TIE"));
    Gateway gateway(backend);
    const Evaluator evaluator;

    const WinMatrix matrix = pairwise_win_matrix(answers, gateway, evaluator);
    REQUIRE(matrix.model_ids == std::vector<std::string>{"alpha", "beta", "gamma"});

    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(matrix.wins[i][i] == 0.5);
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(matrix.wins[i][j] + matrix.wins[j][i] ==
                  doctest::Approx(1.0).epsilon(1e-12));
    }
    // alpha always wins; beta and gamma only ever tie each other
    CHECK(matrix.wins[0][1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(matrix.wins[0][2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(matrix.wins[1][2] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(matrix.avg[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(matrix.avg[1] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(matrix.avg[2] == doctest::Approx(0.25).epsilon(1e-12));
    // every cell saw both presentation orders for both questions
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(matrix.n[i][j] == (i == j ? 0 : 4));
}

TEST_CASE("the comparison seed only reorders judging, never the result") {
    const std::map<std::string, std::vector<std::string>> answers = {
        {"alpha", {"xa one", "xa two", "xa three"}},
        {"beta", {"yb one", "yb two", "yb three"}},
    };
    auto run_with_seed = [&answers](unsigned seed) {
        auto backend = std::make_shared<ScriptedBackend>(
            std::vector<ScriptRule>{verdict_rule({"Response A:\nxa"}, "ANSWER_A"),
                                    verdict_rule({"Response B:\nxa"}, "ANSWER_B")},
            std::string("TIE"));
        Gateway gateway(backend);
        const Evaluator evaluator;
        CompareOptions options;
        options.seed = seed;
        return pairwise_win_matrix(answers, gateway, evaluator, options);
    };
    const WinMatrix one = run_with_seed(1);
    const WinMatrix other = run_with_seed(999);
    CHECK(one.wins == other.wins);
    CHECK(one.n == other.n);
    CHECK(one.avg == other.avg);
}

TEST_CASE("a verdict-free judge degrades the cell count, not the matrix shape") {
    const std::map<std::string, std::vector<std::string>> answers = {
        {"good", {"fine"}},
        {"mumble", {"hmm"}},
    };
    auto backend = std::make_shared<ScriptedBackend>(std::vector<ScriptRule>{
        verdict_rule({"Response A:\nfine"}, "ANSWER_A"),
        verdict_rule({"Response A:\nhmm"}, "no verdict in this reply"),
        verdict_rule({"Reply with exactly one token"}, "still nothing usable"),
    });
    Gateway gateway(backend);
    const Evaluator evaluator;

    const WinMatrix matrix = pairwise_win_matrix(answers, gateway, evaluator);
    // the mumble-first order burned its re-asks and was dropped
    CHECK(matrix.n[0][1] == 1);
    CHECK(matrix.wins[0][1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(matrix.wins[1][0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("a fully failed cell falls back to an even split with zero count") {
    const std::map<std::string, std::vector<std::string>> answers = {
        {"a", {"x"}},
        {"b", {"y"}},
    };
    auto backend = std::make_shared<ScriptedBackend>(); // everything unscripted
    Gateway gateway(backend);
    const Evaluator evaluator;
    const WinMatrix matrix = pairwise_win_matrix(answers, gateway, evaluator);
    CHECK(matrix.wins[0][1] == 0.5);
    CHECK(matrix.wins[1][0] == 0.5);
    CHECK(matrix.n[0][1] == 0);
}

TEST_CASE("degenerate comparison inputs are rejected") {
    auto backend = std::make_shared<ScriptedBackend>(std::vector<ScriptRule>{},
                                                     std::string("TIE"));
    Gateway gateway(backend);
    const Evaluator evaluator;
    CHECK_THROWS_AS(
        (void)pairwise_win_matrix({{"solo", {"x"}}}, gateway, evaluator),
        std::invalid_argument);
    CHECK_THROWS_AS(
        (void)pairwise_win_matrix({{"a", {"x", "y"}}, {"b", {"z"}}}, gateway, evaluator),
        std::invalid_argument);
    CHECK_THROWS_AS(
        (void)pairwise_win_matrix({{"a", {}}, {"b", {}}}, gateway, evaluator),
        std::invalid_argument);
}

TEST_CASE("CSV and JSON exports carry headers, quoting and matrix shape") {
    const std::string qa_csv = qa_rows_csv({{"q1", 1.0, 1.0, "plain"},
                                            {"q2", 0.0, 0.5, "with, comma \"quoted\""}});
    CHECK(qa_csv.rfind("qid,em,f1,prediction\n", 0) == 0);
    CHECK(qa_csv.find("\"with, comma \"\"quoted\"\"\"") != std::string::npos);
    CHECK(qa_csv.find("q1,1.000000,1.000000,plain\n") != std::string::npos);

    const std::string crb_csv = crb_rows_csv({{"r1", 11.5, 23.0}});
    CHECK(crb_csv.rfind("qid,score,total_score,fraction\n", 0) == 0);
    CHECK(crb_csv.find("r1,11.500000,23.000000,0.500000\n") != std::string::npos);

    WinMatrix matrix;
    matrix.model_ids = {"a", "b"};
    matrix.wins = {{0.5, 1.0}, {0.0, 0.5}};
    matrix.n = {{0, 2}, {2, 0}};
    matrix.avg = {1.0, 0.0};
    const std::string matrix_csv = win_matrix_csv(matrix);
    CHECK(matrix_csv == "model,a,b,avg\n"
                        "a,0.500000,1.000000,1.000000\n"
                        "b,0.000000,0.500000,0.000000\n");

    const auto report = qa_report_json({0.5, 0.75, 4});
    CHECK(report.at("em") == 0.5);
    CHECK(report.at("f1") == 0.75);
    CHECK(report.at("n") == 4);

    const auto matrix_doc = win_matrix_json(matrix);
    CHECK(matrix_doc.at("model_ids").size() == 2);
    CHECK(matrix_doc.at("wins")[0][1] == 1.0);
    CHECK(matrix_doc.at("n")[1][0] == 2);
    CHECK(matrix_doc.at("avg")[0] == 1.0);
}

} // TEST_SUITE
