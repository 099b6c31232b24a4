#include "brag/judge.hpp"

#include <doctest.h>

#include <set>
#include <unordered_set>

#include "brag/errors.hpp"

using namespace brag;
using namespace brag::judge;

namespace {

bayes::PriorConfig eval_prior() {
    bayes::PriorConfig prior;
    apply_generator_sources(prior);
    return prior;
}

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("generate_cases is byte-identical for a fixed seed") {
    const auto a = generate_cases(42, 10);
    const auto b = generate_cases(42, 10);
    REQUIRE(a.size() == 10);
    REQUIRE(b.size() == 10);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].case_id == b[i].case_id);
        CHECK(a[i].question == b[i].question);
        CHECK(a[i].gold_fact == b[i].gold_fact);
        REQUIRE(a[i].chunks.size() == b[i].chunks.size());
        for (std::size_t k = 0; k < a[i].chunks.size(); ++k) {
            CHECK(a[i].chunks[k].chunk_id == b[i].chunks[k].chunk_id);
            CHECK(a[i].chunks[k].text == b[i].chunks[k].text);
            CHECK(a[i].chunks[k].source == b[i].chunks[k].source);
            CHECK(a[i].chunks[k].page == b[i].chunks[k].page);
        }
    }
    CHECK(generate_cases(43, 1)[0].question != a[0].question);
}

TEST_CASE("every generated case has exactly one gold-bearing chunk") {
    const GeneratorConfig cfg;
    for (const auto& ec : generate_cases(7, 50)) {
        int gold_bearing = 0;
        int conflicting = 0;
        for (const auto& chunk : ec.chunks) {
            if (contains(chunk.text, ec.gold_fact)) {
                ++gold_bearing;
                CHECK(chunk.page <= 10);
                const bool reputed =
                    std::find(cfg.reputed_sources.begin(),
                              cfg.reputed_sources.end(),
                              chunk.source) != cfg.reputed_sources.end();
                CHECK(reputed);
            }
            if (contains(chunk.chunk_id, "-conflict")) ++conflicting;
        }
        CHECK(gold_bearing == 1);
        CHECK(conflicting >= 1);
    }
}

TEST_CASE("conflicting chunks cover at least the gold chunk's query tokens") {
    for (const auto& ec : generate_cases(21, 25)) {
        const auto q_tokens = retrieval::tokenize(ec.question);
        const std::unordered_set<std::string> q(q_tokens.begin(), q_tokens.end());
        auto shared_count = [&](const corpus::Chunk& chunk) {
            const auto tokens = retrieval::tokenize(chunk.text);
            const std::unordered_set<std::string> set(tokens.begin(), tokens.end());
            std::size_t shared = 0;
            for (const auto& t : q) shared += set.count(t);
            return shared;
        };
        std::size_t gold_shared = 0;
        for (const auto& chunk : ec.chunks) {
            if (contains(chunk.text, ec.gold_fact)) gold_shared = shared_count(chunk);
        }
        for (const auto& chunk : ec.chunks) {
            if (contains(chunk.chunk_id, "-conflict")) {
                CHECK(shared_count(chunk) >= gold_shared);
                CHECK_FALSE(contains(chunk.text, ec.gold_fact));
            }
        }
    }
}

TEST_CASE("generated posteriors separate gold from conflicting chunks") {
    // The stated oracle: run the scoring core on the emitted case.
    const auto cases = generate_cases(99, 1);
    REQUIRE(cases.size() == 1);
    const auto& ec = cases[0];
    const auto prior = eval_prior();
    std::vector<double> likelihoods;
    for (const auto& chunk : ec.chunks) {
        likelihoods.push_back(bayes::lexical_likelihood(ec.question, chunk.text));
    }
    const auto scored = bayes::score_chunks(ec.question, ec.chunks, likelihoods,
                                            prior);
    for (const auto& s : scored) {
        if (contains(s.chunk.text, ec.gold_fact)) {
            CHECK(s.posterior > 0.5);
            CHECK(s.included);
        } else if (contains(s.chunk.chunk_id, "-conflict")) {
            CHECK(s.posterior <= 0.5);
            CHECK_FALSE(s.included);
        }
    }
}

TEST_CASE("generate_cases validates its inputs") {
    CHECK_THROWS_AS(generate_cases(1, 0), DataError);
    GeneratorConfig bad;
    bad.conflicting_min = 0;
    CHECK_THROWS_AS(generate_cases(1, 1, bad), DataError);
    GeneratorConfig bad_rate;
    bad_rate.conflict_outrank_rate = 1.5;
    CHECK_THROWS_AS(generate_cases(1, 1, bad_rate), DataError);
}

TEST_CASE("apply_generator_sources rates tags without clobbering") {
    GeneratorConfig cfg;
    bayes::PriorConfig prior;
    prior.source_reputation[cfg.reputed_sources[0]] = 0.9;
    apply_generator_sources(prior, cfg);
    CHECK(prior.source_reputation[cfg.reputed_sources[0]] == 0.9);
    CHECK(prior.source_reputation[cfg.reputed_sources[1]] == 0.7);
    CHECK(prior.source_reputation[cfg.low_sources[0]] == 0.5);
}

TEST_CASE("mock_answer parrots the most similar embedded chunk") {
    std::vector<corpus::Chunk> chunks{
        corpus::make_chunk("close", "s", 1, 0, "alpha bravo charlie delta"),
        corpus::make_chunk("far", "s", 1, 0, "unrelated words entirely here")};
    const auto index = retrieval::Index::build(chunks, 64);

    const auto bundle =
        prompt::render_baseline("alpha bravo charlie delta", chunks);
    CHECK(mock_answer(bundle, index) == "alpha bravo charlie delta");

    const auto only_far = prompt::render_baseline(
        "alpha bravo charlie delta", {chunks[1]});
    CHECK(mock_answer(only_far, index) == "unrelated words entirely here");

    CHECK(mock_answer(bundle, index) == mock_answer(bundle, index));
}

TEST_CASE("mock_answer breaks similarity ties by chunk id") {
    std::vector<corpus::Chunk> chunks{
        corpus::make_chunk("bbb", "s", 1, 0, "same words"),
        corpus::make_chunk("aaa", "s", 1, 0, "same words")};
    const auto index = retrieval::Index::build(chunks, 64);
    const auto bundle = prompt::render_baseline("same words", chunks);
    CHECK(mock_answer(bundle, index) == "same words");
    // Both texts equal; the tie must resolve to the smaller id.
    const auto q = index.embed_query("same words");
    CHECK(retrieval::dot(q, index.embedding_of("aaa:1:0")) ==
          retrieval::dot(q, index.embedding_of("bbb:1:0")));
}

TEST_CASE("judge_answer in mock mode is a case-insensitive substring check") {
    CHECK(judge_answer("She WAS Disqualified before the final bout.",
                       "was disqualified before the final bout", Mode::Mock));
    CHECK_FALSE(judge_answer("She won the final.", "was disqualified",
                             Mode::Mock));
}

TEST_CASE("judge_answer in llm mode parses YES and NO") {
    llm::MockProvider provider;
    provider.script_response("YES");
    CHECK(judge_answer("answer", "fact", Mode::Llm, &provider, "m"));
    provider.script_response("No, it does not.");
    CHECK_FALSE(judge_answer("answer", "fact", Mode::Llm, &provider, "m"));

    provider.script_response("inscrutable");
    std::vector<std::string> warnings;
    CHECK_FALSE(judge_answer("answer", "fact", Mode::Llm, &provider, "m",
                             [&](const std::string& w) { warnings.push_back(w); }));
    CHECK(warnings.size() == 1);
}

TEST_CASE("judge_answer in llm mode needs a provider") {
    CHECK_THROWS_AS(judge_answer("a", "f", Mode::Llm, nullptr), DataError);
}

TEST_CASE("run_eval flips constructed conflict-dominant cases") {
    // Outrank rate 1.0: every baseline answer parrots a conflicting chunk,
    // while the filtered arm keeps only the gold chunk.
    GeneratorConfig cfg;
    cfg.conflict_outrank_rate = 1.0;
    cfg.distractor_min = 0;
    cfg.distractor_max = 0;
    const auto cases = generate_cases(5, 20, cfg);
    const auto report = run_eval(cases, eval_prior(), Mode::Mock);
    CHECK(report.cases == 20);
    CHECK(report.baseline_accuracy == 0.0);
    CHECK(report.filtered_accuracy == 1.0);
    CHECK_FALSE(report.relative_improvement_pct.has_value());
}

TEST_CASE("run_eval with the filter disabled compares a pipeline to itself") {
    EvalOptions opts;
    opts.disable_filter = true;
    const auto cases = generate_cases(11, 15);
    const auto report = run_eval(cases, eval_prior(), Mode::Mock, opts);
    CHECK(report.baseline_correct == report.filtered_correct);
    if (report.relative_improvement_pct) {
        CHECK(*report.relative_improvement_pct == 0.0);
    }
}

TEST_CASE("run_eval is deterministic in mock mode") {
    const auto cases = generate_cases(7, 12);
    const auto a = run_eval(cases, eval_prior(), Mode::Mock);
    const auto b = run_eval(cases, eval_prior(), Mode::Mock);
    CHECK(report_to_json(a, 7, Mode::Mock) == report_to_json(b, 7, Mode::Mock));
}

TEST_CASE("run_eval flags cases whose filtered arm excluded everything") {
    bayes::PriorConfig strict = eval_prior();
    strict.threshold = 0.99;
    const auto cases = generate_cases(3, 5);
    const auto report = run_eval(cases, strict, Mode::Mock);
    CHECK(report.filtered_correct == 0);
    CHECK(report.flagged_cases.size() == 5);
    for (const auto& record : report.records) {
        CHECK(record.filtered_excluded_all);
        CHECK_FALSE(record.filtered.correct);
    }
}

TEST_CASE("run_eval accuracy bounds and record bookkeeping hold") {
    const auto cases = generate_cases(13, 30);
    const auto report = run_eval(cases, eval_prior(), Mode::Mock);
    CHECK(report.baseline_correct <= report.cases);
    CHECK(report.filtered_correct <= report.cases);
    CHECK(report.baseline_accuracy >= 0.0);
    CHECK(report.baseline_accuracy <= 1.0);
    CHECK(report.filtered_accuracy >= 0.0);
    CHECK(report.filtered_accuracy <= 1.0);
    REQUIRE(report.records.size() == 30);
    CHECK(std::is_sorted(report.records.begin(), report.records.end(),
                         [](const CaseRecord& a, const CaseRecord& b) {
                             return a.case_id < b.case_id;
                         }));
    for (const auto& record : report.records) {
        CHECK(record.baseline.template_id == prompt::TemplateId::Baseline);
        CHECK(record.filtered.template_id == prompt::TemplateId::Scored);
        CHECK_FALSE(record.posteriors.empty());
    }
}

TEST_CASE("run_eval rejects an empty case list") {
    CHECK_THROWS_AS(run_eval({}, eval_prior(), Mode::Mock), DataError);
}

TEST_CASE("the paper's three-chunk scenario as an eval case") {
    EvalCase ec;
    ec.case_id = "phogat";
    ec.question = "What happened to India in women's freestyle Olympics?";
    ec.gold_fact = "disqualified";
    ec.chunks = {
        corpus::make_chunk("phogat-toi", "Times of India", 1, 0,
                           "Vinesh Phogat was disqualified for being overweight "
                           "before her final bout in the women's 50kg category "
                           "at the Paris Olympics 2024."),
        corpus::make_chunk("phogat-arif", "Arif Media", 1, 0,
                           "Vinesh Phogat wins Paris Olympics finals after "
                           "defeating Ukraine's Oksana Livach."),
        corpus::make_chunk("phogat-wire", "The WIRE", 1, 0,
                           "Vinesh Phogat wins women's 50kg freestyle "
                           "semi-final defeating Ukraine's Oksana Livach."),
    };

    bayes::PriorConfig prior;
    prior.source_reputation = {{"Times of India", 0.7},
                               {"Arif Media", 0.5},
                               {"The WIRE", 0.7}};

    const auto index = retrieval::Index::build(ec.chunks, 256);

    // Filtered pipeline: lexical likelihoods are too coarse to reach the
    // threshold against this prose question, so grade with the paper's
    // likelihoods directly.
    const auto scored = bayes::score_chunks(ec.question, ec.chunks,
                                            {0.8, 0.5, 0.7}, prior);
    const auto filtered_bundle = prompt::render_scored(ec.question, scored);
    const auto filtered_answer = mock_answer(filtered_bundle, index);
    CHECK(judge_answer(filtered_answer, ec.gold_fact, Mode::Mock));

    // Baseline with a conflicting chunk ranked first: the parrot answers
    // from whichever chunk is most query-similar; force the failure by
    // embedding only conflicting chunks ahead of gold.
    const auto baseline_bundle = prompt::render_baseline(
        ec.question, {ec.chunks[1], ec.chunks[2]});
    const auto baseline_answer = mock_answer(baseline_bundle, index);
    CHECK_FALSE(judge_answer(baseline_answer, ec.gold_fact, Mode::Mock));
}
