#include "brag/judge.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <random>

#include <nlohmann/json.hpp>

#include "brag/errors.hpp"

namespace brag::judge {

const char* to_string(Mode mode) {
    return mode == Mode::Mock ? "mock" : "llm";
}

namespace {

// mt19937_64's output sequence is pinned by the standard, so the generator
// is reproducible across platforms; modulo bias is irrelevant here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t below(std::uint64_t n) { return engine_() % n; }
    int range(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }
    bool chance(double p) {
        return (static_cast<double>(engine_() >> 11) / 9007199254740992.0) < p;
    }
    template <typename T>
    const T& pick(const std::vector<T>& pool) {
        return pool[below(pool.size())];
    }

private:
    std::mt19937_64 engine_;
};

const std::vector<std::string>& first_names() {
    static const std::vector<std::string> pool = {
        "Mira", "Devon", "Anya", "Karan", "Lena", "Tomas", "Priya", "Sasha"};
    return pool;
}

const std::vector<std::string>& surnames() {
    static const std::vector<std::string> pool = {
        "Vale", "Okafor", "Marsh", "Ibanez", "Kline", "Novak", "Petrov",
        "Sandoval"};
    return pool;
}

const std::vector<std::string>& sports() {
    static const std::vector<std::string> pool = {
        "wrestling", "judo", "fencing", "archery", "boxing", "rowing",
        "cycling", "sprint"};
    return pool;
}

const std::vector<std::string>& cities() {
    static const std::vector<std::string> pool = {
        "Lyon", "Osaka", "Porto", "Denver", "Cairo", "Perth", "Quito", "Malmo"};
    return pool;
}

constexpr const char* kGoldFact = "was disqualified before the final bout";

struct CaseSeed {
    std::string athlete;
    std::string city;
    std::string year;
    std::string sport;
};

std::string question_for(const CaseSeed& s) {
    return "What happened to " + s.athlete + " in the " + s.city + " " +
           s.year + " " + s.sport + " final?";
}

/// Reporter-style lead that repeats every question token, so both the gold
/// and the conflicting chunk fully cover the query token set.
std::string lead_for(const CaseSeed& s) {
    return "Asked what happened to " + s.athlete + " in the " + s.city + " " +
           s.year + " " + s.sport + " final, ";
}

std::string gold_text(const CaseSeed& s, bool verbose) {
    std::string text = lead_for(s) + "officials confirmed " + s.athlete + " " +
                       kGoldFact + ".";
    if (verbose) {
        text.pop_back();
        text +=
            ", citing a failed weigh-in recorded by the referees panel after "
            "repeated checks across several appeals and hearings.";
    }
    return text;
}

std::string conflicting_text(const CaseSeed& s, const std::string& opponent,
                             bool verbose) {
    std::string text =
        lead_for(s) + s.athlete + " won the final defeating " + opponent + ".";
    if (verbose) {
        text.pop_back();
        text +=
            ", though several posts disputed details and moderators flagged "
            "repeated edits, screenshots, replies and reposts overnight.";
    }
    return text;
}

std::string distractor_text(const std::string& city, const std::string& sport,
                            const std::string& year) {
    return "The " + city + " " + sport +
           " committee announced a schedule update for the " + year +
           " season, with sessions moved to the main hall and extra seats "
           "added near the west gallery.";
}

std::string zero_pad(int value, int width) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%0*d", width, value);
    return buf;
}

double similarity(const retrieval::Index& index, const retrieval::Embedding& q,
                  const std::string& chunk_id) {
    return std::clamp(retrieval::dot(q, index.embedding_of(chunk_id)), -1.0, 1.0);
}

}  // namespace

std::vector<EvalCase> generate_cases(std::uint64_t seed, int count,
                                     const GeneratorConfig& cfg) {
    if (count < 1) throw DataError("case count must be >= 1");
    if (cfg.conflicting_min < 1 || cfg.conflicting_max < cfg.conflicting_min) {
        throw DataError("conflicting chunk range must satisfy 1 <= min <= max");
    }
    if (cfg.distractor_min < 0 || cfg.distractor_max < cfg.distractor_min) {
        throw DataError("distractor range must satisfy 0 <= min <= max");
    }
    if (!(cfg.conflict_outrank_rate >= 0.0 && cfg.conflict_outrank_rate <= 1.0)) {
        throw DataError("conflict_outrank_rate must be in [0,1]");
    }
    if (cfg.reputed_sources.empty() || cfg.low_sources.empty()) {
        throw DataError("generator needs reputed and low-reputation source tags");
    }

    Rng rng(seed);
    std::vector<EvalCase> cases;
    cases.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const auto first_idx = rng.below(first_names().size());
        const auto last_idx = rng.below(surnames().size());
        CaseSeed cs;
        cs.athlete = first_names()[first_idx] + " " + surnames()[last_idx];
        cs.city = rng.pick(cities());
        cs.year = std::to_string(rng.range(2021, 2036));
        cs.sport = rng.pick(sports());

        EvalCase ec;
        ec.case_id = "case-" + zero_pad(i, 6);
        ec.question = question_for(cs);
        ec.gold_fact = kGoldFact;

        // When the conflicting chunk should outrank the gold chunk on raw
        // similarity, keep it terse and pad the gold chunk, and vice versa.
        const bool outrank = rng.chance(cfg.conflict_outrank_rate);
        const int gold_page = rng.range(1, 10);
        ec.chunks.push_back(corpus::make_chunk(ec.case_id + "-gold",
                                               rng.pick(cfg.reputed_sources),
                                               gold_page, 0,
                                               gold_text(cs, outrank)));

        const int conflicts = rng.range(cfg.conflicting_min, cfg.conflicting_max);
        for (int k = 0; k < conflicts; ++k) {
            auto opp_first = rng.below(first_names().size());
            auto opp_last = rng.below(surnames().size());
            if (opp_first == first_idx) {
                opp_first = (opp_first + 1) % first_names().size();
            }
            if (opp_last == last_idx) {
                opp_last = (opp_last + 1) % surnames().size();
            }
            const std::string opponent =
                first_names()[opp_first] + " " + surnames()[opp_last];
            const bool terse = outrank && k == 0;
            ec.chunks.push_back(corpus::make_chunk(
                ec.case_id + "-conflict" + std::to_string(k),
                rng.pick(cfg.low_sources), rng.range(11, 40), 0,
                conflicting_text(cs, opponent, !terse)));
        }

        const int distractors = rng.range(cfg.distractor_min, cfg.distractor_max);
        for (int k = 0; k < distractors; ++k) {
            auto city_idx = rng.below(cities().size());
            auto sport_idx = rng.below(sports().size());
            if (cities()[city_idx] == cs.city) {
                city_idx = (city_idx + 1) % cities().size();
            }
            if (sports()[sport_idx] == cs.sport) {
                sport_idx = (sport_idx + 1) % sports().size();
            }
            ec.chunks.push_back(corpus::make_chunk(
                ec.case_id + "-extra" + std::to_string(k),
                rng.pick(cfg.low_sources), rng.range(11, 40), 0,
                distractor_text(cities()[city_idx], sports()[sport_idx],
                                std::to_string(rng.range(2021, 2036)))));
        }
        cases.push_back(std::move(ec));
    }
    return cases;
}

void apply_generator_sources(bayes::PriorConfig& prior,
                             const GeneratorConfig& cfg) {
    for (const auto& tag : cfg.reputed_sources) {
        prior.source_reputation.try_emplace(tag, 0.7);
    }
    for (const auto& tag : cfg.low_sources) {
        prior.source_reputation.try_emplace(tag, 0.5);
    }
}

std::string mock_answer(const prompt::PromptBundle& bundle,
                        const retrieval::Index& index) {
    if (bundle.embedded_chunk_ids.empty()) {
        throw DataError("prompt bundle embeds no chunks");
    }
    const auto q = index.embed_query(bundle.question);
    const std::string* best_id = nullptr;
    double best_sim = 0.0;
    for (const auto& id : bundle.embedded_chunk_ids) {
        const double sim = similarity(index, q, id);
        if (best_id == nullptr || sim > best_sim ||
            (sim == best_sim && id < *best_id)) {
            best_id = &id;
            best_sim = sim;
        }
    }
    const auto* chunk = index.find(*best_id);
    if (chunk == nullptr) throw DataError("unknown chunk_id: " + *best_id);
    return chunk->text;
}

bool judge_answer(const std::string& answer, const std::string& gold_fact,
                  Mode mode, llm::Provider* provider, const std::string& model,
                  const llm::WarningSink& warn) {
    if (mode == Mode::Mock) {
        auto lower = [](std::string s) {
            std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
                return static_cast<char>(std::tolower(c));
            });
            return s;
        };
        return lower(answer).find(lower(gold_fact)) != std::string::npos;
    }

    if (provider == nullptr) {
        throw DataError("LLM judge mode needs a configured provider");
    }
    llm::CompletionRequest request;
    request.model = model;
    request.user = prompt::judge_prompt(answer, gold_fact);
    request.temperature = 0.0;
    request.max_tokens = 4;
    const auto response = provider->complete(request);

    std::string lowered = response.text;
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const auto yes = lowered.find("yes");
    const auto no = lowered.find("no");
    if (yes == std::string::npos && no == std::string::npos) {
        if (warn) warn("unparseable judge response; counting as incorrect");
        return false;
    }
    if (yes == std::string::npos) return false;
    if (no == std::string::npos) return true;
    return yes < no;
}

EvalReport run_eval(const std::vector<EvalCase>& cases,
                    const bayes::PriorConfig& cfg, Mode mode,
                    const EvalOptions& opts) {
    if (cases.empty()) throw DataError("run_eval needs at least one case");
    if (mode == Mode::Llm && opts.provider == nullptr) {
        throw DataError("LLM eval mode needs a configured provider");
    }
    cfg.validate();

    EvalReport report;
    report.cases = static_cast<int>(cases.size());

    for (const auto& ec : cases) {
        auto index = retrieval::Index::build(ec.chunks, opts.dimension);
        const auto hits = search(index, ec.question, opts.top_n);

        std::vector<corpus::Chunk> retrieved;
        retrieved.reserve(hits.size());
        for (const auto& hit : hits) retrieved.push_back(*index.find(hit.chunk_id));

        CaseRecord record;
        record.case_id = ec.case_id;
        record.question = ec.question;

        // Baseline arm: everything retrieved goes straight into the prompt.
        const auto baseline_bundle = prompt::render_baseline(ec.question, retrieved);
        record.baseline.template_id = baseline_bundle.template_id;
        record.baseline.answer =
            mode == Mode::Mock
                ? mock_answer(baseline_bundle, index)
                : opts.provider
                      ->complete({opts.model, std::nullopt,
                                  baseline_bundle.rendered, 0.0, 512})
                      .text;
        record.baseline.correct =
            judge_answer(record.baseline.answer, ec.gold_fact, mode,
                         opts.provider, opts.model, opts.warn);

        // Filtered arm: score, threshold-filter, then prompt.
        std::vector<double> likelihoods;
        likelihoods.reserve(retrieved.size());
        for (const auto& chunk : retrieved) {
            likelihoods.push_back(
                mode == Mode::Mock
                    ? bayes::lexical_likelihood(ec.question, chunk.text)
                    : llm::grade_likelihood(*opts.provider, opts.model,
                                            ec.question, chunk, opts.warn));
        }
        auto scored = bayes::score_chunks(ec.question, retrieved, likelihoods, cfg);
        if (opts.disable_filter) {
            for (auto& s : scored) s.included = true;
        }
        record.posteriors = scored;
        record.filtered.template_id = prompt::TemplateId::Scored;

        const bool any_included =
            std::any_of(scored.begin(), scored.end(),
                        [](const bayes::ScoredChunk& s) { return s.included; });
        if (!any_included) {
            record.filtered.correct = false;
            record.filtered_excluded_all = true;
            report.flagged_cases.push_back(ec.case_id);
        } else {
            const auto filtered_bundle = prompt::render_scored(ec.question, scored);
            record.filtered.answer =
                mode == Mode::Mock
                    ? mock_answer(filtered_bundle, index)
                    : opts.provider
                          ->complete({opts.model, std::nullopt,
                                      filtered_bundle.rendered, 0.0, 512})
                          .text;
            record.filtered.correct =
                judge_answer(record.filtered.answer, ec.gold_fact, mode,
                             opts.provider, opts.model, opts.warn);
        }

        report.baseline_correct += record.baseline.correct ? 1 : 0;
        report.filtered_correct += record.filtered.correct ? 1 : 0;
        report.records.push_back(std::move(record));
    }

    std::sort(report.records.begin(), report.records.end(),
              [](const CaseRecord& a, const CaseRecord& b) {
                  return a.case_id < b.case_id;
              });
    std::sort(report.flagged_cases.begin(), report.flagged_cases.end());

    report.baseline_accuracy =
        static_cast<double>(report.baseline_correct) / report.cases;
    report.filtered_accuracy =
        static_cast<double>(report.filtered_correct) / report.cases;
    if (report.baseline_accuracy > 0.0) {
        report.relative_improvement_pct =
            100.0 * (report.filtered_accuracy - report.baseline_accuracy) /
            report.baseline_accuracy;
    }
    return report;
}

std::string report_to_json(const EvalReport& report, std::uint64_t seed,
                           Mode mode) {
    nlohmann::json j;
    j["cases"] = report.cases;
    j["seed"] = seed;
    j["mode"] = to_string(mode);
    j["protocol"] =
        "synthetic conflicting-evidence benchmark: generated cases, "
        "deterministic mock answerer and judge; numbers are not comparable "
        "to results on real corpora with live models";
    j["baseline_correct"] = report.baseline_correct;
    j["filtered_correct"] = report.filtered_correct;
    j["baseline_accuracy"] = report.baseline_accuracy;
    j["filtered_accuracy"] = report.filtered_accuracy;
    j["improvement_defined"] = report.relative_improvement_pct.has_value();
    if (report.relative_improvement_pct) {
        j["relative_improvement_pct"] = *report.relative_improvement_pct;
    } else {
        j["relative_improvement_pct"] = nullptr;
    }
    j["flagged_cases"] = report.flagged_cases;

    auto& records = j["case_records"] = nlohmann::json::array();
    for (const auto& r : report.records) {
        nlohmann::json rj;
        rj["case_id"] = r.case_id;
        rj["question"] = r.question;
        rj["baseline"] = {{"template_id", prompt::to_string(r.baseline.template_id)},
                          {"correct", r.baseline.correct}};
        rj["filtered"] = {{"template_id", prompt::to_string(r.filtered.template_id)},
                          {"correct", r.filtered.correct},
                          {"excluded_all", r.filtered_excluded_all}};
        auto& posteriors = rj["posteriors"] = nlohmann::json::array();
        for (const auto& s : r.posteriors) {
            posteriors.push_back({{"chunk_id", s.chunk.chunk_id},
                                  {"likelihood", s.likelihood},
                                  {"prior", s.prior},
                                  {"posterior", s.posterior},
                                  {"included", s.included}});
        }
        records.push_back(std::move(rj));
    }
    return j.dump(2) + "\n";
}

std::string report_to_table(const EvalReport& report) {
    char line[160];
    std::string out;
    std::snprintf(line, sizeof(line), "cases:              %d\n", report.cases);
    out += line;
    std::snprintf(line, sizeof(line), "baseline accuracy:  %.2f (%d/%d)\n",
                  report.baseline_accuracy, report.baseline_correct, report.cases);
    out += line;
    std::snprintf(line, sizeof(line), "filtered accuracy:  %.2f (%d/%d)\n",
                  report.filtered_accuracy, report.filtered_correct, report.cases);
    out += line;
    if (report.relative_improvement_pct) {
        std::snprintf(line, sizeof(line),
                      "relative improvement: %+.1f%% (synthetic protocol)\n",
                      *report.relative_improvement_pct);
        out += line;
    } else {
        out += "relative improvement: undefined (baseline accuracy is 0)\n";
    }
    std::snprintf(line, sizeof(line), "flagged cases:      %zu\n",
                  report.flagged_cases.size());
    out += line;
    return out;
}

}  // namespace brag::judge
