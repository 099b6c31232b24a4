#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "brag/bayes.hpp"
#include "brag/corpus.hpp"
#include "brag/llm.hpp"
#include "brag/prompt.hpp"
#include "brag/retrieval.hpp"

namespace brag::judge {

enum class Mode {
    Mock,
    Llm,
};

const char* to_string(Mode mode);

/// One synthetic conflicting-evidence question: exactly one chunk supports
/// the gold fact, at least one contradicts it, plus optional distractors.
struct EvalCase {
    std::string case_id;
    std::string question;
    std::string gold_fact;  // substring any correct answer must contain
    std::vector<corpus::Chunk> chunks;
};

struct GeneratorConfig {
    int conflicting_min = 1;
    int conflicting_max = 2;
    int distractor_min = 0;
    int distractor_max = 2;
    /// Fraction of cases built so the conflicting chunk beats the gold chunk
    /// on query similarity, making the unfiltered baseline answer wrongly.
    double conflict_outrank_rate = 0.6;
    std::vector<std::string> reputed_sources = {"National Record",
                                                "Daily Ledger",
                                                "Metro Tribune"};
    std::vector<std::string> low_sources = {"Rumor Wire", "Chatter Post",
                                            "Echo Feed"};
};

/// Seeded case generator. The gold chunk gets a reputed source tag and a
/// page in 1-10; conflicting chunks get low-reputation tags and share at
/// least as many query tokens as the gold chunk. Byte-identical output for
/// identical (seed, count, cfg).
std::vector<EvalCase> generate_cases(std::uint64_t seed, int count,
                                     const GeneratorConfig& cfg = {});

/// Rates the generator's source tags in the prior config: reputed tags at
/// 0.7, low-reputation tags at 0.5. Existing entries are left untouched.
void apply_generator_sources(bayes::PriorConfig& prior,
                             const GeneratorConfig& cfg = {});

/// Deterministic stand-in for the answering LLM: parrots the embedded chunk
/// most similar to the bundle's question, ties broken by chunk_id.
std::string mock_answer(const prompt::PromptBundle& bundle,
                        const retrieval::Index& index);

/// Mock mode: true iff answer contains gold_fact case-insensitively.
/// LLM mode: asks the provider YES/NO whether the answer asserts gold_fact;
/// an unparseable reply counts as false and records a warning.
bool judge_answer(const std::string& answer, const std::string& gold_fact,
                  Mode mode, llm::Provider* provider = nullptr,
                  const std::string& model = {},
                  const llm::WarningSink& warn = llm::stderr_warning_sink());

struct ArmRecord {
    prompt::TemplateId template_id = prompt::TemplateId::Baseline;
    bool correct = false;
    std::string answer;
};

struct CaseRecord {
    std::string case_id;
    std::string question;
    ArmRecord baseline;
    ArmRecord filtered;
    bool filtered_excluded_all = false;
    std::vector<bayes::ScoredChunk> posteriors;  // the filtered arm's scoring
};

struct EvalReport {
    int cases = 0;
    int baseline_correct = 0;
    int filtered_correct = 0;
    double baseline_accuracy = 0.0;
    double filtered_accuracy = 0.0;
    /// 100 * (filtered - baseline) / baseline; absent when baseline is 0.
    std::optional<double> relative_improvement_pct;
    std::vector<std::string> flagged_cases;  // filtered arm excluded everything
    std::vector<CaseRecord> records;         // sorted by case_id
};

struct EvalOptions {
    int dimension = retrieval::kDefaultDimension;
    int top_n = 5;
    /// Self-comparison switch: the filtered arm keeps every retrieved chunk.
    bool disable_filter = false;
    llm::Provider* provider = nullptr;  // required in LLM mode
    std::string model;
    llm::WarningSink warn = llm::stderr_warning_sink();
};

/// Runs both pipelines over every case: baseline = top-n retrieval straight
/// into the plain prompt; filtered = top-n retrieval, Bayesian scoring
/// (lexical likelihoods in mock mode, graded in LLM mode) and the scored
/// prompt over surviving chunks. A case whose filtered arm excludes every
/// chunk scores incorrect for that arm and is flagged. Requires >= 1 case.
EvalReport run_eval(const std::vector<EvalCase>& cases,
                    const bayes::PriorConfig& cfg, Mode mode,
                    const EvalOptions& opts = {});

/// JSON document with the aggregate metrics, the synthetic-protocol label
/// and the per-case audit records.
std::string report_to_json(const EvalReport& report, std::uint64_t seed,
                           Mode mode);

/// Human-readable summary table.
std::string report_to_table(const EvalReport& report);

}  // namespace brag::judge
