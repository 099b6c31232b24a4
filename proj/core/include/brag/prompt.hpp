#pragma once

#include <string>
#include <vector>

#include "brag/bayes.hpp"
#include "brag/corpus.hpp"

namespace brag::prompt {

enum class TemplateId {
    Baseline,
    InpromptBayes,
    Scored,
};

const char* to_string(TemplateId id);

/// Template wording revision; bump when any rendered shape changes.
inline constexpr int kTemplateVersion = 1;

inline constexpr const char* kDefaultPriorHint =
    "rate reputed news sources with higher prior probability.";

struct PromptBundle {
    TemplateId template_id = TemplateId::Baseline;
    std::string question;
    std::string rendered;
    std::vector<std::string> embedded_chunk_ids;  // order of appearance
};

/// Plain RAG prompt: instruction header, the question, then one "- " line per
/// chunk ending with "Source: <source>". Chunk order is preserved.
/// Throws DataError on an empty chunk list.
PromptBundle render_baseline(const std::string& question,
                             const std::vector<corpus::Chunk>& chunks);

/// Baseline layout plus the in-prompt Bayesian scoring instruction, the
/// threshold rendered as a percentage and the prior hint sentence.
/// Requires threshold in (0,1).
PromptBundle render_inprompt_bayes(const std::string& question,
                                   const std::vector<corpus::Chunk>& chunks,
                                   double threshold,
                                   const std::string& prior_hint = kDefaultPriorHint);

/// Renders only chunks with included = true, each annotated with its
/// posterior to two decimals, ordered by posterior descending then chunk_id.
/// Throws NoEvidenceError when nothing passed the filter.
PromptBundle render_scored(const std::string& question,
                           const std::vector<bayes::ScoredChunk>& scored);

/// "50%" for 0.5; fractional percentages keep up to two decimals.
std::string format_percent(double threshold);

/// Prompt asking a grader for exactly one of HIGH / MEDIUM / LOW.
std::string grading_prompt(const std::string& question,
                           const std::string& chunk_text);

/// Prompt asking a judge YES/NO whether the answer asserts the fact.
std::string judge_prompt(const std::string& answer,
                         const std::string& gold_fact);

}  // namespace brag::prompt
