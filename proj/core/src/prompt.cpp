#include "brag/prompt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "brag/errors.hpp"

namespace brag::prompt {

const char* to_string(TemplateId id) {
    switch (id) {
        case TemplateId::Baseline: return "BASELINE";
        case TemplateId::InpromptBayes: return "INPROMPT_BAYES";
        case TemplateId::Scored: return "SCORED";
    }
    return "?";
}

namespace {

constexpr const char* kHeader =
    "Answer the following question using below text chunks as context.";

std::string fixed2(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    return buf;
}

std::string body_prefix(const std::string& question) {
    return "\n\nQuestion: " + question + "\n\nText chunks:\n\n";
}

std::string chunk_line(const corpus::Chunk& chunk) {
    return "- " + chunk.text + " Source: " + chunk.source;
}

}  // namespace

std::string format_percent(double threshold) {
    const double pct = threshold * 100.0;
    const double rounded = std::round(pct);
    if (std::abs(pct - rounded) < 1e-9) {
        return std::to_string(static_cast<long long>(rounded)) + "%";
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", pct);
    std::string s = buf;
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s + "%";
}

PromptBundle render_baseline(const std::string& question,
                             const std::vector<corpus::Chunk>& chunks) {
    if (chunks.empty()) throw DataError("empty chunk list");
    PromptBundle bundle;
    bundle.template_id = TemplateId::Baseline;
    bundle.question = question;
    bundle.rendered = kHeader + body_prefix(question);
    for (const auto& chunk : chunks) {
        bundle.rendered += chunk_line(chunk) + "\n";
        bundle.embedded_chunk_ids.push_back(chunk.chunk_id);
    }
    return bundle;
}

PromptBundle render_inprompt_bayes(const std::string& question,
                                   const std::vector<corpus::Chunk>& chunks,
                                   double threshold,
                                   const std::string& prior_hint) {
    if (chunks.empty()) throw DataError("empty chunk list");
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw DataError("threshold must be in (0,1)");
    }
    PromptBundle bundle;
    bundle.template_id = TemplateId::InpromptBayes;
    bundle.question = question;
    bundle.rendered = std::string(kHeader) +
                      " Use Bayesian statistics to create a probability for "
                      "each text chunks and score them. Use only chunks with "
                      "probability greater than " +
                      format_percent(threshold) + ". " + prior_hint +
                      body_prefix(question);
    for (const auto& chunk : chunks) {
        bundle.rendered += chunk_line(chunk) + "\n";
        bundle.embedded_chunk_ids.push_back(chunk.chunk_id);
    }
    return bundle;
}

PromptBundle render_scored(const std::string& question,
                           const std::vector<bayes::ScoredChunk>& scored) {
    std::vector<const bayes::ScoredChunk*> included;
    for (const auto& s : scored) {
        if (s.included) included.push_back(&s);
    }
    if (included.empty()) throw NoEvidenceError();
    std::sort(included.begin(), included.end(),
              [](const bayes::ScoredChunk* a, const bayes::ScoredChunk* b) {
                  if (a->posterior != b->posterior)
                      return a->posterior > b->posterior;
                  return a->chunk.chunk_id < b->chunk.chunk_id;
              });

    PromptBundle bundle;
    bundle.template_id = TemplateId::Scored;
    bundle.question = question;
    bundle.rendered = kHeader + body_prefix(question);
    for (const auto* s : included) {
        bundle.rendered +=
            chunk_line(s->chunk) + " (posterior: " + fixed2(s->posterior) + ")\n";
        bundle.embedded_chunk_ids.push_back(s->chunk.chunk_id);
    }
    return bundle;
}

std::string grading_prompt(const std::string& question,
                           const std::string& chunk_text) {
    return "You assess evidence for question answering.\n\nQuestion: " +
           question + "\n\nChunk: " + chunk_text +
           "\n\nHow likely is it that this chunk yields a good answer to the "
           "question? Reply with exactly one label: HIGH, MEDIUM, or LOW.";
}

std::string judge_prompt(const std::string& answer,
                         const std::string& gold_fact) {
    return "You are grading an answer against an expected fact.\n\nExpected "
           "fact: " +
           gold_fact + "\n\nAnswer: " + answer +
           "\n\nDoes the answer assert the expected fact? Reply with exactly "
           "one word: YES or NO.";
}

}  // namespace brag::prompt
