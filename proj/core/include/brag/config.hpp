#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "brag/bayes.hpp"
#include "brag/judge.hpp"
#include "brag/llm.hpp"
#include "brag/retrieval.hpp"

namespace brag::config {

struct ProviderSettings {
    std::string endpoint;
    std::string model = "gpt-3.5-turbo";
    std::string credential_env = "BRAG_API_KEY";
    int timeout_ms = 30000;
    int retry_backoff_ms = 250;
    int max_in_flight = 4;
};

struct PipelineConfig {
    std::filesystem::path corpus_path;
    int dimension = retrieval::kDefaultDimension;
    int top_n = 5;
    int max_chars = 1200;
    retrieval::StopwordSet stopwords;
    std::string embedding_endpoint;  // empty = local feature hashing
    bayes::PriorConfig prior;
    ProviderSettings provider;
    judge::Mode mode = judge::Mode::Mock;

    /// Throws DataError on violated invariants (top_n >= 1, dimension >= 2,
    /// max_chars >= 64, prior config valid).
    void validate() const;
};

/// Parses the flat key/value config format: one `key = value` per line,
/// dotted keys for sections ("prior.threshold = 0.5"), double quotes for key
/// segments or values containing spaces, '#' comments. Unknown keys are
/// rejected. Throws DataError with the offending line number.
PipelineConfig load_config(const std::filesystem::path& path);

/// Parses config text directly; source_name appears in error messages.
PipelineConfig parse_config(const std::string& text,
                            const std::string& source_name = "<config>");

}  // namespace brag::config
