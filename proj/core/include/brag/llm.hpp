#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "brag/corpus.hpp"
#include "brag/http.hpp"

namespace brag::llm {

struct CompletionRequest {
    std::string model;
    std::optional<std::string> system;
    std::string user;  // non-empty
    double temperature = 0.0;
    int max_tokens = 256;
};

struct CompletionResponse {
    std::string text;
    std::string provider_id;
};

/// Sink for non-fatal diagnostics (grading fallbacks, judge parse failures).
using WarningSink = std::function<void(const std::string&)>;

/// Writes warnings to stderr.
WarningSink stderr_warning_sink();

/// Chat-completion provider. Implementations must be safe for concurrent
/// complete() calls; responses correlate with their requests by return
/// value, never by arrival order.
class Provider {
public:
    virtual ~Provider() = default;
    virtual CompletionResponse complete(const CompletionRequest& request) = 0;
    virtual std::string id() const = 0;
};

/// Deterministic offline provider. Unscripted requests draw from a canned
/// label table keyed by a hash of the request and the seed, so the same
/// request always gets the same response regardless of call order or
/// concurrency. Scripted responses exist for tests: keyed rules match on a
/// substring of the user message and win over the queue; queued responses
/// are consumed in FIFO order.
class MockProvider final : public Provider {
public:
    explicit MockProvider(std::uint64_t seed = 0);

    CompletionResponse complete(const CompletionRequest& request) override;
    std::string id() const override { return "mock"; }

    /// Queue a response consumed by the next unmatched complete() call.
    void script_response(std::string text);
    /// Respond with text whenever the request's user message contains key.
    void respond_when(std::string key, std::string text);

private:
    std::uint64_t seed_;
    mutable std::mutex mutex_;
    std::deque<std::string> scripted_;
    std::vector<std::pair<std::string, std::string>> keyed_;
};

struct OpenAiProviderConfig {
    std::string endpoint;        // full chat-completions URL
    std::string credential_env;  // name of the env var holding the API key
    int timeout_ms = 30000;
    int retry_backoff_ms = 250;
    int max_in_flight = 4;
};

/// OpenAI-compatible chat-completions client. Reads the credential from the
/// configured environment variable at call time; a missing credential raises
/// AuthError before any network activity. Transient transport failures
/// (connection errors, timeouts, 429, 5xx) are retried once after a backoff.
/// The credential is never echoed into logs, errors or reports.
class OpenAiProvider final : public Provider {
public:
    OpenAiProvider(OpenAiProviderConfig config,
                   std::shared_ptr<http::HttpTransport> transport = nullptr);

    CompletionResponse complete(const CompletionRequest& request) override;
    std::string id() const override { return "openai-compatible"; }

private:
    class InFlightGate;

    OpenAiProviderConfig config_;
    std::shared_ptr<http::HttpTransport> transport_;
    std::shared_ptr<InFlightGate> gate_;
};

inline constexpr double kLikelihoodHigh = 0.8;
inline constexpr double kLikelihoodMedium = 0.5;
inline constexpr double kLikelihoodLow = 0.2;

/// Parses the first case-insensitive HIGH/MEDIUM/LOW occurrence in text.
std::optional<double> parse_likelihood_label(const std::string& text);

/// Asks the provider to grade how likely the chunk yields a good answer to
/// the question: one label from {HIGH, MEDIUM, LOW}, mapped to
/// {0.8, 0.5, 0.2}. An unparseable response is retried once, then falls back
/// to 0.5 with a warning.
double grade_likelihood(Provider& provider, const std::string& model,
                        const std::string& question, const corpus::Chunk& chunk,
                        const WarningSink& warn = stderr_warning_sink());

}  // namespace brag::llm
