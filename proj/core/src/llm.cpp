#include "brag/llm.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "brag/errors.hpp"
#include "brag/prompt.hpp"

namespace brag::llm {

WarningSink stderr_warning_sink() {
    return [](const std::string& message) {
        std::cerr << "warning: " << message << "\n";
    };
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t hash_request(const CompletionRequest& request) {
    char numeric[64];
    std::snprintf(numeric, sizeof(numeric), "%.17g|%d", request.temperature,
                  request.max_tokens);
    std::string key = request.model;
    key += '\x1f';
    key += request.system.value_or("");
    key += '\x1f';
    key += request.user;
    key += '\x1f';
    key += numeric;
    return fnv1a64(key);
}

void require_user(const CompletionRequest& request) {
    if (request.user.empty()) {
        throw DataError("completion request user message must be non-empty");
    }
}

std::string lowercase(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return out;
}

}  // namespace

MockProvider::MockProvider(std::uint64_t seed) : seed_(seed) {}

void MockProvider::script_response(std::string text) {
    std::lock_guard lock(mutex_);
    scripted_.push_back(std::move(text));
}

void MockProvider::respond_when(std::string key, std::string text) {
    std::lock_guard lock(mutex_);
    keyed_.emplace_back(std::move(key), std::move(text));
}

CompletionResponse MockProvider::complete(const CompletionRequest& request) {
    require_user(request);
    std::string text;
    bool found = false;
    {
        std::lock_guard lock(mutex_);
        for (const auto& [key, response] : keyed_) {
            if (request.user.find(key) != std::string::npos) {
                text = response;
                found = true;
                break;
            }
        }
        if (!found && !scripted_.empty()) {
            text = std::move(scripted_.front());
            scripted_.pop_front();
            found = true;
        }
    }
    if (!found) {
        static const char* kTable[] = {"HIGH", "MEDIUM", "LOW"};
        const std::uint64_t slot =
            splitmix64(hash_request(request) ^ splitmix64(seed_));
        text = kTable[slot % 3];
    }
    if (text.empty()) throw EmptyResponseError();
    return {std::move(text), id()};
}

/// Caps the number of requests a provider keeps in flight at once.
class OpenAiProvider::InFlightGate {
public:
    explicit InFlightGate(int limit) : available_(std::max(1, limit)) {}

    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return available_ > 0; });
        --available_;
    }
    void release() {
        {
            std::lock_guard lock(mutex_);
            ++available_;
        }
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int available_;
};

OpenAiProvider::OpenAiProvider(OpenAiProviderConfig config,
                               std::shared_ptr<http::HttpTransport> transport)
    : config_(std::move(config)),
      transport_(transport ? std::move(transport)
                           : http::make_httplib_transport()),
      gate_(std::make_shared<InFlightGate>(config_.max_in_flight)) {}

CompletionResponse OpenAiProvider::complete(const CompletionRequest& request) {
    require_user(request);

    const char* credential = nullptr;
    if (!config_.credential_env.empty()) {
        credential = std::getenv(config_.credential_env.c_str());
    }
    if (credential == nullptr || *credential == '\0') {
        throw AuthError("credential environment variable '" +
                        config_.credential_env + "' is not set");
    }

    nlohmann::json body;
    body["model"] = request.model;
    auto& messages = body["messages"] = nlohmann::json::array();
    if (request.system) {
        messages.push_back({{"role", "system"}, {"content", *request.system}});
    }
    messages.push_back({{"role", "user"}, {"content", request.user}});
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;

    const std::map<std::string, std::string> headers = {
        {"Authorization", std::string("Bearer ") + credential},
        {"Content-Type", "application/json"},
    };

    gate_->acquire();
    struct Release {
        InFlightGate* gate;
        ~Release() { gate->release(); }
    } release{gate_.get()};

    http::HttpResponse response;
    for (int attempt = 0;; ++attempt) {
        response = transport_->post_json(config_.endpoint, headers, body.dump(),
                                         config_.timeout_ms);
        const bool transient = response.transport_failed ||
                               response.status == 429 || response.status >= 500;
        if (!transient || attempt >= 1) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(
            config_.retry_backoff_ms << attempt));
    }

    if (response.transport_failed) {
        throw TransportError("transport failure after retry: " +
                             response.transport_error);
    }
    if (response.status == 401 || response.status == 403) {
        throw AuthError("provider rejected the credential (status " +
                        std::to_string(response.status) + ")");
    }
    if (response.status != 200) {
        throw ProviderError("provider returned status " +
                            std::to_string(response.status) + ": " +
                            response.body.substr(0, 200));
    }

    std::string text;
    try {
        const auto parsed = nlohmann::json::parse(response.body);
        text = parsed.at("choices").at(0).at("message").at("content")
                   .get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("malformed provider response: ") +
                            e.what());
    }
    if (text.empty()) throw EmptyResponseError();
    return {std::move(text), id()};
}

std::optional<double> parse_likelihood_label(const std::string& text) {
    const std::string lowered = lowercase(text);
    const std::pair<const char*, double> labels[] = {
        {"high", kLikelihoodHigh},
        {"medium", kLikelihoodMedium},
        {"low", kLikelihoodLow},
    };
    std::size_t best_pos = std::string::npos;
    double best_value = 0.0;
    for (const auto& [label, value] : labels) {
        const auto pos = lowered.find(label);
        if (pos != std::string::npos && pos < best_pos) {
            best_pos = pos;
            best_value = value;
        }
    }
    if (best_pos == std::string::npos) return std::nullopt;
    return best_value;
}

double grade_likelihood(Provider& provider, const std::string& model,
                        const std::string& question, const corpus::Chunk& chunk,
                        const WarningSink& warn) {
    CompletionRequest request;
    request.model = model;
    request.user = prompt::grading_prompt(question, chunk.text);
    request.temperature = 0.0;
    request.max_tokens = 8;

    for (int attempt = 0; attempt < 2; ++attempt) {
        const auto response = provider.complete(request);
        if (const auto value = parse_likelihood_label(response.text)) {
            return *value;
        }
    }
    if (warn) {
        warn("unparseable grading response for chunk " + chunk.chunk_id +
             "; falling back to MEDIUM (0.5)");
    }
    return kLikelihoodMedium;
}

}  // namespace brag::llm
