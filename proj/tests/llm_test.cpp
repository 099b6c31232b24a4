#include "brag/llm.hpp"

#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <map>
#include <thread>
#include <vector>

#include "brag/corpus.hpp"
#include "brag/errors.hpp"

using namespace brag;
using namespace brag::llm;

namespace {

class FakeTransport final : public http::HttpTransport {
public:
    std::vector<http::HttpResponse> responses;
    std::vector<std::string> bodies;
    std::vector<std::string> urls;
    std::vector<std::map<std::string, std::string>> headers_seen;
    std::atomic<int> calls{0};

    http::HttpResponse post_json(const std::string& url,
                                 const std::map<std::string, std::string>& headers,
                                 const std::string& body, int) override {
        const int call = calls++;
        urls.push_back(url);
        headers_seen.push_back(headers);
        bodies.push_back(body);
        if (static_cast<std::size_t>(call) < responses.size()) {
            return responses[static_cast<std::size_t>(call)];
        }
        return responses.empty() ? http::HttpResponse{200, "{}", false, ""}
                                 : responses.back();
    }
};

http::HttpResponse ok_response(const std::string& content) {
    return {200,
            std::string(R"({"choices":[{"message":{"content":")") + content +
                R"("}}]})",
            false,
            ""};
}

OpenAiProviderConfig test_provider_config() {
    OpenAiProviderConfig cfg;
    cfg.endpoint = "http://localhost:9/v1/chat/completions";
    cfg.credential_env = "BRAG_TEST_KEY";
    cfg.retry_backoff_ms = 1;
    return cfg;
}

CompletionRequest basic_request() {
    CompletionRequest request;
    request.model = "test-model";
    request.user = "hello";
    return request;
}

corpus::Chunk test_chunk(const std::string& text) {
    return corpus::make_chunk("doc", "src", 1, 0, text);
}

}  // namespace

TEST_CASE("mock provider answers the same request identically") {
    MockProvider provider(7);
    auto first = provider.complete(basic_request());
    auto second = provider.complete(basic_request());
    CHECK(first.text == second.text);
    CHECK(first.provider_id == "mock");
}

TEST_CASE("mock providers with equal seeds agree") {
    MockProvider a(1);
    MockProvider b(1);
    CHECK(a.complete(basic_request()).text == b.complete(basic_request()).text);
}

TEST_CASE("mock provider scripted responses are consumed in order") {
    MockProvider provider;
    provider.script_response("first");
    provider.script_response("second");
    CHECK(provider.complete(basic_request()).text == "first");
    CHECK(provider.complete(basic_request()).text == "second");
}

TEST_CASE("mock provider keyed responses match on the user message") {
    MockProvider provider;
    provider.respond_when("banana", "yellow");
    CompletionRequest request = basic_request();
    request.user = "what color is a banana?";
    CHECK(provider.complete(request).text == "yellow");
}

TEST_CASE("an empty scripted response raises the empty-response error") {
    MockProvider provider;
    provider.script_response("");
    CHECK_THROWS_AS(provider.complete(basic_request()), EmptyResponseError);
}

TEST_CASE("providers reject an empty user message") {
    MockProvider provider;
    CompletionRequest request;
    request.model = "m";
    CHECK_THROWS_AS(provider.complete(request), DataError);
}

TEST_CASE("mock provider is deterministic per request under concurrency") {
    MockProvider provider(3);
    std::vector<std::string> expected;
    for (int i = 0; i < 8; ++i) {
        CompletionRequest request = basic_request();
        request.user = "question " + std::to_string(i);
        expected.push_back(provider.complete(request).text);
    }
    std::vector<std::string> got(8);
    std::vector<std::thread> threads;
    for (int i = 0; i < 8; ++i) {
        threads.emplace_back([&, i] {
            CompletionRequest request = basic_request();
            request.user = "question " + std::to_string(i);
            got[static_cast<std::size_t>(i)] = provider.complete(request).text;
        });
    }
    for (auto& t : threads) t.join();
    CHECK(got == expected);
}

TEST_CASE("openai provider fails before the network without a credential") {
    unsetenv("BRAG_TEST_KEY");
    auto transport = std::make_shared<FakeTransport>();
    OpenAiProvider provider(test_provider_config(), transport);
    CHECK_THROWS_AS(provider.complete(basic_request()), AuthError);
    CHECK(transport->calls == 0);
}

TEST_CASE("openai provider speaks the chat-completions wire format") {
    setenv("BRAG_TEST_KEY", "sk-test-sentinel", 1);
    auto transport = std::make_shared<FakeTransport>();
    transport->responses = {ok_response("hi there")};
    OpenAiProvider provider(test_provider_config(), transport);

    CompletionRequest request = basic_request();
    request.system = "be brief";
    request.max_tokens = 16;
    const auto response = provider.complete(request);
    CHECK(response.text == "hi there");

    REQUIRE(transport->bodies.size() == 1);
    const auto& body = transport->bodies[0];
    CHECK(body.find("\"model\":\"test-model\"") != std::string::npos);
    CHECK(body.find("\"role\":\"system\"") != std::string::npos);
    CHECK(body.find("\"role\":\"user\"") != std::string::npos);
    CHECK(body.find("\"max_tokens\":16") != std::string::npos);
    CHECK(transport->headers_seen[0].at("Authorization") ==
          "Bearer sk-test-sentinel");
    CHECK(transport->urls[0] == "http://localhost:9/v1/chat/completions");
    unsetenv("BRAG_TEST_KEY");
}

TEST_CASE("openai provider retries one transient failure") {
    setenv("BRAG_TEST_KEY", "k", 1);
    auto transport = std::make_shared<FakeTransport>();
    transport->responses = {{0, "", true, "connection refused"},
                            ok_response("recovered")};
    OpenAiProvider provider(test_provider_config(), transport);
    CHECK(provider.complete(basic_request()).text == "recovered");
    CHECK(transport->calls == 2);
    unsetenv("BRAG_TEST_KEY");
}

TEST_CASE("openai provider gives up after the retry") {
    setenv("BRAG_TEST_KEY", "k", 1);
    auto transport = std::make_shared<FakeTransport>();
    transport->responses = {{0, "", true, "timeout"}, {0, "", true, "timeout"}};
    OpenAiProvider provider(test_provider_config(), transport);
    CHECK_THROWS_AS(provider.complete(basic_request()), TransportError);
    CHECK(transport->calls == 2);
    unsetenv("BRAG_TEST_KEY");
}

TEST_CASE("openai provider maps status codes to error classes") {
    setenv("BRAG_TEST_KEY", "k", 1);
    auto transport = std::make_shared<FakeTransport>();

    transport->responses = {{401, "nope", false, ""}};
    OpenAiProvider provider(test_provider_config(), transport);
    CHECK_THROWS_AS(provider.complete(basic_request()), AuthError);

    auto transport2 = std::make_shared<FakeTransport>();
    transport2->responses = {{404, "missing", false, ""}};
    OpenAiProvider provider2(test_provider_config(), transport2);
    CHECK_THROWS_AS(provider2.complete(basic_request()), ProviderError);
    unsetenv("BRAG_TEST_KEY");
}

TEST_CASE("openai provider rejects an empty completion") {
    setenv("BRAG_TEST_KEY", "k", 1);
    auto transport = std::make_shared<FakeTransport>();
    transport->responses = {ok_response("")};
    OpenAiProvider provider(test_provider_config(), transport);
    CHECK_THROWS_AS(provider.complete(basic_request()), EmptyResponseError);
    unsetenv("BRAG_TEST_KEY");
}

TEST_CASE("openai provider errors never leak the credential") {
    setenv("BRAG_TEST_KEY", "sk-super-secret", 1);
    auto transport = std::make_shared<FakeTransport>();
    transport->responses = {{500, "server broke", false, ""},
                            {500, "server broke", false, ""}};
    OpenAiProvider provider(test_provider_config(), transport);
    try {
        provider.complete(basic_request());
        FAIL("expected an error");
    } catch (const ProviderError& e) {
        CHECK(std::string(e.what()).find("sk-super-secret") == std::string::npos);
    }
    unsetenv("BRAG_TEST_KEY");
}

TEST_CASE("parse_likelihood_label finds the earliest label") {
    CHECK(parse_likelihood_label("HIGH") == kLikelihoodHigh);
    CHECK(parse_likelihood_label("medium -- partially relevant") ==
          kLikelihoodMedium);
    CHECK(parse_likelihood_label("Low confidence, medium maybe") ==
          kLikelihoodLow);
    CHECK(parse_likelihood_label("label: HIGH") == kLikelihoodHigh);
    CHECK_FALSE(parse_likelihood_label("no signal here").has_value());
}

TEST_CASE("grade_likelihood maps labels per the worked example") {
    MockProvider provider;
    provider.script_response("HIGH");
    CHECK(grade_likelihood(provider, "m", "q?", test_chunk("text")) ==
          kLikelihoodHigh);

    provider.script_response("medium \xe2\x80\x94 partially relevant");
    CHECK(grade_likelihood(provider, "m", "q?", test_chunk("text")) ==
          kLikelihoodMedium);

    provider.script_response("LOW");
    CHECK(grade_likelihood(provider, "m", "q?", test_chunk("text")) ==
          kLikelihoodLow);
}

TEST_CASE("grade_likelihood retries once then falls back with a warning") {
    MockProvider provider;
    provider.script_response("zzzz");
    provider.script_response("qqqq");
    std::vector<std::string> warnings;
    const auto warn = [&](const std::string& w) { warnings.push_back(w); };
    CHECK(grade_likelihood(provider, "m", "q?", test_chunk("text"), warn) ==
          kLikelihoodMedium);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("falling back") != std::string::npos);
}

TEST_CASE("grade_likelihood output is always one of the three labels") {
    MockProvider provider(11);  // unscripted: canned table responses
    for (int i = 0; i < 50; ++i) {
        const double value = grade_likelihood(
            provider, "m", "question " + std::to_string(i),
            test_chunk("chunk " + std::to_string(i)), [](const std::string&) {});
        CHECK((value == kLikelihoodHigh || value == kLikelihoodMedium ||
               value == kLikelihoodLow));
    }
}

TEST_CASE("grade_likelihood propagates provider errors") {
    unsetenv("BRAG_TEST_KEY");
    auto transport = std::make_shared<FakeTransport>();
    OpenAiProvider provider(test_provider_config(), transport);
    CHECK_THROWS_AS(grade_likelihood(provider, "m", "q?", test_chunk("text")),
                    AuthError);
}

TEST_CASE("concurrent grading correlates responses with requests") {
    MockProvider provider;
    for (int i = 0; i < 6; ++i) {
        provider.respond_when("chunk text " + std::to_string(i),
                              i % 2 == 0 ? "HIGH" : "LOW");
    }
    std::vector<double> got(6);
    std::vector<std::thread> threads;
    for (int i = 0; i < 6; ++i) {
        threads.emplace_back([&, i] {
            got[static_cast<std::size_t>(i)] = grade_likelihood(
                provider, "m", "q?", test_chunk("chunk text " + std::to_string(i)),
                [](const std::string&) {});
        });
    }
    for (auto& t : threads) t.join();
    for (int i = 0; i < 6; ++i) {
        CHECK(got[static_cast<std::size_t>(i)] ==
              (i % 2 == 0 ? kLikelihoodHigh : kLikelihoodLow));
    }
}
