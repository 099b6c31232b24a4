#include "brag/http.hpp"

#ifdef BRAG_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include "brag/errors.hpp"

namespace brag::http {

namespace {

struct SplitUrl {
    std::string base;  // scheme://host[:port]
    std::string path;  // leading slash
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw DataError("endpoint URL must start with http:// or https://: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

class HttplibTransport final : public HttpTransport {
public:
    HttpResponse post_json(const std::string& url,
                           const std::map<std::string, std::string>& headers,
                           const std::string& body, int timeout_ms) override {
        const auto [base, path] = split_url(url);
#ifndef BRAG_HAVE_OPENSSL
        if (base.rfind("https://", 0) == 0) {
            return {0, "", true, "https endpoints need an OpenSSL-enabled build"};
        }
#endif
        httplib::Client client(base);
        client.set_connection_timeout(0, timeout_ms * 1000LL);
        client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
        client.set_write_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);

        httplib::Headers hl_headers;
        for (const auto& [k, v] : headers) hl_headers.emplace(k, v);

        auto result = client.Post(path, hl_headers, body, "application/json");
        if (!result) {
            return {0, "", true, httplib::to_string(result.error())};
        }
        return {result->status, result->body, false, ""};
    }
};

}  // namespace

std::shared_ptr<HttpTransport> make_httplib_transport() {
    return std::make_shared<HttplibTransport>();
}

}  // namespace brag::http
