#pragma once

#include <map>
#include <memory>
#include <string>

namespace brag::http {

struct HttpResponse {
    int status = 0;
    std::string body;
    bool transport_failed = false;
    std::string transport_error;
};

/// Transport seam for HTTP-backed clients; tests inject fakes here.
class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse post_json(const std::string& url,
                                   const std::map<std::string, std::string>& headers,
                                   const std::string& body,
                                   int timeout_ms) = 0;
};

/// cpp-httplib backed transport. Understands http:// and https:// URLs.
std::shared_ptr<HttpTransport> make_httplib_transport();

}  // namespace brag::http
