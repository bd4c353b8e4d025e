#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace reformkit {

enum class RemoteErrorKind {
    Transport,       // connection refused, reset, DNS, ...
    Timeout,
    Status,          // non-200 response
    Schema,          // body is not what the wire protocol says
    ZeroCandidates,  // well-formed response with an empty candidate list
};

std::string_view to_string(RemoteErrorKind k);

class RemoteError : public std::runtime_error {
  public:
    RemoteError(RemoteErrorKind kind, std::string const& message, int status = 0)
        : std::runtime_error(message), kind_(kind), status_(status)
    {}

    RemoteErrorKind kind() const { return kind_; }
    int status() const { return status_; }

  private:
    RemoteErrorKind kind_;
    int status_;
};

inline constexpr std::chrono::milliseconds kDefaultRemoteTimeout{10'000};
inline constexpr char const* kBackendTokenEnv = "REFORMKIT_BACKEND_TOKEN";

struct Endpoint {
    std::string base_url;  // e.g. "http://127.0.0.1:8080" or "http://host/api"
    std::chrono::milliseconds timeout = kDefaultRemoteTimeout;
    std::optional<std::string> token;  // sent as "Authorization: Bearer <token>"

    // Token taken from REFORMKIT_BACKEND_TOKEN when set.
    static Endpoint from_url(std::string url, std::chrono::milliseconds timeout = kDefaultRemoteTimeout);
};

struct HttpResponse {
    int status = 0;
    std::string body;
    std::string request_id;  // echoed X-Request-Id, if any
};

// One POST with a JSON body. Transport failures and timeouts throw
// RemoteError; any HTTP status is returned to the caller. Every call uses
// its own connection, so concurrent calls are safe.
HttpResponse http_post_json(Endpoint const& endpoint, std::string const& path, nlohmann::json const& body);
HttpResponse http_get(Endpoint const& endpoint, std::string const& path);

// POST that requires status 200 and a JSON object body.
nlohmann::json post_expect_json(Endpoint const& endpoint, std::string const& path, nlohmann::json const& body);

}  // namespace reformkit
