#include "reformkit/remote.hpp"

#include <atomic>
#include <cstdlib>

#include <httplib.h>

namespace reformkit {

namespace {

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path prefix without trailing '/'
};

ParsedUrl parse_url(std::string const& url)
{
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw RemoteError(RemoteErrorKind::Transport, "backend URL needs a scheme: '" + url + "'");
    }
    auto path_start = url.find('/', scheme_end + 3);
    ParsedUrl out;
    out.origin = url.substr(0, path_start);
    if (path_start != std::string::npos) {
        out.prefix = url.substr(path_start);
        while (!out.prefix.empty() && out.prefix.back() == '/') {
            out.prefix.pop_back();
        }
    }
    return out;
}

std::string next_request_id()
{
    static std::atomic<std::uint64_t> counter{0};
    return "rk-" + std::to_string(counter.fetch_add(1) + 1);
}

HttpResponse send(Endpoint const& endpoint, std::string const& path, nlohmann::json const* body)
{
    auto url = parse_url(endpoint.base_url);
    httplib::Client client(url.origin);
    auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
    auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    auto request_id = next_request_id();
    httplib::Headers headers{{"X-Request-Id", request_id}};
    if (endpoint.token) {
        headers.emplace("Authorization", "Bearer " + *endpoint.token);
    }

    auto started = std::chrono::steady_clock::now();
    auto full_path = url.prefix + path;
    auto result = body != nullptr ? client.Post(full_path, headers, body->dump(), "application/json")
                                  : client.Get(full_path, headers);
    if (!result) {
        auto err = result.error();
        auto elapsed = std::chrono::steady_clock::now() - started;
        bool timed_out = err == httplib::Error::ConnectionTimeout ||
                         (err == httplib::Error::Read && elapsed >= endpoint.timeout * 9 / 10);
        throw RemoteError(timed_out ? RemoteErrorKind::Timeout : RemoteErrorKind::Transport,
                          "request to " + endpoint.base_url + full_path + " failed: " + httplib::to_string(err));
    }
    HttpResponse out{result->status, result->body, result->get_header_value("X-Request-Id")};
    if (!out.request_id.empty() && out.request_id != request_id) {
        throw RemoteError(RemoteErrorKind::Schema,
                          "response correlates to request '" + out.request_id + "', expected '" + request_id + "'");
    }
    return out;
}

}  // namespace

std::string_view to_string(RemoteErrorKind k)
{
    switch (k) {
        case RemoteErrorKind::Transport: return "transport";
        case RemoteErrorKind::Timeout: return "timeout";
        case RemoteErrorKind::Status: return "status";
        case RemoteErrorKind::Schema: return "schema";
        case RemoteErrorKind::ZeroCandidates: return "zero-candidates";
    }
    return "?";
}

Endpoint Endpoint::from_url(std::string url, std::chrono::milliseconds timeout)
{
    Endpoint e{std::move(url), timeout, std::nullopt};
    if (char const* token = std::getenv(kBackendTokenEnv); token != nullptr && *token != '\0') {
        e.token = token;
    }
    return e;
}

HttpResponse http_post_json(Endpoint const& endpoint, std::string const& path, nlohmann::json const& body)
{
    return send(endpoint, path, &body);
}

HttpResponse http_get(Endpoint const& endpoint, std::string const& path) { return send(endpoint, path, nullptr); }

nlohmann::json post_expect_json(Endpoint const& endpoint, std::string const& path, nlohmann::json const& body)
{
    auto response = http_post_json(endpoint, path, body);
    if (response.status != 200) {
        throw RemoteError(RemoteErrorKind::Status,
                          path + " returned HTTP " + std::to_string(response.status), response.status);
    }
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(response.body);
    } catch (nlohmann::json::parse_error const&) {
        throw RemoteError(RemoteErrorKind::Schema, path + " returned a body that is not JSON");
    }
    if (!j.is_object()) {
        throw RemoteError(RemoteErrorKind::Schema, path + " returned JSON that is not an object");
    }
    return j;
}

}  // namespace reformkit
