#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>

#include <httplib.h>

#include "reformkit/corpus_io.hpp"
#include "reformkit/generators.hpp"
#include "reformkit/remote.hpp"

namespace testing {

inline std::filesystem::path fixture(std::string const& name) { return std::filesystem::path(REFORMKIT_FIXTURES) / name; }

inline std::string slurp(std::filesystem::path const& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline reformkit::Corpus corpus_from(std::string const& text)
{
    std::istringstream in(text);
    return reformkit::parse_corpus(in);
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
  public:
    TempDir()
    {
        static std::atomic<int> counter{0};
        auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
        path_ = std::filesystem::temp_directory_path() /
                ("reformkit-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(TempDir const&) = delete;
    TempDir& operator=(TempDir const&) = delete;

    std::filesystem::path const& path() const { return path_; }
    std::string file(std::string const& name) const { return (path_ / name).string(); }

  private:
    std::filesystem::path path_;
};

// httplib server on an ephemeral loopback port, running on its own thread.
// Register handlers through server() before calling start().
class FixtureServer {
  public:
    ~FixtureServer() { stop(); }

    httplib::Server& server() { return server_; }

    void start()
    {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }

    void stop()
    {
        if (thread_.joinable()) {
            server_.stop();
            thread_.join();
        }
    }

    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
    reformkit::Endpoint endpoint(std::chrono::milliseconds timeout = std::chrono::milliseconds(2000)) const
    {
        return reformkit::Endpoint{url(), timeout, std::nullopt};
    }

  private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

// Echoes X-Request-Id like a well-behaved backend.
inline void reply_json(httplib::Request const& req, httplib::Response& res, std::string const& body, int status = 200)
{
    res.status = status;
    if (req.has_header("X-Request-Id")) res.set_header("X-Request-Id", req.get_header_value("X-Request-Id"));
    res.set_content(body, "application/json");
}

inline std::string golden(std::string const& name) { return slurp(fixture("remote/" + name)); }

// A well-behaved backend: echoes for repeat, golden files otherwise.
inline void install_reference(httplib::Server& s)
{
    using nlohmann::json;
    s.Get("/health", [](auto const& req, auto& res) { reply_json(req, res, golden("health.json")); });
    s.Post("/generate", [](auto const& req, auto& res) {
        auto body = json::parse(req.body);
        auto parsed = reformkit::parse_reformulation_type(body.at("type").template get<std::string>());
        if (!parsed || !reformkit::is_generable(*parsed)) {
            reply_json(req, res, R"({"error":"unknown type"})", 422);
            return;
        }
        if (*parsed == reformkit::ReformulationType::Repeat) {
            json out{{"candidates", {{{"text", body.at("utterance")}, {"score", 1.0}}}}};
            reply_json(req, res, out.dump());
            return;
        }
        reply_json(req, res, golden("generate_rephrase.json"));
    });
    s.Post("/acceptability", [](auto const& req, auto& res) {
        auto u = json::parse(req.body).at("utterance").template get<std::string>();
        bool bad = u.find("good rating") != std::string::npos;
        reply_json(req, res, golden(bad ? "acceptability_good_rating.json" : "acceptability_ok.json"));
    });
}

}  // namespace testing
