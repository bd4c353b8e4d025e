#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "support.hpp"

#include "reformkit/conformance.hpp"
#include "reformkit/difficulty.hpp"
#include "reformkit/generators.hpp"
#include "reformkit/orchestrator.hpp"

using namespace reformkit;
using RT = ReformulationType;
using nlohmann::json;

namespace {

std::string const kProbe = "I am looking for a movie like Dumb and Dumber.";

using testing::golden;
using testing::install_reference;

template <typename F>
RemoteErrorKind kind_of(F&& f)
{
    try {
        f();
    } catch (RemoteError const& e) {
        return e.kind();
    }
    FAIL("expected RemoteError");
    return RemoteErrorKind::Transport;
}

GenerationRequest request(RT type, std::string utterance = kProbe)
{
    return GenerationRequest{std::move(utterance), type, Domain::Movie, {}, 1, 0};
}

}  // namespace

TEST_CASE("remote generation against the reference handlers")
{
    testing::FixtureServer fx;
    install_reference(fx.server());
    fx.start();
    auto ep = fx.endpoint();

    SUBCASE("repeat is echoed")
    {
        auto out = remote_generate(request(RT::Repeat), ep);
        REQUIRE(out.size() == 1);
        CHECK(out[0].text == kProbe);
        CHECK(out[0].backend == BackendId::Remote);
        CHECK(out[0].target_type == RT::Repeat);
        CHECK(out[0].score == 1.0);
    }
    SUBCASE("golden response is reproduced")
    {
        auto out = RemoteBackend(ep).generate(request(RT::RepeatRephrase));
        REQUIRE(out.size() == 2);
        CHECK(out[0].text == "Can you find me a movie like Dumb and Dumber?");
        CHECK(out[0].score == 0.8731);
        CHECK(out[1].text == "Do you know a movie like Dumb and Dumber?");
        json again{{"candidates", json::array()}};
        for (auto const& c : out) again["candidates"].push_back({{"text", c.text}, {"score", *c.score}});
        CHECK(again == json::parse(golden("generate_rephrase.json")));
    }
    SUBCASE("acceptability golden files")
    {
        auto bad = remote_acceptable("I want to watch a good rating", ep);
        CHECK_FALSE(bad.acceptable);
        CHECK(bad.score == 0.0873);
        CHECK(bad.backend == FilterBackend::Remote);
        auto ok = remote_acceptable(kProbe, ep);
        CHECK(ok.acceptable);
        CHECK(ok.score == 0.9622);
    }
    SUBCASE("health")
    {
        auto r = http_get(ep, "/health");
        CHECK(r.status == 200);
        CHECK(json::parse(r.body) == json{{"status", "ok"}});
        CHECK(r.request_id.rfind("rk-", 0) == 0);
    }
    SUBCASE("concurrent requests are answered independently")
    {
        std::vector<std::thread> threads;
        std::atomic<int> mismatches{0};
        for (int t = 0; t < 8; ++t) {
            threads.emplace_back([&, t] {
                for (int i = 0; i < 15; ++i) {
                    auto u = "utterance " + std::to_string(t) + "-" + std::to_string(i);
                    auto out = remote_generate(request(RT::Repeat, u), ep);
                    if (out.size() != 1 || out[0].text != u) ++mismatches;
                }
            });
        }
        for (auto& th : threads) th.join();
        CHECK(mismatches == 0);
    }
}

TEST_CASE("request bodies follow the wire protocol")
{
    testing::FixtureServer fx;
    std::mutex mu;
    std::vector<httplib::Request> seen;
    auto record = [&](httplib::Request const& req, httplib::Response& res, std::string const& body) {
        {
            std::lock_guard lock(mu);
            seen.push_back(req);
        }
        testing::reply_json(req, res, body);
    };
    fx.server().Post("/api/generate", [&](auto const& req, auto& res) { record(req, res, golden("generate_rephrase.json")); });
    fx.server().Post("/api/acceptability", [&](auto const& req, auto& res) { record(req, res, golden("acceptability_ok.json")); });
    fx.start();

    Endpoint ep{fx.url() + "/api/", std::chrono::milliseconds(2000), std::string("s3cret")};
    GenerationRequest req{kProbe, RT::ClarifyRefine, Domain::Travel, {}, 3, 9};
    remote_generate(req, ep);
    remote_acceptable("A cab.", ep);

    REQUIRE(seen.size() == 2);
    CHECK(seen[0].body ==
          R"({"domain":"travel","num_candidates":3,"type":"refine","utterance":"I am looking for a movie like Dumb and Dumber."})");
    CHECK(seen[0].get_header_value("Content-Type") == "application/json");
    CHECK(seen[0].get_header_value("Authorization") == "Bearer s3cret");
    CHECK(seen[0].has_header("X-Request-Id"));
    CHECK(seen[0].get_header_value("X-Request-Id") != seen[1].get_header_value("X-Request-Id"));
    CHECK(seen[1].body == R"({"utterance":"A cab."})");
    CHECK(generation_request_json(req) == json::parse(seen[0].body));
}

TEST_CASE("remote failures are classified")
{
    testing::FixtureServer fx;
    auto& s = fx.server();
    s.Post("/empty/generate", [](auto const& req, auto& res) { testing::reply_json(req, res, golden("generate_empty.json")); });
    s.Post("/unprocessable/generate", [](auto const& req, auto& res) { testing::reply_json(req, res, "{}", 422); });
    s.Post("/unavailable/generate", [](auto const& req, auto& res) { testing::reply_json(req, res, "{}", 503); });
    s.Post("/garbage/generate", [](auto const& req, auto& res) { testing::reply_json(req, res, "<html>oops</html>"); });
    s.Post("/array/generate", [](auto const& req, auto& res) { testing::reply_json(req, res, "[]"); });
    s.Post("/textless/generate", [](auto const& req, auto& res) {
        testing::reply_json(req, res, R"({"candidates":[{"score":0.5}]})");
    });
    s.Post("/badscore/generate", [](auto const& req, auto& res) {
        testing::reply_json(req, res, R"({"candidates":[{"text":"x","score":"high"}]})");
    });
    s.Post("/badaccept/acceptability", [](auto const& req, auto& res) { testing::reply_json(req, res, R"({"acceptable":1})"); });
    s.Post("/wrongid/generate", [](auto const&, auto& res) {
        res.set_header("X-Request-Id", "someone-else");
        res.set_content(golden("generate_rephrase.json"), "application/json");
    });
    s.Post("/slow/generate", [](auto const& req, auto& res) {
        std::this_thread::sleep_for(std::chrono::milliseconds(1200));
        testing::reply_json(req, res, golden("generate_rephrase.json"));
    });
    fx.start();
    auto at = [&](std::string const& prefix, int ms = 2000) {
        return Endpoint{fx.url() + prefix, std::chrono::milliseconds(ms), std::nullopt};
    };
    auto gen = [&](std::string const& prefix, int ms = 2000) {
        return kind_of([&] { remote_generate(request(RT::RepeatRephrase), at(prefix, ms)); });
    };

    CHECK(gen("/empty") == RemoteErrorKind::ZeroCandidates);
    CHECK(kind_of([&] { generate(request(RT::RepeatRephrase), RemoteBackend(at("/empty"))); }) ==
          RemoteErrorKind::ZeroCandidates);
    CHECK(gen("/unprocessable") == RemoteErrorKind::Status);
    CHECK(gen("/unavailable") == RemoteErrorKind::Status);
    CHECK(gen("/garbage") == RemoteErrorKind::Schema);
    CHECK(gen("/array") == RemoteErrorKind::Schema);
    CHECK(gen("/textless") == RemoteErrorKind::Schema);
    CHECK(gen("/badscore") == RemoteErrorKind::Schema);
    CHECK(gen("/wrongid") == RemoteErrorKind::Schema);
    CHECK(kind_of([&] { remote_acceptable("x", at("/badaccept")); }) == RemoteErrorKind::Schema);
    CHECK(gen("/slow", 200) == RemoteErrorKind::Timeout);

    try {
        remote_generate(request(RT::RepeatRephrase), at("/unavailable"));
    } catch (RemoteError const& e) {
        CHECK(e.status() == 503);
    }

    testing::FixtureServer gone;
    gone.start();
    auto dead = gone.endpoint();
    gone.stop();
    CHECK(kind_of([&] { remote_generate(request(RT::Repeat), dead); }) == RemoteErrorKind::Transport);
    CHECK(kind_of([&] { http_get(Endpoint{"127.0.0.1:80", std::chrono::milliseconds(100), {}}, "/health"); }) ==
          RemoteErrorKind::Transport);
}

TEST_CASE("the backend token comes from the environment")
{
    ::setenv(kBackendTokenEnv, "from-env", 1);
    CHECK(Endpoint::from_url("http://localhost:1").token == std::optional<std::string>("from-env"));
    ::setenv(kBackendTokenEnv, "", 1);
    CHECK_FALSE(Endpoint::from_url("http://localhost:1").token.has_value());
    ::unsetenv(kBackendTokenEnv);
    CHECK_FALSE(Endpoint::from_url("http://localhost:1").token.has_value());
    CHECK(Endpoint::from_url("http://localhost:1").timeout == kDefaultRemoteTimeout);
}

TEST_CASE("conformance")
{
    SUBCASE("a reference backend passes every check")
    {
        testing::FixtureServer fx;
        install_reference(fx.server());
        fx.start();
        auto report = run_conformance(fx.endpoint());
        for (auto const& c : report.checks) {
            CAPTURE(c.name);
            CAPTURE(c.detail);
            CHECK(c.passed);
        }
        CHECK(report.passed());
        CHECK(report.checks.size() == 1 + kGenerableTypes.size() + 3);
        CHECK(report.to_json()["passed"] == true);
    }
    SUBCASE("a misbehaving backend fails the matching checks")
    {
        testing::FixtureServer fx;
        std::atomic<int> calls{0};
        fx.server().Get("/health", [](auto const& req, auto& res) { testing::reply_json(req, res, R"({"status":"down"})"); });
        fx.server().Post("/generate", [&](auto const& req, auto& res) {
            // Accepts any type and never answers the same way twice.
            json out{{"candidates", {{{"text", "candidate " + std::to_string(calls++)}}}}};
            testing::reply_json(req, res, out.dump());
        });
        fx.start();
        auto report = run_conformance(fx.endpoint());
        CHECK_FALSE(report.passed());
        std::map<std::string, bool> by_name;
        for (auto const& c : report.checks) by_name[c.name] = c.passed;
        CHECK_FALSE(by_name.at("health"));
        CHECK(by_name.at("generate:rephrase"));
        CHECK_FALSE(by_name.at("generate:unknown-type"));
        CHECK_FALSE(by_name.at("acceptability"));
        CHECK_FALSE(by_name.at("determinism"));
        auto j = report.to_json();
        CHECK(j["checks"][0].contains("detail"));
    }
    SUBCASE("an unreachable backend fails without throwing")
    {
        testing::FixtureServer gone;
        gone.start();
        auto ep = gone.endpoint(std::chrono::milliseconds(300));
        gone.stop();
        ConformanceReport report;
        CHECK_NOTHROW(report = run_conformance(ep));
        CHECK_FALSE(report.passed());
        for (auto const& c : report.checks) CHECK_FALSE(c.passed);
    }
}

TEST_CASE("orchestrating against a remote backend and filter")
{
    testing::FixtureServer fx;
    install_reference(fx.server());
    std::atomic<int> reject_all{0};
    fx.server().Post("/strict/acceptability", [&](auto const& req, auto& res) {
        ++reject_all;
        testing::reply_json(req, res, golden("acceptability_good_rating.json"));
    });
    fx.start();

    RemoteBackend backend(fx.endpoint());
    SeedUtterance seed{kProbe, Domain::Movie, {{SlotKind::Movie, "Dumb and Dumber"}}};
    OrchestratorConfig cfg;
    cfg.backend = BackendId::Remote;
    cfg.filter = FilterConfig{FilterBackend::Remote, false, fx.endpoint()};

    auto seq = generate_forced(seed, {RT::RepeatRephrase, RT::Repeat}, cfg, backend);
    REQUIRE(seq.steps.size() == 2);
    CHECK(seq.steps[0].utterance == "Can you find me a movie like Dumb and Dumber?");
    CHECK(seq.steps[0].verdict.backend == FilterBackend::Remote);
    CHECK(seq.steps[0].verdict.score == 0.9622);
    CHECK(seq.steps[1].utterance == seq.steps[0].utterance);
    CHECK(seq.to_json()["config"]["backend"] == "remote");

    cfg.max_attempts = 2;
    cfg.filter.endpoint = Endpoint{fx.url() + "/strict", std::chrono::milliseconds(2000), std::nullopt};
    auto rejected = generate_forced(seed, {RT::RepeatRephrase}, cfg, backend);
    REQUIRE(rejected.steps.size() == 1);
    CHECK(rejected.steps[0].fallback);
    CHECK(rejected.steps[0].utterance == kProbe);
    // Two attempts, each judging both golden candidates.
    CHECK(reject_all == 4);

    cfg.filter.endpoint = Endpoint{fx.url() + "/missing", std::chrono::milliseconds(2000), std::nullopt};
    auto broken = generate_forced(seed, {RT::RepeatRephrase}, cfg, backend);
    CHECK(broken.steps.empty());
    CHECK(broken.termination == std::optional<std::string>(kBackendFailure));
}
