#include "reformkit/conformance.hpp"

#include <functional>

#include "reformkit/difficulty.hpp"
#include "reformkit/generators.hpp"

namespace reformkit {

using nlohmann::json;

namespace {

// Runs `body`; an exception or a returned message fails the check.
ConformanceCheck check(std::string name, std::function<std::string()> const& body)
{
    ConformanceCheck c{std::move(name), false, {}};
    try {
        c.detail = body();
        c.passed = c.detail.empty();
    } catch (RemoteError const& e) {
        c.detail = std::string(to_string(e.kind())) + ": " + e.what();
    } catch (std::exception const& e) {
        c.detail = e.what();
    }
    return c;
}

json parse_body(HttpResponse const& r, std::string const& path)
{
    try {
        return json::parse(r.body);
    } catch (json::parse_error const&) {
        throw RemoteError(RemoteErrorKind::Schema, path + " returned a body that is not JSON");
    }
}

}  // namespace

bool ConformanceReport::passed() const
{
    for (auto const& c : checks) {
        if (!c.passed) return false;
    }
    return !checks.empty();
}

json ConformanceReport::to_json() const
{
    json rows = json::array();
    for (auto const& c : checks) {
        json row{{"check", c.name}, {"passed", c.passed}};
        if (!c.detail.empty()) row["detail"] = c.detail;
        rows.push_back(row);
    }
    return json{{"kind", "conformance"}, {"base_url", base_url}, {"passed", passed()}, {"checks", rows}};
}

ConformanceReport run_conformance(Endpoint const& endpoint, std::string const& probe)
{
    ConformanceReport report;
    report.base_url = endpoint.base_url;

    report.checks.push_back(check("health", [&]() -> std::string {
        auto r = http_get(endpoint, "/health");
        if (r.status != 200) return "GET /health returned HTTP " + std::to_string(r.status);
        auto j = parse_body(r, "/health");
        if (!j.is_object() || j.value("status", std::string()) != "ok") return "expected {\"status\":\"ok\"}";
        return {};
    }));

    for (auto type : kGenerableTypes) {
        report.checks.push_back(check("generate:" + std::string(to_string(type)), [&]() -> std::string {
            GenerationRequest req{probe, type, Domain::Movie, {}, 1, 0};
            auto candidates = remote_generate(req, endpoint);
            return candidates.empty() ? "no candidates" : "";
        }));
    }

    report.checks.push_back(check("generate:unknown-type", [&]() -> std::string {
        json body{{"utterance", probe}, {"type", "not-a-type"}, {"domain", "movie"}, {"num_candidates", 1}};
        auto r = http_post_json(endpoint, "/generate", body);
        return r.status == 422 ? "" : "expected HTTP 422, got " + std::to_string(r.status);
    }));

    report.checks.push_back(check("acceptability", [&]() -> std::string {
        remote_acceptable(probe, endpoint);
        return {};
    }));

    report.checks.push_back(check("determinism", [&]() -> std::string {
        GenerationRequest req{probe, ReformulationType::RepeatRephrase, Domain::Movie, {}, 1, 0};
        auto a = remote_generate(req, endpoint);
        auto b = remote_generate(req, endpoint);
        if (a != b) return "identical /generate requests gave different candidates";
        auto va = remote_acceptable(probe, endpoint);
        auto vb = remote_acceptable(probe, endpoint);
        if (va.acceptable != vb.acceptable || va.score != vb.score) {
            return "identical /acceptability requests gave different verdicts";
        }
        return {};
    }));
    return report;
}

}  // namespace reformkit
