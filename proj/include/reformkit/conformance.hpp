#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reformkit/remote.hpp"

namespace reformkit {

struct ConformanceCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ConformanceReport {
    std::string base_url;
    std::vector<ConformanceCheck> checks;

    bool passed() const;
    nlohmann::json to_json() const;
};

// Probes a remote backend against the wire protocol: GET /health, POST
// /generate for every generable type, 422 for an unknown type, POST
// /acceptability, and identical answers to identical requests. Never throws
// on backend misbehaviour; every problem becomes a failed check.
ConformanceReport run_conformance(Endpoint const& endpoint,
                                  std::string const& probe = "I am looking for a movie like Dumb and Dumber.");

}  // namespace reformkit
