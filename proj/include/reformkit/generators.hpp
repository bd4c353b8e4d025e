#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "reformkit/remote.hpp"
#include "reformkit/text.hpp"
#include "reformkit/types.hpp"

namespace reformkit {

enum class BackendId { Rule, Remote };

std::string_view to_string(BackendId b);

struct GenerationRequest {
    std::string utterance;
    ReformulationType target_type = ReformulationType::RepeatRephrase;
    Domain domain = Domain::Movie;
    std::vector<SlotAnnotation> slots;
    int num_candidates = 1;
    std::uint64_t seed = 0;

    // Throws DataError on an empty utterance, a non-generable target type or
    // num_candidates < 1.
    void validate() const;
};

struct GenerationCandidate {
    std::string text;
    ReformulationType target_type = ReformulationType::RepeatRephrase;
    BackendId backend = BackendId::Rule;
    std::optional<double> score;

    bool operator==(GenerationCandidate const&) const = default;
};

class GenerationBackend {
  public:
    virtual ~GenerationBackend() = default;
    virtual BackendId id() const = 0;
    virtual std::vector<GenerationCandidate> generate(GenerationRequest const& request) const = 0;
};

class RuleBackend final : public GenerationBackend {
  public:
    explicit RuleBackend(Lexicon const& lexicon = Lexicon::builtin()) : lexicon_(&lexicon) {}

    BackendId id() const override { return BackendId::Rule; }
    std::vector<GenerationCandidate> generate(GenerationRequest const& request) const override;

  private:
    Lexicon const* lexicon_;
};

class RemoteBackend final : public GenerationBackend {
  public:
    explicit RemoteBackend(Endpoint endpoint) : endpoint_(std::move(endpoint)) {}

    BackendId id() const override { return BackendId::Remote; }
    std::vector<GenerationCandidate> generate(GenerationRequest const& request) const override;

    Endpoint const& endpoint() const { return endpoint_; }

  private:
    Endpoint endpoint_;
};

// Validates the request and returns at least one candidate. A backend that
// answers with none raises RemoteError(ZeroCandidates).
std::vector<GenerationCandidate> generate(GenerationRequest const& request, GenerationBackend const& backend);

std::string rule_repeat(std::string_view u);

std::string rule_simplify(std::string_view u, std::span<SlotAnnotation const> slots = {},
                          Lexicon const& lexicon = Lexicon::builtin());

std::string rule_rephrase(std::string_view u, std::uint64_t seed, Lexicon const& lexicon = Lexicon::builtin());

std::string rule_refine(std::string_view u, std::span<SlotAnnotation const> slots, Domain domain,
                        Lexicon const& lexicon = Lexicon::builtin());

std::string rule_restart(std::string_view u, std::span<SlotAnnotation const> slots, Domain domain,
                         Lexicon const& lexicon = Lexicon::builtin());

// Wire format of POST /generate.
nlohmann::json generation_request_json(GenerationRequest const& request);
std::vector<GenerationCandidate> parse_generation_response(nlohmann::json const& body, ReformulationType type);

std::vector<GenerationCandidate> remote_generate(GenerationRequest const& request, Endpoint const& endpoint);

}  // namespace reformkit
