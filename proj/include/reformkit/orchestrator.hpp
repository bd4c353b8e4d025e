#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reformkit/difficulty.hpp"
#include "reformkit/dynamics.hpp"
#include "reformkit/generators.hpp"
#include "reformkit/types.hpp"

namespace reformkit {

// How z_{r+1} is obtained from step r: from the one-hot vector of the type
// actually sampled, or from the full distribution z_r.
enum class Propagation { Realized, Marginal };
// Which utterance step r is generated from: u_{r-1} or always u_0.
enum class Conditioning { Previous, Seed };

std::string_view to_string(Propagation p);
std::string_view to_string(Conditioning c);
std::optional<Propagation> parse_propagation(std::string_view s);
std::optional<Conditioning> parse_conditioning(std::string_view s);

struct OrchestratorConfig {
    std::size_t length = 3;
    std::size_t max_attempts = 5;
    std::set<ReformulationType> forbidden = {ReformulationType::Change, ReformulationType::Stop};
    FilterConfig filter;
    BackendId backend = BackendId::Rule;  // recorded in the snapshot only
    std::uint64_t seed = 0;
    Propagation propagate = Propagation::Realized;
    Conditioning condition = Conditioning::Previous;
    int max_type_retries = kDefaultMaxRetries;

    // Throws DataError when length or max_attempts is 0.
    void validate() const;
    nlohmann::json to_json() const;
    static OrchestratorConfig from_json(nlohmann::json const& j);
};

struct SequenceStep {
    ReformulationType type;
    std::string utterance;
    AcceptabilityVerdict verdict;
    std::size_t attempts_used = 0;
    // Every attempt was rejected; utterance is the previous one verbatim.
    bool fallback = false;
};

inline constexpr char const* kBackendFailure = "backend-failure";

struct ReformulationSequence {
    std::string seed;
    Domain domain = Domain::Movie;
    std::vector<SlotAnnotation> slots;
    std::vector<SequenceStep> steps;
    OrchestratorConfig config;
    std::size_t run = 0;
    std::optional<std::string> termination;  // set when steps.size() < config.length

    std::vector<ReformulationType> types() const;
    nlohmann::json to_json() const;
    static ReformulationSequence from_json(nlohmann::json const& j);
};

struct SeedUtterance {
    std::string utterance;
    Domain domain = Domain::Movie;
    std::vector<SlotAnnotation> slots;
};

// Samples a type per step from the evolving distribution (starting uniform
// over the generable types), generates, filters, and falls back to a verbatim
// repeat when every attempt is rejected. Deterministic in config.seed.
ReformulationSequence generate_sequence(SeedUtterance const& seed, TransitionMatrix const& m,
                                        OrchestratorConfig const& config, GenerationBackend const& backend);

// Same loop with the step types given instead of sampled.
ReformulationSequence generate_forced(SeedUtterance const& seed, std::vector<ReformulationType> const& types,
                                      OrchestratorConfig const& config, GenerationBackend const& backend);

// Copy of `dialogue` with the utterances of a human reformulation sequence
// replaced step by step by the simulated ones. The human sequence is the
// first whose seed and type sequence both match, else the first with the same
// type sequence. Throws DataError naming both type sequences on mismatch.
Dialogue splice_dialogue(Dialogue const& dialogue, ReformulationSequence const& simulated);

std::vector<ReformulationSequence> load_sequences(std::string const& path);
void save_sequences(std::vector<ReformulationSequence> const& sequences, std::string const& path);
std::vector<ReformulationSequence> parse_sequences(std::istream& in);

}  // namespace reformkit
