#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "reformkit/remote.hpp"
#include "reformkit/types.hpp"

namespace reformkit {

// Vowel groups (y counts as a vowel), minus a silent final "e", at least 1.
int count_syllables(std::string_view word);

// Flesch-Kincaid grade level. Sentences split on . ! and ?; throws DataError
// when `u` has no tokens.
double readability_grade(std::string_view u);

inline constexpr double kDifficultyEpsilon = 0.5;

// 0 = candidate easier, 1 = same within epsilon, 2 = harder.
int compare_difficulty(std::string_view candidate, std::string_view original, double epsilon = kDifficultyEpsilon);

enum class FilterBackend { Heuristic, Remote, Off };

std::string_view to_string(FilterBackend b);
std::optional<FilterBackend> parse_filter_backend(std::string_view s);

// Rule identifiers carried in AcceptabilityVerdict::reasons.
namespace rule {
inline constexpr char const* kLength = "length";
inline constexpr char const* kTokenRepetition = "token-repetition";
inline constexpr char const* kBigramRepetition = "bigram-repetition";
inline constexpr char const* kNoContent = "no-content";
inline constexpr char const* kDifficultyIncrease = "difficulty-increase";
inline constexpr char const* kRemoteUnacceptable = "remote-unacceptable";
}  // namespace rule

struct AcceptabilityVerdict {
    bool acceptable = true;
    std::vector<std::string> reasons;
    double readability_grade = 0.0;
    FilterBackend backend = FilterBackend::Heuristic;
    std::optional<double> score;  // remote classifier confidence

    nlohmann::json to_json() const;
    static AcceptabilityVerdict from_json(nlohmann::json const& j);
};

inline constexpr std::size_t kMaxCandidateTokens = 64;
inline constexpr std::size_t kMaxTokenRepeats = 4;
inline constexpr std::size_t kMaxBigramRepeats = 2;

// `relaxed` switches off the two repetition rules.
AcceptabilityVerdict heuristic_acceptable(std::string_view candidate, std::string_view original,
                                          ReformulationType target_type, bool relaxed = false);

nlohmann::json acceptability_request_json(std::string_view candidate);
AcceptabilityVerdict parse_acceptability_response(nlohmann::json const& body, std::string_view candidate);
AcceptabilityVerdict remote_acceptable(std::string_view candidate, Endpoint const& endpoint);

struct FilterConfig {
    FilterBackend mode = FilterBackend::Heuristic;
    bool relaxed = false;
    std::optional<Endpoint> endpoint;  // required for Remote
};

// Dispatches on the configured mode. Off accepts everything.
AcceptabilityVerdict judge(std::string_view candidate, std::string_view original, ReformulationType target_type,
                           FilterConfig const& config);

}  // namespace reformkit
