#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reformkit/dynamics.hpp"
#include "reformkit/stats.hpp"
#include "reformkit/types.hpp"

namespace reformkit {

// Which agent acts precede user reformulations, overall and per agent.
struct IntentRatioEntry {
    Intent intent;
    std::size_t count = 0;
    double ratio = 0.0;
    // Population standard deviation of this intent's ratio across agents.
    double sigma = 0.0;
};

struct IntentRatioReport {
    std::vector<IntentRatioEntry> entries;  // kAgentIntents order
    std::size_t total = 0;
    std::size_t excluded_no_agent_turn = 0;
    std::size_t excluded_unannotated = 0;
    std::map<std::string, std::array<double, kAgentIntents.size()>> per_agent;

    IntentRatioEntry const& at(Intent intent) const;
    nlohmann::json to_json() const;
};

// Attributes every reformulation-labeled user turn to the intent of the
// nearest earlier agent turn.
IntentRatioReport preceding_intent_ratios(Corpus const& corpus);

struct PatternFrequency {
    ReformulationType from;
    ReformulationType to;
    double ratio = 0.0;
    std::size_t count = 0;

    std::string name() const;  // "rephrase-simplify"
};

// Adjacent type pairs inside pieces, ratio = count / all adjacent pairs.
// Sorted by ratio (then count) descending, ties broken by pair name.
std::vector<PatternFrequency> pattern_frequencies(std::vector<DialoguePiece> const& pieces);
nlohmann::json to_json(std::vector<PatternFrequency> const& patterns);

struct TurnBin {
    std::size_t first_turn = 0;
    std::size_t last_turn = 0;  // inclusive
    std::array<std::size_t, kNumReformulationTypes> counts{};
    std::size_t total = 0;
    // All zeros when total == 0.
    TypeRow distribution{};
};

struct TurnBinReport {
    std::size_t bin_width = 5;
    std::vector<TurnBin> bins;

    // Count-weighted mean bin index of a type; NaN if the type never occurs.
    double mean_bin(ReformulationType t) const;
    nlohmann::json to_json() const;
};

// Bins reformulation-labeled turns by floor(turn index / bin_width).
TurnBinReport turn_bin_distribution(Corpus const& corpus, std::size_t bin_width = 5);

struct TypeComparison {
    ReformulationType type;
    stats::TestResult levene;
    stats::TestResult t;
    bool equal_variance = true;
};

struct IntentComparison {
    Intent intent;
    std::size_t users_with_experience = 0;
    std::size_t users_without_experience = 0;
    bool sufficient = false;  // false = "insufficient data"
    std::vector<TypeComparison> types;
};

struct ExperienceReport {
    double alpha = 0.05;
    std::vector<IntentComparison> intents;
    std::size_t dialogues_without_flag = 0;

    nlohmann::json to_json() const;
};

inline constexpr double kLeveneAlpha = 0.05;

// Per agent intent, per reformulation type: compares the users' type
// proportions between the experienced and inexperienced groups. Levene's
// test at `alpha` picks the pooled or Welch t-test.
ExperienceReport compare_experience_groups(Corpus const& corpus, double alpha = kLeveneAlpha);

}  // namespace reformkit
