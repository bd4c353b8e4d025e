#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "reformkit/extraction.hpp"
#include "reformkit/orchestrator.hpp"
#include "reformkit/types.hpp"

namespace reformkit {

struct PRF {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Token-level scores. The reference must be non-empty (DataError otherwise);
// an empty candidate scores 0. When neither side has an n-gram of the
// requested order, identical token lists score 1 and anything else 0.
PRF rouge_n(std::vector<std::string> const& candidate, std::vector<std::string> const& reference, int n);
PRF rouge_l(std::vector<std::string> const& candidate, std::vector<std::string> const& reference);
// Orders for which the candidate has no n-grams are left out of the
// geometric mean; any remaining order without a match gives 0.
double bleu(std::vector<std::string> const& candidate, std::vector<std::string> const& reference, int max_n = 4);

PRF rouge_n(std::string_view candidate, std::string_view reference, int n);
PRF rouge_l(std::string_view candidate, std::string_view reference);
double bleu(std::string_view candidate, std::string_view reference, int max_n = 4);

struct MetricReport {
    double rouge1 = 0.0;  // F1 throughout
    double rouge2 = 0.0;
    double rougeL = 0.0;
    double bleu = 0.0;  // in [0, 1]
    std::size_t n_pairs = 0;
    std::size_t n_sequences = 0;
    std::size_t n_runs = 0;

    nlohmann::json to_json(bool bleu_x100 = false) const;
};

// Pairs every generated step with the human step of the same index in the
// reference that has the same seed utterance (up to the shorter sequence),
// averages over all (run, step) pairs of a seed, then across seeds. Distinct
// references with one seed act as alternatives: each metric takes its best
// value over those that reach the step. Throws DataError naming the seed
// when a generated sequence has no reference.
MetricReport evaluate_run(std::vector<ReformulationSequence> const& generated,
                          std::vector<HumanSequence> const& references, std::size_t jobs = 1);

// Heuristic type check of a reformulation against its original; nullopt
// means "unknown".
inline constexpr double kSimplifyContainment = 0.5;
inline constexpr double kRephraseJaccard = 0.2;
inline constexpr double kRephraseLengthBand = 0.3;

std::optional<ReformulationType> classify_reformulation_type(std::string_view original, std::string_view candidate);

// Desk-scale stand-ins for the human G/D/T judgements: share of steps the
// heuristic filter accepts, mean difficulty ordinal against the previous
// utterance (0 easier, 1 same, 2 harder), share of steps whose classified
// type equals the requested one.
struct JudgementReport {
    double grammatical = 0.0;
    double difficulty = 0.0;
    double type_accuracy = 0.0;
    std::size_t n_steps = 0;

    nlohmann::json to_json() const;
};

JudgementReport judge_sequences(std::vector<ReformulationSequence> const& generated);

}  // namespace reformkit
