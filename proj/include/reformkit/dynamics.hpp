#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reformkit/error.hpp"
#include "reformkit/random.hpp"
#include "reformkit/types.hpp"

namespace reformkit {

// A run of reformulations for one unchanged intent and slot set.
struct DialoguePiece {
    std::string dialogue_id;
    std::optional<Intent> intent;
    std::vector<SlotAnnotation> slots;
    std::vector<ReformulationType> typed_states;
    std::vector<std::size_t> turn_indices;
};

std::vector<DialoguePiece> segment_pieces(Corpus const& corpus);

using TypeRow = std::array<double, kNumReformulationTypes>;
using CountRow = std::array<std::uint64_t, kNumReformulationTypes>;

// Row-stochastic first-order transition matrix over the seven reformulation
// types, indexed in kAllTypes order: entry(i, j) = p(next = j | current = i).
class TransitionMatrix {
  public:
    // Maximum-likelihood estimate from adjacent type pairs inside each piece.
    // Rows without observations fall back to uniform over the generable types
    // and are flagged. Throws DataError("no transitions observed") when no
    // piece has two states.
    static TransitionMatrix estimate(std::vector<DialoguePiece> const& pieces);

    // Takes probabilities as given; every row must be a distribution.
    static TransitionMatrix from_entries(std::array<TypeRow, kNumReformulationTypes> const& entries);

    static TransitionMatrix from_json(nlohmann::json const& j);
    nlohmann::json to_json() const;

    double entry(ReformulationType from, ReformulationType to) const
    {
        return entries_[type_index(from)][type_index(to)];
    }
    std::uint64_t count(ReformulationType from, ReformulationType to) const
    {
        return counts_[type_index(from)][type_index(to)];
    }
    TypeRow const& row(ReformulationType from) const { return entries_[type_index(from)]; }
    bool is_fallback_row(ReformulationType from) const { return fallback_[type_index(from)]; }

    std::array<TypeRow, kNumReformulationTypes> const& entries() const { return entries_; }
    std::array<CountRow, kNumReformulationTypes> const& counts() const { return counts_; }

  private:
    std::array<TypeRow, kNumReformulationTypes> entries_{};
    std::array<CountRow, kNumReformulationTypes> counts_{};
    std::array<bool, kNumReformulationTypes> fallback_{};
};

TransitionMatrix load_matrix(std::string const& path);
void save_matrix(TransitionMatrix const& m, std::string const& path);

// Probability vector over reformulation types at generation step `step`.
struct TypeDistribution {
    TypeRow probs{};
    std::size_t step = 1;

    double operator[](ReformulationType t) const { return probs[type_index(t)]; }

    // Starting distribution: uniform over the generable types.
    static TypeDistribution uniform_generable();
    static TypeDistribution one_hot(ReformulationType t, std::size_t step = 1);

    // Throws DataError unless entries are >= 0 and sum to 1 within 1e-9.
    void validate() const;
};

inline constexpr double kSimplexTolerance = 1e-9;

// Next-step distribution z'[j] = sum_i z[i] * m(i, j), step + 1.
TypeDistribution update_distribution(TransitionMatrix const& m, TypeDistribution const& z);

class DegenerateDistribution : public DataError {
  public:
    DegenerateDistribution() : DataError("degenerate distribution") {}
};

inline constexpr int kDefaultMaxRetries = 10;

// Draws from z, redrawing forbidden types up to max_retries times; after that
// z is renormalized over the allowed types and sampled once more. Throws
// DegenerateDistribution when no allowed type has mass.
ReformulationType sample_type(TypeDistribution const& z, Rng& rng,
                              std::set<ReformulationType> const& forbidden,
                              int max_retries = kDefaultMaxRetries);
ReformulationType sample_type(TypeDistribution const& z, std::uint64_t seed,
                              std::set<ReformulationType> const& forbidden,
                              int max_retries = kDefaultMaxRetries);

}  // namespace reformkit
