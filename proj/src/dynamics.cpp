#include "reformkit/dynamics.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "reformkit/extraction.hpp"

namespace reformkit {

using nlohmann::json;

namespace {

TypeRow generable_uniform_row()
{
    TypeRow row{};
    for (auto t : kGenerableTypes) {
        row[type_index(t)] = 1.0 / static_cast<double>(kGenerableTypes.size());
    }
    return row;
}

void check_simplex(TypeRow const& row, std::string const& what)
{
    double sum = 0.0;
    for (double p : row) {
        if (!(p >= 0.0) || p > 1.0 + kSimplexTolerance) {
            throw DataError(what + ": probability outside [0, 1]");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
        throw DataError(what + ": probabilities sum to " + std::to_string(sum));
    }
}

ReformulationType draw(TypeRow const& probs, double u)
{
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) {
            continue;
        }
        last_positive = i;
        cum += probs[i];
        if (u < cum) {
            return kAllTypes[i];
        }
    }
    // u landed in the rounding gap above the accumulated mass.
    return kAllTypes[last_positive];
}

}  // namespace

std::vector<DialoguePiece> segment_pieces(Corpus const& corpus)
{
    std::vector<DialoguePiece> pieces;
    for (auto const& d : corpus.dialogues) {
        for (auto& run : labeled_runs(d)) {
            DialoguePiece piece{run.dialogue_id, run.intent, run.slots, {}, run.turn_indices};
            for (auto idx : run.turn_indices) {
                piece.typed_states.push_back(*d.turns[idx].reformulation);
            }
            pieces.push_back(std::move(piece));
        }
    }
    return pieces;
}

TransitionMatrix TransitionMatrix::estimate(std::vector<DialoguePiece> const& pieces)
{
    TransitionMatrix m;
    bool observed = false;
    for (auto const& p : pieces) {
        for (std::size_t r = 1; r < p.typed_states.size(); ++r) {
            ++m.counts_[type_index(p.typed_states[r - 1])][type_index(p.typed_states[r])];
            observed = true;
        }
    }
    if (!observed) {
        throw DataError("no transitions observed");
    }
    for (std::size_t i = 0; i < kNumReformulationTypes; ++i) {
        auto total = std::accumulate(m.counts_[i].begin(), m.counts_[i].end(), std::uint64_t{0});
        if (total == 0) {
            m.entries_[i] = generable_uniform_row();
            m.fallback_[i] = true;
            continue;
        }
        for (std::size_t j = 0; j < kNumReformulationTypes; ++j) {
            m.entries_[i][j] = static_cast<double>(m.counts_[i][j]) / static_cast<double>(total);
        }
    }
    return m;
}

TransitionMatrix TransitionMatrix::from_entries(std::array<TypeRow, kNumReformulationTypes> const& entries)
{
    TransitionMatrix m;
    for (std::size_t i = 0; i < kNumReformulationTypes; ++i) {
        check_simplex(entries[i], "matrix row '" + std::string(to_string(kAllTypes[i])) + "'");
    }
    m.entries_ = entries;
    return m;
}

json TransitionMatrix::to_json() const
{
    json types = json::array();
    for (auto t : kAllTypes) {
        types.push_back(to_string(t));
    }
    json entries = json::array();
    json counts = json::array();
    for (std::size_t i = 0; i < kNumReformulationTypes; ++i) {
        entries.push_back(entries_[i]);
        counts.push_back(counts_[i]);
    }
    return json{{"types", types}, {"entries", entries}, {"counts", counts}};
}

TransitionMatrix TransitionMatrix::from_json(json const& j)
{
    auto fail = [](std::string const& field, std::string const& detail) {
        throw SchemaError(0, field, detail);
    };
    if (!j.is_object() || !j.contains("types") || !j.contains("entries")) {
        fail("", "matrix record needs 'types' and 'entries'");
    }
    auto const& jt = j.at("types");
    if (!jt.is_array() || jt.size() != kNumReformulationTypes) {
        fail("types", "expected the 7 reformulation types");
    }
    // Position in the file -> canonical index.
    std::array<std::size_t, kNumReformulationTypes> index{};
    std::array<bool, kNumReformulationTypes> seen{};
    for (std::size_t k = 0; k < kNumReformulationTypes; ++k) {
        auto t = jt[k].is_string() ? parse_reformulation_type(jt[k].get<std::string>()) : std::nullopt;
        if (!t || seen[type_index(*t)]) {
            fail("types", "unknown or repeated type at position " + std::to_string(k));
        }
        seen[type_index(*t)] = true;
        index[k] = type_index(*t);
    }
    auto read_square = [&](char const* field, auto& out, bool is_count) {
        auto const& rows = j.at(field);
        if (!rows.is_array() || rows.size() != kNumReformulationTypes) {
            fail(field, "expected a 7x7 matrix");
        }
        for (std::size_t a = 0; a < kNumReformulationTypes; ++a) {
            if (!rows[a].is_array() || rows[a].size() != kNumReformulationTypes) {
                fail(field, "row " + std::to_string(a) + " does not have 7 entries");
            }
            for (std::size_t b = 0; b < kNumReformulationTypes; ++b) {
                auto const& v = rows[a][b];
                if (is_count ? !v.is_number_unsigned() : !v.is_number()) {
                    fail(field, "non-numeric entry");
                }
                out[index[a]][index[b]] = v.template get<std::decay_t<decltype(out[0][0])>>();
            }
        }
    };
    std::array<TypeRow, kNumReformulationTypes> entries{};
    read_square("entries", entries, false);
    TransitionMatrix m = from_entries(entries);
    if (j.contains("counts")) {
        read_square("counts", m.counts_, true);
    }
    for (std::size_t i = 0; i < kNumReformulationTypes; ++i) {
        auto total = std::accumulate(m.counts_[i].begin(), m.counts_[i].end(), std::uint64_t{0});
        m.fallback_[i] = j.contains("counts") && total == 0;
    }
    return m;
}

TransitionMatrix load_matrix(std::string const& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open matrix file '" + path + "'");
    }
    json j;
    try {
        in >> j;
    } catch (json::parse_error const& e) {
        throw SchemaError(1, "", std::string("malformed JSON: ") + e.what());
    }
    return TransitionMatrix::from_json(j);
}

void save_matrix(TransitionMatrix const& m, std::string const& path)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write matrix file '" + path + "'");
    }
    out << m.to_json().dump() << '\n';
}

TypeDistribution TypeDistribution::uniform_generable() { return TypeDistribution{generable_uniform_row(), 1}; }

TypeDistribution TypeDistribution::one_hot(ReformulationType t, std::size_t step)
{
    TypeDistribution z;
    z.probs[type_index(t)] = 1.0;
    z.step = step;
    return z;
}

void TypeDistribution::validate() const { check_simplex(probs, "type distribution"); }

TypeDistribution update_distribution(TransitionMatrix const& m, TypeDistribution const& z)
{
    z.validate();
    TypeDistribution next;
    next.step = z.step + 1;
    for (std::size_t i = 0; i < kNumReformulationTypes; ++i) {
        if (z.probs[i] == 0.0) {
            continue;
        }
        auto const& row = m.entries()[i];
        for (std::size_t j = 0; j < kNumReformulationTypes; ++j) {
            next.probs[j] += z.probs[i] * row[j];
        }
    }
    return next;
}

ReformulationType sample_type(TypeDistribution const& z, Rng& rng,
                              std::set<ReformulationType> const& forbidden, int max_retries)
{
    z.validate();
    for (int attempt = 0; attempt <= max_retries; ++attempt) {
        auto t = draw(z.probs, rng.uniform());
        if (forbidden.count(t) == 0) {
            return t;
        }
    }
    TypeRow allowed = z.probs;
    double mass = 0.0;
    for (std::size_t i = 0; i < kNumReformulationTypes; ++i) {
        if (forbidden.count(kAllTypes[i]) != 0) {
            allowed[i] = 0.0;
        }
        mass += allowed[i];
    }
    if (!(mass > 0.0)) {
        throw DegenerateDistribution();
    }
    for (auto& p : allowed) {
        p /= mass;
    }
    return draw(allowed, rng.uniform());
}

ReformulationType sample_type(TypeDistribution const& z, std::uint64_t seed,
                              std::set<ReformulationType> const& forbidden, int max_retries)
{
    Rng rng(seed);
    return sample_type(z, rng, forbidden, max_retries);
}

}  // namespace reformkit
