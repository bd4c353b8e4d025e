#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "oracles.hpp"
#include "support.hpp"

#include "reformkit/dynamics.hpp"
#include "reformkit/error.hpp"

using namespace reformkit;
using RT = ReformulationType;

namespace {

// One dialogue whose user turns all carry `types`, same intent and slots.
Corpus piece_corpus(std::vector<RT> const& types, std::vector<std::string> intents = {})
{
    Dialogue d;
    d.dialogue_id = "p";
    d.agent_id = "A1";
    d.turns.push_back({0, Speaker::User, "seed", Intent::Disclose, {}, std::nullopt});
    for (std::size_t i = 0; i < types.size(); ++i) {
        d.turns.push_back({d.turns.size(), Speaker::Agent, "sorry", Intent::AgentFailed, {}, std::nullopt});
        auto intent = intents.empty() ? Intent::Disclose : *parse_intent(intents[i], Speaker::User);
        d.turns.push_back({d.turns.size(), Speaker::User, "u", intent, {{SlotKind::Movie, "Heat"}}, types[i]});
    }
    Corpus c;
    c.dialogues.push_back(d);
    return c;
}

std::array<TypeRow, 7> identity()
{
    std::array<TypeRow, 7> eye{};
    for (std::size_t i = 0; i < 7; ++i) eye[i][i] = 1.0;
    return eye;
}

}  // namespace

TEST_CASE("segment_pieces")
{
    SUBCASE("four labeled turns with the same intent and slots form one piece")
    {
        auto pieces = segment_pieces(piece_corpus({RT::RepeatRephrase, RT::RepeatSimplify, RT::Repeat, RT::ClarifyRefine}));
        REQUIRE(pieces.size() == 1);
        CHECK(pieces[0].typed_states.size() == 4);
        CHECK(pieces[0].turn_indices == std::vector<std::size_t>{2, 4, 6, 8});
        CHECK(pieces[0].intent == Intent::Disclose);
    }
    SUBCASE("an intent flip at the third labeled turn gives two pieces")
    {
        auto pieces = segment_pieces(piece_corpus({RT::RepeatRephrase, RT::RepeatSimplify, RT::ClarifyRefine, RT::Repeat},
                                                  {"disclose", "disclose", "refine", "refine"}));
        REQUIRE(pieces.size() == 2);
        CHECK(pieces[0].typed_states == std::vector{RT::RepeatRephrase, RT::RepeatSimplify});
        CHECK(pieces[1].typed_states == std::vector{RT::ClarifyRefine, RT::Repeat});
    }
    SUBCASE("the Dubai piece")
    {
        auto pieces = segment_pieces(load_corpus(testing::fixture("table7.jsonl")));
        REQUIRE(pieces.size() == 1);
        CHECK(pieces[0].typed_states == std::vector{RT::RepeatRephrase, RT::RepeatSimplify});
        CHECK(pieces[0].dialogue_id == "table7");
    }
    SUBCASE("a restart continues the piece")
    {
        auto pieces = segment_pieces(piece_corpus({RT::RepeatRephrase, RT::StartRestart, RT::RepeatSimplify}));
        REQUIRE(pieces.size() == 1);
        CHECK(pieces[0].typed_states.size() == 3);
    }
}

TEST_CASE("estimate from hand-counted pieces")
{
    auto m = TransitionMatrix::estimate(segment_pieces(
        piece_corpus({RT::RepeatRephrase, RT::RepeatSimplify, RT::RepeatRephrase, RT::RepeatSimplify})));
    CHECK(m.entry(RT::RepeatRephrase, RT::RepeatSimplify) == 1.0);
    CHECK(m.entry(RT::RepeatSimplify, RT::RepeatRephrase) == 1.0);
    CHECK(m.count(RT::RepeatRephrase, RT::RepeatSimplify) == 2);
    CHECK(m.count(RT::RepeatSimplify, RT::RepeatRephrase) == 1);
    CHECK_FALSE(m.is_fallback_row(RT::RepeatRephrase));

    auto r = TransitionMatrix::estimate(segment_pieces(piece_corpus({RT::Repeat, RT::Repeat, RT::Repeat})));
    CHECK(r.entry(RT::Repeat, RT::Repeat) == 1.0);
    CHECK(r.count(RT::Repeat, RT::Repeat) == 2);
}

TEST_CASE("rows without observations fall back to uniform over the generable types")
{
    auto m = TransitionMatrix::estimate(segment_pieces(piece_corpus({RT::Repeat, RT::Repeat})));
    CHECK(m.is_fallback_row(RT::Stop));
    for (auto t : kAllTypes) {
        CHECK(m.entry(RT::Stop, t) == doctest::Approx(is_generable(t) ? 0.2 : 0.0));
    }
}

TEST_CASE("estimate needs at least one transition")
{
    try {
        TransitionMatrix::estimate(segment_pieces(piece_corpus({RT::Repeat})));
        FAIL("expected DataError");
    } catch (DataError const& e) {
        CHECK(std::string(e.what()) == "no transitions observed");
    }
}

TEST_CASE("estimate agrees with brute-force pair counting on random corpora")
{
    std::mt19937_64 rng(21);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto corpus = oracle::random_corpus(rng, 20);
        auto expected = oracle::brute_pair_counts(corpus);
        std::uint64_t total = 0;
        for (auto const& row : expected) {
            for (auto v : row) total += v;
        }
        if (total == 0) continue;
        auto m = TransitionMatrix::estimate(segment_pieces(corpus));
        ++checked;
        for (std::size_t i = 0; i < 7; ++i) {
            double sum = 0;
            for (std::size_t j = 0; j < 7; ++j) {
                CHECK(m.counts()[i][j] == expected[i][j]);
                CHECK(m.entries()[i][j] >= 0.0);
                CHECK(m.entries()[i][j] <= 1.0);
                sum += m.entries()[i][j];
            }
            CHECK(std::fabs(sum - 1.0) <= 1e-9);
        }
    }
    CHECK(checked > 80);
}

TEST_CASE("the study corpus puts most mass on rephrase to simplify")
{
    auto m = TransitionMatrix::estimate(segment_pieces(load_corpus(testing::fixture("study.jsonl"))));
    CHECK(m.count(RT::RepeatRephrase, RT::RepeatSimplify) == 80);
    CHECK(m.count(RT::RepeatRephrase, RT::ClarifyRefine) == 63);
    CHECK(m.count(RT::RepeatSimplify, RT::RepeatRephrase) == 53);
    CHECK(m.is_fallback_row(RT::Stop));
}

TEST_CASE("matrix JSON round-trip and reordered type lists")
{
    auto m = TransitionMatrix::estimate(segment_pieces(load_corpus(testing::fixture("study.jsonl"))));
    auto again = TransitionMatrix::from_json(m.to_json());
    CHECK(again.entries() == m.entries());
    CHECK(again.counts() == m.counts());
    for (auto t : kAllTypes) CHECK(again.is_fallback_row(t) == m.is_fallback_row(t));

    testing::TempDir dir;
    save_matrix(m, dir.file("m.json"));
    CHECK(load_matrix(dir.file("m.json")).entries() == m.entries());

    // Types listed in another order are mapped back to the canonical one.
    auto j = m.to_json();
    nlohmann::json rev = j;
    for (std::size_t a = 0; a < 7; ++a) {
        rev["types"][a] = j["types"][6 - a];
        for (std::size_t b = 0; b < 7; ++b) {
            rev["entries"][a][b] = j["entries"][6 - a][6 - b];
            rev["counts"][a][b] = j["counts"][6 - a][6 - b];
        }
    }
    CHECK(TransitionMatrix::from_json(rev).entries() == m.entries());

    auto bad = j;
    bad["types"].erase(0);
    CHECK_THROWS_AS(TransitionMatrix::from_json(bad), SchemaError);
    bad = j;
    bad["entries"][0][0] = 2.0;
    CHECK_THROWS_AS(TransitionMatrix::from_json(bad), DataError);
    bad = j;
    bad["entries"][1].erase(0);
    CHECK_THROWS_AS(TransitionMatrix::from_json(bad), SchemaError);
}

TEST_CASE("update_distribution")
{
    std::mt19937_64 rng(5);
    auto zv = oracle::random_simplex(rng, 7);
    TypeDistribution z;
    std::copy(zv.begin(), zv.end(), z.probs.begin());

    SUBCASE("identity is a fixed point")
    {
        auto next = update_distribution(TransitionMatrix::from_entries(identity()), z);
        CHECK(next.probs == z.probs);
        CHECK(next.step == z.step + 1);
    }
    SUBCASE("an absorbing simplify column sends everything to simplify")
    {
        std::array<TypeRow, 7> rows{};
        for (auto& r : rows) r[type_index(RT::RepeatSimplify)] = 1.0;
        auto next = update_distribution(TransitionMatrix::from_entries(rows), z);
        for (auto t : kAllTypes) CHECK(next[t] == doctest::Approx(t == RT::RepeatSimplify ? 1.0 : 0.0).epsilon(1e-12));
    }
    SUBCASE("a one-hot rephrase vector picks out the rephrase row")
    {
        std::array<TypeRow, 7> rows{};
        for (auto& r : rows) {
            auto v = oracle::random_simplex(rng, 7);
            std::copy(v.begin(), v.end(), r.begin());
        }
        auto m = TransitionMatrix::from_entries(rows);
        auto next = update_distribution(m, TypeDistribution::one_hot(RT::RepeatRephrase));
        CHECK(next.probs == m.row(RT::RepeatRephrase));
    }
    SUBCASE("hand product of a two-type mix")
    {
        std::array<TypeRow, 7> rows = identity();
        rows[type_index(RT::RepeatRephrase)] = {0, 0, 0.25, 0.5, 0.25, 0, 0};
        TypeDistribution half;
        half.probs[type_index(RT::RepeatRephrase)] = 0.5;
        half.probs[type_index(RT::Repeat)] = 0.5;
        auto next = update_distribution(TransitionMatrix::from_entries(rows), half);
        CHECK(next[RT::Repeat] == 0.5);
        CHECK(next[RT::RepeatRephrase] == 0.125);
        CHECK(next[RT::RepeatSimplify] == 0.25);
        CHECK(next[RT::ClarifyRefine] == 0.125);
    }
    SUBCASE("an invalid input distribution is rejected")
    {
        TypeDistribution bad;
        bad.probs[0] = 0.7;
        CHECK_THROWS_AS(update_distribution(TransitionMatrix::from_entries(identity()), bad), DataError);
    }
}

TEST_CASE("simplex preservation and power-iteration convergence on random matrices")
{
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 200; ++trial) {
        std::array<TypeRow, 7> rows{};
        for (auto& r : rows) {
            auto v = oracle::random_simplex(rng, 7);
            std::copy(v.begin(), v.end(), r.begin());
        }
        auto m = TransitionMatrix::from_entries(rows);
        auto z = TypeDistribution::uniform_generable();
        double l1 = 1.0;
        for (int k = 0; k < 500 && l1 >= 1e-6; ++k) {
            auto next = update_distribution(m, z);
            double s = 0;
            l1 = 0;
            for (std::size_t i = 0; i < 7; ++i) {
                CHECK(next.probs[i] >= 0.0);
                s += next.probs[i];
                l1 += std::fabs(next.probs[i] - z.probs[i]);
            }
            CHECK(std::fabs(s - 1.0) <= 1e-9);
            z = next;
        }
        CHECK(l1 < 1e-6);
    }
}

TEST_CASE("uniform_generable starts on the five generable types")
{
    auto z = TypeDistribution::uniform_generable();
    CHECK(z.step == 1);
    for (auto t : kAllTypes) CHECK(z[t] == doctest::Approx(is_generable(t) ? 0.2 : 0.0));
    CHECK_NOTHROW(z.validate());
}

TEST_CASE("sample_type")
{
    std::set<RT> forbidden = {RT::Change, RT::Stop};
    SUBCASE("one-hot repeat") { CHECK(sample_type(TypeDistribution::one_hot(RT::Repeat), 1, forbidden) == RT::Repeat); }
    SUBCASE("one-hot stop has no allowed mass")
    {
        CHECK_THROWS_AS(sample_type(TypeDistribution::one_hot(RT::Stop), 1, forbidden), DegenerateDistribution);
        try {
            sample_type(TypeDistribution::one_hot(RT::Stop), 1, forbidden);
        } catch (DataError const& e) {
            CHECK(std::string(e.what()) == "degenerate distribution");
        }
    }
    SUBCASE("uniform over seven types is uniform over the five allowed")
    {
        TypeDistribution z;
        z.probs.fill(1.0 / 7.0);
        std::map<RT, int> hits;
        Rng rng(99);
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            auto t = sample_type(z, rng, forbidden);
            REQUIRE(forbidden.count(t) == 0);
            ++hits[t];
        }
        CHECK(hits.size() == 5);
        for (auto const& [t, c] : hits) CHECK(std::fabs(static_cast<double>(c) / n - 0.2) <= 0.01);
    }
    SUBCASE("deterministic per seed")
    {
        auto z = TypeDistribution::uniform_generable();
        for (std::uint64_t seed = 0; seed < 50; ++seed) CHECK(sample_type(z, seed, forbidden) == sample_type(z, seed, forbidden));
    }
    SUBCASE("zero retries renormalizes immediately")
    {
        TypeDistribution z;
        z.probs[type_index(RT::Stop)] = 0.9;
        z.probs[type_index(RT::Repeat)] = 0.1;
        for (std::uint64_t seed = 0; seed < 50; ++seed) CHECK(sample_type(z, seed, forbidden, 0) == RT::Repeat);
    }
}

TEST_CASE("sample_type never returns a forbidden type")
{
    std::mt19937_64 gen(8);
    Rng rng(8);
    for (int trial = 0; trial < 2000; ++trial) {
        auto v = oracle::random_simplex(gen, 7);
        TypeDistribution z;
        std::copy(v.begin(), v.end(), z.probs.begin());
        std::set<RT> forbidden;
        for (auto t : kAllTypes) {
            if (gen() % 3 == 0) forbidden.insert(t);
        }
        if (forbidden.size() == 7) forbidden.erase(RT::Repeat);
        auto t = sample_type(z, rng, forbidden, static_cast<int>(gen() % 4));
        CHECK(forbidden.count(t) == 0);
    }
}
