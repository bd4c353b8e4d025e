#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <thread>

#include "support.hpp"

#include "reformkit/error.hpp"
#include "reformkit/generators.hpp"

using namespace reformkit;
using RT = ReformulationType;

namespace {

std::vector<SlotAnnotation> const kNoSlots;

std::set<std::string> content_set(std::string const& u)
{
    auto c = Lexicon::builtin().content(tokenize(u));
    return {c.begin(), c.end()};
}

bool includes(std::set<std::string> const& big, std::set<std::string> const& small)
{
    return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

// Distinct user utterances of the study corpus, with their slots.
std::vector<std::pair<Turn, Domain>> study_turns()
{
    std::vector<std::pair<Turn, Domain>> out;
    std::set<std::string> seen;
    for (auto const& d : load_corpus(testing::fixture("study.jsonl")).dialogues) {
        for (auto const& t : d.turns) {
            if (t.speaker == Speaker::User && seen.insert(t.utterance).second) out.emplace_back(t, d.domain);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("tokenizer")
{
    CHECK(tokenize("A Tale, of Two Cities!") == std::vector<std::string>{"a", "tale", "of", "two", "cities"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("  ... !! ").empty());
    CHECK(tokenize("light-hearted") == std::vector<std::string>{"light-hearted"});
    CHECK(words("light-hearted") == std::vector<std::string>{"light", "hearted"});
    for (auto const& s : {"A Tale, of Two Cities!", "No, I'm looking for a restaurant.", "\"Quoted\" (text)"}) {
        auto once = tokenize(s);
        CHECK(tokenize(join(once)) == once);
    }
}

TEST_CASE("rule_repeat is the identity")
{
    CHECK(rule_repeat("I am looking for amazon premium movie.") == "I am looking for amazon premium movie.");
    std::string unicode = "Je cherche un film comme \xC2\xAB Am\xC3\xA9lie \xC2\xBB \xF0\x9F\x8E\xAC";
    CHECK(rule_repeat(unicode) == unicode);
}

TEST_CASE("rule_simplify")
{
    std::vector<SlotAnnotation> restaurant = {{SlotKind::Restaurant, "restaurant"}};
    CHECK(rule_simplify("Need to know about restaurants", restaurant) == "restaurants");
    CHECK(rule_simplify("restaurant") == "restaurant");
    CHECK(rule_simplify("Never mind. Can you book me a taxi from the airport?") == "book taxi airport");
    std::vector<SlotAnnotation> tale = {{SlotKind::Movie, "a tale of two cities"}};
    CHECK(rule_simplify("I am into a movie like a tale of two cities", tale) == "a tale of two cities");
    // Slot values keep their case; everything else is lowercased.
    std::vector<SlotAnnotation> dubai = {{SlotKind::Location, "Dubai"}};
    CHECK(rule_simplify("Show me Restaurants in Dubai please", dubai) == "Dubai");
    CHECK(rule_simplify("Show me Restaurants in Dubai please") == "show restaurants dubai");
}

TEST_CASE("rule_rephrase")
{
    CHECK(rule_rephrase("I want to know more about restaurants in Dubai", 0) == "Can you find me a restaurant in Dubai?");
    CHECK(rule_rephrase("No, I'm looking for a restaurant.", 0) == "Can you find me a restaurant?");
    CHECK(rule_rephrase("I am into a movie like a tale of two cities", 0) == "Movies similar to a tale of two cities");

    SUBCASE("frame wrapping when nothing else applies")
    {
        std::string u = "zork plugh xyzzy frotz gnusto rezrov blorb quendor flathead grue borphee thief troll cyclops dungeon";
        CHECK(rule_rephrase(u, 0) == "Can you help me with: " + u);
    }
    SUBCASE("short inputs toggle a politeness marker to stay in the length band")
    {
        CHECK(rule_rephrase("xyzzy plugh", 0) == "xyzzy plugh, please");
        CHECK(rule_rephrase("xyzzy plugh, please", 0) == "xyzzy plugh");
    }
    SUBCASE("synonym swaps depend on the seed and are reproducible")
    {
        std::set<std::string> seen;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            auto a = rule_rephrase("Places for dinner", seed);
            CHECK(a == rule_rephrase("Places for dinner", seed));
            CHECK(a != "Places for dinner");
            seen.insert(a);
        }
        CHECK(seen.size() > 1);
    }
}

TEST_CASE("rule_refine")
{
    std::vector<SlotAnnotation> comedy = {{SlotKind::Genre, "comedy"}};
    CHECK(rule_refine("Something light-hearted.", comedy, Domain::Movie) == "I want a comedy that is light-hearted.");
    CHECK(rule_refine("Something light-hearted.", kNoSlots, Domain::Movie) == "Something light-hearted with good ratings.");
    CHECK(rule_refine("I need a hotel", kNoSlots, Domain::Travel) == "I need a hotel in the city center");
    CHECK(rule_refine("Play something", kNoSlots, Domain::Music) == "Play something from the nineties");
}

TEST_CASE("rule_restart")
{
    std::vector<SlotAnnotation> dd = {{SlotKind::Movie, "Dumb and Dumber"}};
    CHECK(rule_restart("anything", dd, Domain::Movie) == "Dumb and Dumber is my favorite movie.");
    CHECK(rule_restart("anything", kNoSlots, Domain::Movie) == "I am looking for a movie");
    std::vector<SlotAnnotation> dubai = {{SlotKind::Location, "Dubai"}};
    auto travel = rule_restart("anything", dubai, Domain::Travel);
    CHECK(travel.find("Dubai") != std::string::npos);
}

TEST_CASE("generator contracts over fixture utterances")
{
    auto turns = study_turns();
    std::mt19937_64 rng(41);
    std::shuffle(turns.begin(), turns.end(), rng);
    turns.resize(300);
    std::uint64_t seed = 0;
    for (auto const& [turn, domain] : turns) {
        auto const& u = turn.utterance;
        auto n = tokenize(u).size();
        CAPTURE(u);

        CHECK(rule_repeat(u) == u);

        auto s = tokenize(rule_simplify(u, turn.slots)).size();
        CHECK(s <= n);
        if (n >= 2) CHECK(s < n);

        CHECK(includes(content_set(rule_refine(u, turn.slots, domain)), content_set(u)));
        CHECK(includes(content_set(rule_refine(u, kNoSlots, domain)), content_set(u)));

        auto r = rule_rephrase(u, seed++);
        CHECK(r != u);
        CHECK(std::fabs(static_cast<double>(tokenize(r).size()) - static_cast<double>(n)) <= 0.3 * static_cast<double>(n) + 1);

        CHECK_FALSE(tokenize(rule_restart(u, turn.slots, domain)).empty());
    }
}

TEST_CASE("rule generators are pure and safe to call concurrently")
{
    auto turns = study_turns();
    turns.resize(100);
    auto run = [&] {
        std::string all;
        std::uint64_t seed = 0;
        for (auto const& [t, d] : turns) {
            all += rule_simplify(t.utterance, t.slots) + "|" + rule_rephrase(t.utterance, seed++) + "|" +
                   rule_refine(t.utterance, t.slots, d) + "|" + rule_restart(t.utterance, t.slots, d) + "\n";
        }
        return all;
    };
    auto expected = run();
    std::vector<std::string> results(4);
    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < results.size(); ++i) threads.emplace_back([&, i] { results[i] = run(); });
    for (auto& t : threads) t.join();
    for (auto const& r : results) CHECK(r == expected);
}

TEST_CASE("generate through the rule backend")
{
    RuleBackend backend;
    SUBCASE("refine adds a constraint")
    {
        GenerationRequest req{"Something light-hearted.", RT::ClarifyRefine, Domain::Movie, {{SlotKind::Genre, "comedy"}}, 1, 3};
        auto out = generate(req, backend);
        REQUIRE(out.size() == 1);
        CHECK(out[0].target_type == RT::ClarifyRefine);
        CHECK(out[0].backend == BackendId::Rule);
        CHECK(tokenize(out[0].text).size() > tokenize(req.utterance).size());
        CHECK(includes(content_set(out[0].text), content_set(req.utterance)));
    }
    SUBCASE("repeat returns the input")
    {
        GenerationRequest req{"I am looking for amazon premium movie.", RT::Repeat, Domain::Movie, {}, 1, 0};
        CHECK(generate(req, backend).at(0).text == req.utterance);
    }
    SUBCASE("a fixed seed gives identical candidate lists")
    {
        GenerationRequest req{"Places for dinner", RT::RepeatRephrase, Domain::Travel, {}, 3, 17};
        auto a = generate(req, backend);
        auto b = generate(req, backend);
        CHECK(a == b);
        CHECK_FALSE(a.empty());
        std::set<std::string> texts;
        for (auto const& c : a) texts.insert(c.text);
        CHECK(texts.size() == a.size());
    }
    SUBCASE("every generable type produces a candidate")
    {
        for (auto t : kGenerableTypes) {
            GenerationRequest req{"I am into a movie like a tale of two cities", t, Domain::Movie, {}, 1, 1};
            CHECK_FALSE(generate(req, backend).empty());
        }
    }
}

TEST_CASE("request validation")
{
    RuleBackend backend;
    GenerationRequest ok{"hello there", RT::RepeatRephrase, Domain::Movie, {}, 1, 0};
    CHECK_NOTHROW(ok.validate());

    auto bad = ok;
    bad.utterance = "  ";
    CHECK_THROWS_AS(generate(bad, backend), DataError);
    bad = ok;
    bad.target_type = RT::Change;
    CHECK_THROWS_AS(generate(bad, backend), DataError);
    bad.target_type = RT::Stop;
    CHECK_THROWS_AS(bad.validate(), DataError);
    bad = ok;
    bad.num_candidates = 0;
    CHECK_THROWS_AS(generate(bad, backend), DataError);
}

TEST_CASE("a backend with no candidates is reported as such")
{
    struct Empty final : GenerationBackend {
        BackendId id() const override { return BackendId::Remote; }
        std::vector<GenerationCandidate> generate(GenerationRequest const&) const override { return {}; }
    } empty;
    GenerationRequest req{"hello there", RT::Repeat, Domain::Movie, {}, 1, 0};
    try {
        generate(req, empty);
        FAIL("expected RemoteError");
    } catch (RemoteError const& e) {
        CHECK(e.kind() == RemoteErrorKind::ZeroCandidates);
    }
}

TEST_CASE("builtin lexicon")
{
    auto const& lex = Lexicon::builtin();
    CHECK_FALSE(lex.version.empty());
    CHECK(lex.is_stopword("the"));
    CHECK_FALSE(lex.is_content("please"));
    CHECK(lex.is_content("restaurant"));
    CHECK(lex.leading_discourse(surface_tokens("Never mind. Can you book me a taxi?")) == 2);
    CHECK(lex.leading_discourse(surface_tokens("No, I'm looking for a restaurant.")) == 1);
    CHECK(lex.leading_discourse(surface_tokens("No idea")) == 0);
}
