#include "reformkit/difficulty.hpp"

#include <cctype>
#include <map>

#include "reformkit/error.hpp"
#include "reformkit/text.hpp"

namespace reformkit {

using nlohmann::json;

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y'; }

std::size_t sentence_count(std::string_view u)
{
    std::size_t n = 0;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= u.size(); ++i) {
        if (i == u.size() || u[i] == '.' || u[i] == '!' || u[i] == '?') {
            if (!tokenize(u.substr(start, i - start)).empty()) ++n;
            start = i + 1;
        }
    }
    return n == 0 ? 1 : n;
}

std::size_t max_bigram_repeats(std::vector<std::string> const& tokens)
{
    // Non-overlapping occurrences: "a a a" holds the bigram "a a" once.
    std::map<std::pair<std::string, std::string>, std::pair<std::size_t, std::size_t>> seen;  // count, next free index
    std::size_t best = 0;
    for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        auto& [count, next_free] = seen[{tokens[i], tokens[i + 1]}];
        if (count == 0 || i >= next_free) {
            ++count;
            next_free = i + 2;
            best = std::max(best, count);
        }
    }
    return best;
}

}  // namespace

int count_syllables(std::string_view word)
{
    std::string w;
    for (char c : word) {
        if (std::isalpha(static_cast<unsigned char>(c))) w += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    int groups = 0;
    bool in_group = false;
    for (char c : w) {
        bool v = is_vowel(c);
        if (v && !in_group) ++groups;
        in_group = v;
    }
    // Silent e, but not "-le" after a consonant ("table").
    if (groups > 1 && w.size() > 2 && w.back() == 'e' && !is_vowel(w[w.size() - 2])) {
        bool consonant_le = w[w.size() - 2] == 'l' && !is_vowel(w[w.size() - 3]);
        if (!consonant_le) --groups;
    }
    return groups < 1 ? 1 : groups;
}

double readability_grade(std::string_view u)
{
    auto tokens = tokenize(u);
    if (tokens.empty()) {
        throw DataError("readability of an utterance without tokens");
    }
    double syllables = 0.0;
    for (auto const& t : tokens) syllables += count_syllables(t);
    double w = static_cast<double>(tokens.size());
    double s = static_cast<double>(sentence_count(u));
    return 0.39 * (w / s) + 11.8 * (syllables / w) - 15.59;
}

int compare_difficulty(std::string_view candidate, std::string_view original, double epsilon)
{
    double c = readability_grade(candidate);
    double o = readability_grade(original);
    if (c < o - epsilon) return 0;
    if (c > o + epsilon) return 2;
    return 1;
}

std::string_view to_string(FilterBackend b)
{
    switch (b) {
        case FilterBackend::Heuristic: return "heuristic";
        case FilterBackend::Remote: return "remote";
        case FilterBackend::Off: return "off";
    }
    return "?";
}

std::optional<FilterBackend> parse_filter_backend(std::string_view s)
{
    for (auto b : {FilterBackend::Heuristic, FilterBackend::Remote, FilterBackend::Off}) {
        if (to_string(b) == s) return b;
    }
    return std::nullopt;
}

json AcceptabilityVerdict::to_json() const
{
    json j{{"acceptable", acceptable},
           {"reasons", reasons},
           {"readability_grade", readability_grade},
           {"backend", to_string(backend)}};
    if (score) j["score"] = *score;
    return j;
}

AcceptabilityVerdict AcceptabilityVerdict::from_json(json const& j)
{
    AcceptabilityVerdict v;
    try {
        v.acceptable = j.at("acceptable").get<bool>();
        v.reasons = j.value("reasons", std::vector<std::string>{});
        v.readability_grade = j.value("readability_grade", 0.0);
        auto backend = parse_filter_backend(j.value("backend", std::string("heuristic")));
        if (!backend) throw SchemaError(0, "verdict.backend", "unknown filter backend");
        v.backend = *backend;
        if (j.contains("score") && !j["score"].is_null()) v.score = j["score"].get<double>();
    } catch (json::exception const& e) {
        throw SchemaError(0, "verdict", e.what());
    }
    if (v.acceptable && !v.reasons.empty()) {
        throw SchemaError(0, "verdict.reasons", "an acceptable verdict carries no reasons");
    }
    return v;
}

AcceptabilityVerdict heuristic_acceptable(std::string_view candidate, std::string_view original,
                                          ReformulationType target_type, bool relaxed)
{
    auto const& lex = Lexicon::builtin();
    auto tokens = tokenize(candidate);
    AcceptabilityVerdict v;
    v.backend = FilterBackend::Heuristic;

    if (tokens.empty() || tokens.size() > kMaxCandidateTokens) {
        v.reasons.emplace_back(rule::kLength);
    }
    if (!relaxed) {
        std::map<std::string, std::size_t> counts;
        std::size_t most = 0;
        for (auto const& t : tokens) most = std::max(most, ++counts[t]);
        if (most > kMaxTokenRepeats) v.reasons.emplace_back(rule::kTokenRepetition);
        if (max_bigram_repeats(tokens) > kMaxBigramRepeats) v.reasons.emplace_back(rule::kBigramRepetition);
    }
    if (lex.content(tokens).empty()) {
        v.reasons.emplace_back(rule::kNoContent);
    }
    if (!tokens.empty()) {
        v.readability_grade = readability_grade(candidate);
        if (target_type == ReformulationType::RepeatSimplify && !tokenize(original).empty() &&
            v.readability_grade > readability_grade(original)) {
            v.reasons.emplace_back(rule::kDifficultyIncrease);
        }
    }
    v.acceptable = v.reasons.empty();
    return v;
}

json acceptability_request_json(std::string_view candidate) { return json{{"utterance", candidate}}; }

AcceptabilityVerdict parse_acceptability_response(json const& body, std::string_view candidate)
{
    if (!body.is_object() || !body.contains("acceptable") || !body["acceptable"].is_boolean()) {
        throw RemoteError(RemoteErrorKind::Schema, "/acceptability response: missing boolean 'acceptable'");
    }
    if (!body.contains("score") || !body["score"].is_number()) {
        throw RemoteError(RemoteErrorKind::Schema, "/acceptability response: missing numeric 'score'");
    }
    AcceptabilityVerdict v;
    v.backend = FilterBackend::Remote;
    v.acceptable = body["acceptable"].get<bool>();
    v.score = body["score"].get<double>();
    if (!v.acceptable) v.reasons.emplace_back(rule::kRemoteUnacceptable);
    if (!tokenize(candidate).empty()) v.readability_grade = readability_grade(candidate);
    return v;
}

AcceptabilityVerdict remote_acceptable(std::string_view candidate, Endpoint const& endpoint)
{
    return parse_acceptability_response(post_expect_json(endpoint, "/acceptability", acceptability_request_json(candidate)),
                                        candidate);
}

AcceptabilityVerdict judge(std::string_view candidate, std::string_view original, ReformulationType target_type,
                           FilterConfig const& config)
{
    switch (config.mode) {
        case FilterBackend::Heuristic: return heuristic_acceptable(candidate, original, target_type, config.relaxed);
        case FilterBackend::Remote:
            if (!config.endpoint) throw DataError("remote filter selected without an endpoint");
            return remote_acceptable(candidate, *config.endpoint);
        case FilterBackend::Off: {
            AcceptabilityVerdict v;
            v.backend = FilterBackend::Off;
            if (!tokenize(candidate).empty()) v.readability_grade = readability_grade(candidate);
            return v;
        }
    }
    return {};
}

}  // namespace reformkit
