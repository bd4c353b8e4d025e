#include "reformkit/generators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "reformkit/error.hpp"
#include "reformkit/random.hpp"

namespace reformkit {

using nlohmann::json;

namespace {

bool is_sentence_punct(char c) { return c == '.' || c == '!' || c == '?' || c == ',' || c == ';' || c == ':'; }

std::string norm(std::string_view surface) { return strip_punct(to_lower(surface)); }

bool same_word(std::string const& a, std::string const& b)
{
    return a == b || a + "s" == b || b + "s" == a;
}

// Splits trailing sentence punctuation off `text` (after trimming spaces).
std::pair<std::string, std::string> split_trailing_punct(std::string_view text)
{
    std::string body(text);
    while (!body.empty() && std::isspace(static_cast<unsigned char>(body.back()))) body.pop_back();
    std::size_t end = body.size();
    while (end > 0 && is_sentence_punct(body[end - 1])) --end;
    return {body.substr(0, end), body.substr(end)};
}

std::string capitalize(std::string s)
{
    if (!s.empty()) {
        s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    }
    return s;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to)
{
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
        s.replace(pos, from.size(), to);
    }
    return s;
}

bool is_vowel(char c) { return std::string_view("aeiou").find(static_cast<char>(std::tolower(c))) != std::string_view::npos; }

std::string pluralize(std::string const& w)
{
    if (w.empty()) return w;
    auto ends = [&](std::string_view s) { return w.size() >= s.size() && w.compare(w.size() - s.size(), s.size(), s) == 0; };
    if (w.size() > 1 && w.back() == 'y' && !is_vowel(w[w.size() - 2])) {
        return w.substr(0, w.size() - 1) + "ies";
    }
    if (ends("s") || ends("x") || ends("z") || ends("ch") || ends("sh")) {
        return w + "es";
    }
    return w + "s";
}

// "restaurants in Dubai" -> "a restaurant in Dubai"; anything that does not
// start with a bare plural is returned unchanged.
std::string indefinite_singular(std::vector<std::string> x)
{
    static std::set<std::string> const not_plural = {"this", "is", "was", "has", "its", "his", "hers", "ours", "yours",
                                                     "theirs", "does", "us", "as", "always", "sometimes", "news"};
    auto head = norm(x.front());
    bool alpha = std::all_of(head.begin(), head.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); });
    if (!alpha || head.size() <= 3 || head.back() != 's' || head.ends_with("ss") || not_plural.count(head) > 0) {
        return join(x);
    }
    std::string singular;
    if (head.ends_with("ies")) {
        singular = head.substr(0, head.size() - 3) + "y";
    } else if (head.ends_with("ches") || head.ends_with("shes") || head.ends_with("xes") || head.ends_with("sses")) {
        singular = head.substr(0, head.size() - 2);
    } else {
        singular = head.substr(0, head.size() - 1);
    }
    x.front() = std::string(is_vowel(singular.front()) ? "an " : "a ") + singular;
    return join(x);
}

struct Band {
    std::size_t n;
    bool admits(std::string const& candidate, std::string_view original) const
    {
        if (candidate == original) return false;
        auto m = tokenize(candidate).size();
        if (m == 0) return false;
        double diff = std::abs(static_cast<double>(m) - static_cast<double>(n));
        return diff <= 0.3 * static_cast<double>(n) + 1.0;
    }
};

std::optional<std::string> try_frames(std::vector<std::string> const& body, Lexicon const& lex, Band const& band,
                                      std::string_view u)
{
    std::vector<std::string> normed;
    for (auto const& t : body) normed.push_back(norm(t));

    for (auto const& frame : lex.frames) {
        for (auto const& alt : frame.sources) {
            if (alt.size() >= body.size()) continue;
            std::string n_capture;
            bool match = true;
            for (std::size_t i = 0; i < alt.size() && match; ++i) {
                if (alt[i] == "{N}") {
                    n_capture = normed[i];
                    match = !n_capture.empty();
                } else {
                    match = normed[i] == alt[i];
                }
            }
            if (!match) continue;

            std::vector<std::string> x(body.begin() + static_cast<std::ptrdiff_t>(alt.size()), body.end());
            auto [last, punct] = split_trailing_punct(x.back());
            x.back() = last;
            if (x.back().empty()) x.pop_back();
            if (x.empty()) continue;

            auto out = frame.target;
            out = replace_all(out, "{X:a}", indefinite_singular(x));
            out = replace_all(out, "{X}", join(x));
            out = replace_all(out, "{N:pl}", pluralize(n_capture));
            out = replace_all(out, "{N}", n_capture);
            out = capitalize(out);
            if (band.admits(out, u)) return out;
        }
    }
    return std::nullopt;
}

std::optional<std::string> try_synonym(std::vector<std::string> const& surface, Lexicon const& lex, Band const& band,
                                       std::string_view u, std::uint64_t seed)
{
    std::vector<std::size_t> positions;
    for (std::size_t i = 0; i < surface.size(); ++i) {
        if (lex.synonyms.count(norm(surface[i])) > 0) positions.push_back(i);
    }
    if (positions.empty()) return std::nullopt;

    Rng rng(seed);
    auto first = rng.below(positions.size());
    auto pick = rng.next();
    for (std::size_t k = 0; k < positions.size(); ++k) {
        auto pos = positions[(first + k) % positions.size()];
        auto const& token = surface[pos];
        auto const& alts = lex.synonyms.at(norm(token));
        auto alt = alts[pick % alts.size()];

        auto b = token.find_first_not_of("\"'([{");
        auto e = token.find_last_not_of(".,!?;:\"')]}");
        if (b == std::string::npos || e == std::string::npos || e < b) continue;
        if (std::isupper(static_cast<unsigned char>(token[b]))) alt = capitalize(alt);

        auto out_tokens = surface;
        out_tokens[pos] = token.substr(0, b) + alt + token.substr(e + 1);
        auto out = join(out_tokens);
        if (band.admits(out, u)) return out;
    }
    return std::nullopt;
}

std::string toggle_please(std::string_view u)
{
    auto surface = surface_tokens(u);
    for (std::size_t i = surface.size(); i-- > 0;) {
        if (norm(surface[i]) != "please" || surface.size() == 1) continue;
        auto [_, punct] = split_trailing_punct(surface[i]);
        surface.erase(surface.begin() + static_cast<std::ptrdiff_t>(i));
        if (i > 0) {
            auto& prev = surface[i - 1];
            while (!prev.empty() && prev.back() == ',') prev.pop_back();
            if (i == surface.size()) prev += punct;
        } else {
            surface[0] = capitalize(surface[0]);
        }
        return join(surface);
    }
    auto [body, punct] = split_trailing_punct(u);
    return body + ", please" + punct;
}

bool covers(std::vector<std::string> const& haystack, std::vector<std::string> const& needles)
{
    return std::all_of(needles.begin(), needles.end(), [&](std::string const& n) {
        return std::any_of(haystack.begin(), haystack.end(), [&](std::string const& h) { return same_word(h, n); });
    });
}

// Adds at least one content token absent from `u`.
bool adds_content(std::string const& out, std::string_view u, Lexicon const& lex)
{
    auto before = lex.content(tokenize(u));
    for (auto const& t : lex.content(tokenize(out))) {
        if (std::find(before.begin(), before.end(), t) == before.end()) return true;
    }
    return false;
}

std::string domain_key(Domain d) { return std::string(to_string(d)); }

}  // namespace

std::string_view to_string(BackendId b) { return b == BackendId::Rule ? "rule" : "remote"; }

void GenerationRequest::validate() const
{
    if (surface_tokens(utterance).empty()) {
        throw DataError("generation request has an empty utterance");
    }
    if (!is_generable(target_type)) {
        throw DataError("type '" + std::string(to_string(target_type)) + "' cannot be generated");
    }
    if (num_candidates < 1) {
        throw DataError("num_candidates must be at least 1");
    }
}

std::string rule_repeat(std::string_view u) { return std::string(u); }

std::string rule_simplify(std::string_view u, std::span<SlotAnnotation const> slots, Lexicon const& lex)
{
    auto n = tokenize(u).size();
    if (n <= 1) {
        return std::string(u);
    }
    struct Item {
        std::string surface;
        std::string norm;
    };
    auto surface = surface_tokens(u);
    auto start = lex.leading_discourse(surface);
    std::vector<Item> items;
    for (std::size_t i = start; i < surface.size(); ++i) {
        auto nm = norm(surface[i]);
        if (!nm.empty()) items.push_back({strip_punct(surface[i]), nm});
    }

    if (!slots.empty()) {
        std::vector<bool> keep(items.size(), false);
        for (auto const& slot : slots) {
            auto value = tokenize(slot.value);
            if (value.empty() || value.size() > items.size()) continue;
            for (std::size_t i = 0; i + value.size() <= items.size(); ++i) {
                bool match = true;
                for (std::size_t k = 0; k < value.size() && match; ++k) {
                    match = same_word(items[i + k].norm, value[k]);
                }
                if (match) {
                    std::fill(keep.begin() + static_cast<std::ptrdiff_t>(i),
                              keep.begin() + static_cast<std::ptrdiff_t>(i + value.size()), true);
                }
            }
        }
        std::vector<std::string> kept;
        for (std::size_t i = 0; i < items.size(); ++i) {
            if (keep[i]) kept.push_back(items[i].surface);
        }
        if (!kept.empty() && kept.size() < n) {
            return join(kept);
        }
    }

    std::vector<std::string> content;
    for (auto const& it : items) {
        if (lex.is_content(it.norm)) content.push_back(it.norm);
    }
    if (content.empty()) {
        return tokenize(u).back();
    }
    if (content.size() >= n) {
        content.erase(content.begin());
    }
    return join(content);
}

std::string rule_rephrase(std::string_view u, std::uint64_t seed, Lexicon const& lex)
{
    static std::set<std::string> const fillers = {"now", "so", "well", "and", "but", "then", "also", "actually", "just"};

    Band band{tokenize(u).size()};
    auto surface = surface_tokens(u);
    std::vector<std::string> body(surface.begin() + static_cast<std::ptrdiff_t>(lex.leading_discourse(surface)),
                                  surface.end());
    if (body.size() > 1 && fillers.count(norm(body.front())) > 0) {
        body.erase(body.begin());
    }
    if (!body.empty()) {
        if (auto out = try_frames(body, lex, band, u)) return *out;
    }
    if (auto out = try_synonym(surface, lex, band, u, seed)) return *out;

    auto wrapped = "Can you help me with: " + std::string(u);
    if (band.admits(wrapped, u)) return wrapped;
    return toggle_please(u);
}

std::string rule_refine(std::string_view u, std::span<SlotAnnotation const> slots, Domain domain, Lexicon const& lex)
{
    auto [core, punct] = split_trailing_punct(u);
    auto u_tokens = tokenize(u);
    auto surface = surface_tokens(u);

    for (auto const& slot : slots) {
        if (covers(u_tokens, tokenize(slot.value))) continue;

        for (auto const& lead : lex.refine_leads) {
            if (lead.kind != slot.kind || surface.size() < 2) continue;
            if (std::find(lead.prefixes.begin(), lead.prefixes.end(), norm(surface.front())) == lead.prefixes.end()) {
                continue;
            }
            std::vector<std::string> rest(surface.begin() + 1, surface.end());
            auto [x, _] = split_trailing_punct(join(rest));
            auto out = replace_all(replace_all(lead.sentence, "{V}", slot.value), "{X}", x);
            if (adds_content(out, u, lex) && covers(lex.content(tokenize(out)), lex.content(u_tokens))) {
                return out;
            }
        }
        auto clause = lex.refine_slot_clauses.find(slot.kind);
        if (clause != lex.refine_slot_clauses.end()) {
            return core + " " + replace_all(clause->second, "{V}", slot.value) + punct;
        }
    }

    std::vector<std::string> clauses;
    for (auto const& key : {domain_key(domain), std::string("any")}) {
        auto it = lex.refine_defaults.find(key);
        if (it != lex.refine_defaults.end()) clauses.insert(clauses.end(), it->second.begin(), it->second.end());
    }
    for (auto const& clause : clauses) {
        auto out = core + " " + clause + punct;
        if (adds_content(out, u, lex)) return out;
    }
    return core + " " + (clauses.empty() ? std::string("with good reviews") : clauses.front()) + punct;
}

std::string rule_restart(std::string_view, std::span<SlotAnnotation const> slots, Domain domain, Lexicon const& lex)
{
    for (auto const& [kind, sentence] : lex.restart_slot_sentences) {
        for (auto const& slot : slots) {
            if (slot.kind == kind) {
                return replace_all(sentence, "{V}", slot.value);
            }
        }
    }
    auto it = lex.restart_defaults.find(domain_key(domain));
    if (it != lex.restart_defaults.end()) {
        return it->second;
    }
    return "I am looking for a recommendation";
}

std::vector<GenerationCandidate> RuleBackend::generate(GenerationRequest const& request) const
{
    std::vector<GenerationCandidate> out;
    auto const& lex = *lexicon_;
    for (int i = 0; i < request.num_candidates; ++i) {
        std::string text;
        switch (request.target_type) {
            case ReformulationType::Repeat: text = rule_repeat(request.utterance); break;
            case ReformulationType::RepeatSimplify: text = rule_simplify(request.utterance, request.slots, lex); break;
            case ReformulationType::RepeatRephrase: {
                auto seed = i == 0 ? request.seed : derive_seed(request.seed, {static_cast<std::uint64_t>(i)});
                text = rule_rephrase(request.utterance, seed, lex);
                break;
            }
            case ReformulationType::ClarifyRefine:
                text = rule_refine(request.utterance, request.slots, request.domain, lex);
                break;
            case ReformulationType::StartRestart:
                text = rule_restart(request.utterance, request.slots, request.domain, lex);
                break;
            default: throw DataError("type cannot be generated");
        }
        bool seen = std::any_of(out.begin(), out.end(), [&](auto const& c) { return c.text == text; });
        if (!seen && !text.empty()) {
            out.push_back({text, request.target_type, BackendId::Rule, std::nullopt});
        }
    }
    return out;
}

std::vector<GenerationCandidate> RemoteBackend::generate(GenerationRequest const& request) const
{
    return remote_generate(request, endpoint_);
}

std::vector<GenerationCandidate> generate(GenerationRequest const& request, GenerationBackend const& backend)
{
    request.validate();
    auto out = backend.generate(request);
    if (out.empty()) {
        throw RemoteError(RemoteErrorKind::ZeroCandidates, "backend returned zero candidates");
    }
    return out;
}

json generation_request_json(GenerationRequest const& request)
{
    return json{{"utterance", request.utterance},
                {"type", to_string(request.target_type)},
                {"domain", to_string(request.domain)},
                {"num_candidates", request.num_candidates}};
}

std::vector<GenerationCandidate> parse_generation_response(json const& body, ReformulationType type)
{
    auto schema = [](std::string const& what) { return RemoteError(RemoteErrorKind::Schema, "/generate response: " + what); };
    if (!body.is_object() || !body.contains("candidates") || !body["candidates"].is_array()) {
        throw schema("missing 'candidates' array");
    }
    std::vector<GenerationCandidate> out;
    for (auto const& c : body["candidates"]) {
        if (!c.is_object() || !c.contains("text") || !c["text"].is_string()) {
            throw schema("candidate without a string 'text'");
        }
        GenerationCandidate cand{c["text"].get<std::string>(), type, BackendId::Remote, std::nullopt};
        if (cand.text.empty()) {
            throw schema("candidate with empty 'text'");
        }
        if (c.contains("score") && !c["score"].is_null()) {
            if (!c["score"].is_number()) throw schema("candidate 'score' is not a number");
            cand.score = c["score"].get<double>();
        }
        out.push_back(std::move(cand));
    }
    if (out.empty()) {
        throw RemoteError(RemoteErrorKind::ZeroCandidates, "backend returned zero candidates");
    }
    return out;
}

std::vector<GenerationCandidate> remote_generate(GenerationRequest const& request, Endpoint const& endpoint)
{
    request.validate();
    return parse_generation_response(post_expect_json(endpoint, "/generate", generation_request_json(request)),
                                     request.target_type);
}

}  // namespace reformkit
