#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "reformkit/types.hpp"

namespace reformkit {

// Lowercases ASCII, splits on whitespace and strips leading/trailing ASCII
// punctuation from every token. Tokens that become empty are dropped.
// Shared by the generators, the difficulty filter and the metrics.
std::vector<std::string> tokenize(std::string_view text);

// tokenize() followed by splitting tokens on internal hyphens, so that
// "light-hearted" and "light hearted" compare equal.
std::vector<std::string> words(std::string_view text);

// Whitespace-separated pieces of `text`, case and punctuation untouched.
std::vector<std::string> surface_tokens(std::string_view text);

std::string to_lower(std::string_view s);
std::string strip_punct(std::string_view token);
std::string join(std::vector<std::string> const& parts, std::string_view sep = " ");

// Rewrite rules and word lists used by the rule-based generators. The
// builtin instance is compiled from the files under data/; outputs are only
// stable for a given `version`.
struct RephraseFrame {
    // Each alternative is a token sequence; "{N}" matches any single token.
    std::vector<std::vector<std::string>> sources;
    std::string target;
};

struct RefineLead {
    SlotKind kind;
    std::vector<std::string> prefixes;
    std::string sentence;
};

class Lexicon {
  public:
    static Lexicon const& builtin();
    static Lexicon from_directory(std::filesystem::path const& dir);

    std::string version;
    std::set<std::string> stopwords;
    std::set<std::string> politeness;
    std::vector<std::vector<std::string>> discourse;  // token sequences, longest first
    std::map<std::string, std::vector<std::string>> synonyms;
    std::vector<RephraseFrame> frames;
    std::map<SlotKind, std::string> refine_slot_clauses;
    std::map<std::string, std::vector<std::string>> refine_defaults;  // domain name or "any"
    std::vector<RefineLead> refine_leads;
    std::vector<std::pair<SlotKind, std::string>> restart_slot_sentences;  // file order = priority
    std::map<std::string, std::string> restart_defaults;

    bool is_stopword(std::string_view token) const;
    bool is_content(std::string_view token) const;

    // Filters tokens down to content tokens (not stopwords or politeness).
    std::vector<std::string> content(std::vector<std::string> const& tokens) const;

    // Number of leading surface tokens forming a discourse fragment closed by
    // punctuation ("No," / "Never mind."), or 0.
    std::size_t leading_discourse(std::vector<std::string> const& surface) const;

  private:
    static Lexicon parse(std::map<std::string, std::string> const& files);
};

}  // namespace reformkit
