#include "reformkit/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "lexicon_data.hpp"
#include "reformkit/error.hpp"

namespace reformkit {

namespace {

bool is_punct(unsigned char c) { return c < 128 && std::ispunct(c) != 0; }

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

// Non-comment, non-blank lines with trailing '\r' removed.
std::vector<std::string> data_lines(std::string const& text)
{
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        out.push_back(line);
    }
    return out;
}

std::vector<std::string> fields(std::string const& line, std::size_t expected, std::string const& file)
{
    auto f = split(line, '\t');
    if (f.size() != expected) {
        throw DataError("lexicon file '" + file + "': expected " + std::to_string(expected) +
                        " tab-separated fields in line '" + line + "'");
    }
    return f;
}

SlotKind slot_kind_or_throw(std::string const& s, std::string const& file)
{
    auto k = parse_slot_kind(s);
    if (!k) {
        throw DataError("lexicon file '" + file + "': unknown slot kind '" + s + "'");
    }
    return *k;
}

std::string const& file_text(std::map<std::string, std::string> const& files, std::string const& name)
{
    auto it = files.find(name);
    if (it == files.end()) {
        throw DataError("lexicon file '" + name + "' is missing");
    }
    return it->second;
}

constexpr std::array<char const*, 8> kFileNames = {
    "VERSION",       "stopwords.txt",       "politeness.txt",       "discourse.txt",
    "synonyms.tsv",  "rephrase_frames.tsv", "refine_templates.tsv", "restart_templates.tsv",
};

}  // namespace

std::string to_lower(std::string_view s)
{
    std::string out(s);
    for (auto& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::string strip_punct(std::string_view token)
{
    std::size_t b = 0;
    std::size_t e = token.size();
    while (b < e && is_punct(static_cast<unsigned char>(token[b]))) ++b;
    while (e > b && is_punct(static_cast<unsigned char>(token[e - 1]))) --e;
    return std::string(token.substr(b, e - b));
}

std::vector<std::string> surface_tokens(std::string_view text)
{
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) {
            out.emplace_back(text.substr(start, i - start));
        }
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> out;
    for (auto const& raw : surface_tokens(text)) {
        auto t = strip_punct(to_lower(raw));
        if (!t.empty()) {
            out.push_back(std::move(t));
        }
    }
    return out;
}

std::vector<std::string> words(std::string_view text)
{
    std::vector<std::string> out;
    for (auto const& tok : tokenize(text)) {
        for (auto& piece : split(tok, '-')) {
            auto w = strip_punct(piece);
            if (!w.empty()) {
                out.push_back(std::move(w));
            }
        }
    }
    return out;
}

std::string join(std::vector<std::string> const& parts, std::string_view sep)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) {
            out += sep;
        }
        out += parts[i];
    }
    return out;
}

bool Lexicon::is_stopword(std::string_view token) const
{
    return stopwords.count(std::string(token)) > 0;
}

bool Lexicon::is_content(std::string_view token) const
{
    std::string t(token);
    return !t.empty() && stopwords.count(t) == 0 && politeness.count(t) == 0;
}

std::vector<std::string> Lexicon::content(std::vector<std::string> const& tokens) const
{
    std::vector<std::string> out;
    std::copy_if(tokens.begin(), tokens.end(), std::back_inserter(out),
                 [this](std::string const& t) { return is_content(t); });
    return out;
}

std::size_t Lexicon::leading_discourse(std::vector<std::string> const& surface) const
{
    for (auto const& phrase : discourse) {
        if (phrase.size() >= surface.size()) {
            continue;
        }
        bool match = true;
        for (std::size_t i = 0; i < phrase.size() && match; ++i) {
            match = strip_punct(to_lower(surface[i])) == phrase[i];
        }
        if (!match) {
            continue;
        }
        auto const& last = surface[phrase.size() - 1];
        char c = last.back();
        if (c == ',' || c == '.' || c == '!' || c == '?' || c == ';' || c == ':') {
            return phrase.size();
        }
    }
    return 0;
}

Lexicon Lexicon::parse(std::map<std::string, std::string> const& files)
{
    Lexicon lex;
    auto version_lines = data_lines(file_text(files, "VERSION"));
    lex.version = version_lines.empty() ? "0" : version_lines.front();

    for (auto const& l : data_lines(file_text(files, "stopwords.txt"))) {
        lex.stopwords.insert(to_lower(l));
    }
    for (auto const& l : data_lines(file_text(files, "politeness.txt"))) {
        lex.politeness.insert(to_lower(l));
    }
    for (auto const& l : data_lines(file_text(files, "discourse.txt"))) {
        lex.discourse.push_back(tokenize(l));
    }
    std::stable_sort(lex.discourse.begin(), lex.discourse.end(),
                     [](auto const& a, auto const& b) { return a.size() > b.size(); });

    for (auto const& l : data_lines(file_text(files, "synonyms.tsv"))) {
        auto f = fields(l, 2, "synonyms.tsv");
        lex.synonyms[to_lower(f[0])] = split(f[1], '|');
    }
    for (auto const& l : data_lines(file_text(files, "rephrase_frames.tsv"))) {
        auto f = fields(l, 2, "rephrase_frames.tsv");
        RephraseFrame frame;
        for (auto const& alt : split(f[0], '|')) {
            frame.sources.push_back(surface_tokens(alt));
        }
        frame.target = f[1];
        lex.frames.push_back(std::move(frame));
    }
    for (auto const& l : data_lines(file_text(files, "refine_templates.tsv"))) {
        auto kind = split(l, '\t').front();
        if (kind == "slot") {
            auto f = fields(l, 3, "refine_templates.tsv");
            lex.refine_slot_clauses[slot_kind_or_throw(f[1], "refine_templates.tsv")] = f[2];
        } else if (kind == "default") {
            auto f = fields(l, 3, "refine_templates.tsv");
            lex.refine_defaults[f[1]].push_back(f[2]);
        } else if (kind == "lead") {
            auto f = fields(l, 4, "refine_templates.tsv");
            lex.refine_leads.push_back({slot_kind_or_throw(f[1], "refine_templates.tsv"), split(f[2], '|'), f[3]});
        } else {
            throw DataError("refine_templates.tsv: unknown row kind '" + kind + "'");
        }
    }
    for (auto const& l : data_lines(file_text(files, "restart_templates.tsv"))) {
        auto f = fields(l, 3, "restart_templates.tsv");
        if (f[0] == "slot") {
            lex.restart_slot_sentences.emplace_back(slot_kind_or_throw(f[1], "restart_templates.tsv"), f[2]);
        } else if (f[0] == "default") {
            lex.restart_defaults[f[1]] = f[2];
        } else {
            throw DataError("restart_templates.tsv: unknown row kind '" + f[0] + "'");
        }
    }
    return lex;
}

Lexicon const& Lexicon::builtin()
{
    static Lexicon const lex = parse(detail::embedded_lexicon_files());
    return lex;
}

Lexicon Lexicon::from_directory(std::filesystem::path const& dir)
{
    std::map<std::string, std::string> files;
    for (char const* name : kFileNames) {
        std::ifstream in(dir / name);
        if (!in) {
            throw DataError("cannot open lexicon file '" + (dir / name).string() + "'");
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        files[name] = ss.str();
    }
    return parse(files);
}

}  // namespace reformkit
