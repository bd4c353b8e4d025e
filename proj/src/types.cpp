#include "reformkit/types.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "reformkit/error.hpp"

namespace reformkit {

namespace {

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(std::array<std::pair<Enum, std::string_view>, N> const& table,
                           std::string_view s)
{
    for (auto const& [value, name] : table) {
        if (name == s) {
            return value;
        }
    }
    return std::nullopt;
}

template <typename Enum, std::size_t N>
std::string_view name_of(std::array<std::pair<Enum, std::string_view>, N> const& table, Enum e)
{
    for (auto const& [value, name] : table) {
        if (value == e) {
            return name;
        }
    }
    return "?";
}

constexpr std::array<std::pair<ReformulationType, std::string_view>, 7> kTypeNames = {{
    {ReformulationType::StartRestart, "start_restart"},
    {ReformulationType::Repeat, "repeat"},
    {ReformulationType::RepeatRephrase, "rephrase"},
    {ReformulationType::RepeatSimplify, "simplify"},
    {ReformulationType::ClarifyRefine, "refine"},
    {ReformulationType::Change, "change"},
    {ReformulationType::Stop, "stop"},
}};

constexpr std::array<std::pair<Intent, std::string_view>, 26> kIntentNames = {{
    {Intent::Disclose, "disclose"},
    {Intent::NonDisclose, "non-disclose"},
    {Intent::Revise, "revise"},
    {Intent::Refine, "refine"},
    {Intent::Expand, "expand"},
    {Intent::InquireList, "inquire-list"},
    {Intent::InquireCompare, "inquire-compare"},
    {Intent::InquireSubset, "inquire-subset"},
    {Intent::InquireSimilar, "inquire-similar"},
    {Intent::NavigateRepeat, "navigate-repeat"},
    {Intent::NavigateBack, "navigate-back"},
    {Intent::NavigateMore, "navigate-more"},
    {Intent::NavigateNote, "navigate-note"},
    {Intent::NavigateComplete, "navigate-complete"},
    {Intent::Interrupt, "interrupt"},
    {Intent::Interrogate, "interrogate"},
    {Intent::AgentFailed, "failed"},
    {Intent::AgentSuggest, "suggest"},
    {Intent::AgentElicit, "elicit"},
    {Intent::AgentExtract, "extract"},
    {Intent::AgentList, "list"},
    {Intent::AgentSimilar, "similar"},
    {Intent::AgentRepeat, "repeat"},
    {Intent::AgentNonDisclose, "non-disclose"},
    {Intent::AgentEndDisclose, "end-disclose"},
    {Intent::AgentClarify, "clarify"},
}};

constexpr std::array<std::pair<SlotKind, std::string_view>, 7> kSlotNames = {{
    {SlotKind::Movie, "movie"},
    {SlotKind::Location, "location"},
    {SlotKind::Restaurant, "restaurant"},
    {SlotKind::Hotel, "hotel"},
    {SlotKind::Song, "song"},
    {SlotKind::Musician, "musician"},
    {SlotKind::Genre, "genre"},
}};

constexpr std::array<std::pair<Domain, std::string_view>, 4> kDomainNames = {{
    {Domain::Movie, "movie"},
    {Domain::Travel, "travel"},
    {Domain::Music, "music"},
    {Domain::Hybrid, "hybrid"},
}};

constexpr std::array<std::pair<Speaker, std::string_view>, 2> kSpeakerNames = {{
    {Speaker::User, "user"},
    {Speaker::Agent, "agent"},
}};

constexpr std::array<std::pair<TriadSource, std::string_view>, 2> kSourceNames = {{
    {TriadSource::Logged, "logged"},
    {TriadSource::Crowdsourced, "crowdsourced"},
}};

bool is_blank(std::string const& s)
{
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

bool is_generable(ReformulationType t)
{
    return std::find(kGenerableTypes.begin(), kGenerableTypes.end(), t) != kGenerableTypes.end();
}

std::string_view to_string(ReformulationType t) { return name_of(kTypeNames, t); }
std::optional<ReformulationType> parse_reformulation_type(std::string_view s)
{
    return lookup(kTypeNames, s);
}

std::string_view to_string(Speaker s) { return name_of(kSpeakerNames, s); }
std::optional<Speaker> parse_speaker(std::string_view s) { return lookup(kSpeakerNames, s); }

Speaker intent_speaker(Intent i)
{
    return static_cast<int>(i) >= static_cast<int>(Intent::AgentFailed) ? Speaker::Agent
                                                                         : Speaker::User;
}

std::string_view to_string(Intent i) { return name_of(kIntentNames, i); }

std::optional<Intent> parse_intent(std::string_view s, Speaker speaker)
{
    for (auto const& [value, name] : kIntentNames) {
        if (name == s && intent_speaker(value) == speaker) {
            return value;
        }
    }
    return std::nullopt;
}

std::string_view to_string(SlotKind k) { return name_of(kSlotNames, k); }
std::optional<SlotKind> parse_slot_kind(std::string_view s) { return lookup(kSlotNames, s); }

std::string_view to_string(Domain d) { return name_of(kDomainNames, d); }
std::optional<Domain> parse_domain(std::string_view s) { return lookup(kDomainNames, s); }

std::string_view to_string(TriadSource s) { return name_of(kSourceNames, s); }
std::optional<TriadSource> parse_triad_source(std::string_view s)
{
    return lookup(kSourceNames, s);
}

void validate(Turn const& turn)
{
    if (is_blank(turn.utterance)) {
        throw SchemaError(0, "utterance", "turn " + std::to_string(turn.index) + " is empty");
    }
    if (turn.speaker == Speaker::Agent && turn.reformulation) {
        throw SchemaError(0, "reformulation",
                          "agent turn " + std::to_string(turn.index) + " carries a reformulation");
    }
    if (turn.intent && intent_speaker(*turn.intent) != turn.speaker) {
        throw SchemaError(0, "intent",
                          "intent '" + std::string(to_string(*turn.intent)) +
                              "' does not belong to speaker " + std::string(to_string(turn.speaker)));
    }
    for (auto const& slot : turn.slots) {
        if (is_blank(slot.value)) {
            throw SchemaError(0, "slots", "slot value is empty");
        }
    }
}

void validate(Dialogue const& dialogue)
{
    if (dialogue.dialogue_id.empty()) {
        throw SchemaError(0, "dialogue_id", "empty dialogue id");
    }
    bool has_user = false;
    for (std::size_t i = 0; i < dialogue.turns.size(); ++i) {
        auto const& turn = dialogue.turns[i];
        if (turn.index != i) {
            throw SchemaError(0, "turns", "turn indices are not contiguous from 0 in dialogue '" +
                                              dialogue.dialogue_id + "'");
        }
        validate(turn);
        has_user = has_user || turn.speaker == Speaker::User;
    }
    if (!has_user) {
        throw SchemaError(0, "turns", "dialogue '" + dialogue.dialogue_id + "' has no user turn");
    }
}

void validate(Triad const& triad)
{
    if (is_blank(triad.original)) {
        throw SchemaError(0, "original", "empty original utterance");
    }
    if (is_blank(triad.reformulated)) {
        throw SchemaError(0, "reformulated", "empty reformulated utterance");
    }
}

void validate(Corpus const& corpus)
{
    std::unordered_set<std::string> ids;
    for (auto const& d : corpus.dialogues) {
        validate(d);
        if (!ids.insert(d.dialogue_id).second) {
            throw SchemaError(0, "dialogue_id", "duplicate dialogue id '" + d.dialogue_id + "'");
        }
    }
    for (auto const& t : corpus.triads) {
        validate(t);
    }
}

}  // namespace reformkit
