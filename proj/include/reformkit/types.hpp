#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reformkit {

// How a user utterance relates to the previous user utterance after the
// agent failed to understand or satisfy the request.
enum class ReformulationType {
    StartRestart,
    Repeat,
    RepeatRephrase,
    RepeatSimplify,
    ClarifyRefine,
    Change,
    Stop,
};

inline constexpr std::size_t kNumReformulationTypes = 7;

// Canonical index order used by matrices and distributions.
inline constexpr std::array<ReformulationType, kNumReformulationTypes> kAllTypes = {
    ReformulationType::StartRestart,  ReformulationType::Repeat,
    ReformulationType::RepeatRephrase, ReformulationType::RepeatSimplify,
    ReformulationType::ClarifyRefine, ReformulationType::Change,
    ReformulationType::Stop,
};

// Types a generator may be asked to produce. Change and Stop alter the
// user's intent and are never generated.
inline constexpr std::array<ReformulationType, 5> kGenerableTypes = {
    ReformulationType::RepeatRephrase, ReformulationType::RepeatSimplify,
    ReformulationType::ClarifyRefine,  ReformulationType::Repeat,
    ReformulationType::StartRestart,
};

constexpr std::size_t type_index(ReformulationType t) { return static_cast<std::size_t>(t); }
bool is_generable(ReformulationType t);

// "start_restart", "repeat", "rephrase", "simplify", "refine", "change", "stop".
std::string_view to_string(ReformulationType t);
std::optional<ReformulationType> parse_reformulation_type(std::string_view s);

enum class Speaker { User, Agent };

std::string_view to_string(Speaker s);
std::optional<Speaker> parse_speaker(std::string_view s);

// User intents follow the query-formulation / set-retrieval / mixed-initiative
// taxonomy; agent intents are the system acts observed before reformulations.
// Some names ("non-disclose", "repeat", "list", "similar") exist for both
// speakers, so parsing is speaker-qualified.
enum class Intent {
    // user
    Disclose,
    NonDisclose,
    Revise,
    Refine,
    Expand,
    InquireList,
    InquireCompare,
    InquireSubset,
    InquireSimilar,
    NavigateRepeat,
    NavigateBack,
    NavigateMore,
    NavigateNote,
    NavigateComplete,
    Interrupt,
    Interrogate,
    // agent
    AgentFailed,
    AgentSuggest,
    AgentElicit,
    AgentExtract,
    AgentList,
    AgentSimilar,
    AgentRepeat,
    AgentNonDisclose,
    AgentEndDisclose,
    AgentClarify,
};

inline constexpr std::array<Intent, 10> kAgentIntents = {
    Intent::AgentFailed,  Intent::AgentSuggest,     Intent::AgentElicit,
    Intent::AgentExtract, Intent::AgentList,        Intent::AgentSimilar,
    Intent::AgentRepeat,  Intent::AgentNonDisclose, Intent::AgentEndDisclose,
    Intent::AgentClarify,
};

Speaker intent_speaker(Intent i);
std::string_view to_string(Intent i);
std::optional<Intent> parse_intent(std::string_view s, Speaker speaker);

enum class SlotKind { Movie, Location, Restaurant, Hotel, Song, Musician, Genre };

std::string_view to_string(SlotKind k);
std::optional<SlotKind> parse_slot_kind(std::string_view s);

enum class Domain { Movie, Travel, Music, Hybrid };

std::string_view to_string(Domain d);
std::optional<Domain> parse_domain(std::string_view s);

struct SlotAnnotation {
    SlotKind kind = SlotKind::Movie;
    std::string value;

    friend bool operator==(SlotAnnotation const&, SlotAnnotation const&) = default;
};

struct Turn {
    std::size_t index = 0;
    Speaker speaker = Speaker::User;
    std::string utterance;
    std::optional<Intent> intent;
    std::vector<SlotAnnotation> slots;
    std::optional<ReformulationType> reformulation;

    friend bool operator==(Turn const&, Turn const&) = default;
};

struct UserProfile {
    std::optional<std::string> age_band;
    std::optional<std::string> gender;
    std::optional<std::string> education;
    std::optional<bool> has_cra_experience;

    friend bool operator==(UserProfile const&, UserProfile const&) = default;
};

struct Dialogue {
    std::string dialogue_id;
    std::string agent_id;
    Domain domain = Domain::Movie;
    std::vector<Turn> turns;
    std::optional<UserProfile> user_profile;

    friend bool operator==(Dialogue const&, Dialogue const&) = default;
};

enum class TriadSource { Logged, Crowdsourced };

std::string_view to_string(TriadSource s);
std::optional<TriadSource> parse_triad_source(std::string_view s);

// <original utterance, reformulation type, reformulated utterance>
struct Triad {
    std::string original;
    ReformulationType type = ReformulationType::Repeat;
    std::string reformulated;
    Domain domain = Domain::Movie;
    TriadSource source = TriadSource::Logged;

    bool generable() const { return is_generable(type); }

    friend bool operator==(Triad const&, Triad const&) = default;
};

struct Corpus {
    std::vector<Dialogue> dialogues;
    std::vector<Triad> triads;

    friend bool operator==(Corpus const&, Corpus const&) = default;
};

// Throws SchemaError (line 0) when a Turn/Dialogue/Triad invariant fails.
void validate(Turn const& turn);
void validate(Dialogue const& dialogue);
void validate(Triad const& triad);
void validate(Corpus const& corpus);

}  // namespace reformkit
