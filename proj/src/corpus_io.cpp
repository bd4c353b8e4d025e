#include "reformkit/corpus_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "reformkit/error.hpp"

namespace reformkit {

using nlohmann::json;

namespace {

std::string const& require_string(json const& j, char const* field)
{
    auto it = j.find(field);
    if (it == j.end()) {
        throw SchemaError(0, field, "missing");
    }
    if (!it->is_string()) {
        throw SchemaError(0, field, "expected a string");
    }
    return it->get_ref<std::string const&>();
}

std::optional<std::string> optional_string(json const& j, char const* field)
{
    auto it = j.find(field);
    if (it == j.end() || it->is_null()) {
        return std::nullopt;
    }
    if (!it->is_string()) {
        throw SchemaError(0, field, "expected a string");
    }
    return it->get<std::string>();
}

template <typename T, typename Parse>
T parse_enum(std::string const& s, char const* field, Parse parse)
{
    auto v = parse(s);
    if (!v) {
        throw SchemaError(0, field, "unknown value '" + s + "'");
    }
    return *v;
}

Turn turn_from_json(json const& j, std::size_t index)
{
    if (!j.is_object()) {
        throw SchemaError(0, "turns", "turn " + std::to_string(index) + " is not an object");
    }
    Turn turn;
    turn.index = index;
    if (auto it = j.find("index"); it != j.end()) {
        if (!it->is_number_unsigned() || it->get<std::size_t>() != index) {
            throw SchemaError(0, "index", "turn indices must be contiguous from 0");
        }
    }
    turn.speaker = parse_enum<Speaker>(require_string(j, "speaker"), "speaker", parse_speaker);
    turn.utterance = require_string(j, "utterance");
    if (auto s = optional_string(j, "intent")) {
        auto intent = parse_intent(*s, turn.speaker);
        if (!intent) {
            throw SchemaError(0, "intent",
                              "unknown " + std::string(to_string(turn.speaker)) + " intent '" + *s + "'");
        }
        turn.intent = intent;
    }
    if (auto it = j.find("slots"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) {
            throw SchemaError(0, "slots", "expected an array");
        }
        for (auto const& s : *it) {
            turn.slots.push_back(slot_from_json(s));
        }
    }
    if (auto s = optional_string(j, "reformulation")) {
        turn.reformulation = parse_enum<ReformulationType>(*s, "reformulation", parse_reformulation_type);
    }
    validate(turn);
    return turn;
}

UserProfile profile_from_json(json const& j)
{
    if (!j.is_object()) {
        throw SchemaError(0, "user_profile", "expected an object");
    }
    UserProfile p;
    p.age_band = optional_string(j, "age_band");
    p.gender = optional_string(j, "gender");
    p.education = optional_string(j, "education");
    if (auto it = j.find("has_cra_experience"); it != j.end() && !it->is_null()) {
        if (!it->is_boolean()) {
            throw SchemaError(0, "has_cra_experience", "expected a boolean");
        }
        p.has_cra_experience = it->get<bool>();
    }
    return p;
}

}  // namespace

json to_json(SlotAnnotation const& slot)
{
    return json{{"slot_kind", to_string(slot.kind)}, {"value", slot.value}};
}

SlotAnnotation slot_from_json(json const& j)
{
    if (!j.is_object()) {
        throw SchemaError(0, "slots", "slot is not an object");
    }
    SlotAnnotation slot;
    slot.kind = parse_enum<SlotKind>(require_string(j, "slot_kind"), "slot_kind", parse_slot_kind);
    slot.value = require_string(j, "value");
    if (slot.value.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw SchemaError(0, "value", "slot value is empty");
    }
    return slot;
}

json to_json(Dialogue const& d)
{
    json turns = json::array();
    for (auto const& t : d.turns) {
        json jt{{"speaker", to_string(t.speaker)}, {"utterance", t.utterance}};
        if (t.intent) {
            jt["intent"] = to_string(*t.intent);
        }
        json slots = json::array();
        for (auto const& s : t.slots) {
            slots.push_back(to_json(s));
        }
        jt["slots"] = std::move(slots);
        if (t.reformulation) {
            jt["reformulation"] = to_string(*t.reformulation);
        }
        turns.push_back(std::move(jt));
    }
    json out{{"kind", "dialogue"},
             {"dialogue_id", d.dialogue_id},
             {"agent_id", d.agent_id},
             {"domain", to_string(d.domain)},
             {"turns", std::move(turns)}};
    if (d.user_profile) {
        json p = json::object();
        auto const& up = *d.user_profile;
        if (up.age_band) p["age_band"] = *up.age_band;
        if (up.gender) p["gender"] = *up.gender;
        if (up.education) p["education"] = *up.education;
        if (up.has_cra_experience) p["has_cra_experience"] = *up.has_cra_experience;
        out["user_profile"] = std::move(p);
    }
    return out;
}

Dialogue dialogue_from_json(json const& j)
{
    Dialogue d;
    d.dialogue_id = require_string(j, "dialogue_id");
    d.agent_id = require_string(j, "agent_id");
    d.domain = parse_enum<Domain>(require_string(j, "domain"), "domain", parse_domain);
    auto it = j.find("turns");
    if (it == j.end() || !it->is_array()) {
        throw SchemaError(0, "turns", "expected an array");
    }
    for (std::size_t i = 0; i < it->size(); ++i) {
        d.turns.push_back(turn_from_json((*it)[i], i));
    }
    if (auto p = j.find("user_profile"); p != j.end() && !p->is_null()) {
        d.user_profile = profile_from_json(*p);
    }
    validate(d);
    return d;
}

json to_json(Triad const& t)
{
    return json{{"kind", "triad"},
                {"original", t.original},
                {"type", to_string(t.type)},
                {"reformulated", t.reformulated},
                {"domain", to_string(t.domain)},
                {"source", to_string(t.source)}};
}

Triad triad_from_json(json const& j)
{
    Triad t;
    t.original = require_string(j, "original");
    t.type = parse_enum<ReformulationType>(require_string(j, "type"), "type", parse_reformulation_type);
    t.reformulated = require_string(j, "reformulated");
    t.domain = parse_enum<Domain>(require_string(j, "domain"), "domain", parse_domain);
    t.source = parse_enum<TriadSource>(require_string(j, "source"), "source", parse_triad_source);
    validate(t);
    return t;
}

Corpus parse_corpus(std::istream& in)
{
    Corpus corpus;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            json j;
            try {
                j = json::parse(line);
            } catch (json::parse_error const& e) {
                throw SchemaError(0, "", std::string("malformed JSON: ") + e.what());
            }
            if (!j.is_object()) {
                throw SchemaError(0, "", "record is not an object");
            }
            auto const& kind = require_string(j, "kind");
            if (kind == "dialogue") {
                auto d = dialogue_from_json(j);
                if (!ids.insert(d.dialogue_id).second) {
                    throw SchemaError(0, "dialogue_id", "duplicate dialogue id '" + d.dialogue_id + "'");
                }
                corpus.dialogues.push_back(std::move(d));
            } else if (kind == "triad") {
                corpus.triads.push_back(triad_from_json(j));
            } else {
                throw SchemaError(0, "kind", "unknown record kind '" + kind + "'");
            }
        } catch (SchemaError const& e) {
            if (e.line() != 0) {
                throw;
            }
            throw e.at_line(lineno);
        }
    }
    return corpus;
}

Corpus load_corpus(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open corpus file '" + path.string() + "'");
    }
    return parse_corpus(in);
}

void write_corpus(Corpus const& corpus, std::ostream& out)
{
    for (auto const& d : corpus.dialogues) {
        out << to_json(d).dump() << '\n';
    }
    for (auto const& t : corpus.triads) {
        out << to_json(t).dump() << '\n';
    }
}

void save_corpus(Corpus const& corpus, std::filesystem::path const& path)
{
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write corpus file '" + path.string() + "'");
    }
    write_corpus(corpus, out);
}

}  // namespace reformkit
