#include "reformkit/orchestrator.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "reformkit/corpus_io.hpp"
#include "reformkit/error.hpp"
#include "reformkit/extraction.hpp"
#include "reformkit/random.hpp"

namespace reformkit {

using nlohmann::json;

namespace {

std::string type_list(std::vector<ReformulationType> const& types)
{
    std::string out = "[";
    for (std::size_t i = 0; i < types.size(); ++i) {
        if (i > 0) out += ", ";
        out += to_string(types[i]);
    }
    return out + "]";
}

ReformulationType parse_type_or_throw(std::string const& s, std::string const& field)
{
    auto t = parse_reformulation_type(s);
    if (!t) throw SchemaError(0, field, "unknown reformulation type '" + s + "'");
    return *t;
}

struct StepOutcome {
    std::optional<SequenceStep> step;  // nullopt = backend failure
};

StepOutcome run_step(std::string const& source, std::string const& previous, ReformulationType type,
                     SeedUtterance const& seed, OrchestratorConfig const& cfg, GenerationBackend const& backend,
                     std::size_t step_index)
{
    bool judged_any = false;
    for (std::size_t attempt = 0; attempt < cfg.max_attempts; ++attempt) {
        GenerationRequest req{source, type, seed.domain, seed.slots, 1,
                              derive_seed(cfg.seed, {1, step_index, attempt})};
        try {
            for (auto const& cand : generate(req, backend)) {
                auto verdict = judge(cand.text, source, type, cfg.filter);
                judged_any = true;
                if (verdict.acceptable) {
                    return {SequenceStep{type, cand.text, std::move(verdict), attempt + 1, false}};
                }
            }
        } catch (RemoteError const&) {
            // Counted as a failed attempt.
        }
    }
    if (!judged_any) {
        return {std::nullopt};
    }
    AcceptabilityVerdict verdict;
    verdict.backend = cfg.filter.mode;
    if (!tokenize(previous).empty()) verdict.readability_grade = readability_grade(previous);
    return {SequenceStep{type, previous, std::move(verdict), cfg.max_attempts, true}};
}

template <typename NextType>
ReformulationSequence run_loop(SeedUtterance const& seed, OrchestratorConfig const& cfg,
                               GenerationBackend const& backend, NextType&& next_type)
{
    cfg.validate();
    if (surface_tokens(seed.utterance).empty()) {
        throw DataError("seed utterance is empty");
    }
    ReformulationSequence seq;
    seq.seed = seed.utterance;
    seq.domain = seed.domain;
    seq.slots = seed.slots;
    seq.config = cfg;

    std::string previous = seed.utterance;
    for (std::size_t r = 0; r < cfg.length; ++r) {
        auto type = next_type(r);
        auto const& source = cfg.condition == Conditioning::Previous ? previous : seed.utterance;
        auto outcome = run_step(source, previous, type, seed, cfg, backend, r);
        if (!outcome.step) {
            seq.termination = kBackendFailure;
            break;
        }
        previous = outcome.step->utterance;
        seq.steps.push_back(std::move(*outcome.step));
    }
    return seq;
}

}  // namespace

std::string_view to_string(Propagation p) { return p == Propagation::Realized ? "realized" : "marginal"; }
std::string_view to_string(Conditioning c) { return c == Conditioning::Previous ? "previous" : "seed"; }

std::optional<Propagation> parse_propagation(std::string_view s)
{
    if (s == "realized") return Propagation::Realized;
    if (s == "marginal") return Propagation::Marginal;
    return std::nullopt;
}

std::optional<Conditioning> parse_conditioning(std::string_view s)
{
    if (s == "previous") return Conditioning::Previous;
    if (s == "seed") return Conditioning::Seed;
    return std::nullopt;
}

void OrchestratorConfig::validate() const
{
    if (length < 1) throw DataError("sequence length must be at least 1");
    if (max_attempts < 1) throw DataError("max_generation_attempts must be at least 1");
    if (max_type_retries < 0) throw DataError("max type retries must not be negative");
}

json OrchestratorConfig::to_json() const
{
    json forbidden_list = json::array();
    for (auto t : forbidden) forbidden_list.push_back(to_string(t));
    return json{{"length", length},
                {"max_attempts", max_attempts},
                {"forbidden", forbidden_list},
                {"filter", to_string(filter.mode)},
                {"filter_relaxed", filter.relaxed},
                {"backend", to_string(backend)},
                {"seed", seed},
                {"propagate", to_string(propagate)},
                {"condition", to_string(condition)}};
}

OrchestratorConfig OrchestratorConfig::from_json(json const& j)
{
    OrchestratorConfig c;
    try {
        c.length = j.value("length", c.length);
        c.max_attempts = j.value("max_attempts", c.max_attempts);
        if (j.contains("forbidden")) {
            c.forbidden.clear();
            for (auto const& t : j["forbidden"]) c.forbidden.insert(parse_type_or_throw(t.get<std::string>(), "config.forbidden"));
        }
        auto filter = parse_filter_backend(j.value("filter", std::string("heuristic")));
        if (!filter) throw SchemaError(0, "config.filter", "unknown filter mode");
        c.filter.mode = *filter;
        c.filter.relaxed = j.value("filter_relaxed", false);
        c.backend = j.value("backend", std::string("rule")) == "remote" ? BackendId::Remote : BackendId::Rule;
        c.seed = j.value("seed", std::uint64_t{0});
        auto prop = parse_propagation(j.value("propagate", std::string("realized")));
        auto cond = parse_conditioning(j.value("condition", std::string("previous")));
        if (!prop) throw SchemaError(0, "config.propagate", "unknown propagation mode");
        if (!cond) throw SchemaError(0, "config.condition", "unknown conditioning mode");
        c.propagate = *prop;
        c.condition = *cond;
    } catch (json::exception const& e) {
        throw SchemaError(0, "config", e.what());
    }
    return c;
}

std::vector<ReformulationType> ReformulationSequence::types() const
{
    std::vector<ReformulationType> out;
    for (auto const& s : steps) out.push_back(s.type);
    return out;
}

json ReformulationSequence::to_json() const
{
    json jsteps = json::array();
    for (auto const& s : steps) {
        jsteps.push_back({{"type", to_string(s.type)},
                          {"utterance", s.utterance},
                          {"fallback", s.fallback},
                          {"attempts", s.attempts_used},
                          {"verdict", s.verdict.to_json()}});
    }
    json jslots = json::array();
    for (auto const& s : slots) jslots.push_back(reformkit::to_json(s));
    json j{{"seed", seed},
           {"domain", to_string(domain)},
           {"slots", jslots},
           {"steps", jsteps},
           {"config", config.to_json()},
           {"run", run}};
    if (termination) j["termination"] = *termination;
    return j;
}

ReformulationSequence ReformulationSequence::from_json(json const& j)
{
    ReformulationSequence seq;
    try {
        seq.seed = j.at("seed").get<std::string>();
        if (j.contains("domain")) {
            auto d = parse_domain(j["domain"].get<std::string>());
            if (!d) throw SchemaError(0, "domain", "unknown domain");
            seq.domain = *d;
        }
        if (j.contains("slots")) {
            for (auto const& s : j["slots"]) seq.slots.push_back(slot_from_json(s));
        }
        for (auto const& s : j.at("steps")) {
            SequenceStep step{parse_type_or_throw(s.at("type").get<std::string>(), "steps.type"),
                              s.at("utterance").get<std::string>(), {}, s.value("attempts", std::size_t{1}),
                              s.value("fallback", false)};
            if (s.contains("verdict")) step.verdict = AcceptabilityVerdict::from_json(s["verdict"]);
            seq.steps.push_back(std::move(step));
        }
        if (j.contains("config")) seq.config = OrchestratorConfig::from_json(j["config"]);
        seq.run = j.value("run", std::size_t{0});
        if (j.contains("termination")) seq.termination = j["termination"].get<std::string>();
    } catch (json::exception const& e) {
        throw SchemaError(0, "sequence", e.what());
    }
    return seq;
}

ReformulationSequence generate_sequence(SeedUtterance const& seed, TransitionMatrix const& m,
                                        OrchestratorConfig const& cfg, GenerationBackend const& backend)
{
    auto forbidden = cfg.forbidden;
    for (auto t : kAllTypes) {
        if (!is_generable(t)) forbidden.insert(t);
    }
    Rng rng(derive_seed(cfg.seed, {0}));
    auto z = TypeDistribution::uniform_generable();
    return run_loop(seed, cfg, backend, [&](std::size_t r) {
        ReformulationType t;
        try {
            t = sample_type(z, rng, forbidden, cfg.max_type_retries);
        } catch (DegenerateDistribution const&) {
            auto uniform = TypeDistribution::uniform_generable();
            uniform.step = z.step;
            t = sample_type(uniform, rng, forbidden, cfg.max_type_retries);
        }
        z = update_distribution(m, cfg.propagate == Propagation::Realized ? TypeDistribution::one_hot(t, r + 1) : z);
        return t;
    });
}

ReformulationSequence generate_forced(SeedUtterance const& seed, std::vector<ReformulationType> const& types,
                                      OrchestratorConfig const& config, GenerationBackend const& backend)
{
    auto cfg = config;
    cfg.length = types.size();
    for (auto t : types) {
        if (!is_generable(t) || cfg.forbidden.count(t) > 0) {
            throw DataError("type '" + std::string(to_string(t)) + "' cannot be generated");
        }
    }
    return run_loop(seed, cfg, backend, [&](std::size_t r) { return types[r]; });
}

Dialogue splice_dialogue(Dialogue const& dialogue, ReformulationSequence const& simulated)
{
    auto humans = extract_human_sequences(dialogue);
    auto sim_types = simulated.types();

    auto find = [&](auto&& pred) -> HumanSequence const* {
        auto it = std::find_if(humans.begin(), humans.end(), pred);
        return it == humans.end() ? nullptr : &*it;
    };
    auto target = find([&](HumanSequence const& h) { return h.seed == simulated.seed && h.types() == sim_types; });
    if (target == nullptr) target = find([&](HumanSequence const& h) { return h.types() == sim_types; });
    if (target == nullptr) {
        // Name the seed's own sequence when there is one, else every candidate.
        std::string human;
        if (auto same_seed = find([&](HumanSequence const& h) { return h.seed == simulated.seed; })) {
            human = type_list(same_seed->types());
        } else {
            for (auto const& h : humans) human += (human.empty() ? "" : " ") + type_list(h.types());
        }
        if (human.empty()) human = "none";
        throw DataError("dialogue '" + dialogue.dialogue_id + "': type sequences differ; human " + human + ", simulated " +
                        type_list(sim_types));
    }

    Dialogue out = dialogue;
    for (std::size_t k = 0; k < target->steps.size(); ++k) {
        out.turns[target->steps[k].turn_index].utterance = simulated.steps[k].utterance;
    }
    return out;
}

std::vector<ReformulationSequence> parse_sequences(std::istream& in)
{
    std::vector<ReformulationSequence> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(ReformulationSequence::from_json(json::parse(line)));
        } catch (json::parse_error const& e) {
            throw SchemaError(lineno, "", std::string("malformed JSON: ") + e.what());
        } catch (SchemaError const& e) {
            throw e.at_line(lineno);
        }
    }
    return out;
}

std::vector<ReformulationSequence> load_sequences(std::string const& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open sequence file '" + path + "'");
    return parse_sequences(in);
}

void save_sequences(std::vector<ReformulationSequence> const& sequences, std::string const& path)
{
    std::ofstream out(path);
    if (!out) throw DataError("cannot write sequence file '" + path + "'");
    for (auto const& s : sequences) out << s.to_json().dump() << '\n';
}

}  // namespace reformkit
