#include "reformkit/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "parallel.hpp"
#include "reformkit/analysis.hpp"
#include "reformkit/conformance.hpp"
#include "reformkit/corpus_io.hpp"
#include "reformkit/dynamics.hpp"
#include "reformkit/error.hpp"
#include "reformkit/extraction.hpp"
#include "reformkit/generators.hpp"
#include "reformkit/metrics.hpp"
#include "reformkit/orchestrator.hpp"
#include "reformkit/random.hpp"

namespace reformkit {

using nlohmann::json;

namespace {

struct Options {
    std::string corpus;
    std::string matrix;
    std::string sequences;
    std::string seed_file;
    std::string out = "-";
    std::string domain;
    std::string backend = "rule";
    std::string backend_url;
    std::string filter = "heuristic";
    bool filter_relaxed = false;
    std::size_t length = 3;
    std::size_t max_attempts = 5;
    std::size_t runs = 1;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    int timeout_ms = static_cast<int>(kDefaultRemoteTimeout.count());
    std::string propagate = "realized";
    std::string condition = "previous";
    std::vector<std::string> forbid = {"change", "stop"};
    std::string report = "all";
    std::size_t bin_width = 5;
    double alpha = kLeveneAlpha;
    std::string human_sequences;
    bool bleu_x100 = false;
    bool judge = false;
    std::string format = "json";
};

// Writes to --out, or to the caller's stream for "-".
class Sink {
  public:
    Sink(std::string const& path, std::ostream& fallback)
    {
        if (path.empty() || path == "-") {
            stream_ = &fallback;
            return;
        }
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw DataError("cannot write output file '" + path + "'");
        stream_ = file_.get();
    }

    std::ostream& operator*() { return *stream_; }
    void line(json const& j) { *stream_ << j.dump() << '\n'; }

  private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_ = nullptr;
};

void diagnose(std::ostream& err, std::string_view kind, std::string const& message)
{
    err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

// "hybrid" selects movie and travel material along with anything already
// labeled hybrid.
bool domain_selected(Domain d, std::string const& filter)
{
    if (filter.empty()) return true;
    if (filter == "hybrid") return d == Domain::Movie || d == Domain::Travel || d == Domain::Hybrid;
    return to_string(d) == filter;
}

Corpus load_filtered(Options const& o)
{
    if (o.corpus.empty()) throw DataError("--corpus is required");
    auto corpus = load_corpus(o.corpus);
    if (o.domain.empty()) return corpus;
    Corpus out;
    for (auto& d : corpus.dialogues) {
        if (domain_selected(d.domain, o.domain)) out.dialogues.push_back(std::move(d));
    }
    for (auto& t : corpus.triads) {
        if (domain_selected(t.domain, o.domain)) out.triads.push_back(std::move(t));
    }
    return out;
}

Domain domain_or_default(std::string const& s)
{
    if (s.empty()) return Domain::Movie;
    auto d = parse_domain(s);
    if (!d) throw DataError("unknown domain '" + s + "'");
    return *d;
}

json human_sequence_json(HumanSequence const& h)
{
    json slots = json::array();
    for (auto const& s : h.seed_slots) slots.push_back(to_json(s));
    json types = json::array();
    json steps = json::array();
    for (auto const& s : h.steps) {
        types.push_back(to_string(s.type));
        steps.push_back({{"type", to_string(s.type)}, {"utterance", s.utterance}, {"turn_index", s.turn_index}});
    }
    return json{{"kind", "human_sequence"}, {"dialogue_id", h.dialogue_id}, {"utterance", h.seed},
                {"domain", to_string(h.domain)}, {"slots", slots}, {"types", types}, {"steps", steps}};
}

struct SeedRecord {
    SeedUtterance seed;
    std::optional<std::vector<ReformulationType>> types;
};

// Plain lines are utterances in the --domain domain. Lines starting with '{'
// are JSON objects with "utterance" and optional "domain", "slots" and
// "types" (a forced type sequence, as written by `triads --human-sequences`).
std::vector<SeedRecord> read_seeds(std::string const& path, Domain default_domain)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open seed file '" + path + "'");
    std::vector<SeedRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        SeedRecord rec;
        rec.seed.domain = default_domain;
        if (line[first] != '{') {
            rec.seed.utterance = line.substr(first);
            out.push_back(std::move(rec));
            continue;
        }
        try {
            auto j = json::parse(line);
            rec.seed.utterance = j.at("utterance").get<std::string>();
            if (j.contains("domain")) rec.seed.domain = domain_or_default(j["domain"].get<std::string>());
            if (j.contains("slots")) {
                for (auto const& s : j["slots"]) rec.seed.slots.push_back(slot_from_json(s));
            }
            if (j.contains("types")) {
                std::vector<ReformulationType> types;
                for (auto const& t : j["types"]) {
                    auto parsed = parse_reformulation_type(t.get<std::string>());
                    if (!parsed) throw SchemaError(0, "types", "unknown reformulation type");
                    types.push_back(*parsed);
                }
                rec.types = std::move(types);
            }
        } catch (json::exception const& e) {
            throw SchemaError(lineno, "", e.what());
        } catch (SchemaError const& e) {
            throw e.at_line(lineno);
        }
        if (surface_tokens(rec.seed.utterance).empty()) throw SchemaError(lineno, "utterance", "empty seed utterance");
        out.push_back(std::move(rec));
    }
    return out;
}

Endpoint endpoint_from(Options const& o)
{
    if (o.backend_url.empty()) throw DataError("--backend-url is required for the remote backend or filter");
    return Endpoint::from_url(o.backend_url, std::chrono::milliseconds(o.timeout_ms));
}

int cmd_estimate(Options const& o, std::ostream& out)
{
    auto corpus = load_filtered(o);
    auto m = TransitionMatrix::estimate(segment_pieces(corpus));
    Sink sink(o.out, out);
    *sink << m.to_json().dump(2) << '\n';
    return kExitOk;
}

int cmd_analyze(Options const& o, std::ostream& out)
{
    auto corpus = load_filtered(o);
    Sink sink(o.out, out);
    auto want = [&](char const* name) { return o.report == "all" || o.report == name; };
    if (want("intents")) sink.line(preceding_intent_ratios(corpus).to_json());
    if (want("patterns")) sink.line(to_json(pattern_frequencies(segment_pieces(corpus))));
    if (want("turns")) sink.line(turn_bin_distribution(corpus, o.bin_width).to_json());
    if (want("experience")) sink.line(compare_experience_groups(corpus, o.alpha).to_json());
    return kExitOk;
}

int cmd_triads(Options const& o, std::ostream& out, std::ostream& err)
{
    auto corpus = load_filtered(o);
    auto extraction = extract_triads(corpus);
    Sink sink(o.out, out);
    for (auto const& t : corpus.triads) sink.line(to_json(t));
    for (auto const& t : extraction.triads) sink.line(to_json(t));
    if (!o.human_sequences.empty()) {
        Sink hs(o.human_sequences, out);
        for (auto const& h : extract_human_sequences(corpus)) hs.line(human_sequence_json(h));
    }
    if (extraction.skipped_no_antecedent > 0) {
        err << json{{"warning", "skipped"},
                    {"message", "labeled turns without an earlier user turn"},
                    {"count", extraction.skipped_no_antecedent}}
                   .dump()
            << '\n';
    }
    return kExitOk;
}

OrchestratorConfig config_from(Options const& o)
{
    OrchestratorConfig cfg;
    cfg.length = o.length;
    cfg.max_attempts = o.max_attempts;
    cfg.forbidden.clear();
    for (auto const& f : o.forbid) {
        auto t = parse_reformulation_type(f);
        if (!t) throw DataError("unknown reformulation type '" + f + "' in --forbid");
        cfg.forbidden.insert(*t);
    }
    cfg.filter.mode = *parse_filter_backend(o.filter);
    cfg.filter.relaxed = o.filter_relaxed;
    if (cfg.filter.mode == FilterBackend::Remote) cfg.filter.endpoint = endpoint_from(o);
    cfg.backend = o.backend == "remote" ? BackendId::Remote : BackendId::Rule;
    cfg.propagate = *parse_propagation(o.propagate);
    cfg.condition = *parse_conditioning(o.condition);
    cfg.validate();
    return cfg;
}

int cmd_generate(Options const& o, std::ostream& out, std::ostream& err)
{
    if (o.seed_file.empty()) throw DataError("--seed-file is required");
    if (o.runs < 1) throw DataError("--runs must be at least 1");
    auto seeds = read_seeds(o.seed_file, domain_or_default(o.domain));
    auto base = config_from(o);

    // Human sequences may hold change or stop, which are never generated.
    auto generable = [&](SeedRecord const& rec) {
        return !rec.types || std::all_of(rec.types->begin(), rec.types->end(), [&](ReformulationType t) {
                   return is_generable(t) && base.forbidden.count(t) == 0;
               });
    };
    auto kept = std::stable_partition(seeds.begin(), seeds.end(), generable);
    if (auto skipped = static_cast<std::size_t>(seeds.end() - kept); skipped > 0) {
        seeds.erase(kept, seeds.end());
        err << json{{"warning", "skipped"}, {"message", "seeds whose forced types cannot be generated"}, {"count", skipped}}
                   .dump()
            << '\n';
        if (seeds.empty()) throw DataError("no seed in '" + o.seed_file + "' can be generated");
    }

    bool all_forced = std::all_of(seeds.begin(), seeds.end(), [](auto const& s) { return s.types.has_value(); });
    std::optional<TransitionMatrix> matrix;
    if (!o.matrix.empty()) {
        matrix = load_matrix(o.matrix);
    } else if (!all_forced) {
        throw DataError("--matrix is required unless every seed carries its types");
    }

    std::unique_ptr<GenerationBackend> backend;
    if (base.backend == BackendId::Remote) {
        backend = std::make_unique<RemoteBackend>(endpoint_from(o));
    } else {
        backend = std::make_unique<RuleBackend>();
    }

    std::vector<ReformulationSequence> results(seeds.size() * o.runs);
    detail::parallel_for(results.size(), o.jobs, [&](std::size_t k) {
        auto run = k / seeds.size();
        auto i = k % seeds.size();
        auto cfg = base;
        cfg.seed = derive_seed(o.seed, {i, run});
        auto const& rec = seeds[i];
        results[k] = rec.types ? generate_forced(rec.seed, *rec.types, cfg, *backend)
                               : generate_sequence(rec.seed, *matrix, cfg, *backend);
        results[k].run = run;
    });

    Sink sink(o.out, out);
    for (auto const& s : results) sink.line(s.to_json());
    return kExitOk;
}

int cmd_splice(Options const& o, std::ostream& out)
{
    auto corpus = load_filtered(o);
    if (o.sequences.empty()) throw DataError("--sequences is required");
    auto sequences = load_sequences(o.sequences);

    Sink sink(o.out, out);
    for (auto const& seq : sequences) {
        Dialogue const* host = nullptr;
        for (auto const& d : corpus.dialogues) {
            for (auto const& h : extract_human_sequences(d)) {
                if (h.seed == seq.seed && h.types() == seq.types()) {
                    host = &d;
                    break;
                }
            }
            if (host != nullptr) break;
        }
        if (host == nullptr) {
            throw DataError("no dialogue holds a human sequence for seed '" + seq.seed + "' with the same types");
        }
        sink.line({{"kind", "splice"},
                   {"dialogue_id", host->dialogue_id},
                   {"seed", seq.seed},
                   {"run", seq.run},
                   {"original", to_json(*host)},
                   {"simulated", to_json(splice_dialogue(*host, seq))}});
    }
    return kExitOk;
}

std::string table_row(std::string const& label, MetricReport const& r, bool x100)
{
    std::ostringstream s;
    s << std::left << std::setw(24) << label << std::right << std::fixed << std::setprecision(3);
    s << std::setw(10) << r.rouge1 << std::setw(10) << r.rouge2 << std::setw(10) << r.rougeL << std::setw(10)
      << (x100 ? r.bleu * 100.0 : r.bleu) << std::setw(8) << r.n_pairs;
    return s.str();
}

int cmd_evaluate(Options const& o, std::ostream& out)
{
    auto corpus = load_filtered(o);
    if (o.sequences.empty()) throw DataError("--sequences is required");
    auto sequences = load_sequences(o.sequences);
    auto references = extract_human_sequences(corpus);

    // One report per (backend, domain) and one over everything.
    std::map<std::pair<std::string, std::string>, std::vector<ReformulationSequence>> groups;
    for (auto const& s : sequences) {
        groups[{std::string(to_string(s.config.backend)), std::string(to_string(s.domain))}].push_back(s);
    }
    Sink sink(o.out, out);
    if (o.format == "table") {
        *sink << std::left << std::setw(24) << "backend/domain" << std::right << std::setw(10) << "ROUGE-1"
              << std::setw(10) << "ROUGE-2" << std::setw(10) << "ROUGE-L" << std::setw(10) << "BLEU" << std::setw(8)
              << "pairs" << '\n';
    }
    auto emit = [&](std::string const& backend, std::string const& domain, MetricReport const& r) {
        if (o.format == "table") {
            *sink << table_row(backend + "/" + domain, r, o.bleu_x100) << '\n';
            return;
        }
        auto j = r.to_json(o.bleu_x100);
        j["backend"] = backend;
        j["domain"] = domain;
        sink.line(j);
    };
    for (auto const& [key, group] : groups) {
        emit(key.first, key.second, evaluate_run(group, references, o.jobs));
    }
    emit("all", "all", evaluate_run(sequences, references, o.jobs));
    if (o.judge) {
        auto j = judge_sequences(sequences);
        if (o.format == "table") {
            *sink << std::fixed << std::setprecision(3) << "G " << j.grammatical << "  D " << j.difficulty << "  T "
                  << j.type_accuracy << "  steps " << j.n_steps << '\n';
        } else {
            sink.line(j.to_json());
        }
    }
    return kExitOk;
}

int cmd_conformance(Options const& o, std::ostream& out)
{
    auto report = run_conformance(endpoint_from(o));
    Sink sink(o.out, out);
    sink.line(report.to_json());
    return report.passed() ? kExitOk : kExitBackend;
}

std::string flag_listing(CLI::App& app)
{
    std::string out = "Flags by subcommand:\n";
    for (auto const* sub : app.get_subcommands([](CLI::App*) { return true; })) {
        out += "  " + sub->get_name() + ":";
        for (auto const* opt : sub->get_options()) {
            if (opt->get_name() == "--help") continue;
            out += " " + opt->get_name();
        }
        out += "\n";
    }
    return out;
}

}  // namespace

int run_cli(int argc, char const* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"reformkit: simulate, analyze and evaluate user reformulations in conversational recommendation"};
    app.require_subcommand(1, 1);
    Options o;

    auto domains = CLI::IsMember({"movie", "travel", "music", "hybrid"});
    auto add_corpus = [&](CLI::App* sub, bool required) {
        auto* opt = sub->add_option("--corpus", o.corpus, "Annotated corpus (JSON lines)");
        if (required) opt->required();
        sub->add_option("--domain", o.domain, "Restrict to one domain; hybrid = movie + travel")->check(domains);
    };
    auto add_out = [&](CLI::App* sub) { sub->add_option("--out", o.out, "Output path, '-' for stdout"); };

    auto* estimate = app.add_subcommand("estimate", "Estimate the type transition matrix from a corpus");
    add_corpus(estimate, true);
    add_out(estimate);

    auto* analyze = app.add_subcommand("analyze", "Intent ratios, transition patterns, turn bins, experience tests");
    add_corpus(analyze, true);
    analyze->add_option("--report", o.report, "Which report")
        ->check(CLI::IsMember({"all", "intents", "patterns", "turns", "experience"}));
    analyze->add_option("--bin-width", o.bin_width, "Turns per bin")->check(CLI::PositiveNumber);
    analyze->add_option("--alpha", o.alpha, "Levene significance level")->check(CLI::Range(0.0, 1.0));
    add_out(analyze);

    auto* triads = app.add_subcommand("triads", "Extract (original, type, reformulated) triads");
    add_corpus(triads, true);
    triads->add_option("--human-sequences", o.human_sequences, "Also write human sequences (usable as seed file)");
    add_out(triads);

    auto* generate = app.add_subcommand("generate", "Generate reformulation sequences from seed utterances");
    generate->add_option("--seed-file", o.seed_file, "Seed utterances: plain lines or JSON lines")->required();
    generate->add_option("--matrix", o.matrix, "Transition matrix from `estimate`");
    generate->add_option("--backend", o.backend, "Generation backend")->check(CLI::IsMember({"rule", "remote"}));
    generate->add_option("--backend-url", o.backend_url, "Base URL of the remote backend");
    generate->add_option("--timeout-ms", o.timeout_ms, "Remote request timeout")->check(CLI::PositiveNumber);
    generate->add_option("--filter", o.filter, "Acceptability filter")
        ->check(CLI::IsMember({"heuristic", "remote", "off"}));
    generate->add_flag("--filter-relaxed", o.filter_relaxed, "Disable the repetition rules of the heuristic filter");
    generate->add_option("--length", o.length, "Steps per sequence")->check(CLI::PositiveNumber);
    generate->add_option("--max-attempts", o.max_attempts, "Generation attempts per step")->check(CLI::PositiveNumber);
    generate->add_option("--forbid", o.forbid, "Types never sampled")->delimiter(',');
    generate->add_option("--propagate", o.propagate, "Distribution update input")
        ->check(CLI::IsMember({"realized", "marginal"}));
    generate->add_option("--condition", o.condition, "Utterance each step is generated from")
        ->check(CLI::IsMember({"previous", "seed"}));
    generate->add_option("--runs", o.runs, "Sequences per seed (5 for the evaluation protocol)")
        ->check(CLI::PositiveNumber);
    generate->add_option("--seed", o.seed, "Random seed");
    generate->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
    generate->add_option("--domain", o.domain, "Domain of plain-text seeds")->check(domains);
    add_out(generate);

    auto* splice = app.add_subcommand("splice", "Splice simulated sequences into the logged dialogues");
    add_corpus(splice, true);
    splice->add_option("--sequences", o.sequences, "Sequences from `generate`")->required();
    add_out(splice);

    auto* evaluate = app.add_subcommand("evaluate", "ROUGE/BLEU of generated sequences against human ones");
    add_corpus(evaluate, true);
    evaluate->add_option("--sequences", o.sequences, "Sequences from `generate`")->required();
    evaluate->add_flag("--bleu-x100", o.bleu_x100, "Report BLEU on a 0-100 scale");
    evaluate->add_flag("--judge", o.judge, "Also report heuristic G/D/T judgements");
    evaluate->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "table"}));
    evaluate->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
    add_out(evaluate);

    auto* conformance = app.add_subcommand("conformance", "Probe a remote backend against the wire protocol");
    conformance->add_option("--backend-url", o.backend_url, "Base URL of the remote backend")->required();
    conformance->add_option("--timeout-ms", o.timeout_ms, "Request timeout")->check(CLI::PositiveNumber);
    add_out(conformance);

    app.footer(flag_listing(app) + "Exit codes: 0 ok, 1 usage, 2 data, 3 backend.\n"
                                   "Remote credentials: REFORMKIT_BACKEND_TOKEN (sent as a bearer token).");

    try {
        app.parse(argc, argv);
    } catch (CLI::CallForHelp const& e) {
        return app.exit(e, out, err);
    } catch (CLI::CallForAllHelp const& e) {
        return app.exit(e, out, err);
    } catch (CLI::ParseError const& e) {
        diagnose(err, "usage", e.what());
        return kExitUsage;
    }

    try {
        if (estimate->parsed()) return cmd_estimate(o, out);
        if (analyze->parsed()) return cmd_analyze(o, out);
        if (triads->parsed()) return cmd_triads(o, out, err);
        if (generate->parsed()) return cmd_generate(o, out, err);
        if (splice->parsed()) return cmd_splice(o, out);
        if (evaluate->parsed()) return cmd_evaluate(o, out);
        if (conformance->parsed()) return cmd_conformance(o, out);
    } catch (RemoteError const& e) {
        diagnose(err, "backend", std::string(to_string(e.kind())) + ": " + e.what());
        return kExitBackend;
    } catch (DataError const& e) {
        diagnose(err, "data", e.what());
        return kExitData;
    } catch (json::exception const& e) {
        diagnose(err, "data", e.what());
        return kExitData;
    } catch (std::invalid_argument const& e) {
        diagnose(err, "data", e.what());
        return kExitData;
    }
    diagnose(err, "usage", "no subcommand");
    return kExitUsage;
}

}  // namespace reformkit
