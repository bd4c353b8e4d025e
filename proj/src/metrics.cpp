#include "reformkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "reformkit/difficulty.hpp"
#include "reformkit/error.hpp"
#include "reformkit/text.hpp"
#include "parallel.hpp"

namespace reformkit {

using nlohmann::json;

namespace {

using Gram = std::vector<std::string>;

std::map<Gram, std::size_t> ngrams(std::vector<std::string> const& tokens, int n)
{
    std::map<Gram, std::size_t> out;
    auto un = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + un <= tokens.size(); ++i) {
        ++out[Gram(tokens.begin() + static_cast<std::ptrdiff_t>(i), tokens.begin() + static_cast<std::ptrdiff_t>(i + un))];
    }
    return out;
}

std::size_t clipped_overlap(std::map<Gram, std::size_t> const& cand, std::map<Gram, std::size_t> const& ref)
{
    std::size_t overlap = 0;
    for (auto const& [g, c] : cand) {
        auto it = ref.find(g);
        if (it != ref.end()) overlap += std::min(c, it->second);
    }
    return overlap;
}

double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

void require_reference(std::vector<std::string> const& reference)
{
    if (reference.empty()) throw DataError("metric reference has no tokens");
}

std::size_t lcs_length(std::vector<std::string> const& a, std::vector<std::string> const& b)
{
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::set<std::string> content_set(std::string_view u)
{
    auto w = Lexicon::builtin().content(words(u));
    return {w.begin(), w.end()};
}

std::size_t intersection_size(std::set<std::string> const& a, std::set<std::string> const& b)
{
    std::size_t n = 0;
    for (auto const& x : a) n += b.count(x);
    return n;
}

}  // namespace

PRF rouge_n(std::vector<std::string> const& candidate, std::vector<std::string> const& reference, int n)
{
    require_reference(reference);
    if (n < 1) throw std::invalid_argument("rouge_n order must be at least 1");
    if (candidate.empty()) return {};
    auto cand = ngrams(candidate, n);
    auto ref = ngrams(reference, n);
    if (cand.empty() || ref.empty()) {
        if (cand.empty() && ref.empty() && candidate == reference) return {1.0, 1.0, 1.0};
        return {};
    }
    double overlap = static_cast<double>(clipped_overlap(cand, ref));
    double p = overlap / static_cast<double>(candidate.size() - static_cast<std::size_t>(n) + 1);
    double r = overlap / static_cast<double>(reference.size() - static_cast<std::size_t>(n) + 1);
    return {p, r, harmonic(p, r)};
}

PRF rouge_l(std::vector<std::string> const& candidate, std::vector<std::string> const& reference)
{
    require_reference(reference);
    if (candidate.empty()) return {};
    double lcs = static_cast<double>(lcs_length(candidate, reference));
    double p = lcs / static_cast<double>(candidate.size());
    double r = lcs / static_cast<double>(reference.size());
    return {p, r, harmonic(p, r)};
}

double bleu(std::vector<std::string> const& candidate, std::vector<std::string> const& reference, int max_n)
{
    require_reference(reference);
    if (max_n < 1) throw std::invalid_argument("bleu max_n must be at least 1");
    if (candidate.empty()) return 0.0;
    double log_sum = 0.0;
    int orders = 0;
    for (int n = 1; n <= max_n; ++n) {
        auto cand = ngrams(candidate, n);
        if (cand.empty()) continue;
        auto matches = clipped_overlap(cand, ngrams(reference, n));
        if (matches == 0) return 0.0;
        log_sum += std::log(static_cast<double>(matches) /
                            static_cast<double>(candidate.size() - static_cast<std::size_t>(n) + 1));
        ++orders;
    }
    double c = static_cast<double>(candidate.size());
    double r = static_cast<double>(reference.size());
    double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
    return bp * std::exp(log_sum / orders);
}

PRF rouge_n(std::string_view candidate, std::string_view reference, int n)
{
    return rouge_n(tokenize(candidate), tokenize(reference), n);
}

PRF rouge_l(std::string_view candidate, std::string_view reference)
{
    return rouge_l(tokenize(candidate), tokenize(reference));
}

double bleu(std::string_view candidate, std::string_view reference, int max_n)
{
    return bleu(tokenize(candidate), tokenize(reference), max_n);
}

json MetricReport::to_json(bool bleu_x100) const
{
    return json{{"kind", "metrics"},
                {"rouge1", rouge1},
                {"rouge2", rouge2},
                {"rougeL", rougeL},
                {"bleu", bleu_x100 ? bleu * 100.0 : bleu},
                {"bleu_scale", bleu_x100 ? 100 : 1},
                {"n_pairs", n_pairs},
                {"n_sequences", n_sequences},
                {"n_runs", n_runs}};
}

MetricReport evaluate_run(std::vector<ReformulationSequence> const& generated,
                          std::vector<HumanSequence> const& references, std::size_t jobs)
{
    // References sharing a seed utterance are alternatives; duplicates collapse.
    std::map<std::string, std::vector<HumanSequence const*>> by_seed;
    auto utterances = [](HumanSequence const& h) {
        std::vector<std::string> out;
        for (auto const& s : h.steps) out.push_back(s.utterance);
        return out;
    };
    for (auto const& h : references) {
        auto& alts = by_seed[h.seed];
        bool dup = std::any_of(alts.begin(), alts.end(), [&](auto const* a) { return utterances(*a) == utterances(h); });
        if (!dup) alts.push_back(&h);
    }
    std::vector<std::vector<HumanSequence const*> const*> matched;
    for (auto const& g : generated) {
        auto it = by_seed.find(g.seed);
        if (it == by_seed.end()) {
            throw DataError("no reference sequence for seed '" + g.seed + "'");
        }
        matched.push_back(&it->second);
    }

    struct Acc {
        double r1 = 0, r2 = 0, rl = 0, bl = 0;
        std::size_t n = 0;
    };
    std::vector<Acc> per_generated(generated.size());
    detail::parallel_for(generated.size(), jobs, [&](std::size_t i) {
        auto const& g = generated[i];
        auto& acc = per_generated[i];
        for (std::size_t k = 0; k < g.steps.size(); ++k) {
            auto cand = tokenize(g.steps[k].utterance);
            bool any = false;
            double r1 = 0, r2 = 0, rl = 0, bl = 0;
            for (auto const* ref : *matched[i]) {
                if (k >= ref->steps.size()) continue;
                auto gold = tokenize(ref->steps[k].utterance);
                if (gold.empty()) {
                    throw DataError("reference step " + std::to_string(k + 1) + " of seed '" + g.seed + "' has no tokens");
                }
                r1 = std::max(r1, rouge_n(cand, gold, 1).f1);
                r2 = std::max(r2, rouge_n(cand, gold, 2).f1);
                rl = std::max(rl, rouge_l(cand, gold).f1);
                bl = std::max(bl, bleu(cand, gold));
                any = true;
            }
            if (!any) break;
            acc.r1 += r1;
            acc.r2 += r2;
            acc.rl += rl;
            acc.bl += bl;
            ++acc.n;
        }
    });

    // Sums per seed in input order, so the result does not depend on `jobs`.
    std::map<std::string, Acc> per_seed;
    std::set<std::size_t> runs;
    MetricReport report;
    for (std::size_t i = 0; i < generated.size(); ++i) {
        auto& acc = per_seed[generated[i].seed];
        auto const& a = per_generated[i];
        acc.r1 += a.r1;
        acc.r2 += a.r2;
        acc.rl += a.rl;
        acc.bl += a.bl;
        acc.n += a.n;
        report.n_pairs += a.n;
        runs.insert(generated[i].run);
    }
    for (auto const& [seed, acc] : per_seed) {
        if (acc.n == 0) continue;
        double n = static_cast<double>(acc.n);
        report.rouge1 += acc.r1 / n;
        report.rouge2 += acc.r2 / n;
        report.rougeL += acc.rl / n;
        report.bleu += acc.bl / n;
        ++report.n_sequences;
    }
    if (report.n_sequences > 0) {
        double s = static_cast<double>(report.n_sequences);
        report.rouge1 /= s;
        report.rouge2 /= s;
        report.rougeL /= s;
        report.bleu /= s;
    }
    report.n_runs = runs.size();
    return report;
}

std::optional<ReformulationType> classify_reformulation_type(std::string_view original, std::string_view candidate)
{
    auto ot = tokenize(original);
    auto ct = tokenize(candidate);
    if (original == candidate || ot == ct) {
        return ReformulationType::Repeat;
    }
    auto o = content_set(original);
    auto c = content_set(candidate);
    if (o.empty() && c.empty()) {
        o = {ot.begin(), ot.end()};
        c = {ct.begin(), ct.end()};
    }
    auto common = intersection_size(o, c);

    if (common == o.size() && c.size() > o.size()) {
        return ReformulationType::ClarifyRefine;
    }
    if (ct.size() < ot.size()) {
        auto cs = c.empty() ? std::set<std::string>(ct.begin(), ct.end()) : c;
        auto os = c.empty() ? std::set<std::string>(ot.begin(), ot.end()) : o;
        if (!cs.empty() && static_cast<double>(intersection_size(cs, os)) / static_cast<double>(cs.size()) >=
                               kSimplifyContainment) {
            return ReformulationType::RepeatSimplify;
        }
    }
    auto unions = o.size() + c.size() - common;
    double jaccard = unions == 0 ? 1.0 : static_cast<double>(common) / static_cast<double>(unions);
    double n = static_cast<double>(ot.size());
    double diff = std::abs(static_cast<double>(ct.size()) - n);
    if (diff <= kRephraseLengthBand * n && jaccard >= kRephraseJaccard) {
        return ReformulationType::RepeatRephrase;
    }
    if (jaccard < kRephraseJaccard) {
        return ReformulationType::StartRestart;
    }
    return std::nullopt;
}

json JudgementReport::to_json() const
{
    return json{{"kind", "judgement"},
                {"G", grammatical},
                {"D", difficulty},
                {"T", type_accuracy},
                {"n_steps", n_steps}};
}

JudgementReport judge_sequences(std::vector<ReformulationSequence> const& generated)
{
    JudgementReport report;
    double g = 0, d = 0, t = 0;
    for (auto const& seq : generated) {
        std::string previous = seq.seed;
        for (auto const& step : seq.steps) {
            if (tokenize(step.utterance).empty() || tokenize(previous).empty()) {
                previous = step.utterance;
                continue;
            }
            g += heuristic_acceptable(step.utterance, previous, step.type).acceptable ? 1 : 0;
            d += compare_difficulty(step.utterance, previous);
            t += classify_reformulation_type(previous, step.utterance) == step.type ? 1 : 0;
            ++report.n_steps;
            previous = step.utterance;
        }
    }
    if (report.n_steps > 0) {
        double n = static_cast<double>(report.n_steps);
        report.grammatical = g / n;
        report.difficulty = d / n;
        report.type_accuracy = t / n;
    }
    return report;
}

}  // namespace reformkit
