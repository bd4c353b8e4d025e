#include "reformkit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace reformkit {

using nlohmann::json;

namespace {

std::size_t agent_intent_slot(Intent intent)
{
    auto it = std::find(kAgentIntents.begin(), kAgentIntents.end(), intent);
    return static_cast<std::size_t>(it - kAgentIntents.begin());
}

// Nearest agent turn before `index`, or nullptr when there is none.
Turn const* preceding_agent_turn(Dialogue const& d, std::size_t index)
{
    for (std::size_t i = index; i-- > 0;) {
        if (d.turns[i].speaker == Speaker::Agent) {
            return &d.turns[i];
        }
    }
    return nullptr;
}

json test_json(stats::TestResult const& r)
{
    auto num = [](double v) -> json {
        if (std::isinf(v)) {
            return v > 0 ? "inf" : "-inf";
        }
        return v;
    };
    return json{{"statistic", num(r.statistic)}, {"p_value", r.p_value}, {"df", r.df1}, {"infinite", r.infinite}};
}

}  // namespace

IntentRatioEntry const& IntentRatioReport::at(Intent intent) const
{
    for (auto const& e : entries) {
        if (e.intent == intent) {
            return e;
        }
    }
    throw std::out_of_range("not an agent intent");
}

json IntentRatioReport::to_json() const
{
    json rows = json::array();
    for (auto const& e : entries) {
        rows.push_back({{"intent", to_string(e.intent)}, {"count", e.count}, {"ratio", e.ratio}, {"sigma", e.sigma}});
    }
    return json{{"kind", "intent_ratios"},
                {"total", total},
                {"excluded_no_agent_turn", excluded_no_agent_turn},
                {"excluded_unannotated", excluded_unannotated},
                {"intents", rows}};
}

IntentRatioReport preceding_intent_ratios(Corpus const& corpus)
{
    IntentRatioReport report;
    std::array<std::size_t, kAgentIntents.size()> counts{};
    std::map<std::string, std::array<std::size_t, kAgentIntents.size()>> agent_counts;

    for (auto const& d : corpus.dialogues) {
        for (auto const& turn : d.turns) {
            if (turn.speaker != Speaker::User || !turn.reformulation) {
                continue;
            }
            auto const* agent = preceding_agent_turn(d, turn.index);
            if (agent == nullptr) {
                ++report.excluded_no_agent_turn;
                continue;
            }
            if (!agent->intent) {
                ++report.excluded_unannotated;
                continue;
            }
            auto slot = agent_intent_slot(*agent->intent);
            ++counts[slot];
            ++agent_counts[d.agent_id][slot];
            ++report.total;
        }
    }

    for (auto const& [agent, c] : agent_counts) {
        std::size_t n = 0;
        for (auto v : c) n += v;
        auto& ratios = report.per_agent[agent];
        for (std::size_t k = 0; k < c.size(); ++k) {
            ratios[k] = static_cast<double>(c[k]) / static_cast<double>(n);
        }
    }

    for (std::size_t k = 0; k < kAgentIntents.size(); ++k) {
        IntentRatioEntry e{kAgentIntents[k], counts[k], 0.0, 0.0};
        if (report.total > 0) {
            e.ratio = static_cast<double>(counts[k]) / static_cast<double>(report.total);
        }
        if (!report.per_agent.empty()) {
            std::vector<double> across;
            for (auto const& [agent, ratios] : report.per_agent) {
                across.push_back(ratios[k]);
            }
            e.sigma = stats::population_stddev(across);
        }
        report.entries.push_back(e);
    }
    return report;
}

std::string PatternFrequency::name() const
{
    return std::string(to_string(from)) + "-" + std::string(to_string(to));
}

std::vector<PatternFrequency> pattern_frequencies(std::vector<DialoguePiece> const& pieces)
{
    std::array<std::array<std::size_t, kNumReformulationTypes>, kNumReformulationTypes> counts{};
    std::size_t total = 0;
    for (auto const& p : pieces) {
        for (std::size_t r = 1; r < p.typed_states.size(); ++r) {
            ++counts[type_index(p.typed_states[r - 1])][type_index(p.typed_states[r])];
            ++total;
        }
    }
    std::vector<PatternFrequency> out;
    for (std::size_t i = 0; i < kNumReformulationTypes; ++i) {
        for (std::size_t j = 0; j < kNumReformulationTypes; ++j) {
            if (counts[i][j] == 0) {
                continue;
            }
            out.push_back(PatternFrequency{kAllTypes[i], kAllTypes[j],
                                           static_cast<double>(counts[i][j]) / static_cast<double>(total),
                                           counts[i][j]});
        }
    }
    std::sort(out.begin(), out.end(), [](PatternFrequency const& a, PatternFrequency const& b) {
        if (a.count != b.count) {
            return a.count > b.count;
        }
        return a.name() < b.name();
    });
    return out;
}

json to_json(std::vector<PatternFrequency> const& patterns)
{
    json rows = json::array();
    for (auto const& p : patterns) {
        rows.push_back({{"from", to_string(p.from)}, {"to", to_string(p.to)}, {"ratio", p.ratio}, {"count", p.count}});
    }
    return json{{"kind", "patterns"}, {"patterns", rows}};
}

double TurnBinReport::mean_bin(ReformulationType t) const
{
    double weighted = 0.0;
    double n = 0.0;
    for (std::size_t b = 0; b < bins.size(); ++b) {
        auto c = static_cast<double>(bins[b].counts[type_index(t)]);
        weighted += c * static_cast<double>(b);
        n += c;
    }
    return n > 0.0 ? weighted / n : std::numeric_limits<double>::quiet_NaN();
}

json TurnBinReport::to_json() const
{
    json rows = json::array();
    for (auto const& b : bins) {
        json dist = json::object();
        json cnt = json::object();
        for (auto t : kAllTypes) {
            dist[std::string(to_string(t))] = b.distribution[type_index(t)];
            cnt[std::string(to_string(t))] = b.counts[type_index(t)];
        }
        rows.push_back({{"first_turn", b.first_turn}, {"last_turn", b.last_turn}, {"total", b.total},
                        {"counts", cnt}, {"distribution", dist}});
    }
    return json{{"kind", "turn_bins"}, {"bin_width", bin_width}, {"bins", rows}};
}

TurnBinReport turn_bin_distribution(Corpus const& corpus, std::size_t bin_width)
{
    if (bin_width == 0) {
        throw std::invalid_argument("bin_width must be at least 1");
    }
    TurnBinReport report;
    report.bin_width = bin_width;
    for (auto const& d : corpus.dialogues) {
        for (auto const& turn : d.turns) {
            if (turn.speaker != Speaker::User || !turn.reformulation) {
                continue;
            }
            auto b = turn.index / bin_width;
            while (report.bins.size() <= b) {
                auto k = report.bins.size();
                TurnBin bin;
                bin.first_turn = k * bin_width;
                bin.last_turn = bin.first_turn + bin_width - 1;
                report.bins.push_back(bin);
            }
            ++report.bins[b].counts[type_index(*turn.reformulation)];
            ++report.bins[b].total;
        }
    }
    for (auto& bin : report.bins) {
        if (bin.total == 0) {
            continue;
        }
        for (std::size_t i = 0; i < kNumReformulationTypes; ++i) {
            bin.distribution[i] = static_cast<double>(bin.counts[i]) / static_cast<double>(bin.total);
        }
    }
    return report;
}

json ExperienceReport::to_json() const
{
    json rows = json::array();
    for (auto const& ic : intents) {
        json jt = json::array();
        for (auto const& tc : ic.types) {
            jt.push_back({{"type", to_string(tc.type)},
                          {"levene", test_json(tc.levene)},
                          {"t_test", test_json(tc.t)},
                          {"equal_variance", tc.equal_variance}});
        }
        rows.push_back({{"intent", to_string(ic.intent)},
                        {"users_with_experience", ic.users_with_experience},
                        {"users_without_experience", ic.users_without_experience},
                        {"status", ic.sufficient ? "ok" : "insufficient data"},
                        {"types", jt}});
    }
    return json{{"kind", "experience_comparison"},
                {"alpha", alpha},
                {"dialogues_without_flag", dialogues_without_flag},
                {"intents", rows}};
}

ExperienceReport compare_experience_groups(Corpus const& corpus, double alpha)
{
    ExperienceReport report;
    report.alpha = alpha;

    // intent -> per-user type proportion vectors, split by experience flag.
    struct Groups {
        std::vector<TypeRow> with;
        std::vector<TypeRow> without;
    };
    std::map<Intent, Groups> by_intent;

    for (auto const& d : corpus.dialogues) {
        if (!d.user_profile || !d.user_profile->has_cra_experience) {
            ++report.dialogues_without_flag;
            continue;
        }
        bool experienced = *d.user_profile->has_cra_experience;
        std::map<Intent, std::array<std::size_t, kNumReformulationTypes>> counts;
        for (auto const& turn : d.turns) {
            if (turn.speaker != Speaker::User || !turn.reformulation) {
                continue;
            }
            auto const* agent = preceding_agent_turn(d, turn.index);
            if (agent == nullptr || !agent->intent) {
                continue;
            }
            ++counts[*agent->intent][type_index(*turn.reformulation)];
        }
        for (auto const& [intent, c] : counts) {
            std::size_t n = 0;
            for (auto v : c) n += v;
            TypeRow proportions{};
            for (std::size_t i = 0; i < kNumReformulationTypes; ++i) {
                proportions[i] = static_cast<double>(c[i]) / static_cast<double>(n);
            }
            auto& g = by_intent[intent];
            (experienced ? g.with : g.without).push_back(proportions);
        }
    }

    for (auto intent : kAgentIntents) {
        auto it = by_intent.find(intent);
        if (it == by_intent.end()) {
            continue;
        }
        auto const& g = it->second;
        IntentComparison ic{intent, g.with.size(), g.without.size(), false, {}};
        ic.sufficient = g.with.size() >= 2 && g.without.size() >= 2;
        if (ic.sufficient) {
            for (auto t : kAllTypes) {
                std::vector<double> a;
                std::vector<double> b;
                for (auto const& p : g.with) a.push_back(p[type_index(t)]);
                for (auto const& p : g.without) b.push_back(p[type_index(t)]);
                TypeComparison tc{t, stats::levene_test(a, b), {}, true};
                tc.equal_variance = !(tc.levene.p_value < alpha);
                tc.t = stats::t_test(a, b, tc.equal_variance);
                ic.types.push_back(tc);
            }
        }
        report.intents.push_back(std::move(ic));
    }
    return report;
}

}  // namespace reformkit
