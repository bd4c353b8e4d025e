#include "reformkit/extraction.hpp"

#include <algorithm>

#include "reformkit/text.hpp"

namespace reformkit {

TriadExtraction extract_triads(Corpus const& corpus)
{
    TriadExtraction out;
    for (auto const& d : corpus.dialogues) {
        Turn const* previous_user = nullptr;
        for (auto const& turn : d.turns) {
            if (turn.speaker != Speaker::User) {
                continue;
            }
            if (turn.reformulation) {
                if (previous_user == nullptr) {
                    ++out.skipped_no_antecedent;
                } else {
                    out.triads.push_back(Triad{previous_user->utterance, *turn.reformulation,
                                               turn.utterance, d.domain, TriadSource::Logged});
                }
            }
            previous_user = &turn;
        }
    }
    return out;
}

std::string slot_key(SlotAnnotation const& slot)
{
    auto value = join(tokenize(slot.value));
    if (value.size() > 3 && value.back() == 's' && value[value.size() - 2] != 's') {
        value.pop_back();
    }
    return std::string(to_string(slot.kind)) + "=" + value;
}

bool same_slot_set(std::vector<SlotAnnotation> const& a, std::vector<SlotAnnotation> const& b)
{
    if (a.size() != b.size()) {
        return false;
    }
    std::vector<std::string> ka;
    std::vector<std::string> kb;
    for (auto const& s : a) ka.push_back(slot_key(s));
    for (auto const& s : b) kb.push_back(slot_key(s));
    std::sort(ka.begin(), ka.end());
    std::sort(kb.begin(), kb.end());
    return ka == kb;
}

std::vector<LabeledRun> labeled_runs(Dialogue const& dialogue)
{
    std::vector<LabeledRun> runs;
    bool open = false;
    for (auto const& turn : dialogue.turns) {
        if (turn.speaker != Speaker::User) {
            continue;
        }
        if (!turn.reformulation) {
            open = false;
            continue;
        }
        if (open) {
            auto& run = runs.back();
            if (run.intent == turn.intent && same_slot_set(run.slots, turn.slots)) {
                run.turn_indices.push_back(turn.index);
                continue;
            }
        }
        runs.push_back(LabeledRun{dialogue.dialogue_id, turn.intent, turn.slots, {turn.index}});
        open = true;
    }
    return runs;
}

std::vector<ReformulationType> HumanSequence::types() const
{
    std::vector<ReformulationType> out;
    for (auto const& s : steps) {
        out.push_back(s.type);
    }
    return out;
}

std::vector<HumanSequence> extract_human_sequences(Dialogue const& dialogue)
{
    std::vector<HumanSequence> out;
    for (auto const& run : labeled_runs(dialogue)) {
        auto first = run.turn_indices.front();
        Turn const* seed = nullptr;
        for (std::size_t i = first; i-- > 0;) {
            if (dialogue.turns[i].speaker == Speaker::User) {
                seed = &dialogue.turns[i];
                break;
            }
        }
        if (seed == nullptr) {
            continue;
        }
        HumanSequence seq;
        seq.dialogue_id = dialogue.dialogue_id;
        seq.domain = dialogue.domain;
        seq.seed = seed->utterance;
        seq.seed_turn_index = seed->index;
        seq.seed_slots = seed->slots;
        for (auto idx : run.turn_indices) {
            auto const& t = dialogue.turns[idx];
            seq.steps.push_back(HumanStep{*t.reformulation, t.utterance, idx});
        }
        out.push_back(std::move(seq));
    }
    return out;
}

std::vector<HumanSequence> extract_human_sequences(Corpus const& corpus)
{
    std::vector<HumanSequence> out;
    for (auto const& d : corpus.dialogues) {
        auto seqs = extract_human_sequences(d);
        std::move(seqs.begin(), seqs.end(), std::back_inserter(out));
    }
    return out;
}

}  // namespace reformkit
