#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "reformkit/types.hpp"

namespace reformkit {

struct TriadExtraction {
    std::vector<Triad> triads;
    // Labeled user turns with no earlier user turn to pair with.
    std::size_t skipped_no_antecedent = 0;
};

// One triad per reformulation-labeled user turn, paired with the nearest
// preceding user turn of the same dialogue. Change/Stop triads are kept;
// Triad::generable() tells them apart.
TriadExtraction extract_triads(Corpus const& corpus);

// A maximal run of labeled user turns that are consecutive among the user
// turns of a dialogue and share intent and slot set. Agent turns in between
// do not break a run; an unlabeled user turn does.
struct LabeledRun {
    std::string dialogue_id;
    std::optional<Intent> intent;
    std::vector<SlotAnnotation> slots;
    std::vector<std::size_t> turn_indices;
};

std::vector<LabeledRun> labeled_runs(Dialogue const& dialogue);

// Slot comparison key: kind plus lowercased value with a trailing plural
// "s" removed, so "restaurants" and "Restaurant" name the same slot.
std::string slot_key(SlotAnnotation const& slot);
bool same_slot_set(std::vector<SlotAnnotation> const& a, std::vector<SlotAnnotation> const& b);

struct HumanStep {
    ReformulationType type;
    std::string utterance;
    std::size_t turn_index;
};

struct HumanSequence {
    std::string dialogue_id;
    Domain domain = Domain::Movie;
    std::string seed;
    std::size_t seed_turn_index = 0;
    std::vector<SlotAnnotation> seed_slots;
    std::vector<HumanStep> steps;

    std::vector<ReformulationType> types() const;
};

// Each labeled run becomes one sequence whose seed is the user turn right
// before the run. Runs without such a turn are dropped.
std::vector<HumanSequence> extract_human_sequences(Corpus const& corpus);
std::vector<HumanSequence> extract_human_sequences(Dialogue const& dialogue);

}  // namespace reformkit
