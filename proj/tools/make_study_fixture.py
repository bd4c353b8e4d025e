#!/usr/bin/env python3
"""Writes tests/fixtures/study.jsonl, a synthetic annotated study corpus.

150 dialogues from five agents (30 each). The adjacent reformulation-type
pairs inside dialogue pieces are fixed exactly (rephrase->simplify 80 is the
most frequent of 615), agent intents before reformulations follow a fixed
mix led by "failed", and 55 of the 150 users (37%) report no experience with
conversational agents. Experience flags are drawn until no experience-group
t-test has p <= 0.1, and the build is rejected unless rephrase occurs earlier
in dialogues than simplify on average.

Usage: make_study_fixture.py [--out PATH] [--seed N]
"""

import argparse
import json
import random
import sys
import warnings
from collections import Counter, defaultdict
from pathlib import Path

import numpy as np
from scipy import stats

SR, RP, R, S, F, C, T = "start_restart", "repeat", "rephrase", "simplify", "refine", "change", "stop"
TYPES = [SR, RP, R, S, F, C, T]

PAIR_COUNTS = {
    (R, S): 80, (R, F): 63, (S, R): 53, (F, S): 20, (S, F): 19, (F, R): 18,
    (SR, R): 17, (SR, S): 12, (SR, F): 17, (SR, RP): 6, (SR, C): 5, (SR, T): 4, (SR, SR): 3,
    (RP, R): 17, (RP, S): 17, (RP, F): 8, (RP, RP): 9, (RP, SR): 6, (RP, C): 4, (RP, T): 5,
    (R, R): 17, (R, RP): 16, (R, SR): 9, (R, C): 8, (R, T): 7,
    (S, S): 17, (S, RP): 13, (S, SR): 10, (S, C): 9, (S, T): 17,
    (F, F): 17, (F, RP): 7, (F, SR): 8, (F, C): 10, (F, T): 9,
    (C, R): 17, (C, S): 10, (C, F): 9, (C, RP): 5, (C, SR): 6, (C, C): 3, (C, T): 8,
}

# Agent intent before a reformulation, in percent.
INTENT_MIX = [
    ("failed", 62), ("suggest", 19), ("elicit", 6), ("extract", 3), ("list", 3),
    ("similar", 2), ("repeat", 2), ("non-disclose", 2), ("end-disclose", 1), ("clarify", 0),
]

AGENTS = [("A1", "movie"), ("A2", "movie"), ("A3", "travel"), ("A4", "travel"), ("A5", "music")]
DIALOGUES_PER_AGENT = 30
USERS_WITHOUT_EXPERIENCE = 55

SLOTS = {
    "movie": [("movie", v) for v in ["Inception", "The Matrix", "Toy Story", "Dumb and Dumber", "Speed",
                                     "Amelie", "Heat", "Alien", "Jaws", "Up", "Notting Hill", "Casablanca"]]
    + [("genre", v) for v in ["comedy", "thriller", "horror", "drama", "romance", "documentary"]],
    "travel": [("location", v) for v in ["Dubai", "Paris", "Lisbon", "Tokyo", "Rome", "Fort Lauderdale",
                                         "Berlin", "Oslo"]]
    + [("restaurant", v) for v in ["sushi bar", "steakhouse", "pizzeria"]]
    + [("hotel", v) for v in ["Hilton", "Ritz", "Marriott"]],
    "music": [("musician", v) for v in ["Adele", "Coldplay", "Queen", "Drake", "Bjork", "Miles Davis"]]
    + [("song", v) for v in ["Yesterday", "Hallelujah", "Halo", "Vogue"]],
}

NOUN = {"movie": "a movie", "genre": "a movie", "location": "a trip", "restaurant": "a restaurant",
        "hotel": "a hotel", "musician": "some music", "song": "a song"}

SEEDS = {
    "movie": ["I am into a movie like {v}", "I want to watch something like {v}", "I loved {v}, anything similar?"],
    "genre": ["I am in the mood for a {v}", "Can you recommend a good {v}?", "I want to watch a {v} tonight"],
    "location": ["I want to know more about restaurants in {v}", "I am planning a trip to {v}",
                 "Can you help me plan a visit to {v}?"],
    "restaurant": ["I am looking for a {v} nearby", "Where can I find a good {v}?", "I want to eat at a {v}"],
    "hotel": ["I need a room at the {v}", "Can you book the {v} for me?", "I am looking for a hotel like the {v}"],
    "musician": ["I like listening to {v}", "Play me something by {v}", "I am a big fan of {v}"],
    "song": ["I love the song {v}", "Can you play {v}?", "Find me songs like {v}"],
}

REPHRASE = ["Can you find me {n} like {v}?", "What do you have that is similar to {v}?",
            "Show me options related to {v}.", "Do you know anything like {v}?"]
SIMPLIFY = ["{v}", "{v} please", "like {v}", "{v}?"]
REFINE = [" with good ratings", " from the last ten years", " that is not too long", " for this weekend"]
RESTART = ["Let me start over. I am looking for {n} like {v}.", "{v} is my favorite, what else is there?"]
CHANGE = ["Actually, something more recent than {v}.", "Okay, let's try something cheaper than {v}."]
STOP = ["Never mind, thanks.", "Forget it, bye.", "OK, that's enough for now."]

AGENT_TEXT = {
    "failed": ["Sorry, I didn't get that. Can you rephrase?", "I'm not sure I understand.", "Hotel? Apartment? or a bunk bed?"],
    "suggest": ["I think you should give {v} a shot!", "You might enjoy {v}.", "How about {v}?"],
    "elicit": ["What kind of things do you like?", "Can you tell me about a different one you like?"],
    "extract": ["So you like {v}?", "Got it, {v}."],
    "list": ["Here are a few options: {v}, and more.", "I found several results."],
    "similar": ["Here is something similar to {v}.", "Similar picks coming up."],
    "repeat": ["As I said, {v}.", "Let me repeat that."],
    "non-disclose": ["I'd rather not say.", "That's all I got at the moment."],
    "end-disclose": ["That's everything I know about it.", "I have nothing more on that."],
    "clarify": ["Do you mean {v}?"],
}


def build_pieces(rng):
    edges = [pair for pair, n in PAIR_COUNTS.items() for _ in range(n)]
    rng.shuffle(edges)
    by_source = defaultdict(list)
    for e in edges:
        by_source[e[0]].append(e)
    remaining = len(edges)
    pieces = []
    sources = [t for t in TYPES]
    while remaining:
        a = rng.choice([t for t in sources if by_source[t]])
        piece = list(by_source[a].pop())
        remaining -= 1
        while len(piece) < 4 and piece[-1] != T and by_source[piece[-1]] and rng.random() < 0.45:
            piece.append(by_source[piece[-1]].pop()[1])
            remaining -= 1
        pieces.append(piece)
    return pieces


def render_step(rng, t, prev, kind, value):
    noun = NOUN[kind]
    if t == RP:
        return prev
    if t == R:
        return rng.choice(REPHRASE).format(n=noun, v=value)
    if t == S:
        return rng.choice(SIMPLIFY).format(v=value)
    if t == F:
        return prev.rstrip(".?!") + rng.choice(REFINE) + "."
    if t == SR:
        return rng.choice(RESTART).format(n=noun, v=value)
    if t == C:
        return rng.choice(CHANGE).format(v=value)
    return rng.choice(STOP)


def intent_quota(n):
    raw = [(name, n * pct / 100.0) for name, pct in INTENT_MIX]
    counts = {name: int(x) for name, x in raw}
    short = n - sum(counts.values())
    for name, x in sorted(raw, key=lambda p: (-(p[1] - int(p[1])), -p[1]))[:short]:
        counts[name] += 1
    bag = [name for name, c in counts.items() for _ in range(c)]
    return bag


def build_dialogues(rng):
    pieces = build_pieces(rng)
    rng.shuffle(pieces)
    n_dialogues = len(AGENTS) * DIALOGUES_PER_AGENT
    assignment = [[] for _ in range(n_dialogues)]
    for i, p in enumerate(pieces):
        assignment[i % n_dialogues if i < n_dialogues else rng.randrange(n_dialogues)].append(p)
    for ps in assignment:
        # Sequences that open with a rephrase tend to come first.
        ps.sort(key=lambda p: (p[0] != R, rng.random()))

    dialogues = []
    for d_index in range(n_dialogues):
        agent_id, domain = AGENTS[d_index // DIALOGUES_PER_AGENT]
        turns = [{"speaker": "agent", "utterance": "Hi! What are you looking for today?", "intent": "elicit", "slots": []}]
        for piece in assignment[d_index]:
            kind, value = rng.choice(SLOTS[domain])
            slots = [{"slot_kind": kind, "value": value}]
            seed = rng.choice(SEEDS[kind]).format(v=value)
            turns.append({"speaker": "user", "utterance": seed, "intent": "disclose", "slots": slots})
            prev = seed
            for t in piece:
                turns.append({"speaker": "agent", "utterance": None, "intent": None, "slots": [], "value": value})
                text = render_step(rng, t, prev, kind, value)
                turns.append({"speaker": "user", "utterance": text, "intent": "disclose", "slots": slots,
                              "reformulation": t})
                prev = text
            turns.append({"speaker": "agent", "utterance": "You might enjoy {v}.".format(v=value),
                          "intent": "suggest", "slots": []})
        turns.append({"speaker": "user", "utterance": "Thanks, that sounds great.", "intent": "navigate-complete",
                      "slots": []})
        dialogues.append({"kind": "dialogue", "dialogue_id": "study-%03d" % (d_index + 1), "agent_id": agent_id,
                          "domain": domain, "turns": turns})

    # Agent intents before reformulations: a fixed mix per agent.
    for agent_id, _ in AGENTS:
        slots_to_fill = [(d, i) for d in dialogues if d["agent_id"] == agent_id
                         for i, turn in enumerate(d["turns"]) if turn["speaker"] == "agent" and turn["intent"] is None]
        bag = intent_quota(len(slots_to_fill))
        rng.shuffle(bag)
        for (d, i), intent in zip(slots_to_fill, bag):
            turn = d["turns"][i]
            turn["intent"] = intent
            turn["utterance"] = rng.choice(AGENT_TEXT[intent]).format(v=turn.pop("value"))
    return dialogues


def adjacent_pairs(dialogues):
    pairs = Counter()
    for d in dialogues:
        run = []
        for turn in d["turns"] + [{"speaker": "user"}]:
            if turn["speaker"] != "user":
                continue
            if "reformulation" in turn:
                run.append(turn["reformulation"])
                continue
            pairs.update(zip(run, run[1:]))
            run = []
    return pairs


def per_user_vectors(dialogues):
    """intent -> list of (dialogue index, type-proportion vector)."""
    out = defaultdict(list)
    for di, d in enumerate(dialogues):
        counts = defaultdict(Counter)
        last_agent = None
        for turn in d["turns"]:
            if turn["speaker"] == "agent":
                last_agent = turn["intent"]
            elif "reformulation" in turn and last_agent is not None:
                counts[last_agent][turn["reformulation"]] += 1
        for intent, c in counts.items():
            n = sum(c.values())
            out[intent].append((di, np.array([c[t] / n for t in TYPES])))
    return out


def min_p_value(vectors, experienced):
    lowest = 1.0
    for intent, rows in vectors.items():
        a = [v for di, v in rows if experienced[di]]
        b = [v for di, v in rows if not experienced[di]]
        if len(a) < 2 or len(b) < 2:
            continue
        for k in range(len(TYPES)):
            xa = np.array([v[k] for v in a])
            xb = np.array([v[k] for v in b])
            if np.ptp(np.concatenate([xa, xb])) == 0:
                continue
            with np.errstate(all="ignore"):
                lev = stats.levene(xa, xb, center="mean")
                equal = not (lev.pvalue < 0.05) if np.isfinite(lev.pvalue) else True
                t = stats.ttest_ind(xa, xb, equal_var=equal)
            if np.isfinite(t.pvalue):
                lowest = min(lowest, t.pvalue)
    return lowest


def mean_turn(dialogues, t):
    idx = [i for d in dialogues for i, turn in enumerate(d["turns"]) if turn.get("reformulation") == t]
    return sum(idx) / len(idx)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "tests/fixtures/study.jsonl"))
    ap.add_argument("--seed", type=int, default=20230501)
    args = ap.parse_args()

    warnings.simplefilter("ignore", RuntimeWarning)
    rng = random.Random(args.seed)
    dialogues = build_dialogues(rng)

    pairs = adjacent_pairs(dialogues)
    assert pairs == Counter(PAIR_COUNTS), "pair counts drifted"
    assert sum(pairs.values()) == 615
    assert mean_turn(dialogues, R) < mean_turn(dialogues, S), "rephrase is not earlier than simplify"

    vectors = per_user_vectors(dialogues)
    n = len(dialogues)
    for attempt in range(5000):
        without = set(rng.sample(range(n), USERS_WITHOUT_EXPERIENCE))
        experienced = [i not in without for i in range(n)]
        if min_p_value(vectors, experienced) > 0.1:
            break
    else:
        sys.exit("no experience assignment keeps every p-value above 0.1")

    ages = ["under-30", "30-40", "over-40"]
    for i, d in enumerate(dialogues):
        d["user_profile"] = {"age_band": rng.choices(ages, weights=[42, 43, 15])[0],
                             "gender": rng.choice(["female", "male"]),
                             "has_cra_experience": experienced[i]}

    with open(args.out, "w") as f:
        for d in dialogues:
            f.write(json.dumps(d) + "\n")
    print("wrote %d dialogues, %d adjacent pairs, experience draw %d, to %s"
          % (len(dialogues), sum(pairs.values()), attempt + 1, args.out))


if __name__ == "__main__":
    main()
