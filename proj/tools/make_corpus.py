#!/usr/bin/env python3
"""Generate the bundled sample corpus.

The text is produced by a small seeded phrase grammar, so the output is
original, reproducible and free of third-party rights. Running this script
again with the same arguments rewrites data/sample_corpus.txt byte for byte.
"""

import argparse
import random

NAMES = ["Ada", "Bram", "Cora", "Dov", "Elin", "Finn", "Greta", "Hugo", "Iris", "Jonas",
         "Kaia", "Leo", "Mara", "Niko", "Olga", "Pavel", "Rosa", "Silas", "Tova", "Ugo"]
PLACES = ["the harbor", "the mill", "the old library", "the north field", "the market",
          "the river bank", "the lighthouse", "the orchard", "the bakery", "the station",
          "the hill road", "the school yard", "the workshop", "the village square"]
NOUNS = ["lantern", "letter", "boat", "basket", "map", "clock", "garden", "bridge", "song",
         "window", "stone", "kettle", "ladder", "coat", "river", "candle", "book", "horse",
         "wagon", "storm", "bell", "apple", "door", "fence", "fire", "question", "promise"]
ADJS = ["small", "quiet", "bright", "old", "heavy", "narrow", "warm", "cold", "green",
        "broken", "careful", "patient", "strange", "simple", "early", "late", "gentle"]
VERBS_T = ["carried", "found", "mended", "painted", "opened", "counted", "watched",
           "followed", "remembered", "lifted", "cleaned", "built", "traded", "borrowed"]
VERBS_I = ["waited", "laughed", "listened", "wandered", "rested", "sang", "worked",
           "hurried", "slept", "returned", "paused", "smiled"]
TIMES = ["in the morning", "before noon", "at dusk", "after supper", "on the first day",
         "late that night", "during the rain", "when the bell rang", "at the end of summer"]
CONNECT = ["and", "but", "so", "while", "because", "although"]
SAYINGS = ["Nothing is lost that is well kept", "A slow hand makes a straight line",
           "The river always finds the sea", "Every door has two sides",
           "Ask twice and listen once", "Light the lamp before the dark"]


def noun_phrase(rng):
    n = rng.choice(NOUNS)
    if rng.random() < 0.6:
        return "the " + rng.choice(ADJS) + " " + n
    return "the " + n


def clause(rng):
    who = rng.choice(NAMES)
    r = rng.random()
    if r < 0.45:
        s = f"{who} {rng.choice(VERBS_T)} {noun_phrase(rng)}"
    elif r < 0.75:
        s = f"{who} {rng.choice(VERBS_I)} near {rng.choice(PLACES)}"
    else:
        s = f"{who} {rng.choice(VERBS_T)} {noun_phrase(rng)} at {rng.choice(PLACES)}"
    if rng.random() < 0.4:
        s += " " + rng.choice(TIMES)
    return s


def sentence(rng):
    r = rng.random()
    if r < 0.55:
        s = clause(rng)
    elif r < 0.85:
        s = clause(rng) + ", " + rng.choice(CONNECT) + " " + clause(rng)
    elif r < 0.95:
        who = rng.choice(NAMES)
        s = f'{who} said, "{rng.choice(SAYINGS)}."'
        return s
    else:
        s = f"How long had {rng.choice(NAMES)} kept {noun_phrase(rng)}?"
        return s
    return s[0].upper() + s[1:] + "."


def paragraph(rng):
    return " ".join(sentence(rng) for _ in range(rng.randint(3, 7)))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--bytes", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=20241016)
    ap.add_argument("--out", default="data/sample_corpus.txt")
    args = ap.parse_args()
    rng = random.Random(args.seed)
    parts, size = [], 0
    while size < args.bytes:
        p = paragraph(rng) + "\n\n"
        parts.append(p)
        size += len(p)
    with open(args.out, "w", encoding="utf-8", newline="\n") as f:
        f.write("".join(parts))


if __name__ == "__main__":
    main()
