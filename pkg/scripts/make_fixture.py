#!/usr/bin/env python3
"""Generate the synthetic three-language fixture corpus.

Sentences come from a small chunk grammar over function words, verbs and
noun phrases.  Token mappings between languages are bijective (prefixing),
and adjective-noun chunks flip to noun-adjective order in the pivot and
target languages, giving controlled local reordering on the source side
while the pivot-target direction stays monotone.  Rows are unique within
every language, so the whole corpus qualifies for perplexity-based
dev/test selection.

Usage: make_fixture.py --out DIR [--rows 2000] [--seed 17]
"""

import argparse
import os
import random

ADJECTIVES = [f"adj{i}" for i in range(12)]
NOUNS = [f"noun{i}" for i in range(18)]
VERBS = [f"verb{i}" for i in range(10)]
FUNCTION = [f"fw{i}" for i in range(8)]

DEFAULT_SEED = 17
DEFAULT_ROWS = 2000


def source_sentence(rng: random.Random) -> list[str]:
    chunks = []
    if rng.random() < 0.7:
        chunks.append([rng.choice(FUNCTION)])
    chunks.append(noun_phrase(rng))
    chunks.append([rng.choice(VERBS)])
    chunks.append(noun_phrase(rng))
    if rng.random() < 0.5:
        chunks.append([rng.choice(FUNCTION)])
    if rng.random() < 0.3:
        chunks.append(noun_phrase(rng))
    return [tok for chunk in chunks for tok in chunk]


def noun_phrase(rng: random.Random) -> list[str]:
    noun = rng.choice(NOUNS)
    if rng.random() < 0.6:
        return [rng.choice(ADJECTIVES), noun]
    return [noun]


def transfer(tokens: list[str], prefix: str) -> list[str]:
    """Map tokens with a language prefix, swapping adjective-noun chunks.

    Nouns are lexically ambiguous: inside an adjective chunk they take the
    "a" form, standalone the "b" form, so a correct translation needs the
    local context, not just a token dictionary.
    """
    out = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if (
            tok.startswith("adj")
            and i + 1 < len(tokens)
            and tokens[i + 1].startswith("noun")
        ):
            out.append(prefix + tokens[i + 1] + "a")
            out.append(prefix + tok)
            i += 2
        elif tok.startswith("noun"):
            out.append(prefix + tok + "b")
            i += 1
        else:
            out.append(prefix + tok)
            i += 1
    return out


def generate(rows: int, seed: int) -> list[tuple[str, str, str]]:
    rng = random.Random(seed)
    seen = set()
    corpus = []
    while len(corpus) < rows:
        src = source_sentence(rng)
        key = " ".join(src)
        if key in seen:
            continue
        seen.add(key)
        piv = transfer(src, "p")
        tgt = [("t" + tok[1:]) for tok in piv]  # pivot -> target is monotone
        corpus.append((key, " ".join(piv), " ".join(tgt)))
    return corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True)
    parser.add_argument("--rows", type=int, default=DEFAULT_ROWS)
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    args = parser.parse_args()
    corpus = generate(args.rows, args.seed)
    os.makedirs(args.out, exist_ok=True)
    for lang, idx in (("src", 0), ("piv", 1), ("tgt", 2)):
        with open(os.path.join(args.out, f"corpus.{lang}"), "w",
                  encoding="utf-8") as fh:
            for row in corpus:
                fh.write(row[idx] + "\n")
    print(f"wrote {len(corpus)} rows to {args.out} (seed {args.seed})")


if __name__ == "__main__":
    main()
