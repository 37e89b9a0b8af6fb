"""Reference implementation of the fallback hashing embedder.

Written independently of the Rust code; its output is frozen into
tests/retrieval.rs. Run: python3 hash_embed.py
"""
import math
import re
import sys

DIM = 1024
MASK = (1 << 64) - 1
PRIME = 0x100000001B3
SEED_INDEX = 0xCBF29CE484222325
SEED_SIGN = 0xCBF29CE484222325 ^ 0x9E3779B97F4A7C15


def fnv1a(seed, data):
    h = seed
    for b in data:
        h ^= b
        h = (h * PRIME) & MASK
    return h


def tokens(text):
    return [t for t in re.split(r"[^0-9a-z]+", text.lower()) if t]


def embed(text):
    v = [0.0] * DIM
    for t in tokens(text):
        b = t.encode()
        i = fnv1a(SEED_INDEX, b) % DIM
        s = -1.0 if fnv1a(SEED_SIGN, b) >> 63 else 1.0
        v[i] += s
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v] if n > 0 else v


def dist(a, b):
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


if __name__ == "__main__":
    v = embed("gene conservation scores")
    print("nonzero:", [(i, x) for i, x in enumerate(v) if x != 0.0])
    print("norm:", repr(math.sqrt(sum(x * x for x in v))))
    recs = [
        ("r1", "gene density histogram <ideogram><split><histogram>"),
        ("r2", "synteny links between human and mouse <ideogram><split><chord>"),
        ("r3", "gene conservation scores heatmap <ideogram><split><heatmap>"),
        ("r4", "methylation levels line plot <ideogram><split><line>"),
        ("r5", "structural variants tile track <ideogram><split><tile><split><chord>"),
    ]
    q = embed("conservation scores of genes across mouse chromosomes")
    ranked = sorted(((dist(q, embed(t)), i) for i, t in recs))
    for d, i in ranked:
        print(i, repr(d))
    sys.exit(0)
