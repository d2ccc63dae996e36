"""Word-distance functions and the greedy distance-driven aligner.

A distance function is any callable ``(source_token, target_token) -> float``
that is total and deterministic; lower means more alignable.  The greedy
aligner consumes one such function and links positions cheapest-first,
letting the shorter sentence absorb the length difference.
"""

import math

import numpy as np

from .corpus import Bitext, EmbeddingTable, TransliterationTable


def semantic_distance(w_s: str, w_t: str, emb: EmbeddingTable) -> float:
    """1 - cosine similarity of the two word vectors, in [0, 2].

    An out-of-vocabulary token or zero-norm vector scores 1.0, the
    orthogonality-equivalent value: alignable, never preferred.
    """
    v_s = emb.lookup(w_s)
    v_t = emb.lookup(w_t)
    if v_s is None or v_t is None:
        return 1.0
    norm = float(np.linalg.norm(v_s)) * float(np.linalg.norm(v_t))
    if norm == 0.0:
        return 1.0
    return 1.0 - float(np.dot(v_s, v_t)) / norm


def levenshtein(a: str, b: str) -> int:
    """Minimum insertions + deletions + substitutions turning a into b."""
    if a == b:
        return 0
    if len(a) > len(b):
        a, b = b, a
    previous = list(range(len(a) + 1))
    for i, cb in enumerate(b, start=1):
        current = [i]
        for j, ca in enumerate(a, start=1):
            cost = previous[j - 1] + (ca != cb)
            current.append(min(previous[j] + 1, current[j - 1] + 1, cost))
        previous = current
    return previous[len(a)]


def transliterate(word: str, table: TransliterationTable) -> str:
    """Single left-to-right pass, longest matching rule first.

    Unmatched characters pass through, so an empty table is the identity.
    """
    if not table.rules:
        return word
    by_length: dict[int, dict[str, str]] = {}
    for lhs, rhs in table.rules:
        bucket = by_length.setdefault(len(lhs), {})
        if lhs not in bucket:  # first rule wins among equal LHS
            bucket[lhs] = rhs
    lengths = sorted(by_length, reverse=True)
    out = []
    pos = 0
    while pos < len(word):
        for length in lengths:
            chunk = word[pos:pos + length]
            if len(chunk) == length and chunk in by_length[length]:
                out.append(by_length[length][chunk])
                pos += length
                break
        else:
            out.append(word[pos])
            pos += 1
    return "".join(out)


def phonetic_distance(w_s: str, w_t: str,
                      translit_src_to_tgt: TransliterationTable,
                      translit_tgt_to_src: TransliterationTable) -> float:
    """Minimum length-normalized edit distance over three transliteration
    routes: source transliterated, target transliterated, and neither.

    Comparison happens on case-folded copies (transliteration tables are
    lowercase); each candidate is normalized by the longer of its own two
    operands.
    """
    s = w_s.casefold()
    t = w_t.casefold()
    ts = transliterate(s, translit_src_to_tgt)
    tt = transliterate(t, translit_tgt_to_src)
    candidates = []
    for left, right in ((ts, t), (s, tt), (s, t)):
        denom = max(len(left), len(right))
        candidates.append(levenshtein(left, right) / denom if denom else 0.0)
    return min(candidates)


def greedy_align(bitext: Bitext, dist) -> set:
    """Cheapest-first greedy alignment over all position pairs.

    Distances are computed per position pair (duplicate surface tokens stay
    distinct) and scanned in ascending (distance, source index, target
    index) order, which makes the result deterministic even under ties.
    A pair links when both positions are free; once one side is exhausted,
    the remaining slack of the longer side attaches to already-covered
    positions of the shorter one, each slack link requiring its long-side
    position to still be free.  Every position ends up covered and the
    link count is max(m, n).
    """
    m, n = len(bitext.source), len(bitext.target)
    pairs = []
    for i, w_s in enumerate(bitext.source):
        for j, w_t in enumerate(bitext.target):
            pairs.append((dist(w_s, w_t), i, j))
    pairs.sort()

    aligned = set()
    covered_source = set()
    covered_target = set()
    free = abs(m - n)
    for _, i, j in pairs:
        if i not in covered_source and j not in covered_target:
            aligned.add((i, j))
            covered_source.add(i)
            covered_target.add(j)
        elif free > 0 and m < n and i in covered_source and j not in covered_target:
            aligned.add((i, j))
            covered_target.add(j)
            free -= 1
        elif free > 0 and m > n and j in covered_target and i not in covered_source:
            aligned.add((i, j))
            covered_source.add(i)
            free -= 1
    return aligned


def semantic_distance_fn(emb: EmbeddingTable):
    """Bind an embedding table into a WordDistanceFn."""
    return lambda w_s, w_t: semantic_distance(w_s, w_t, emb)


def phonetic_distance_fn(translit_src_to_tgt: TransliterationTable,
                         translit_tgt_to_src: TransliterationTable):
    """Bind a transliteration table pair into a WordDistanceFn."""
    return lambda w_s, w_t: phonetic_distance(
        w_s, w_t, translit_src_to_tgt, translit_tgt_to_src)
