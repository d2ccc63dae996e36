"""Unsupervised lexical word aligner with a diagonal-biased prior.

EM re-estimates only the translation table; the diagonal tension and NULL
probability stay fixed at their configured values.  The prior for target
position j over source candidates i = 0..m is

    prior(0, j)  = p0
    prior(i, j)  = (1 - p0) * exp(-lambda * |i/m - j/n|) / Z(j)   for i >= 1

with Z(j) normalizing the non-NULL mass, so each column sums to 1.  Also
provides bidirectional Viterbi decoding and grow-diag-final-and
symmetrization of a forward/reverse alignment pair.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

from .corpus import Bitext
from .errors import EmptyCorpusError, IndexOutOfRangeError, LinkOutOfRangeError
from .lspmodel import NULL_TOKEN, TranslationTable

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    iterations: int = 5
    tension: float = 4.0
    null_prob: float = 0.08
    shards: int = 1
    threads: int = 1


@dataclass
class LexicalModel:
    translation: TranslationTable
    tension: float
    null_prob: float
    # corpus log-likelihood measured at the E-step of each iteration
    log_likelihoods: list[float] = field(default_factory=list)


@lru_cache(maxsize=4096)
def _diagonal_weights(m: int, n: int, tension: float):
    """Unnormalized diagonal weights w[j-1][i-1] and their column sums."""
    weights = []
    sums = []
    for j in range(1, n + 1):
        row = [math.exp(-tension * abs(i / m - j / n)) for i in range(1, m + 1)]
        weights.append(row)
        sums.append(sum(row))
    return weights, sums


def alignment_prior(i: int, j: int, m: int, n: int,
                    tension: float = 4.0, null_prob: float = 0.08) -> float:
    """Prior that target position j aligns to source position i (0 = NULL).

    Positions are 1-based here, matching the usual alignment-model
    convention; for fixed j the prior sums to 1 over i = 0..m.
    """
    if not 1 <= j <= n or not 0 <= i <= m:
        raise IndexOutOfRangeError(f"prior index i={i}, j={j} outside {m}x{n}")
    if i == 0:
        return null_prob
    weights, sums = _diagonal_weights(m, n, tension)
    return (1.0 - null_prob) * weights[j - 1][i - 1] / sums[j - 1]


def _init_uniform_cooccurrence(corpus) -> dict[str, dict[str, float]]:
    """Uniform rows over each source word's observed co-occurring targets.

    NULL co-occurs with every target token.  Restricting rows to observed
    pairs keeps the table linear in corpus size instead of vocab squared.
    """
    cooc: dict[str, set] = {NULL_TOKEN: set()}
    empty = True
    for bitext in corpus:
        empty = False
        targets = set(bitext.target)
        cooc[NULL_TOKEN].update(targets)
        for s in set(bitext.source):
            cooc.setdefault(s, set()).update(targets)
    if empty:
        raise EmptyCorpusError("cannot train on an empty corpus")
    theta = {}
    for s, targets in cooc.items():
        p = 1.0 / len(targets)
        theta[s] = {t: p for t in sorted(targets)}
    return theta


def _sentence_expectations(bitext: Bitext, theta, tension: float, null_prob: float):
    """E-step for one sentence: expected link counts and its log-likelihood."""
    m, n = len(bitext.source), len(bitext.target)
    weights, sums = _diagonal_weights(m, n, tension)
    null_row = theta.get(NULL_TOKEN, {})
    source_rows = [theta.get(s, {}) for s in bitext.source]
    counts: dict[str, dict[str, float]] = {}
    ll = 0.0
    for j0, t in enumerate(bitext.target):
        posteriors = [null_prob * null_row.get(t, 0.0)]
        scale = (1.0 - null_prob) / sums[j0]
        w = weights[j0]
        for i0 in range(m):
            posteriors.append(scale * w[i0] * source_rows[i0].get(t, 0.0))
        total = sum(posteriors)
        if total <= 0.0:
            continue
        ll += math.log(total)
        inv = 1.0 / total
        if posteriors[0] > 0.0:
            row = counts.setdefault(NULL_TOKEN, {})
            row[t] = row.get(t, 0.0) + posteriors[0] * inv
        for i0 in range(m):
            p = posteriors[i0 + 1]
            if p > 0.0:
                row = counts.setdefault(bitext.source[i0], {})
                row[t] = row.get(t, 0.0) + p * inv
    return counts, ll


def em_train(corpus, config: TrainConfig | None = None) -> LexicalModel:
    """Train the translation table by EM.

    Per-sentence expected counts are computed independently (parallel over
    ``config.threads`` workers) and always merged in corpus order, so the
    result is bit-identical for any shard or thread count.
    """
    if config is None:
        config = TrainConfig()
    theta = _init_uniform_cooccurrence(corpus)
    history = []
    for iteration in range(config.iterations):
        counts: dict[str, dict[str, float]] = {}
        ll = 0.0

        def job(bitext):
            return _sentence_expectations(bitext, theta, config.tension, config.null_prob)

        if config.threads > 1:
            with ThreadPoolExecutor(max_workers=config.threads) as pool:
                results = pool.map(job, corpus)
                for sent_counts, sent_ll in results:
                    ll += sent_ll
                    for s, row in sent_counts.items():
                        acc = counts.setdefault(s, {})
                        for t, c in row.items():
                            acc[t] = acc.get(t, 0.0) + c
        else:
            for bitext in corpus:
                sent_counts, sent_ll = job(bitext)
                ll += sent_ll
                for s, row in sent_counts.items():
                    acc = counts.setdefault(s, {})
                    for t, c in row.items():
                        acc[t] = acc.get(t, 0.0) + c

        theta = {}
        for s, row in counts.items():
            total = sum(row.values())
            theta[s] = {t: c / total for t, c in row.items()}
        log.debug("EM iteration %d: log-likelihood %.6f", iteration + 1, ll)
        history.append(ll)

    table = TranslationTable(mechanism="lexical", rows=theta)
    return LexicalModel(
        translation=table,
        tension=config.tension,
        null_prob=config.null_prob,
        log_likelihoods=history,
    )


def viterbi_align(bitext: Bitext, model: LexicalModel, direction: str = "forward") -> set:
    """Best-source decode for each target position; NULL emits no link.

    ``direction="reverse"`` applies a model trained on swapped bitexts and
    returns links flipped back into (source, target) coordinates.  Ties
    prefer the candidate nearest the diagonal, then the smaller index;
    an all-zero column falls to NULL, so unknown words stay unaligned.
    """
    if direction not in ("forward", "reverse"):
        raise ValueError(f"unknown direction {direction!r}")
    if direction == "reverse":
        swapped = Bitext(id=bitext.id, source=bitext.target, target=bitext.source)
        return {(j, i) for i, j in viterbi_align(swapped, model, "forward")}

    m, n = len(bitext.source), len(bitext.target)
    theta = model.translation.rows
    weights, sums = _diagonal_weights(m, n, model.tension)
    null_row = theta.get(NULL_TOKEN, {})
    source_rows = [theta.get(s, {}) for s in bitext.source]
    links = set()
    for j0, t in enumerate(bitext.target):
        j = j0 + 1
        best_i = 0
        best_score = model.null_prob * null_row.get(t, 0.0)
        best_diag = j / n
        scale = (1.0 - model.null_prob) / sums[j0]
        w = weights[j0]
        for i0 in range(m):
            score = scale * w[i0] * source_rows[i0].get(t, 0.0)
            diag = abs((i0 + 1) / m - j / n)
            if score > best_score or (score == best_score and diag < best_diag):
                best_i, best_score, best_diag = i0 + 1, score, diag
        if best_i > 0 and best_score > 0.0:
            links.add((best_i - 1, j0))
    return links


# Moses neighbor order: left, down, right, up, then the four diagonals.
_NEIGHBORS = ((-1, 0), (0, -1), (1, 0), (0, 1), (-1, -1), (-1, 1), (1, -1), (1, 1))


def gdfa_symmetrize(forward: set, reverse: set, m: int, n: int) -> set:
    """Grow-diag-final-and merge of two directional alignments.

    Starts from the intersection; grow repeatedly adds union links adjacent
    to an existing link whose source or target is still uncovered, scanning
    targets then sources in ascending order until a fixpoint; final-and adds
    union links with both endpoints uncovered, scanning forward links first,
    then reverse, in ascending order.  Both inputs must already use
    (source, target) coordinates.
    """
    for i, j in forward | reverse:
        if not (0 <= i < m and 0 <= j < n):
            raise LinkOutOfRangeError(f"link ({i},{j}) outside {m}x{n}")

    union = forward | reverse
    aligned = forward & reverse
    covered_s = {i for i, _ in aligned}
    covered_t = {j for _, j in aligned}

    changed = True
    while changed:
        changed = False
        for j in range(n):
            for i in range(m):
                if (i, j) not in aligned:
                    continue
                for di, dj in _NEIGHBORS:
                    ni, nj = i + di, j + dj
                    if (ni, nj) in union and (ni, nj) not in aligned \
                            and (ni not in covered_s or nj not in covered_t):
                        aligned.add((ni, nj))
                        covered_s.add(ni)
                        covered_t.add(nj)
                        changed = True

    for links in (sorted(forward), sorted(reverse)):
        for i, j in links:
            if (i, j) not in aligned and i not in covered_s and j not in covered_t:
                aligned.add((i, j))
                covered_s.add(i)
                covered_t.add(j)
    return aligned


# ---------------------------------------------------------------------------
# model dumps
# ---------------------------------------------------------------------------

def save_lexical_model(model: LexicalModel, path) -> None:
    from .lspmodel import dump_table

    dump_table(model.translation, path,
               header_comments=(f"lambda={model.tension!r}",
                                f"p0={model.null_prob!r}"))


def load_lexical_model(path) -> LexicalModel:
    from .lspmodel import load_table

    table, meta = load_table(path)
    return LexicalModel(
        translation=table,
        tension=float(meta.get("lambda", 4.0)),
        null_prob=float(meta.get("p0", 0.08)),
    )
