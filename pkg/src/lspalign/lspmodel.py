"""Per-mechanism translation tables and the latent-mechanism mixture.

Each alignment signal (lexical, semantic, phonetic) yields a conditional
table P(target | source) estimated by maximum likelihood from link counts.
The mixture scores each target position against every source position (and
NULL) by averaging the three tables under a uniform mechanism prior, then
links it to the argmax.
"""

import random
from dataclasses import dataclass, field

from .corpus import Bitext
from .errors import DataError, LengthMismatchError, LinkOutOfRangeError

NULL_TOKEN = "<NULL>"

MECHANISMS = ("lexical", "semantic", "phonetic")


@dataclass
class TranslationTable:
    """Rows map source token -> {target token: probability}.

    Includes a distinguished NULL source row; absent pairs score 0.
    """

    mechanism: str
    rows: dict[str, dict[str, float]] = field(default_factory=dict)

    def prob(self, source: str, target: str) -> float:
        row = self.rows.get(source)
        if row is None:
            return 0.0
        return row.get(target, 0.0)

    def row(self, source: str) -> dict[str, float]:
        return self.rows.get(source, {})


def estimate_table(corpus, alignments, mechanism: str) -> TranslationTable:
    """Maximum-likelihood table from link counts over an aligned corpus.

    cnt(s,t) counts links pairing surfaces s and t; target positions with
    no link count once toward the NULL row.  Rows are normalized to sum
    to 1.
    """
    counts: dict[str, dict[str, int]] = {}
    try:
        for bitext, links in zip(corpus, alignments, strict=True):
            m, n = len(bitext.source), len(bitext.target)
            covered_targets = set()
            for i, j in sorted(links):
                if not (0 <= i < m and 0 <= j < n):
                    raise LinkOutOfRangeError(
                        f"link ({i},{j}) outside {m}x{n} sentence {bitext.id}"
                    )
                row = counts.setdefault(bitext.source[i], {})
                row[bitext.target[j]] = row.get(bitext.target[j], 0) + 1
                covered_targets.add(j)
            for j in range(n):
                if j not in covered_targets:
                    row = counts.setdefault(NULL_TOKEN, {})
                    row[bitext.target[j]] = row.get(bitext.target[j], 0) + 1
    except ValueError:
        raise LengthMismatchError("corpus and alignments differ in length") from None

    rows = {}
    for source, row_counts in counts.items():
        total = sum(row_counts.values())
        rows[source] = {t: c / total for t, c in row_counts.items()}
    return TranslationTable(mechanism=mechanism, rows=rows)


@dataclass
class LspModel:
    """Exactly one table per mechanism; the mechanism prior is uniform."""

    tables: dict[str, TranslationTable]

    def __post_init__(self):
        if set(self.tables) != set(MECHANISMS):
            raise DataError(
                f"model needs tables for {set(MECHANISMS)}, got {set(self.tables)}"
            )


def posterior_scores(bitext: Bitext, model: LspModel, eps: float = 0.0):
    """Mixture score of every source candidate for every target position.

    Returns a list over target positions; each entry is a list of scores
    indexed 0..m where index 0 is the NULL candidate.  ``eps`` is added to
    each per-mechanism lookup (0 keeps pure maximum-likelihood scoring).
    """
    rows_by_mech = [model.tables[k].rows for k in MECHANISMS]
    candidates = [NULL_TOKEN] + list(bitext.source)
    cand_rows = [[rows.get(s) for s in candidates] for rows in rows_by_mech]
    scores = []
    for t in bitext.target:
        per_target = []
        for idx in range(len(candidates)):
            total = 0.0
            for mech in range(3):
                row = cand_rows[mech][idx]
                theta = row.get(t, 0.0) if row is not None else 0.0
                total += theta + eps
            per_target.append(total / 3.0)
        scores.append(per_target)
    return scores


def _argmax_with_diagonal_ties(per_target, j, m, n):
    """Best candidate index for target position j (1-based math inside).

    Highest score wins; exact ties prefer the candidate nearest the
    diagonal (|i/m - j/n|, NULL sitting at i=0), then the smaller index.
    """
    best_idx = 0
    best_score = per_target[0]
    best_diag = abs((j + 1) / n)  # i = 0 for NULL
    for idx in range(1, m + 1):
        score = per_target[idx]
        diag = abs(idx / m - (j + 1) / n)
        if score > best_score or (score == best_score and diag < best_diag):
            best_idx, best_score, best_diag = idx, score, diag
    return best_idx, best_score


def posterior_align_scored(bitext: Bitext, model: LspModel, eps: float = 0.0):
    """Posterior alignment plus per-linked-position normalized confidence.

    A position whose scores are all zero, or whose argmax is NULL, is left
    unaligned (projection precision matters more than recall).
    """
    m, n = len(bitext.source), len(bitext.target)
    scores = posterior_scores(bitext, model, eps)
    links = set()
    confidence = {}
    for j in range(n):
        per_target = scores[j]
        total = sum(per_target)
        if total <= 0.0:
            continue
        best_idx, best_score = _argmax_with_diagonal_ties(per_target, j, m, n)
        if best_idx == 0:
            continue
        links.add((best_idx - 1, j))
        confidence[j] = best_score / total
    return links, confidence


def posterior_align(bitext: Bitext, model: LspModel, eps: float = 0.0) -> set:
    links, _ = posterior_align_scored(bitext, model, eps)
    return links


def sample_translation(source, model: LspModel, n: int, seed: int) -> list[str]:
    """Generate a length-n target sequence from the mixture.

    Each position draws an alignment uniformly over {NULL} + source
    positions, a mechanism uniformly over the three tables, then a target
    token from the chosen row.  An empty row falls back to emitting the
    chosen source token verbatim, keeping the sampler total.
    """
    rng = random.Random(seed)
    m = len(source)
    out = []
    for _ in range(n):
        a = rng.randint(0, m)
        mechanism = MECHANISMS[rng.randint(0, 2)]
        token = NULL_TOKEN if a == 0 else source[a - 1]
        row = model.tables[mechanism].rows.get(token)
        if not row:
            out.append(token)
            continue
        u = rng.random()
        cum = 0.0
        drawn = None
        for t, p in sorted(row.items()):
            cum += p
            if u < cum:
                drawn = t
                break
        if drawn is None:  # guard against rounding at u ~ 1.0
            drawn = max(row)
        out.append(drawn)
    return out


# ---------------------------------------------------------------------------
# table dumps (TSV: mechanism  source  target  theta)
# ---------------------------------------------------------------------------

def dump_table(table: TranslationTable, path, header_comments=()) -> None:
    """Write rows sorted by (source, descending theta, target); reloadable."""
    with open(path, "w", encoding="utf-8") as fh:
        for comment in header_comments:
            fh.write(f"# {comment}\n")
        for source in sorted(table.rows):
            row = table.rows[source]
            for target, theta in sorted(row.items(), key=lambda kv: (-kv[1], kv[0])):
                fh.write(f"{table.mechanism}\t{source}\t{target}\t{theta!r}\n")


def load_table(path) -> tuple[TranslationTable, dict[str, str]]:
    """Reload a table dump; returns the table and any '# key=value' header."""
    rows: dict[str, dict[str, float]] = {}
    mechanism = None
    meta: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, value = body.split("=", 1)
                    meta[key.strip()] = value.strip()
                continue
            cols = line.rstrip("\n").split("\t")
            if len(cols) != 4:
                raise DataError(
                    f"expected 4 tab-separated columns, got {len(cols)}",
                    path=str(path), line=lineno,
                )
            mech, source, target, theta = cols
            if mechanism is None:
                mechanism = mech
            elif mech != mechanism:
                raise DataError(
                    f"mixed mechanisms {mechanism!r} and {mech!r} in one dump",
                    path=str(path), line=lineno,
                )
            try:
                value = float(theta)
            except ValueError:
                raise DataError(f"bad probability {theta!r}",
                                path=str(path), line=lineno) from None
            rows.setdefault(source, {})[target] = value
    if mechanism is None:
        raise DataError("table dump has no rows", path=str(path))
    return TranslationTable(mechanism=mechanism, rows=rows), meta
