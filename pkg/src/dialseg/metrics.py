"""Segmentation evaluation: Pk, WindowDiff, boundary macro-F1, depth variance.

Pk slides a two-position probe ``(i, i + k_win)`` over the dialogue and
counts positions where reference and hypothesis disagree on whether the two
utterances fall in the same segment. WindowDiff slides the same probe but
penalizes any mismatch in the number of boundaries inside the window. Both
are error rates in ``[0, 1]``; 0 is a perfect segmentation.

The window defaults to half the mean reference segment length,
``max(1, round(n / (2 * (n_boundaries + 1))))``, and is always reported so
results stay interpretable.

Corpus-level Pk/WD pool probes across dialogues (total disagreements over
total probes); the per-dialogue unweighted means are also computed and
reported alongside. Macro-F1 pools all candidate intervals corpus-wide and
averages the F1 of the boundary and non-boundary classes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .corpus import AnnotatedDialogue
from .errors import DialsegError
from .segmenter import DepthProfile, Segmentation


class MetricInputError(DialsegError):
    pass


@dataclass(frozen=True)
class EvalReport:
    """Corpus-level evaluation summary (pooled headline values)."""

    pk: float
    window_diff: float
    f1_macro: float
    n_dialogues: int
    k_win: int
    depth_variance: float | None = None
    pk_dialogue_mean: float | None = None
    wd_dialogue_mean: float | None = None

    def to_dict(self) -> dict:
        d = {
            "pk": self.pk,
            "window_diff": self.window_diff,
            "f1_macro": self.f1_macro,
            "n_dialogues": self.n_dialogues,
            "k_win": self.k_win,
        }
        if self.depth_variance is not None:
            d["depth_variance"] = self.depth_variance
        if self.pk_dialogue_mean is not None:
            d["pk_dialogue_mean"] = self.pk_dialogue_mean
        if self.wd_dialogue_mean is not None:
            d["wd_dialogue_mean"] = self.wd_dialogue_mean
        return d


def default_window(n: int, n_ref_boundaries: int) -> int:
    """Half the mean reference segment length, floored at 1."""
    return max(1, int(round(n / (2.0 * (n_ref_boundaries + 1)))))


def _check_pair(ref: AnnotatedDialogue, hyp: Segmentation) -> int:
    if hyp.dialogue_id and hyp.dialogue_id != ref.dialogue.id:
        raise MetricInputError(
            f"hypothesis is for dialogue {hyp.dialogue_id!r}, reference for {ref.dialogue.id!r}"
        )
    n = len(ref.dialogue)
    for b in hyp.boundaries:
        if b < 0 or b >= n - 1:
            raise MetricInputError(
                f"hypothesis boundary {b} out of range for dialogue of length {n}"
            )
    return n


def _segment_ids(n: int, boundaries: Iterable[int]) -> np.ndarray:
    starts = np.zeros(n, dtype=np.int64)
    for b in boundaries:
        starts[b + 1] = 1
    return np.cumsum(starts)


def _boundary_prefix(n: int, boundaries: Iterable[int]) -> np.ndarray:
    ind = np.zeros(n - 1, dtype=np.int64)
    for b in boundaries:
        ind[b] = 1
    return np.concatenate(([0], np.cumsum(ind)))


def _probe_counts(ref: AnnotatedDialogue, hyp: Segmentation, k_win: int | None) -> tuple[int, int, int, int]:
    """(pk disagreements, wd mismatches, probe count, window used)."""
    n = _check_pair(ref, hyp)
    k = default_window(n, len(ref.boundaries)) if k_win is None else int(k_win)
    if k < 1:
        raise MetricInputError(f"window size must be >= 1, got {k}")
    if n <= k:
        raise MetricInputError(
            f"dialogue {ref.dialogue.id!r} of length {n} leaves no probes for window {k}"
        )
    ids_ref = _segment_ids(n, ref.boundaries)
    ids_hyp = _segment_ids(n, hyp.boundaries)
    same_ref = ids_ref[:-k] == ids_ref[k:]
    same_hyp = ids_hyp[:-k] == ids_hyp[k:]
    pk_err = int(np.count_nonzero(same_ref != same_hyp))

    pre_ref = _boundary_prefix(n, ref.boundaries)
    pre_hyp = _boundary_prefix(n, hyp.boundaries)
    cnt_ref = pre_ref[k:] - pre_ref[:-k]
    cnt_hyp = pre_hyp[k:] - pre_hyp[:-k]
    wd_err = int(np.count_nonzero(cnt_ref != cnt_hyp))
    return pk_err, wd_err, n - k, k


def pk(ref: AnnotatedDialogue, hyp: Segmentation, k_win: int | None = None) -> float:
    """Probe error rate on same-segment agreement."""
    err, _, probes, _ = _probe_counts(ref, hyp, k_win)
    return err / probes


def window_diff(ref: AnnotatedDialogue, hyp: Segmentation, k_win: int | None = None) -> float:
    """Probe error rate on boundary-count agreement inside the window."""
    _, err, probes, _ = _probe_counts(ref, hyp, k_win)
    return err / probes


def _f1(tp: int, fp: int, fn: int) -> float:
    if tp == 0 and fp == 0 and fn == 0:
        return 1.0  # class absent and never predicted: vacuously perfect
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2.0 * precision * recall / (precision + recall)


def _paired(refs: Sequence[AnnotatedDialogue], hyps: Sequence[Segmentation]):
    if len(refs) != len(hyps):
        raise MetricInputError(f"{len(refs)} references vs {len(hyps)} hypotheses")
    by_id = {h.dialogue_id: h for h in hyps if h.dialogue_id}
    if len(by_id) == len(refs):
        try:
            return [(r, by_id[r.dialogue.id]) for r in refs]
        except KeyError as missing:
            raise MetricInputError(f"no hypothesis for dialogue {missing}") from None
    return list(zip(refs, hyps))  # positional alignment for anonymous hypotheses


def boundary_f1(refs: Sequence[AnnotatedDialogue], hyps: Sequence[Segmentation]) -> float:
    """Macro-F1 of the boundary / non-boundary classes over all candidate
    intervals pooled across the corpus."""
    tp = fp = fn = tn = 0
    for ref, hyp in _paired(refs, hyps):
        n = _check_pair(ref, hyp)
        for i in range(n - 1):
            in_ref = i in ref.boundaries
            in_hyp = i in hyp.boundaries
            if in_ref and in_hyp:
                tp += 1
            elif in_hyp:
                fp += 1
            elif in_ref:
                fn += 1
            else:
                tn += 1
    pos = _f1(tp, fp, fn)
    neg = _f1(tn, fn, fp)  # swapped errors: missed negatives are the fp of the positive class
    return (pos + neg) / 2.0


def depth_variance(profiles: Sequence[DepthProfile]) -> float:
    """Mean over dialogues of the population variance of depth scores."""
    if not profiles:
        raise MetricInputError("no depth profiles given")
    return float(np.mean([np.var(np.asarray(p.depths, dtype=np.float64)) for p in profiles]))


def evaluate_corpus(
    refs: Sequence[AnnotatedDialogue],
    hyps: Sequence[Segmentation],
    k_win: int | None = None,
    depth_profiles: Sequence[DepthProfile] | None = None,
) -> EvalReport:
    """Full corpus evaluation. ``k_win`` overrides the per-dialogue default
    window; the reported window is the override or the rounded mean of the
    per-dialogue windows actually used."""
    pairs = _paired(refs, hyps)
    if not pairs:
        raise MetricInputError("no dialogues to evaluate")
    pk_err = wd_err = probes = 0
    pk_vals, wd_vals, windows = [], [], []
    for ref, hyp in pairs:
        e_pk, e_wd, p, k_used = _probe_counts(ref, hyp, k_win)
        pk_err += e_pk
        wd_err += e_wd
        probes += p
        pk_vals.append(e_pk / p)
        wd_vals.append(e_wd / p)
        windows.append(k_used)
    return EvalReport(
        pk=pk_err / probes,
        window_diff=wd_err / probes,
        f1_macro=boundary_f1(refs, hyps),
        n_dialogues=len(pairs),
        k_win=int(k_win) if k_win is not None else int(round(float(np.mean(windows)))),
        depth_variance=depth_variance(depth_profiles) if depth_profiles else None,
        pk_dialogue_mean=float(np.mean(pk_vals)),
        wd_dialogue_mean=float(np.mean(wd_vals)),
    )


def report_json(report: EvalReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True)


def report_table(rows: Sequence[tuple[str, EvalReport]]) -> str:
    """Aligned text table, Pk and WD scaled by 100."""
    header = ("Method", "Pk", "WD", "F1")
    body = [
        (name, f"{r.pk * 100:.2f}", f"{r.window_diff * 100:.2f}", f"{r.f1_macro:.3f}")
        for name, r in rows
    ]
    widths = [max(len(row[i]) for row in [header, *body]) for i in range(4)]
    lines = []
    for row in [header, *body]:
        lines.append(
            row[0].ljust(widths[0])
            + "  "
            + "  ".join(cell.rjust(w) for cell, w in zip(row[1:], widths[1:]))
        )
    return "\n".join(lines)
