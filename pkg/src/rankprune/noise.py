"""Confident-counts noise-rate estimation and its closed-form analysis.

The estimator thresholds ``g`` at the mean predicted probability of each
observed class, ``LB = mean(g | s=1)`` and ``UB = mean(g | s=0)``, and counts
four "confident" sets::

    P~_{y=1} = {s=1, g >= LB}     N~_{y=1} = {s=0, g >= LB}
    P~_{y=0} = {s=1, g <= UB}     N~_{y=0} = {s=0, g <= UB}

giving ``rho1_hat = |N~_{y=1}| / (|N~_{y=1}| + |P~_{y=1}|)`` and
``rho0_hat = |P~_{y=0}| / (|P~_{y=0}| + |N~_{y=0}|)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import ProbEstimates, Thresholds, as_labels
from .errors import DegenerateCounts, EmptyClass, LengthMismatch


@dataclass(frozen=True)
class ConfidentCounts:
    n_Py1: int
    n_Ny1: int
    n_Py0: int
    n_Ny0: int

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.n_Py1, self.n_Ny1, self.n_Py0, self.n_Ny0)


@dataclass(frozen=True)
class TheoryInputs:
    """Quantities entering the closed-form estimator expressions.

    Sizes are those of the true classes ``P`` and ``N``.  The four deviation
    counts are::

        dP1 = |{y=1, g <  LB}|    dN1 = |{y=0, g >= LB}|
        dP0 = |{y=1, g <= UB}|    dN0 = |{y=0, g >  UB}|

    ``overlap`` is the fraction of examples in the Bayes-overlap region and
    ``mean_dg_pos`` / ``mean_dg_neg`` are the means of ``g - g*`` over the
    observed positive and negative sets.
    """

    rho1: float
    rho0: float
    size_P: int
    size_N: int
    dP1: int = 0
    dN1: int = 0
    dP0: int = 0
    dN0: int = 0
    overlap: float = 0.0
    mean_dg_pos: float = 0.0
    mean_dg_neg: float = 0.0
    p_s1: Optional[float] = None

    def __post_init__(self):
        if self.dP1 > self.size_P or self.dP0 > self.size_P:
            raise ValueError("positive deviation counts exceed |P|")
        if self.dN1 > self.size_N or self.dN0 > self.size_N:
            raise ValueError("negative deviation counts exceed |N|")
        if min(self.dP1, self.dN1, self.dP0, self.dN0) < 0:
            raise ValueError("deviation counts must be non-negative")
        if not (0.0 <= self.overlap <= 1.0):
            raise ValueError("overlap must lie in [0, 1]")


def _check(g, s):
    g = g.g if isinstance(g, ProbEstimates) else np.asarray(g, dtype=np.float64)
    s = as_labels(s)
    if g.shape != s.shape:
        raise LengthMismatch(f"g has {g.shape[0]} entries, labels {s.shape[0]}")
    return g, s


def thresholds(g, s) -> Thresholds:
    """Per-class mean of ``g``: ``lb_y1`` over ``s=1``, ``ub_y0`` over ``s=0``."""
    g, s = _check(g, s)
    pos = s == 1
    if not pos.any() or pos.all():
        raise EmptyClass("both observed classes must be non-empty")
    return Thresholds(lb_y1=_mean_within(g[pos]), ub_y0=_mean_within(g[~pos]))


def _mean_within(v: np.ndarray) -> float:
    # a rounded mean can fall just outside [min, max], e.g. for constant v
    return float(min(max(v.mean(), v.min()), v.max()))


def confident_counts(g, s, t: Thresholds) -> ConfidentCounts:
    g, s = _check(g, s)
    pos = s == 1
    above = g >= t.lb_y1
    below = g <= t.ub_y0
    return ConfidentCounts(
        n_Py1=int(np.count_nonzero(pos & above)),
        n_Ny1=int(np.count_nonzero(~pos & above)),
        n_Py0=int(np.count_nonzero(pos & below)),
        n_Ny0=int(np.count_nonzero(~pos & below)),
    )


def estimate_rates(counts: ConfidentCounts) -> tuple[float, float]:
    """``(rho1_conf, rho0_conf)`` from the four confident counts.

    Raises ``DegenerateCounts`` rather than reporting 0/0 as zero noise.
    """
    d1 = counts.n_Ny1 + counts.n_Py1
    d0 = counts.n_Py0 + counts.n_Ny0
    if d1 == 0 or d0 == 0:
        raise DegenerateCounts(
            f"no confident examples for y={'1' if d1 == 0 else '0'}: {counts.as_tuple()}"
        )
    return counts.n_Ny1 / d1, counts.n_Py0 / d0


def estimate_noise(g, s) -> tuple[Thresholds, ConfidentCounts, float, float]:
    """Thresholds, counts and both rate estimates in one call."""
    t = thresholds(g, s)
    c = confident_counts(g, s, t)
    rho1, rho0 = estimate_rates(c)
    return t, c, rho1, rho0


def theoretical_rates(t: TheoryInputs) -> tuple[float, float, float, float]:
    """Predicted ``(rho1_conf, rho0_conf, LB, UB)`` for an imperfect ``g``.

    With every deviation term at zero this returns the true rates and the
    ideal thresholds ``LB* = (1-rho1)(1-pi1) + rho0 pi1`` and
    ``UB* = (1-rho1) pi0 + rho0 (1-pi0)``.
    """
    rho1, rho0 = t.rho1, t.rho0
    gap = 1.0 - rho1 - rho0
    den1 = t.size_P - t.dP1 + t.dN1
    den0 = t.size_N - t.dN0 + t.dP0
    if den1 <= 0 or den0 <= 0:
        raise DegenerateCounts(f"zero denominator in theory estimate ({den1}, {den0})")
    rho1_thry = rho1 + gap * t.dN1 / den1
    rho0_thry = rho0 + gap * t.dP0 / den0

    n = t.size_P + t.size_N
    p_y1 = t.size_P / n
    p_s1 = t.p_s1 if t.p_s1 is not None else (1 - rho1) * p_y1 + rho0 * (1 - p_y1)
    pi1 = rho0 * (1 - p_y1) / p_s1
    pi0 = rho1 * p_y1 / (1 - p_s1)
    lb_star = (1 - rho1) * (1 - pi1) + rho0 * pi1
    ub_star = (1 - rho1) * pi0 + rho0 * (1 - pi0)
    lb = lb_star + t.mean_dg_pos - gap**2 * t.overlap / p_s1
    ub = ub_star + t.mean_dg_neg + gap**2 * t.overlap / (1 - p_s1)
    return rho1_thry, rho0_thry, lb, ub


def theory_inputs_from_sample(
    g,
    s,
    y,
    rho1: float,
    rho0: float,
    g_star=None,
    overlap: float = 0.0,
) -> TheoryInputs:
    """Assemble ``TheoryInputs`` from a sample whose hidden labels are known.

    The deviation sets are taken against the empirical thresholds of ``g``.
    ``g_star`` (the true ``P(s=1|x)``) is needed only for the threshold
    expressions; the rate expressions depend on the counts alone.
    """
    g, s = _check(g, s)
    y = as_labels(y, "hidden labels")
    t = thresholds(g, s)
    in_P = y == 1
    dg_pos = dg_neg = 0.0
    if g_star is not None:
        dg = g - np.asarray(g_star, dtype=np.float64)
        dg_pos = float(dg[s == 1].mean())
        dg_neg = float(dg[s == 0].mean())
    return TheoryInputs(
        rho1=float(rho1),
        rho0=float(rho0),
        size_P=int(in_P.sum()),
        size_N=int((~in_P).sum()),
        dP1=int(np.count_nonzero(in_P & (g < t.lb_y1))),
        dN1=int(np.count_nonzero(~in_P & (g >= t.lb_y1))),
        dP0=int(np.count_nonzero(in_P & (g <= t.ub_y0))),
        dN0=int(np.count_nonzero(~in_P & (g > t.ub_y0))),
        overlap=float(overlap),
        mean_dg_pos=dg_pos,
        mean_dg_neg=dg_neg,
        p_s1=float(np.mean(s == 1)),
    )
