"""Detection-to-target association and p_MD / FA / F1 scoring."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Main-lobe broadening factor per window family, applied to the nominal
# (range, velocity) resolutions to size the association gate.
GATE_KAPPA = {
    "rectangular": 1.5,
    "hann": 2.0,
    "chebyshev": 2.5,
    "dpss": 2.0,
}


@dataclass(frozen=True)
class AssociationGate:
    """Half-widths of the box inside which a detection counts as a target hit."""

    range_halfwidth_m: float
    velocity_halfwidth_mps: float

    def __post_init__(self):
        if self.range_halfwidth_m <= 0 or self.velocity_halfwidth_mps <= 0:
            raise ValueError("gate half-widths must be positive")

    @classmethod
    def for_window(
        cls, window_kind: str, range_resolution_m: float, velocity_resolution_mps: float
    ) -> "AssociationGate":
        kappa = GATE_KAPPA.get(window_kind, 2.0)
        return cls(
            range_halfwidth_m=kappa * range_resolution_m,
            velocity_halfwidth_mps=kappa * velocity_resolution_mps,
        )


@dataclass
class TrialScore:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn) < 0:
            raise ValueError("counts must be >= 0")

    @property
    def p_md(self) -> float:
        n = self.tp + self.fn
        return self.fn / n if n else 0.0

    @property
    def f1(self) -> float:
        denom = 2 * self.tp + self.fp + self.fn
        return 2 * self.tp / denom if denom else 1.0


def associate(dets: list, targets: list, gate: AssociationGate) -> TrialScore:
    """Score a detection list against ground-truth targets.

    Every detection inside at least one target's gate box is assigned to the
    nearest gated target (Euclidean distance normalized by the gate
    half-widths). A target scores one TP when it has any assigned detection
    (the strongest one); surplus in-gate detections are dropped, since only
    detections outside every main lobe count as false alarms. Out-of-gate
    detections are FP; targets with no detection are FN.
    """
    assigned = {}  # target index -> list of (power, det)
    fp = 0
    for det in dets:
        best = None
        best_dist = None
        for i, t in enumerate(targets):
            dr = det.range_m - t.range_m
            dv = det.velocity_mps - t.radial_velocity_mps
            if abs(dr) <= gate.range_halfwidth_m and abs(dv) <= gate.velocity_halfwidth_mps:
                dist = np.hypot(
                    dr / gate.range_halfwidth_m, dv / gate.velocity_halfwidth_mps
                )
                if best_dist is None or dist < best_dist:
                    best, best_dist = i, dist
        if best is None:
            fp += 1
        else:
            assigned.setdefault(best, []).append(det)
    tp = len(assigned)
    fn = len(targets) - tp
    return TrialScore(tp=tp, fp=fp, fn=fn)


@dataclass
class CurvePoint:
    """Aggregate of many trials at one grid point."""

    p_md: float
    p_md_ci: float
    fa_mean: float
    f1: float
    f1_ci: float
    trials: int


def score_curve(scores: list) -> CurvePoint:
    """Aggregate trial scores: per-trial means for p_md and FA, micro F1.

    Confidence intervals are 95% normal-approximation half-widths over the
    per-trial statistics.
    """
    if not scores:
        raise ValueError("cannot aggregate an empty score list")
    n = len(scores)
    p_mds = np.array([s.p_md for s in scores])
    fas = np.array([s.fp for s in scores])
    f1s = np.array([s.f1 for s in scores])
    tp = sum(s.tp for s in scores)
    fp = sum(s.fp for s in scores)
    fn = sum(s.fn for s in scores)
    denom = 2 * tp + fp + fn
    micro_f1 = 2 * tp / denom if denom else 1.0

    def half_width(x):
        if n < 2:
            return 0.0
        return 1.96 * float(np.std(x, ddof=1)) / np.sqrt(n)

    return CurvePoint(
        p_md=float(p_mds.mean()),
        p_md_ci=half_width(p_mds),
        fa_mean=float(fas.mean()),
        f1=micro_f1,
        f1_ci=half_width(f1s),
        trials=n,
    )
