"""Closed forms for the three extremal problems and a working recovery loop.

On the class of charges with unit polar gradient bound: the modulus of
continuity Omega(delta), the best bounded-operator approximation error E_N,
and the optimal-recovery error (which equals Omega).  The mixed-derivative
setting uses the same formulas with mu = 2^(d-m) absorbed into the sup-norm
data term.  Numerics only cross-check attainment; the optimal operator is
the window average at the delta-matched radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .charges import Charge
from .geometry import ConvexBody, Cone, GeometryError, volume_body_cone
from .golden import golden_min
from .grids import GridField
from .steklov import (
    MixedParams,
    SteklovParams,
    mixed_operator_field,
    steklov_apply,
    steklov_field,
    _valid_window_mask,
)

__all__ = [
    "ProblemSetting",
    "omega",
    "stechkin_error",
    "optimal_h_for_delta",
    "optimal_h_for_N",
    "sandwich_check",
    "RecoveryResult",
    "recover_derivative",
    "recovery_error",
]


@dataclass(frozen=True)
class ProblemSetting:
    """Charge setting (general K, C) or mixed setting (box + orthant)."""

    kind: str  # "charge" | "mixed"
    d: int
    m: int = 0
    mu: float = 1.0
    K: ConvexBody | None = None
    C: Cone | None = None

    @classmethod
    def charge(cls, K: ConvexBody, C: Cone, mu: float | None = None) -> "ProblemSetting":
        if mu is None:
            if K.is_box and C.kind == "orthant":
                mu = volume_body_cone(K, C, "exact").value
            else:
                mu = volume_body_cone(K, C, "grid", n=256).value
        if mu <= 0:
            raise GeometryError("mu(K∩C) must be positive")
        m = C.m if C.kind == "orthant" else 0
        return cls(kind="charge", d=K.d, m=m, mu=float(mu), K=K, C=C)

    @classmethod
    def mixed(cls, d: int, m: int) -> "ProblemSetting":
        if not (0 <= m <= d):
            raise GeometryError("need 0 <= m <= d")
        return cls(kind="mixed", d=d, m=m, mu=float(2 ** (d - m)),
                   K=ConvexBody.box(d), C=Cone.orthant(d, m))


def omega(setting: ProblemSetting, delta: float) -> float:
    """Modulus of continuity of the derivative operator on the unit class."""
    if delta <= 0:
        raise GeometryError("delta must be positive")
    d = setting.d
    if setting.kind == "charge":
        return ((d + 1) * delta / setting.mu) ** (1.0 / (d + 1))
    return (2**setting.m * (d + 1) * delta) ** (1.0 / (d + 1))


def stechkin_error(setting: ProblemSetting, N: float) -> float:
    """Best approximation by bounded operators of norm <= N."""
    if N <= 0:
        raise GeometryError("N must be positive")
    d = setting.d
    if setting.kind == "charge":
        return d / (d + 1) * (1.0 / (N * setting.mu)) ** (1.0 / d)
    return d / (d + 1) * (2**setting.m / N) ** (1.0 / d)


def optimal_h_for_delta(setting: ProblemSetting, delta: float) -> float:
    """Window radius minimizing the additive bound at data error delta;
    the resulting bound value equals omega(delta) exactly."""
    if delta <= 0:
        raise GeometryError("delta must be positive")
    d = setting.d
    if setting.kind == "charge":
        return ((d + 1) * delta / setting.mu) ** (1.0 / (d + 1))
    return ((d + 1) * 2**setting.m * delta) ** (1.0 / (d + 1))


def optimal_h_for_N(setting: ProblemSetting, N: float) -> float:
    """Window radius at which the operator norm equals N."""
    if N <= 0:
        raise GeometryError("N must be positive")
    d = setting.d
    if setting.kind == "charge":
        return (1.0 / (N * setting.mu)) ** (1.0 / d)
    return (2**setting.m / N) ** (1.0 / d)


def sandwich_check(setting: ProblemSetting, deltas, rel_tol: float = 1e-6,
                   n_grid: int = 64):
    """For each delta: inf_N {E_N + N*delta} vs omega(delta).

    The infimum is taken over a log-spaced N grid followed by golden-section
    refinement.  Returns (rows, ok) where each row records both sides.
    """
    rows = []
    ok = True
    for delta in deltas:
        if delta <= 0:
            raise GeometryError("delta grid must be positive")

        def bound(logN, _delta=delta):
            return stechkin_error(setting, math.exp(logN)) + math.exp(logN) * _delta

        lo = math.log(1e-3 / setting.mu)
        hi = math.log(1e3 / setting.mu)
        grid = np.linspace(lo, hi, n_grid)
        vals = [bound(t) for t in grid]
        j = int(np.argmin(vals))
        a = grid[max(j - 1, 0)]
        b = grid[min(j + 1, n_grid - 1)]
        t, best = golden_min(bound, a, b, iters=80)
        om = omega(setting, delta)
        rel = abs(best - om) / om
        rows.append(
            {
                "delta": float(delta),
                "omega": om,
                "inf_EN_plus_Ndelta": best,
                "argmin_N": math.exp(t),
                "rel_err": rel,
            }
        )
        ok = ok and rel <= rel_tol
    return rows, ok


@dataclass
class RecoveryResult:
    estimate: np.ndarray  # values on the input grid
    valid: np.ndarray  # centers whose window fits the sampled region
    bound: float
    h: float
    params: SteklovParams | MixedParams
    warnings: list = field(default_factory=list)


def recover_derivative(nu_noisy: Charge, delta: float,
                       setting: ProblemSetting) -> RecoveryResult:
    """Recover the density from delta-accurate data by the optimal window
    average; the guaranteed worst-case error is omega(delta)."""
    if delta <= 0:
        raise GeometryError("delta must be positive")
    h = optimal_h_for_delta(setting, delta)
    bound = omega(setting, delta)
    warnings = []
    if setting.kind == "charge":
        p = SteklovParams(K=setting.K, C=setting.C, h=h, mu=setting.mu)
        if nu_noisy.is_zero:
            grid = nu_noisy.density.grid
            est = np.zeros(grid.shape)
            valid = _valid_window_mask(grid, nu_noisy.cone, h,
                                       setting.K.bounding_radii())
        else:
            est, valid = steklov_field(nu_noisy, p)
        return RecoveryResult(est, valid, bound, h, p, warnings)
    # mixed setting: snap h to a step commensurate with every axis (the
    # coarsest spacing; finer axes must divide it)
    grid = nu_noisy.density.grid
    sp = float(np.max(grid.spacing))
    for s in grid.spacing:
        r = sp / float(s)
        if abs(r - round(r)) > 1e-9:
            raise GeometryError(
                "mixed recovery needs pairwise commensurate grid spacings"
            )
    k = max(1, round(h / sp))
    h_snap = k * sp
    if abs(h_snap - h) > 1e-12 * h:
        warnings.append(f"h snapped from {h:.6g} to {h_snap:.6g}")
    p = MixedParams(d=setting.d, m=setting.m, h=h_snap)
    out = mixed_operator_field(nu_noisy.density, p)
    est = np.full(grid.shape, np.nan)
    valid = np.zeros(grid.shape, dtype=bool)
    # place the trimmed field back into the full grid
    sl = []
    for axis in range(grid.d):
        lo_cells = round((out.grid.lo[axis] - grid.lo[axis]) / grid.spacing[axis])
        sl.append(slice(lo_cells, lo_cells + out.grid.shape[axis]))
    est[tuple(sl)] = out.values
    valid[tuple(sl)] = True
    return RecoveryResult(est, valid, bound, h_snap, p, warnings)


def recovery_error(truth: GridField, nu_noisy: Charge,
                   result: RecoveryResult) -> float:
    """Measured sup |true density - estimate| over valid centers, plus any
    analytic candidate points of the truth."""
    diff = np.abs(truth.values - result.estimate)
    best = float(np.max(np.where(result.valid, diff, -np.inf)))
    if truth.value_fn is not None and isinstance(result.params, SteklovParams):
        for cand in [np.zeros(truth.grid.d)] + list(truth.sup_candidates):
            cand = np.asarray(cand, dtype=float)
            if not nu_noisy.cone.member_closure(cand):
                continue
            sval = steklov_apply(nu_noisy, result.params, cand)
            v = abs(float(truth.value_fn(cand[None, :])[0]) - sval)
            best = max(best, v)
    return best
