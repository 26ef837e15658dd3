"""Existence of an underlying joint probability matching a moment set.

Three routes:

* ``d_interval``     -- three times only.  The unmeasured triple correlator
                        is the single free parameter; each outcome's
                        nonnegativity gives a one-sided bound on it, so
                        feasibility reduces to a closed-form interval test.
* ``lp_feasibility`` -- three or four times.  Phase-1 simplex over the
                        outcome weights with equality rows for
                        normalization, averages and pair correlators.
* ``scan_oracle``    -- brute-force grid scan of the triple correlator,
                        kept as an independent cross-check for tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ValidationError
from .measurement import MomentSet, Outcome, ProbabilityTable, outcomes
from .tolerances import TOL

#: |interval width| below which a verdict is flagged as marginal
_MARGINAL_WIDTH = 2e-9


@dataclass(frozen=True)
class FeasibilityResult:
    """Outcome of a joint-probability existence test.

    ``d_interval`` is only set by the three-time closed form: bounds
    (lo, hi) on the triple correlator, with lo > hi exactly when
    infeasible.  On success ``witness_table`` is a nonnegative normalized
    joint distribution reproducing the input moments; otherwise
    ``certificate`` describes why none exists.
    """

    feasible: bool
    d_interval: tuple[float, float] | None = None
    witness_table: ProbabilityTable | None = None
    certificate: str | None = None

    def to_jsonable(self) -> dict:
        return {
            "feasible": self.feasible,
            "d_interval": list(self.d_interval) if self.d_interval is not None else None,
            "witness": self.witness_table.to_jsonable() if self.witness_table else None,
            "certificate": self.certificate,
        }


def _expansion_base(m: MomentSet) -> tuple[list[Outcome], np.ndarray, np.ndarray]:
    """Per-outcome triple-free expansion value E(s) and parity s1*s2*s3,
    where p(s) = (E(s) + parity * D) / 8."""
    outs = outcomes(3)
    e = np.empty(8)
    parity = np.empty(8)
    for k, s in enumerate(outs):
        e[k] = (
            1.0
            + s[0] * m.averages[0]
            + s[1] * m.averages[1]
            + s[2] * m.averages[2]
            + s[0] * s[1] * m.corr(0, 1)
            + s[1] * s[2] * m.corr(1, 2)
            + s[0] * s[2] * m.corr(0, 2)
        )
        parity[k] = s[0] * s[1] * s[2]
    return outs, e, parity


def triple_expansion_table(m: MomentSet, d: float) -> ProbabilityTable:
    """Three-time joint table from the moment expansion at triple
    correlator value d (must be nonnegative to validate)."""
    outs, e, parity = _expansion_base(m)
    weights = {s: (e[k] + parity[k] * d) / 8.0 for k, s in enumerate(outs)}
    return ProbabilityTable(kind="joint", time_indices=(0, 1, 2), weights=weights)


def _require_three_time_no_triple(m: MomentSet, op: str) -> None:
    if m.n_times != 3:
        raise ValidationError(f"{op}: need 3 times, got {m.n_times}")
    if m.triple is not None:
        raise ValidationError(f"{op}: triple correlator must be unmeasured (None)")


def d_interval(m: MomentSet) -> FeasibilityResult:
    """Closed-form feasibility for three times.

    Outcomes with positive parity force D >= -E(s), negative parity force
    D <= E(s); a joint distribution exists iff the resulting interval is
    nonempty (up to a 2e-12 tie slack so the verdict matches the margin
    convention of the inequality checks).  The witness sits at the interval
    midpoint, which is automatically inside [-1, 1].
    """
    _require_three_time_no_triple(m, "d_interval")
    _, e, parity = _expansion_base(m)
    lo = float((-e[parity > 0]).max())
    hi = float(e[parity < 0].min())
    width = hi - lo
    marginal = " (marginal)" if abs(width) <= _MARGINAL_WIDTH else ""
    if width < -2.0 * TOL.tie:
        return FeasibilityResult(
            feasible=False,
            d_interval=(lo, hi),
            certificate=(
                f"empty interval: triple correlator must be >= {lo!r} "
                f"and <= {hi!r}{marginal}"
            ),
        )
    mid = (lo + hi) / 2.0
    return FeasibilityResult(
        feasible=True,
        d_interval=(lo, hi),
        witness_table=triple_expansion_table(m, mid),
        certificate=f"triple correlator interval [{lo!r}, {hi!r}]{marginal}" if marginal else None,
    )


# ---------------------------------------------------------------------------
# phase-1 simplex


def _phase1_simplex(a_eq: np.ndarray, b_eq: np.ndarray) -> tuple[float, np.ndarray]:
    """Minimize the sum of artificial variables for A x = b, x >= 0.

    Dense tableau with Bland's anti-cycling rule; returns (objective, x).
    The problem sizes here are at most 9 rows by 16 columns, so robustness
    wins over speed.
    """
    m, n = a_eq.shape
    a = a_eq.copy()
    b = b_eq.astype(float).copy()
    flip = b < 0
    a[flip] *= -1.0
    b[flip] *= -1.0

    width = n + m + 1
    t = np.zeros((m + 1, width))
    t[:m, :n] = a
    t[:m, n : n + m] = np.eye(m)
    t[:m, -1] = b
    # reduced costs for cost vector (0,...,0, 1,...,1); artificials basic
    t[m, :n] = -a.sum(axis=0)
    t[m, -1] = -b.sum()
    basis = list(range(n, n + m))

    max_pivots = 200 * (n + m)
    for _ in range(max_pivots):
        enter = -1
        for j in range(n + m):
            if t[m, j] < -TOL.pivot:
                enter = j
                break
        if enter < 0:
            break
        ratios = []
        for i in range(m):
            if t[i, enter] > TOL.pivot:
                ratios.append((t[i, -1] / t[i, enter], basis[i], i))
        if not ratios:
            raise ConvergenceError("phase-1 simplex: unbounded column (numerical breakdown)")
        best = min(r for r, _, _ in ratios)
        # Bland tie-break: among rows attaining the ratio, smallest basis var
        leave_row = min(
            (i for r, _, i in ratios if r <= best + TOL.pivot),
            key=lambda i: basis[i],
        )
        piv = t[leave_row, enter]
        t[leave_row] /= piv
        for i in range(m + 1):
            if i != leave_row and t[i, enter] != 0.0:
                t[i] -= t[i, enter] * t[leave_row]
        basis[leave_row] = enter
    else:
        raise ConvergenceError("phase-1 simplex: pivot limit reached")

    objective = -t[m, -1]
    x = np.zeros(n)
    for i, var in enumerate(basis):
        if var < n:
            x[var] = t[i, -1]
    return float(objective), x


def _moment_rows(m: MomentSet) -> tuple[np.ndarray, np.ndarray, list[Outcome]]:
    n = m.n_times
    outs = outcomes(n)
    rows = [np.ones(len(outs))]
    rhs = [1.0]
    for i in range(n):
        rows.append(np.array([float(o[i]) for o in outs]))
        rhs.append(m.averages[i])
    for k, (i, j) in enumerate(m.pairs):
        rows.append(np.array([float(o[i] * o[j]) for o in outs]))
        rhs.append(m.correlators[k])
    return np.vstack(rows), np.array(rhs), outs


def lp_feasibility(m: MomentSet) -> FeasibilityResult:
    """Existence of nonnegative weights over {-1,+1}^n with the given
    normalization, averages and pair correlators, via phase-1 simplex.

    Feasible when the phase-1 objective is below 1e-9; verdicts within a
    decade of that threshold carry a "marginal" flag in the certificate.
    """
    if m.n_times not in (3, 4):
        raise ValidationError(f"lp_feasibility: need 3 or 4 times, got {m.n_times}")
    a_eq, b_eq, outs = _moment_rows(m)
    objective, x = _phase1_simplex(a_eq, b_eq)
    marginal = " (marginal)" if 0.1 * TOL.feasibility < objective < 10.0 * TOL.feasibility else ""
    if objective > TOL.feasibility:
        return FeasibilityResult(
            feasible=False,
            certificate=f"phase-1 objective {objective:.6e} > {TOL.feasibility:.0e}{marginal}",
        )
    x = np.maximum(x, 0.0)
    x /= x.sum()
    table = ProbabilityTable(
        kind="joint",
        time_indices=tuple(range(m.n_times)),
        weights={o: float(w) for o, w in zip(outs, x)},
    )
    return FeasibilityResult(
        feasible=True,
        witness_table=table,
        certificate=f"phase-1 objective {objective:.6e}{marginal}" if marginal else None,
    )


def scan_oracle(m: MomentSet, grid_step: float) -> FeasibilityResult:
    """Brute-force feasibility: scan the triple correlator over [-1, 1].

    Feasible iff some grid point makes all eight expansion values
    nonnegative (down to 1e-12 slack).  Test-support oracle; intervals
    narrower than the step can be missed.
    """
    _require_three_time_no_triple(m, "scan_oracle")
    if not (0.0 < grid_step <= 0.1):
        raise ValidationError(f"scan_oracle: grid_step must be in (0, 0.1], got {grid_step!r}")
    outs, e, parity = _expansion_base(m)
    n_points = int(round(2.0 / grid_step)) + 1
    grid = np.linspace(-1.0, 1.0, n_points)
    values = (e[:, None] + parity[:, None] * grid[None, :]) / 8.0
    worst = values.min(axis=0)
    best = int(np.argmax(worst))
    if worst[best] < -TOL.tie:
        return FeasibilityResult(
            feasible=False,
            certificate=(
                f"no grid point admits a nonnegative expansion "
                f"(step {grid_step!r}, best min weight {worst[best]:.6e})"
            ),
        )
    weights = {s: float(values[k, best]) for k, s in enumerate(outs)}
    table = ProbabilityTable(kind="joint", time_indices=(0, 1, 2), weights=weights)
    return FeasibilityResult(feasible=True, witness_table=table)
