"""Dense complex Hermitian linear algebra for small dimensions.

Everything here works on plain ``numpy`` complex arrays of dimension 2..16:
projectors of a dichotomic observable, unitary time evolution generated by a
Hermitian Hamiltonian (hbar = 1), Heisenberg-picture observables and
expectation values.  The eigensolver is a cyclic complex Jacobi iteration:
for these sizes it is plenty fast and, used to build ``exp(-iHt)``, keeps the
evolution unitary up to rounding.

``QuantumModel`` bundles a Hamiltonian, a density matrix, a dichotomic
observable and 2-4 measurement times, validates all invariants on
construction, and memoizes the spectral data the measurement layer needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, InvalidObservableError, ValidationError
from .tolerances import TOL

MAX_DIM = 16
_JACOBI_MAX_SWEEPS = 100


# ---------------------------------------------------------------------------
# validation helpers


def as_complex_matrix(entries, *, name: str = "matrix") -> np.ndarray:
    """Coerce to a square complex128 array, 2 <= dim <= 16."""
    a = np.asarray(entries, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"{name}: expected a square matrix, got shape {a.shape}")
    if not (2 <= a.shape[0] <= MAX_DIM):
        raise ValidationError(f"{name}: dimension must be in [2, {MAX_DIM}], got {a.shape[0]}")
    if not np.all(np.isfinite(a.view(float))):
        raise ValidationError(f"{name}: entries must be finite")
    return a


def require_hermitian(a: np.ndarray, *, name: str = "matrix", tol: float = TOL.scalar) -> None:
    dev = np.abs(a - a.conj().T).max()
    if dev > tol:
        raise ValidationError(f"{name}: not Hermitian (max deviation {dev:.3e} > {tol:.0e})")


def require_dichotomic(q: np.ndarray, *, name: str = "observable") -> None:
    """Observable must square to the identity (eigenvalues +1/-1)."""
    dev = np.linalg.norm(q @ q - np.eye(q.shape[0]))
    if dev > TOL.structural:
        raise InvalidObservableError(
            f"{name}: not dichotomic, ||Q^2 - I|| = {dev:.3e} > {TOL.structural:.0e}"
        )


# ---------------------------------------------------------------------------
# eigensolver


def eig_hermitian(a) -> tuple[np.ndarray, np.ndarray]:
    """Diagonalize a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns ``(eigenvalues, V)`` with eigenvalues ascending, the columns of
    ``V`` the matching eigenvectors, and ``a = V diag(eigenvalues) V^dag`` up
    to rounding.  Eigenvector phases are not canonicalized.
    """
    a = as_complex_matrix(a, name="eig_hermitian input")
    require_hermitian(a, name="eig_hermitian input")
    n = a.shape[0]
    a = (a + a.conj().T) / 2.0
    v = np.eye(n, dtype=complex)
    threshold = 1e-14 * max(1.0, float(np.linalg.norm(a)))

    for _ in range(_JACOBI_MAX_SWEEPS):
        upper = np.triu(a, 1)
        if np.sqrt((np.abs(upper) ** 2).sum()) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                phase = apq / mag
                mu = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                # smaller-magnitude root of t^2 - 2*mu*t - 1 = 0
                if mu >= 0.0:
                    t = -1.0 / (mu + np.hypot(1.0, mu))
                else:
                    t = 1.0 / (-mu + np.hypot(1.0, mu))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # A <- R^dag A R with R embedding [[c, -s*phase], [s*conj(phase), c]]
                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p + s * np.conj(phase) * col_q
                a[:, q] = -s * phase * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p + s * phase * row_q
                a[q, :] = -s * np.conj(phase) * row_p + c * row_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                vcol_p = v[:, p].copy()
                vcol_q = v[:, q].copy()
                v[:, p] = c * vcol_p + s * np.conj(phase) * vcol_q
                v[:, q] = -s * phase * vcol_p + c * vcol_q
    else:
        raise ConvergenceError("Jacobi eigensolver did not converge")

    lam = np.real(np.diag(a)).copy()
    order = np.argsort(lam, kind="stable")
    return lam[order], v[:, order]


# ---------------------------------------------------------------------------
# operations


def projector(observable, s: int) -> np.ndarray:
    """Spectral projector (I + s*Q)/2 of a dichotomic observable.

    The two projectors are built so that projector(Q, +1) + projector(Q, -1)
    equals the identity bitwise: the minus projector is I minus the plus one.
    """
    q = as_complex_matrix(observable, name="observable")
    if s not in (+1, -1):
        raise ValidationError(f"sign must be +1 or -1, got {s!r}")
    require_hermitian(q, name="observable")
    require_dichotomic(q)
    plus = 0.5 * (np.eye(q.shape[0], dtype=complex) + q)
    if s == +1:
        return plus
    return np.eye(q.shape[0], dtype=complex) - plus


def evolve_operator(hamiltonian, t: float) -> np.ndarray:
    """Unitary U(t) = exp(-iHt) via the Hermitian eigendecomposition."""
    h = as_complex_matrix(hamiltonian, name="hamiltonian")
    require_hermitian(h, name="hamiltonian")
    if t == 0.0:
        return np.eye(h.shape[0], dtype=complex)
    lam, vec = eig_hermitian(h)
    return _evolve_from_eig(lam, vec, t)


def _evolve_from_eig(lam: np.ndarray, vec: np.ndarray, t: float) -> np.ndarray:
    if t == 0.0:
        return np.eye(vec.shape[0], dtype=complex)
    phases = np.exp(-1j * lam * t)
    return (vec * phases) @ vec.conj().T


def heisenberg(observable, hamiltonian, t: float) -> np.ndarray:
    """Heisenberg-picture observable Q(t) = U(t)^dag Q U(t)."""
    q = as_complex_matrix(observable, name="observable")
    require_hermitian(q, name="observable")
    require_dichotomic(q)
    u = evolve_operator(hamiltonian, t)
    qt = u.conj().T @ q @ u
    require_dichotomic(qt, name="evolved observable")
    return qt


def expectation(rho, a) -> float:
    """Real part of Tr(A rho); the imaginary residue must be negligible."""
    rho = np.asarray(rho, dtype=complex)
    a = np.asarray(a, dtype=complex)
    if rho.shape != a.shape or rho.ndim != 2:
        raise ValidationError(f"expectation: shape mismatch {a.shape} vs {rho.shape}")
    val = np.trace(a @ rho)
    if abs(val.imag) > TOL.scalar:
        raise ValidationError(
            f"expectation: imaginary residue {val.imag:.3e} exceeds {TOL.scalar:.0e}"
        )
    return float(val.real)


# ---------------------------------------------------------------------------
# model


@dataclass(frozen=True)
class QuantumModel:
    """A dichotomic-variable experiment: (H, rho, Q) plus 2-4 measurement times.

    Invariants checked on construction:

    * hamiltonian, rho, observable are dim x dim Hermitian, 2 <= dim <= 16;
    * rho has unit trace and no eigenvalue below -1e-10;
    * the observable squares to the identity;
    * times are non-decreasing (repeated times model back-to-back
      measurements, the tau -> 0 limit of a vanishing gap).

    Arrays are copied and frozen read-only; instances are safe to share.
    """

    hamiltonian: np.ndarray
    rho: np.ndarray
    observable: np.ndarray
    times: tuple[float, ...]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        h = as_complex_matrix(self.hamiltonian, name="hamiltonian")
        r = as_complex_matrix(self.rho, name="rho")
        q = as_complex_matrix(self.observable, name="observable")
        if not (h.shape == r.shape == q.shape):
            raise ValidationError(
                f"dimension mismatch: hamiltonian {h.shape}, rho {r.shape}, observable {q.shape}"
            )
        require_hermitian(h, name="hamiltonian")
        require_hermitian(r, name="rho")
        require_hermitian(q, name="observable")
        require_dichotomic(q)
        tr = np.trace(r).real
        if abs(tr - 1.0) > TOL.scalar:
            raise ValidationError(f"rho: trace must be 1, got {tr!r}")
        lam, _ = eig_hermitian(r)
        if lam[0] < -TOL.psd:
            raise ValidationError(f"rho: not positive semidefinite (min eigenvalue {lam[0]:.3e})")
        times = tuple(float(t) for t in self.times)
        if not (2 <= len(times) <= 4):
            raise ValidationError(f"times: need 2-4 measurement times, got {len(times)}")
        if any(not np.isfinite(t) for t in times):
            raise ValidationError("times: entries must be finite")
        if any(t2 < t1 for t1, t2 in zip(times, times[1:])):
            raise ValidationError(f"times: must be non-decreasing, got {times}")
        for arr in (h, r, q):
            arr.setflags(write=False)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "rho", r)
        object.__setattr__(self, "observable", q)
        object.__setattr__(self, "times", times)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def n_times(self) -> int:
        return len(self.times)

    def check_time_index(self, i: int) -> int:
        if not (0 <= i < self.n_times):
            raise ValidationError(f"time index {i} out of range for {self.n_times} times")
        return i

    def hamiltonian_eig(self) -> tuple[np.ndarray, np.ndarray]:
        if "heig" not in self._cache:
            self._cache["heig"] = eig_hermitian(self.hamiltonian)
        return self._cache["heig"]

    def unitary_at(self, i: int) -> np.ndarray:
        """U(t_i) = exp(-i H t_i)."""
        self.check_time_index(i)
        key = ("U", i)
        if key not in self._cache:
            lam, vec = self.hamiltonian_eig()
            self._cache[key] = _evolve_from_eig(lam, vec, self.times[i])
        return self._cache[key]

    def observable_at(self, i: int) -> np.ndarray:
        """Heisenberg observable Q(t_i), memoized per time index."""
        self.check_time_index(i)
        key = ("Q", i)
        if key not in self._cache:
            u = self.unitary_at(i)
            qt = u.conj().T @ self.observable @ u
            require_dichotomic(qt, name="evolved observable")
            self._cache[key] = qt
        return self._cache[key]

    def projector_at(self, i: int, s: int) -> np.ndarray:
        """Projector onto outcome s of a measurement at time t_i."""
        self.check_time_index(i)
        key = ("P", i, s)
        if key not in self._cache:
            q = self.observable_at(i)
            plus = 0.5 * (np.eye(self.dim, dtype=complex) + q)
            self._cache[("P", i, +1)] = plus
            self._cache[("P", i, -1)] = np.eye(self.dim, dtype=complex) - plus
        return self._cache[key]


def model_from_parts(
    hamiltonian, rho, observable, times: Sequence[float]
) -> QuantumModel:
    """Convenience constructor used by the file loaders."""
    return QuantumModel(
        hamiltonian=np.asarray(hamiltonian, dtype=complex),
        rho=np.asarray(rho, dtype=complex),
        observable=np.asarray(observable, dtype=complex),
        times=tuple(times),
    )
