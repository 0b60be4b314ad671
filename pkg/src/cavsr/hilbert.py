"""Truncated Fock-space states of a single cavity mode and the exact loss channel.

Conventions used throughout the package:
  - A mixed field state is the matrix Q with Q[n, m] = <n|rho|m>, n, m = 0..n_max.
  - gamma_c is the field amplitude decay rate in rad/s; photon number therefore
    decays at 2*gamma_c.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .errors import TruncationError

__all__ = [
    "FieldState",
    "PureFieldState",
    "vacuum",
    "coherent",
    "mean_photon",
    "photon_distribution",
    "fidelity_to_coherent",
    "apply_decay",
]


@dataclasses.dataclass(frozen=True)
class FieldState:
    """Density matrix of the cavity mode on the Fock levels 0..n_max.

    The array is owned by the state and must not be mutated; operations
    return new instances.
    """

    q: np.ndarray

    def __post_init__(self) -> None:
        q = np.asarray(self.q, dtype=complex)
        if q.ndim != 2 or q.shape[0] != q.shape[1] or q.shape[0] < 1:
            raise ValueError(f"field state needs a square matrix, got shape {q.shape}")
        object.__setattr__(self, "q", q)

    @property
    def dim(self) -> int:
        return self.q.shape[0]

    @property
    def n_max(self) -> int:
        return self.q.shape[0] - 1

    def validate(
        self,
        herm_tol: float = 1e-12,
        trace_tol: float = 1e-9,
        psd_tol: float = 1e-9,
    ) -> None:
        """Check Hermiticity, unit trace, and positivity; raise ValueError if violated."""
        herm = np.max(np.abs(self.q - self.q.conj().T))
        if herm > herm_tol:
            raise ValueError(f"not Hermitian: max asymmetry {herm:.3e}")
        tr = float(np.real(np.trace(self.q)))
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"trace {tr!r} differs from 1")
        w_min = float(np.linalg.eigvalsh(self.q)[0])
        if w_min < -psd_tol:
            raise ValueError(f"negative eigenvalue {w_min:.3e}")


@dataclasses.dataclass(frozen=True)
class PureFieldState:
    """Fock amplitudes c_n of a pure cavity state, used by the trajectory solver."""

    amp: np.ndarray

    def __post_init__(self) -> None:
        amp = np.asarray(self.amp, dtype=complex)
        if amp.ndim != 1 or amp.shape[0] < 1:
            raise ValueError(f"amplitudes must form a nonempty vector, got shape {amp.shape}")
        object.__setattr__(self, "amp", amp)

    @property
    def dim(self) -> int:
        return self.amp.shape[0]

    @property
    def n_max(self) -> int:
        return self.amp.shape[0] - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amp))

    def mean_photon(self) -> float:
        w = np.abs(self.amp) ** 2
        return float(np.arange(self.dim) @ w)

    def to_density(self) -> FieldState:
        return FieldState(np.outer(self.amp, self.amp.conj()))


def vacuum(n_max: int) -> FieldState:
    if n_max < 1:
        raise ValueError(f"n_max must be at least 1, got {n_max}")
    q = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    q[0, 0] = 1.0
    return FieldState(q)


def coherent_amplitudes(alpha: complex, n_max: int) -> np.ndarray:
    """Fock amplitudes of |alpha> on levels 0..n_max, without renormalization.

    Computed in the log domain so large |alpha| does not overflow n! factors.
    """
    n = np.arange(n_max + 1)
    a = abs(alpha)
    if a == 0.0:
        c = np.zeros(n_max + 1, dtype=complex)
        c[0] = 1.0
        return c
    log_mag = -0.5 * a * a + n * math.log(a) - 0.5 * gammaln(n + 1.0)
    return np.exp(log_mag + 1j * n * np.angle(complex(alpha)))


def coherent(alpha: complex, n_max: int) -> FieldState:
    """Coherent state truncated to n_max and renormalized to unit trace."""
    a = abs(alpha)
    if a * a + 10.0 * a + 10.0 > n_max:
        raise TruncationError(
            f"cutoff n_max={n_max} too small for |alpha|={a:.4g}; "
            f"need at least {math.ceil(a * a + 10.0 * a + 10.0)}"
        )
    c = coherent_amplitudes(alpha, n_max)
    c = c / np.linalg.norm(c)
    return FieldState(np.outer(c, c.conj()))


def mean_photon(s: FieldState) -> float:
    n = np.arange(s.dim)
    return float(np.real(n @ np.diag(s.q)))


def photon_distribution(s: FieldState) -> np.ndarray:
    return np.real(np.diag(s.q)).copy()


def fidelity_to_coherent(s: FieldState, alpha: complex) -> float:
    """<alpha|rho|alpha> against the exact (untruncated) coherent state."""
    tail = float(poisson.sf(s.n_max, abs(alpha) ** 2))
    if tail > 1e-8:
        raise TruncationError(
            f"coherent target |alpha|={abs(alpha):.4g} keeps {tail:.3e} "
            f"probability beyond n_max={s.n_max}"
        )
    c = coherent_amplitudes(alpha, s.n_max)
    f = float(np.real(c.conj() @ s.q @ c))
    return max(f, 0.0)


def apply_decay(s: FieldState, gamma_c: float, dt: float) -> FieldState:
    """Exact amplitude-damping channel for a decay interval dt.

    Energy survival probability is eta = exp(-2*gamma_c*dt):

        Q'[n, m] = sum_k sqrt(binom(n+k, k) binom(m+k, k))
                   * eta^((n+m)/2) * (1-eta)^k * Q[n+k, m+k]

    The k-th term factorizes as c_k[n] * c_k[m] * Q[n+k, m+k], which keeps the
    update at one rank-1 style product per lost-photon count k.
    """
    if gamma_c < 0.0 or dt < 0.0:
        raise ValueError(f"gamma_c and dt must be non-negative, got {gamma_c}, {dt}")
    if gamma_c == 0.0 or dt == 0.0:
        return s
    eta = math.exp(-2.0 * gamma_c * dt)
    dim = s.dim
    if eta == 0.0:
        # everything decayed; all population lands in the vacuum
        q = np.zeros_like(s.q)
        q[0, 0] = np.trace(s.q)
        return FieldState(q)
    log_eta = math.log(eta)
    log_loss = math.log1p(-eta)
    n = np.arange(dim, dtype=float)
    out = np.zeros_like(s.q)
    for k in range(dim):
        nn = n[: dim - k]
        log_c = (
            0.5 * (gammaln(nn + k + 1.0) - gammaln(nn + 1.0) - gammaln(k + 1.0))
            + 0.5 * nn * log_eta
            + 0.5 * k * log_loss
        )
        c = np.exp(log_c)
        out[: dim - k, : dim - k] += np.outer(c, c) * s.q[k:, k:]
    return FieldState(out)
