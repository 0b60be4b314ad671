"""Coarse-grained master equation of the beam-pumped lossy cavity.

Time is measured in units of 1/gamma_c throughout this module. With n_c
atoms crossing per decay time, the field obeys

    dQ/dt = n_c * (kick(Q) - Q) + D(Q)

where kick is the single-transit update from the interaction module and D is
the photon-loss dissipator, D(Q)[n,m] = 2 sqrt((n+1)(m+1)) Q[n+1,m+1]
- (n+m) Q[n,m]. Both pieces are seven-band stencils on the index lattice, so
the generator assembles directly into a sparse matrix on vectorized Q.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np
import scipy.integrate
import scipy.optimize
import scipy.sparse
import scipy.sparse.linalg

from .analytic import mean_n_noncollective
from .atom import AtomState
from .errors import ConvergenceError, DivergenceError, ResourceError, TruncationError
from .hilbert import FieldState, vacuum
from .interaction import KickParams, jc_kick, kick_stencil
from . import hilbert

__all__ = [
    "MasterParams",
    "build_generator",
    "steady_state",
    "steady_state_auto",
    "suggest_n_max",
    "evolve",
    "EvolveResult",
]

# Direct sparse-LU factorization of the dim^2 system is the whole strategy;
# fill-in grows fast, and around dim 650 it is a multi-GB, tens-of-seconds
# job. Past the guard we refuse rather than thrash.
DEFAULT_MAX_DIM = 650

_TAIL_TOL = 1e-8
_RESIDUAL_TOL = 1e-9


@dataclasses.dataclass(frozen=True)
class MasterParams:
    """Pump and basis parameters: atoms per decay time, kick angle, atom state."""

    n_c: float
    k: KickParams
    a: AtomState
    n_max: int

    def __post_init__(self) -> None:
        if self.n_c <= 0.0:
            raise ValueError(f"n_c must be positive, got {self.n_c}")
        if self.n_max < 1:
            raise ValueError(f"n_max must be at least 1, got {self.n_max}")

    @property
    def dim(self) -> int:
        return self.n_max + 1


def _generator_stencil(p: MasterParams) -> dict[tuple[int, int], np.ndarray]:
    dim = p.dim
    st = {off: p.n_c * coef for off, coef in kick_stencil(dim, p.a, p.k).items()}
    n = np.arange(dim, dtype=float)
    nn, mm = np.meshgrid(n, n, indexing="ij")
    st[(0, 0)] = st[(0, 0)] - p.n_c - (nn + mm)
    st[(1, 1)] = st[(1, 1)] + 2.0 * np.sqrt((nn + 1.0) * (mm + 1.0))
    return st


def build_generator(p: MasterParams, max_dim: int = DEFAULT_MAX_DIM) -> scipy.sparse.csc_matrix:
    """Sparse generator L acting on vec(Q), row-major vectorization.

    L annihilates the trace: summing the rows that correspond to diagonal
    entries (n, n) gives zero, because the kick is trace preserving and the
    loss terms cancel in pairs.
    """
    dim = p.dim
    if dim > max_dim:
        raise ResourceError(
            f"generator dimension {dim}^2 exceeds the solver guard ({max_dim}^2); "
            "the direct factorization would not fit"
        )
    n = np.arange(dim)
    nn, mm = np.meshgrid(n, n, indexing="ij")
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    for (dn, dm), coef in _generator_stencil(p).items():
        src_n = nn + dn
        src_m = mm + dm
        ok = (src_n >= 0) & (src_n < dim) & (src_m >= 0) & (src_m < dim)
        rows.append((nn[ok] * dim + mm[ok]).ravel())
        cols.append((src_n[ok] * dim + src_m[ok]).ravel())
        vals.append(coef[ok].ravel().astype(complex))
    size = dim * dim
    return scipy.sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size),
    ).tocsc()


def steady_state(p: MasterParams, max_dim: int = DEFAULT_MAX_DIM) -> FieldState:
    """Unique steady state of the generator at the given cutoff.

    Solves L vec(Q) = 0 with one redundant row traded for the trace
    constraint, via sparse LU. The result is checked three ways: residual of
    the untouched generator, Hermitian symmetrization defect, and tail mass
    at the cutoff.
    """
    gen = build_generator(p, max_dim=max_dim)
    dim = p.dim
    size = dim * dim
    a = gen.tolil(copy=True)
    a[0, :] = 0.0
    a[0, np.arange(dim) * (dim + 1)] = 1.0
    b = np.zeros(size, dtype=complex)
    b[0] = 1.0
    a_csc = a.tocsc()
    lu = scipy.sparse.linalg.splu(a_csc)
    x = lu.solve(b)
    # one LU pass is condition-limited at large n_c; refine while it helps
    resid = np.abs(gen @ x)
    best = float(resid.max())
    for _ in range(5):
        if best <= 0.1 * _RESIDUAL_TOL:
            break
        x_new = x + lu.solve(b - a_csc @ x)
        resid_new = np.abs(gen @ x_new)
        if float(resid_new.max()) >= best:
            break
        x, resid, best = x_new, resid_new, float(resid_new.max())
    if best > _RESIDUAL_TOL:
        # a residual confined to the replaced trace row is the rate at which
        # probability escapes past the cutoff: a basis problem, not a solver
        # one, so report it as such and let callers enlarge the basis
        if float(resid[1:].max()) <= _RESIDUAL_TOL:
            raise TruncationError(
                f"trace leaks past n_max={p.n_max} at rate {best:.3e}; "
                "enlarge the basis"
            )
        raise ConvergenceError(
            f"steady-state residual {best:.3e} above {_RESIDUAL_TOL:.0e}"
        )
    q = x.reshape(dim, dim)
    q = 0.5 * (q + q.conj().T)
    q /= float(np.real(np.trace(q)))
    tail = float(np.real(q[dim - 1, dim - 1]))
    if tail > _TAIL_TOL:
        raise TruncationError(
            f"steady state keeps {tail:.3e} population at n_max={p.n_max}; "
            "enlarge the basis"
        )
    return FieldState(q)


def _balance_angle(n_c: float, a: AtomState, g_tau: float) -> float:
    """Root of the semiclassical gain-loss balance, as a Rabi angle.

    An atom crossing a quasi-classical field of mean photon number nb
    precesses by chi = 2 sqrt(nb) g_tau and deposits
    (1/2)[z (1 - cos chi) + s sin chi] photons, with z = 2 rho_ee - 1 and
    s = 2|rho_eg|. Equating the beam gain n_c * deposit with the loss 2 nb
    gives F(chi) = kappa [z (1 - cos chi) + s sin chi] - chi^2 = 0, with
    kappa = n_c g_tau^2. Returns 0 when no positive root exists (no
    self-sustained field).
    """
    kappa = n_c * g_tau * g_tau
    z = 2.0 * a.rho_ee - 1.0
    s = 2.0 * abs(a.rho_eg)

    def f(chi: float) -> float:
        return kappa * (z * (1.0 - math.cos(chi)) + s * math.sin(chi)) - chi * chi

    grid = np.linspace(1e-8, 2.0 * math.pi, 2049)
    vals = np.array([f(c) for c in grid])
    if vals[0] <= 0.0:
        return 0.0
    crossings = np.nonzero(vals <= 0.0)[0]
    i = int(crossings[0])
    return float(scipy.optimize.brentq(f, grid[i - 1], grid[i], xtol=1e-12))


def suggest_n_max(n_c: float, a: AtomState, g_tau: float) -> int:
    """Fock cutoff estimate: predicted <n> plus a ten-sigma-and-ten margin.

    The prediction adds the finite noncollective mean (when it exists) to the
    semiclassical balance solution, which is what caps the field in the
    saturated and lasing regimes where the small-angle formula blows up.
    """
    if g_tau <= 0.0:
        raise ValueError(f"g_tau must be positive, got {g_tau}")
    chi = _balance_angle(n_c, a, g_tau)
    est = (0.5 * chi / g_tau) ** 2
    try:
        est += mean_n_noncollective(n_c * g_tau * g_tau, a.rho_ee)
    except DivergenceError:
        pass  # lasing regime: the balance root already carries the saturated value
    return math.ceil(est + 10.0 * math.sqrt(est) + 10.0)


def steady_state_auto(
    n_c: float,
    a: AtomState,
    k: KickParams,
    n_max: int | None = None,
    max_dim: int = DEFAULT_MAX_DIM,
) -> FieldState:
    """steady_state with automatic cutoff choice and doubling on tail failure."""
    cur = n_max if n_max is not None else suggest_n_max(n_c, a, k.g_tau)
    cur = max(cur, 2)
    while True:
        try:
            return steady_state(MasterParams(n_c, k, a, cur), max_dim=max_dim)
        except TruncationError:
            if 2 * cur + 1 > max_dim:
                raise
            cur *= 2


@dataclasses.dataclass(frozen=True)
class EvolveResult:
    """Sampled trajectory of the field density matrix; times in 1/gamma_c."""

    times: np.ndarray
    states: list[FieldState]

    def mean_n(self) -> np.ndarray:
        return np.array([hilbert.mean_photon(s) for s in self.states])


def _clean(q: np.ndarray) -> FieldState:
    q = 0.5 * (q + q.conj().T)
    q /= float(np.real(np.trace(q)))
    return FieldState(q)


def evolve(
    p: MasterParams,
    q0: FieldState,
    t_end: float,
    mode: str = "coarse-ode",
    n_samples: int = 81,
    max_dim: int = DEFAULT_MAX_DIM,
) -> EvolveResult:
    """Transient evolution from q0 for a time t_end (units of 1/gamma_c).

    "coarse-ode" integrates the generator with an adaptive high-order
    scheme. "discrete-regular" instead alternates exact decay over the
    spacing 1/n_c with one kick per atom, the natural picture for a
    regularly spaced beam; output samples then sit on the atom grid and
    n_samples is ignored.
    """
    if q0.dim != p.dim:
        raise ValueError(f"q0 has dim {q0.dim}, params expect {p.dim}")
    if t_end < 0.0:
        raise ValueError(f"t_end must be non-negative, got {t_end}")
    if t_end == 0.0:
        return EvolveResult(np.zeros(1), [q0])
    if mode == "coarse-ode":
        gen = build_generator(p, max_dim=max_dim)
        size = p.dim * p.dim

        def rhs(_t: float, y: np.ndarray) -> np.ndarray:
            z = gen @ (y[:size] + 1j * y[size:])
            return np.concatenate((z.real, z.imag))

        y0 = np.concatenate((q0.q.ravel().real, q0.q.ravel().imag))
        times = np.linspace(0.0, t_end, n_samples)
        sol = scipy.integrate.solve_ivp(
            rhs, (0.0, t_end), y0, method="DOP853", t_eval=times,
            rtol=1e-8, atol=1e-12,
        )
        if not sol.success:
            raise ConvergenceError(f"transient integration failed: {sol.message}")
        states = [
            _clean((sol.y[:size, j] + 1j * sol.y[size:, j]).reshape(p.dim, p.dim))
            for j in range(sol.y.shape[1])
        ]
        return EvolveResult(times, states)
    if mode == "discrete-regular":
        delta = 1.0 / p.n_c
        steps = int(math.floor(t_end / delta + 1e-9))
        times = [0.0]
        states = [q0]
        state = q0
        for j in range(1, steps + 1):
            state = hilbert.apply_decay(state, 1.0, delta)
            state = jc_kick(state, p.a, p.k)
            times.append(j * delta)
            states.append(state)
        return EvolveResult(np.array(times), states)
    raise ValueError(f"unknown mode {mode!r}")
