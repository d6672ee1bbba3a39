"""Time evolution of truncated states and relaxation diagnostics.

Fixed-step classical RK4 on the predual generator, with trace and
positivity monitoring (never projection), the classical diagonal
process, the transience witness, and decay-rate fits in the weighted
norm tied to the spectral gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, omega
from .operators import DensityMatrix, OperatorSet

__all__ = [
    "StepControl",
    "Trajectory",
    "SupportProfile",
    "TransientWitnessReport",
    "DecayFit",
    "TruncationOverflowError",
    "PositivityError",
    "evolve",
    "trace_distance",
    "weighted_hs_norm",
    "relaxation_norm",
    "support_profile",
    "classical_apply",
    "transient_witness",
    "decay_rate",
]


class TruncationOverflowError(RuntimeError):
    """Boundary occupancy exceeded the truncation tolerance; enlarge dim."""


class PositivityError(RuntimeError):
    """State positivity was violated beyond tolerance despite step halving."""


def _dt_cap(params: ModelParams, dim):
    # stiffness cap: the generator's spectral radius grows like omega(dim)
    rate = (
        params.lam ** 2 + params.mu ** 2 + abs(params.zeta_plus) + abs(params.zeta_minus)
    )
    return 0.5 / (rate * omega(dim, params.r))


@dataclass(frozen=True)
class StepControl:
    """Fixed-step integrator controls.

    ``dt_max`` must respect the stiffness cap
    ``0.5 / ((lam^2 + mu^2 + |zeta+| + |zeta-|) omega(dim))``; use
    :meth:`for_model` to build a compliant control record.
    """

    dt_max: float
    positivity_tol: float = 1e-10
    max_retries: int = 8

    def __post_init__(self):
        if not self.dt_max > 0.0:
            raise ValueError("dt_max must be positive")
        if not self.positivity_tol > 0.0:
            raise ValueError("positivity_tol must be positive")
        if self.max_retries < 1:
            raise ValueError("max_retries must be >= 1")

    @classmethod
    def for_model(cls, params: ModelParams, dim, safety=1.0, **kwargs):
        if not 0.0 < safety <= 1.0:
            raise ValueError("safety factor must lie in (0, 1]")
        return cls(dt_max=_dt_cap(params, dim) * safety, **kwargs)


@dataclass
class Trajectory:
    """Sampled solution of the predual equation.

    ``times`` start at 0 and increase strictly; ``boundary_occupancy``
    holds the top-two-level population and ``trace_drift`` the largest
    deviation of the trace from 1 seen since the previous sample (before
    renormalization).
    """

    times: np.ndarray
    states: list
    boundary_occupancy: np.ndarray
    trace_drift: np.ndarray


def _rk4_segment(rho, duration, dt_max, opset: OperatorSet):
    """Integrate d(rho)/dt = predual(rho) over one segment in place.

    Returns the evolved matrix and the largest trace drift observed.
    The state is re-symmetrized every step; the trace is renormalized
    whenever the drift exceeds 1e-13.
    """
    table = opset._pre_table
    gmu = opset._gain_mu
    glam = opset._gain_lam

    def rhs(x, out, tmp_small):
        np.multiply(table, x, out=out)
        np.multiply(gmu, x[1:, 1:], out=tmp_small)
        out[:-1, :-1] += tmp_small
        np.multiply(glam, x[:-1, :-1], out=tmp_small)
        out[1:, 1:] += tmp_small

    n_steps = max(1, math.ceil(duration / dt_max))
    dt = duration / n_steps
    k1 = np.empty_like(rho)
    k2 = np.empty_like(rho)
    k3 = np.empty_like(rho)
    k4 = np.empty_like(rho)
    stage = np.empty_like(rho)
    small = np.empty((rho.shape[0] - 1, rho.shape[0] - 1), dtype=rho.dtype)
    max_drift = 0.0
    for _ in range(n_steps):
        rhs(rho, k1, small)
        np.multiply(k1, 0.5 * dt, out=stage)
        stage += rho
        rhs(stage, k2, small)
        np.multiply(k2, 0.5 * dt, out=stage)
        stage += rho
        rhs(stage, k3, small)
        np.multiply(k3, dt, out=stage)
        stage += rho
        rhs(stage, k4, small)
        k2 += k3
        k1 += k4
        k1 += 2.0 * k2
        k1 *= dt / 6.0
        rho += k1
        np.add(rho, rho.conj().T, out=rho)
        rho *= 0.5
        tr = float(rho.trace().real)
        drift = abs(tr - 1.0)
        if drift > max_drift:
            max_drift = drift
        if drift > 1e-13:
            rho *= 1.0 / tr
    return rho, max_drift


def evolve(opset: OperatorSet, rho0: DensityMatrix, t_final, ctl=None, sample_every=None):
    """Evolve ``rho0`` under the predual generator up to ``t_final``.

    Classical fixed-step RK4 with step at most ``ctl.dt_max`` (default:
    the stiffness cap for this model).  Samples are recorded every
    ``sample_every`` time units (default ``t_final / 100``).  Positivity
    is monitored at each sample; a violation beyond tolerance triggers
    step halving for the offending segment, never eigenvalue clipping.

    Raises
    ------
    PositivityError
        If the violation persists after ``ctl.max_retries`` halvings.
    TruncationOverflowError
        If the top-two-level population exceeds ``opset.trunc.tail_tol``.
    """
    if rho0.dim != opset.dim:
        raise ValueError(f"state dim {rho0.dim} does not match operators dim {opset.dim}")
    if t_final < 0.0:
        raise ValueError("t_final must be nonnegative")
    cap = _dt_cap(opset.params, opset.dim)
    if ctl is None:
        ctl = StepControl(dt_max=cap)
    elif ctl.dt_max > cap * (1.0 + 1e-12):
        raise ValueError(
            f"dt_max {ctl.dt_max:g} violates the stiffness cap {cap:g} for dim {opset.dim}"
        )

    def boundary_occ(mat):
        return float(mat[-1, -1].real + mat[-2, -2].real)

    times = [0.0]
    states = [DensityMatrix(rho0.mat.copy(), check=False)]
    occupancy = [boundary_occ(rho0.mat)]
    drifts = [abs(float(rho0.mat.trace().real) - 1.0)]

    if t_final == 0.0:
        return Trajectory(
            times=np.asarray(times),
            states=states,
            boundary_occupancy=np.asarray(occupancy),
            trace_drift=np.asarray(drifts),
        )

    if sample_every is None:
        sample_every = t_final / 100.0
    if not sample_every > 0.0:
        raise ValueError("sample_every must be positive")
    sample_times = list(np.arange(sample_every, t_final, sample_every))
    if not sample_times or sample_times[-1] < t_final - 1e-12 * t_final:
        sample_times.append(t_final)

    rho = rho0.mat.astype(complex).copy()
    t_prev = 0.0
    for t_next in sample_times:
        saved = rho.copy()
        dt_try = ctl.dt_max
        for attempt in range(ctl.max_retries + 1):
            rho, seg_drift = _rk4_segment(saved.copy(), t_next - t_prev, dt_try, opset)
            min_eig = float(np.linalg.eigvalsh(rho)[0])
            if min_eig >= -ctl.positivity_tol:
                break
            dt_try *= 0.5
        else:
            raise PositivityError(
                f"minimum eigenvalue {min_eig:g} below -{ctl.positivity_tol:g} "
                f"at t = {t_next:g} after {ctl.max_retries} step halvings"
            )
        occ = boundary_occ(rho)
        if occ > opset.trunc.tail_tol:
            raise TruncationOverflowError(
                f"boundary occupancy {occ:g} exceeds tail_tol {opset.trunc.tail_tol:g} "
                f"at t = {t_next:g}; increase dim"
            )
        times.append(float(t_next))
        states.append(DensityMatrix(rho.copy(), check=False))
        occupancy.append(occ)
        drifts.append(seg_drift)
        t_prev = t_next
    return Trajectory(
        times=np.asarray(times),
        states=states,
        boundary_occupancy=np.asarray(occupancy),
        trace_drift=np.asarray(drifts),
    )


def _as_matrix(state):
    return state.mat if isinstance(state, DensityMatrix) else np.asarray(state, dtype=complex)


def trace_distance(a, b):
    """Trace distance: half the sum of singular values of the difference."""
    ma, mb = _as_matrix(a), _as_matrix(b)
    if ma.shape != mb.shape:
        raise ValueError(f"dimension mismatch: {ma.shape} vs {mb.shape}")
    diff = ma - mb
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def weighted_hs_norm(x, pi):
    """Hilbert-Schmidt norm of the weighted embedding of ``x``.

    ``(sum_{jk} pi_j^{1/2} pi_k^{1/2} |x_{jk}|^2)^{1/2}`` for strictly
    positive weights ``pi``.
    """
    pi = np.asarray(pi, dtype=float)
    if np.any(pi <= 0.0):
        raise ValueError("weights must be strictly positive")
    x = _as_matrix(x)
    w = np.sqrt(pi)
    v = np.abs(x) ** 2
    return float(math.sqrt(w @ v @ w))


def relaxation_norm(state, reference, pi):
    """Equilibrium-deviation norm in which coupling-free relaxation is monotone.

    For states the natural embedding is the inverse one,
    ``pi^{-1/4} (rho - ref) pi^{-1/4}``: by duality with the observable
    embedding it evolves under the same self-adjoint contraction
    semigroup when the Hamiltonian part vanishes, so its norm decays
    monotonically at a rate bounded below by the spectral gap.  ``pi``
    is the diagonal of the reference equilibrium state.
    """
    diff = _as_matrix(state) - _as_matrix(reference)
    pi = np.asarray(pi, dtype=float)
    return weighted_hs_norm(diff, 1.0 / pi)


@dataclass(frozen=True)
class SupportProfile:
    """Support diagnostics of a state."""

    diag: np.ndarray
    min_eigenvalue: float
    witness_range: int


def support_profile(state) -> SupportProfile:
    """Diagonal populations, smallest eigenvalue, and the strict-positivity range.

    ``witness_range`` is the largest ``k`` such that all diagonal
    entries ``0 .. k`` exceed 1e-300, or -1 when the ground entry itself
    does not.
    """
    mat = _as_matrix(state)
    diag = mat.diagonal().real.copy()
    positive = diag > 1e-300
    if not positive[0]:
        witness = -1
    elif positive.all():
        witness = diag.shape[0] - 1
    else:
        witness = int(np.argmin(positive)) - 1
    return SupportProfile(
        diag=diag,
        min_eigenvalue=float(np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))[0]),
        witness_range=witness,
    )


def classical_apply(params: ModelParams, f, dim=None):
    """Birth-death generator of the diagonal process applied to ``f``.

    ``g_j = lam^2 w_{j+1} (f_{j+1} - f_j) + mu^2 w_j (f_{j-1} - f_j)``
    with the reflecting boundary (the birth rate out of the top level is
    zero).  Matches the diagonal action of the quantum generator on
    multiplication operators.
    """
    f = np.asarray(f, dtype=float)
    if f.ndim != 1:
        raise ValueError("f must be a vector")
    if dim is None:
        dim = f.shape[0]
    elif f.shape[0] != dim:
        raise ValueError(f"f has length {f.shape[0]}, expected {dim}")
    w = omega(np.arange(dim + 1), params.r)
    lam2 = params.lam ** 2
    mu2 = params.mu ** 2
    g = np.zeros(dim)
    g[:-1] += lam2 * w[1:dim] * (f[1:] - f[:-1])
    g[1:] += mu2 * w[1:dim] * (f[:-1] - f[1:])
    return g


@dataclass(frozen=True)
class TransientWitnessReport:
    """Residuals of the superharmonic witness at the transient line."""

    r: float
    dim: int
    x: np.ndarray
    value_at_zero: float
    max_interior_residual: float


def _witness_tail_sums(r, dim):
    """X_k = sum_{j >= k} 1/((j+1)(j+r)) for k < dim, to ~1e-14 absolute.

    Direct summation to 10*dim plus an Euler-Maclaurin remainder (exact
    integral, half-term and first derivative corrections); there is no
    elementary closed form for general r.
    """
    j_top = 10 * dim

    def f(x):
        return 1.0 / ((x + 1.0) * (x + r))

    def fprime(x):
        return -(2.0 * x + 1.0 + r) / (((x + 1.0) * (x + r)) ** 2)

    if abs(r - 1.0) < 1e-14:
        integral = 1.0 / (j_top + 1.0)
    else:
        integral = math.log((j_top + r) / (j_top + 1.0)) / (r - 1.0)
    remainder = integral + 0.5 * f(j_top) - fprime(j_top) / 12.0
    x = np.empty(dim)
    acc = remainder
    for j in range(j_top - 1, dim - 1, -1):
        acc += f(j)
    for j in range(dim - 1, -1, -1):
        x[j] = acc + f(j)
        acc = x[j]
    return x


def transient_witness(params: ModelParams, dim) -> TransientWitnessReport:
    """Check the superharmonic witness at the transient line ``lam = mu``.

    Applies the classical generator to the tail-sum vector
    ``X_k = sum_{j >= k} 1/((j+1)(j+r))``.  In units of ``mu^2`` the
    result is -1 at index 0 and 0 at every interior index; boundary
    entries are excluded from the residual.
    """
    if abs(params.lam - params.mu) > 1e-14:
        raise ValueError(
            f"transient witness requires lam = mu (within 1e-14), got "
            f"lam={params.lam}, mu={params.mu}"
        )
    if dim < 8:
        raise ValueError("dim must be >= 8")
    x = _witness_tail_sums(params.r, dim)
    action = classical_apply(params, x, dim) / params.mu ** 2
    return TransientWitnessReport(
        r=params.r,
        dim=dim,
        x=x,
        value_at_zero=float(action[0]),
        max_interior_residual=float(np.max(np.abs(action[1 : dim - 1]))),
    )


@dataclass(frozen=True)
class DecayFit:
    """Least-squares exponential-rate fit of a relaxation trajectory."""

    rate: float
    r_squared: float
    window: tuple[float, float]
    n_samples: int


def decay_rate(traj: Trajectory, reference: DensityMatrix, pi, burn_in=0.2) -> DecayFit:
    """Fit the exponential decay rate of ``rho_t`` towards ``reference``.

    The fitted quantity is the log of :func:`relaxation_norm` (the
    inverse-weighted embedding norm, whose decay rate is bounded by the
    spectral gap); ``pi`` is the diagonal of the reference equilibrium.
    The initial ``burn_in`` fraction of the time window is discarded to
    let faster sectors die out, and samples whose norm falls below
    1e-14 truncate the window (raising if nothing usable remains).
    """
    pi = np.asarray(pi, dtype=float)
    times = traj.times
    t_lo = times[0] + burn_in * (times[-1] - times[0])
    keep = times >= t_lo
    if int(keep.sum()) < 10:
        raise ValueError("need at least 10 samples past the burn-in window")
    t_fit = times[keep]
    norms = np.asarray(
        [relaxation_norm(s, reference, pi) for s, k in zip(traj.states, keep) if k]
    )
    usable = norms >= 1e-14
    if not usable.all():
        cutoff = int(np.argmin(usable))
        t_fit = t_fit[:cutoff]
        norms = norms[:cutoff]
    if t_fit.shape[0] < 5:
        raise ValueError("norm underflow below 1e-14 leaves too few samples to fit")
    logn = np.log(norms)
    slope, intercept = np.polyfit(t_fit, logn, 1)
    fitted = slope * t_fit + intercept
    ss_res = float(np.sum((logn - fitted) ** 2))
    ss_tot = float(np.sum((logn - logn.mean()) ** 2))
    r_sq = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return DecayFit(
        rate=-float(slope),
        r_squared=r_sq,
        window=(float(t_fit[0]), float(t_fit[-1])),
        n_samples=int(t_fit.shape[0]),
    )
