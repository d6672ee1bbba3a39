"""Scalar substrate of the quadratic oscillator model.

Parameter records, the quadratic jump-weight sequence ``omega``, the
geometric invariant measure, and the Lerch transcendent that controls the
diagonal relaxation bound.  Everything here is a pure function of its
inputs; all derived records are frozen after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModelParams",
    "TruncationSpec",
    "DiagonalBoundSpec",
    "omega",
    "lerch_phi",
    "invariant_diag",
    "invariant_tail_mass",
    "nu_from_temperature",
]


def omega(n, r):
    """Quadratic ladder weight ``n (n + r - 1)``.

    Parameters
    ----------
    n : int or array_like of int
        Level index, ``n >= 0``.
    r : float
        Representation parameter, strictly positive.

    Returns
    -------
    float or ndarray
        ``n (n + r - 1)``; zero at ``n = 0`` and strictly positive for
        ``n >= 1``.
    """
    if not r > 0.0:
        raise ValueError(f"representation parameter r must be > 0, got {r}")
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr < 0):
        raise ValueError("level index n must be nonnegative")
    out = n_arr * (n_arr + (r - 1.0))
    if np.isscalar(n) or n_arr.ndim == 0:
        return float(out)
    return out


def lerch_phi(z, r, tol=1e-12):
    """Lerch transcendent ``Phi(z, 1, r) = sum_{k>=0} z^k / (k + r)``.

    The series is truncated at the first ``K`` for which the geometric
    tail bound ``z^K / ((K + r)(1 - z))`` drops below ``tol``, so the
    absolute error is at most ``tol`` uniformly in ``z`` up to 1.

    Parameters
    ----------
    z : float
        Series argument, ``0 <= z < 1``.  The value ``z >= 1`` is
        rejected (the series diverges there).
    r : float
        Shift parameter, strictly positive.
    tol : float
        Absolute truncation tolerance.

    Returns
    -------
    float
    """
    if not 0.0 <= z < 1.0:
        raise ValueError(f"lerch_phi requires 0 <= z < 1, got z={z}")
    if not r > 0.0:
        raise ValueError(f"lerch_phi requires r > 0, got r={r}")
    if not tol > 0.0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    if z == 0.0:
        return 1.0 / r
    terms = []
    k = 0
    zk = 1.0
    one_minus_z = 1.0 - z
    while zk / ((k + r) * one_minus_z) > tol:
        terms.append(zk / (k + r))
        zk *= z
        k += 1
        if k > 50_000_000:
            raise RuntimeError("lerch_phi series did not reach tolerance")
    return math.fsum(terms)


def invariant_diag(nu, dim, normalized=True):
    """Diagonal of the truncated invariant state.

    Parameters
    ----------
    nu : float
        Coupling ratio lambda/mu, ``0 <= nu < 1``.
    dim : int
        Number of retained levels.
    normalized : bool
        When True (default) the geometric entries are rescaled to sum
        exactly to 1 over the truncated range; the result is then the
        exact stationary vector of the reflecting-truncated chain.  When
        False the raw entries ``(1 - nu^2) nu^(2u)`` are returned and the
        missing tail mass is ``invariant_tail_mass(nu, dim)``.

    Returns
    -------
    ndarray
        Length-``dim`` strictly positive vector (for ``nu > 0``).
    """
    if not 0.0 <= nu < 1.0:
        raise ValueError(
            f"invariant state requires 0 <= nu < 1 (no invariant state at nu >= 1), got {nu}"
        )
    if dim < 1:
        raise ValueError("dim must be >= 1")
    u = np.arange(dim, dtype=float)
    raw = (1.0 - nu * nu) * (nu * nu) ** u
    if not normalized:
        return raw
    return raw / raw.sum()


def invariant_tail_mass(nu, dim):
    """Mass of the raw invariant diagonal beyond the truncation, ``nu^(2 dim)``."""
    if not 0.0 <= nu < 1.0:
        raise ValueError(f"requires 0 <= nu < 1, got {nu}")
    return float(nu ** (2 * dim))


def nu_from_temperature(s, beta):
    """Coupling ratio from a Boltzmann weight: ``nu = exp(-s beta / 2)``.

    ``s`` is the energy scale and ``beta`` the inverse temperature, both
    strictly positive; ``nu^2 = exp(-s beta)`` is the detailed-balance
    ratio of the two couplings.
    """
    if not s > 0.0:
        raise ValueError(f"energy scale s must be positive, got {s}")
    if not beta > 0.0:
        raise ValueError(f"inverse temperature beta must be positive, got {beta}")
    return math.exp(-0.5 * s * beta)


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the quadratic open oscillator.

    Attributes
    ----------
    r : float
        Representation parameter, strictly positive.
    lam : float
        Emission coupling (the model's lambda), nonnegative.
    mu : float
        Absorption coupling, strictly positive.
    zeta_plus, zeta_minus : float
        Hamiltonian coefficients of the raising-then-lowering and
        lowering-then-raising quadratic words.

    The derived ratio ``nu = lam / mu`` controls the phase: ``nu < 1``
    admits the faithful geometric invariant state, ``nu = 1`` is the
    transient line.
    """

    r: float
    lam: float
    mu: float
    zeta_plus: float = 0.0
    zeta_minus: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r > 0.0):
            raise ValueError(f"r must be a finite positive real, got {self.r}")
        if not (math.isfinite(self.mu) and self.mu > 0.0):
            raise ValueError(f"mu must be a finite positive real, got {self.mu}")
        if not (math.isfinite(self.lam) and self.lam >= 0.0):
            raise ValueError(f"lam must be a finite nonnegative real, got {self.lam}")
        if not (math.isfinite(self.zeta_plus) and math.isfinite(self.zeta_minus)):
            raise ValueError("zeta coefficients must be finite reals")

    @property
    def nu(self):
        """Coupling ratio lambda/mu."""
        return self.lam / self.mu

    @classmethod
    def from_nu(cls, nu, r, mu=1.0, zeta_plus=0.0, zeta_minus=0.0):
        """Build parameters from the ratio ``nu`` and the scale ``mu``."""
        if nu < 0.0:
            raise ValueError(f"nu must be nonnegative, got {nu}")
        return cls(r=r, lam=nu * mu, mu=mu, zeta_plus=zeta_plus, zeta_minus=zeta_minus)


@dataclass(frozen=True)
class TruncationSpec:
    """Finite Fock truncation: levels ``0 .. dim - 1``.

    ``tail_tol`` is the largest admissible boundary occupancy; dynamics
    runs abort when the top two levels carry more population than this.
    """

    dim: int
    tail_tol: float = 1e-6

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError(f"dim must be an integer >= 2, got {self.dim}")
        if not 0.0 < self.tail_tol < 1.0:
            raise ValueError(f"tail_tol must lie in (0, 1), got {self.tail_tol}")


@dataclass(frozen=True)
class DiagonalBoundSpec:
    """Weight sequence behind the diagonal (Hardy) lower bound.

    ``tail_seq[k] = 1 / (k + r)`` and ``a_seq[n] = tail_seq[n] -
    tail_seq[n + 1]``, so partial sums of ``a_seq`` telescope exactly to
    the tails: ``sum_{n >= k} a_n = tail_seq[k]``.  Up to rounding of the
    construction, ``a_seq[n] = 1 / ((n + r + 1)(n + r))``.
    """

    r: float
    a_seq: np.ndarray = field(repr=False)
    tail_seq: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, r, length):
        if not r > 0.0:
            raise ValueError(f"r must be positive, got {r}")
        if length < 1:
            raise ValueError("length must be >= 1")
        tail = 1.0 / (np.arange(length + 1, dtype=float) + r)
        a = tail[:-1] - tail[1:]
        return cls(r=r, a_seq=a, tail_seq=tail)

    def __post_init__(self):
        if np.any(self.tail_seq <= 0.0) or np.any(np.diff(self.tail_seq) >= 0.0):
            raise ValueError("tail_seq must be positive and strictly decreasing")
