"""Sector Dirichlet forms and the full spectral-gap analysis.

Each coherence sector of the weighted-space generator carries a real
symmetric tridiagonal quadratic form.  This module assembles those
forms, solves their edge eigenvalues by Sturm-sequence bisection,
evaluates the closed-form off-diagonal minima and minimizers, the
Lerch/Hardy diagonal lower bound, two trial-function upper bounds, the
regime classification, and the boundary curve of the exactly-solved
region in the ``(nu, r)`` plane.

The forms are assembled from the infinite-space coefficients restricted
to coordinates ``0 .. dim-1`` (couplings that reference index ``dim``
are dropped), so every numeric sector minimum is a variational upper
approximation that converges down to the true sector infimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, lerch_phi, omega

__all__ = [
    "TridiagonalForm",
    "GapReport",
    "RegionPoint",
    "sector_form",
    "min_eig_tridiag",
    "tridiag_smallest_eigs",
    "diagonal_gap_numeric",
    "off_diag_analytic",
    "off_diag_minimizer",
    "diagonal_lower_bound",
    "hardy_profile",
    "HardyProfile",
    "upper_bounds",
    "gap_report",
    "region_boundary",
]


@dataclass(frozen=True)
class TridiagonalForm:
    """Coefficient arrays of one sector quadratic form.

    ``y^T Q y = sum_j diag[j] y_j^2 + 2 sum_j offdiag[j] y_j y_{j+1}``
    equals the sector Dirichlet form on real vectors supported on the
    retained coordinates.
    """

    m: int
    diag: np.ndarray
    offdiag: np.ndarray
    dim: int

    def matrix(self):
        """Dense symmetric matrix of the form."""
        q = np.diag(self.diag)
        idx = np.arange(self.dim - 1)
        q[idx, idx + 1] = self.offdiag
        q[idx + 1, idx] = self.offdiag
        return q


def sector_form(params: ModelParams, m, dim) -> TridiagonalForm:
    """Assemble the sector-``m`` Dirichlet form on ``dim`` coordinates.

    diag_j = (mu^2 (w_j + w_{j+m}) + lam^2 (w_{j+1} + w_{j+m+1})) / 2,
    off_j  = -mu lam sqrt(w_{j+1} w_{j+m+1}),  with w = omega.

    For ``m = 0`` this reduces to ``diag_j = mu^2 w_j + lam^2 w_{j+1}``
    and ``off_j = -mu lam w_{j+1}``; the ``m >= 1`` boundary term
    ``mu^2 w_m |y_0|^2 / 2`` is the ``j = 0`` case of the same formula
    because ``w_0 = 0``.
    """
    m = int(m)
    if m < 0:
        raise ValueError("sector index m must be nonnegative")
    if dim < 4:
        raise ValueError("dim must be >= 4")
    r = params.r
    lam2 = params.lam ** 2
    mu2 = params.mu ** 2
    w = omega(np.arange(dim + m + 1), r)
    j = np.arange(dim)
    diag = 0.5 * (mu2 * (w[j] + w[j + m]) + lam2 * (w[j + 1] + w[j + m + 1]))
    jj = np.arange(dim - 1)
    off = -params.mu * params.lam * np.sqrt(w[jj + 1] * w[jj + m + 1])
    return TridiagonalForm(m=m, diag=diag, offdiag=off, dim=dim)


def _sturm_count(diag, off_sq, x, pivmin):
    """Number of eigenvalues of the tridiagonal matrix strictly below x."""
    count = 0
    q = diag[0] - x
    if q < 0.0:
        count += 1
    for i in range(1, diag.shape[0]):
        if abs(q) < pivmin:
            q = -pivmin
        q = (diag[i] - x) - off_sq[i - 1] / q
        if q < 0.0:
            count += 1
    return count


def tridiag_smallest_eigs(diag, offdiag, k=1, tol=1e-10):
    """The ``k`` smallest eigenvalues of a symmetric tridiagonal matrix.

    Sturm-sequence bisection bracketed by the Gershgorin bounds; each
    eigenvalue is located to absolute accuracy ``tol``.  Guaranteed
    bracketing, no convergence pathologies on nearly decoupled rows.
    """
    diag = np.asarray(diag, dtype=float)
    offdiag = np.asarray(offdiag, dtype=float)
    n = diag.shape[0]
    if offdiag.shape[0] != max(n - 1, 0):
        raise ValueError("offdiag must have length len(diag) - 1")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got {k}")
    if n == 1:
        return [float(diag[0])][:k]
    radius = np.zeros(n)
    radius[:-1] += np.abs(offdiag)
    radius[1:] += np.abs(offdiag)
    lo0 = float(np.min(diag - radius))
    hi0 = float(np.max(diag + radius))
    scale = max(abs(lo0), abs(hi0), 1.0)
    pivmin = 1e-290 * scale
    off_sq = offdiag * offdiag
    eigs = []
    for i in range(k):
        lo, hi = lo0, hi0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if _sturm_count(diag, off_sq, mid, pivmin) >= i + 1:
                hi = mid
            else:
                lo = mid
        eigs.append(0.5 * (lo + hi))
    return eigs


def min_eig_tridiag(form: TridiagonalForm, tol=1e-10):
    """Smallest eigenvalue of a sector form, to absolute accuracy ``tol``."""
    return tridiag_smallest_eigs(form.diag, form.offdiag, k=1, tol=tol)[0]


def _deflated_diagonal_minimum(form: TridiagonalForm, tol):
    """Second-smallest eigenvalue of the sector-0 form, after checking that
    the smallest is the (exact) geometric kernel direction."""
    low, second = tridiag_smallest_eigs(form.diag, form.offdiag, k=2, tol=min(tol, 1e-11))
    if abs(low) > 1e-10:
        raise RuntimeError(
            f"sector-0 kernel eigenvalue is {low:g}, not 0: form assembly is inconsistent"
        )
    return second


def diagonal_gap_numeric(params: ModelParams, dim, tol=1e-10):
    """Numeric diagonal-sector minimum over the kernel complement.

    Computes the two smallest eigenvalues of the sector-0 form, verifies
    the smallest is the exact geometric kernel (within 1e-10), and
    returns the second.  The result is a truncation-certified upper
    approximation of the infinite-space diagonal minimum.
    """
    if not params.nu < 1.0:
        raise ValueError("diagonal gap requires nu < 1")
    return _deflated_diagonal_minimum(sector_form(params, 0, dim), tol)


def off_diag_analytic(params: ModelParams, m):
    """Closed-form sector minimum ``mu^2 m ((m+r-1) + nu^2 (m-r+1)) / 2``.

    Valid for ``m >= 1``; the diagonal sector is a different variational
    problem and is rejected.
    """
    m = int(m)
    if m < 1:
        raise ValueError("off-diagonal sectors have m >= 1")
    nu2 = params.nu ** 2
    return 0.5 * params.mu ** 2 * m * ((m + params.r - 1.0) + nu2 * (m - params.r + 1.0))


def off_diag_minimizer(params: ModelParams, m, dim):
    """Normalized minimizing vector of the sector-``m`` form, ``m >= 1``.

    Built by the ratio recurrence ``y_{j+1} = (nu / theta_j) y_j`` with
    ``theta_j = (w_{j+m+1} + w_{j+1} - w_m) / (2 sqrt(w_{j+m+1} w_{j+1}))``,
    then scaled to unit Euclidean norm.  Requires ``nu < 1`` so the tail
    is square summable.
    """
    m = int(m)
    if m < 1:
        raise ValueError("off-diagonal sectors have m >= 1")
    if not params.nu < 1.0:
        raise ValueError("minimizer requires nu < 1")
    r = params.r
    nu = params.nu
    w = omega(np.arange(dim + m + 1), r)
    y = np.empty(dim)
    y[0] = 1.0
    for j in range(dim - 1):
        theta = (w[j + m + 1] + w[j + 1] - w[m]) / (2.0 * math.sqrt(w[j + m + 1] * w[j + 1]))
        y[j + 1] = nu / theta * y[j]
    return y / np.linalg.norm(y)


def diagonal_lower_bound(params: ModelParams):
    """Hardy/Lerch lower bound ``mu^2 / Phi(nu^2, 1, r)`` for the diagonal gap."""
    nu = params.nu
    if not 0.0 <= nu < 1.0:
        raise ValueError("diagonal lower bound requires nu in [0, 1)")
    if nu == 0.0:
        return params.mu ** 2 * params.r
    return params.mu ** 2 / lerch_phi(nu * nu, params.r, tol=1e-14)


@dataclass(frozen=True)
class HardyProfile:
    """Weighted-Hardy profile ``V(u)`` together with its supremum."""

    u: np.ndarray
    values: np.ndarray
    running_sup: np.ndarray
    phi_limit: float
    mu_sq_times_b: float


def hardy_profile(params: ModelParams, u_max, tol=1e-14) -> HardyProfile:
    """Evaluate ``V(u)`` for ``u = 0 .. u_max``.

    ``V(u) = ((u+r+1)/(u+1)) sum_k nu^{2k} (1/(k+r) - 1/(k+u+1+r))``;
    the supremum over all ``u`` is ``mu^2 B(nu)``, whose value is the
    Lerch limit ``Phi(nu^2, 1, r)``, reached monotonically from below.
    The series is truncated by the geometric tail bound at ``tol``.
    """
    if u_max < 10:
        raise ValueError("u_max must be >= 10")
    nu = params.nu
    if not 0.0 <= nu < 1.0:
        raise ValueError("hardy profile requires nu in [0, 1)")
    r = params.r
    t = nu * nu
    if t == 0.0:
        k_cut = 1
    else:
        k_cut = 1
        zk = 1.0
        while zk / ((k_cut + r) * (1.0 - t)) > tol:
            zk *= t
            k_cut += 1
    k = np.arange(k_cut, dtype=float)
    zpow = t ** k
    base = zpow / (k + r)
    u = np.arange(u_max + 1, dtype=float)
    # sum_k z^k / (k + u + 1 + r) on a (u, k) grid
    shifted = zpow[None, :] / (k[None, :] + u[:, None] + 1.0 + r)
    series = base.sum() - shifted.sum(axis=1)
    values = (u + r + 1.0) / (u + 1.0) * series
    running = np.maximum.accumulate(values)
    phi = lerch_phi(t, r, tol=tol) if t > 0.0 else 1.0 / r
    # V carries no mu factor, so its supremum is exactly mu^2 B(nu)
    return HardyProfile(
        u=u,
        values=values,
        running_sup=running,
        phi_limit=phi,
        mu_sq_times_b=float(running[-1]),
    )


def upper_bounds(params: ModelParams, tol=1e-12):
    """Two trial-function upper bounds for the diagonal gap.

    Returns ``(upper_linear, upper_lerch)``: the linear trial
    ``mu^2 (2 nu^2 + r (1 - nu^2))`` and the tail-sequence trial
    ``lam^2 * sum_j (j+1) nu^{2j} / ((j+r+1)^2 (j+r)) /
    sum_j (1/(j+r) - c)^2 nu^{2j}`` with ``c = (1 - nu^2) Phi(nu^2, 1, r)``.
    Both series are summed to the geometric-tail tolerance ``tol``.
    """
    nu = params.nu
    if not 0.0 < nu < 1.0:
        raise ValueError("upper bounds require nu in (0, 1)")
    r = params.r
    t = nu * nu
    mu2 = params.mu ** 2
    lam2 = params.lam ** 2
    upper_linear = mu2 * (2.0 * t + r * (1.0 - t))

    c = (1.0 - t) * lerch_phi(t, r, tol=tol * 1e-2)
    coeff_cap = max(1.0 / ((r + 1.0) ** 2 * r), (1.0 / r + c) ** 2, 1.0)
    k_cut = 1
    zk = 1.0
    while zk * coeff_cap / (1.0 - t) > tol:
        zk *= t
        k_cut += 1
        if k_cut > 50_000_000:
            raise RuntimeError("upper bound series did not converge")
    j = np.arange(k_cut, dtype=float)
    zpow = t ** j
    num = math.fsum((j + 1.0) / ((j + r + 1.0) ** 2 * (j + r)) * zpow)
    den = math.fsum((1.0 / (j + r) - c) ** 2 * zpow)
    upper_lerch = lam2 * num / den
    return upper_linear, upper_lerch


@dataclass(frozen=True)
class GapReport:
    """Complete spectral-gap analysis at one parameter point."""

    params: ModelParams
    dim: int
    m_max: int
    sector_minima_numeric: np.ndarray
    off_diag_analytic: np.ndarray
    off_diag_gap: float
    diagonal_lower: float
    diagonal_numeric: float
    upper_linear: float
    upper_lerch: float
    condition_value: float
    regime: str
    gap_value: float | None
    gap_interval: tuple[float, float] | None


def condition_value(params: ModelParams, tol=1e-13):
    """Regime classifier ``(2 nu^2 + r (1 - nu^2)) Phi(nu^2, 1, r)``.

    Values at most 2 certify that the gap equals the off-diagonal
    minimum.
    """
    nu = params.nu
    t = nu * nu
    return (2.0 * t + params.r * (1.0 - t)) * lerch_phi(t, params.r, tol=tol)


def gap_report(params: ModelParams, dim, m_max=6, tol=1e-10) -> GapReport:
    """Assemble the full gap analysis.

    When the condition value is at most 2 the regime is
    ``exact-off-diagonal`` and the gap is ``mu^2 (2 nu^2 + r(1-nu^2))/2``
    exactly; otherwise the regime is ``undetermined`` and only the
    enclosing interval is reported, because the numeric diagonal minimum
    is a truncation-certified upper approximation rather than the gap.
    """
    if not 0.0 < params.nu < 1.0:
        raise ValueError("gap analysis requires nu in (0, 1)")
    if m_max < 3:
        raise ValueError("m_max must be >= 3")
    diag_numeric = diagonal_gap_numeric(params, dim, tol=tol)
    minima = [diag_numeric]
    for m in range(1, m_max + 1):
        minima.append(min_eig_tridiag(sector_form(params, m, dim), tol=tol))
    minima = np.asarray(minima)
    analytic = np.asarray([off_diag_analytic(params, m) for m in range(1, m_max + 1)])
    off_gap = float(analytic[0])
    lower = diagonal_lower_bound(params)
    upper_lin, upper_ler = upper_bounds(params)
    cond = condition_value(params)
    if cond <= 2.0:
        regime = "exact-off-diagonal"
        t = params.nu ** 2
        gap_value = 0.5 * params.mu ** 2 * (2.0 * t + params.r * (1.0 - t))
        gap_interval = None
    else:
        regime = "undetermined"
        gap_value = None
        gap_interval = (min(lower, off_gap), float(np.min(minima)))
    return GapReport(
        params=params,
        dim=dim,
        m_max=m_max,
        sector_minima_numeric=minima,
        off_diag_analytic=analytic,
        off_diag_gap=off_gap,
        diagonal_lower=lower,
        diagonal_numeric=diag_numeric,
        upper_linear=upper_lin,
        upper_lerch=upper_ler,
        condition_value=cond,
        regime=regime,
        gap_value=gap_value,
        gap_interval=gap_interval,
    )


@dataclass(frozen=True)
class RegionPoint:
    """One row of the regime-boundary curve table."""

    nu: float
    r_star: float
    r_sufficient: float
    r_figure: float
    condition_residual: float
    status: str


def _condition_at(nu, r):
    t = nu * nu
    return (2.0 * t + r * (1.0 - t)) * lerch_phi(t, r, tol=1e-14)


def region_boundary(nu_grid, tol=1e-10, max_iter=300):
    """Solve the regime boundary ``condition(nu, r) = 2`` for each ``nu``.

    The condition is continuous and strictly decreasing in ``r``.  The
    default bracket is ``[nu^2/(1-nu^2), 2 nu^2/(1-nu^2)]``; when the
    lower endpoint already satisfies the condition (which happens for
    nu above roughly 0.777, where the boundary dips below the lower
    reference curve) the bracket is extended downward and the row is
    flagged ``bracket-extended``.  Rows whose bracket cannot be
    established are flagged ``failed`` with a NaN root; no exception is
    raised for individual rows.

    Returns a list of :class:`RegionPoint` with both reference curves.
    """
    rows = []
    for nu in np.asarray(nu_grid, dtype=float):
        if not 0.0 < nu <= 0.999:
            raise ValueError(f"grid values must lie in (0, 0.999], got {nu}")
        t = nu * nu
        r_fig = t / (1.0 - t)
        r_suf = 2.0 * r_fig
        lo, hi = r_fig, r_suf
        c_lo = _condition_at(nu, lo)
        c_hi = _condition_at(nu, hi)
        status = "ok"
        if c_hi > 2.0:
            # not expected (the sufficient condition guarantees c <= 2);
            # extend upward defensively rather than abort the sweep
            status = "bracket-extended"
            for _ in range(200):
                hi *= 2.0
                c_hi = _condition_at(nu, hi)
                if c_hi <= 2.0:
                    break
        if c_lo <= 2.0:
            status = "bracket-extended"
            for _ in range(200):
                hi = min(hi, lo)
                lo *= 0.5
                if lo < 1e-14:
                    break
                c_lo = _condition_at(nu, lo)
                if c_lo > 2.0:
                    break
        if not (c_lo > 2.0 >= c_hi):
            rows.append(
                RegionPoint(
                    nu=float(nu),
                    r_star=float("nan"),
                    r_sufficient=r_suf,
                    r_figure=r_fig,
                    condition_residual=float("nan"),
                    status="failed",
                )
            )
            continue
        root = None
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            c_mid = _condition_at(nu, mid)
            if abs(c_mid - 2.0) <= tol:
                root = mid
                residual = abs(c_mid - 2.0)
                break
            if c_mid > 2.0:
                lo = mid
            else:
                hi = mid
        if root is None:
            mid = 0.5 * (lo + hi)
            residual = abs(_condition_at(nu, mid) - 2.0)
            root = mid
            if residual > tol:
                rows.append(
                    RegionPoint(
                        nu=float(nu),
                        r_star=float("nan"),
                        r_sufficient=r_suf,
                        r_figure=r_fig,
                        condition_residual=residual,
                        status="failed",
                    )
                )
                continue
        rows.append(
            RegionPoint(
                nu=float(nu),
                r_star=float(root),
                r_sufficient=r_suf,
                r_figure=r_fig,
                condition_residual=float(residual),
                status=status,
            )
        )
    return rows
