"""Smallest eigenpairs and the variational constants built on them."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .discretize import (
    DiscreteForm,
    Grid1D,
    Grid2D,
    assemble_bounded,
    assemble_selfsim,
    assemble_straightened,
    assemble_weighted_mass,
    selfsim_grid,
)
from .errors import NotConverged, UnderResolved
from .geometry import CrossSection, TubeSpec

__all__ = [
    "EigResult",
    "ModeSet",
    "SpectralCurve",
    "HardyReport",
    "ThresholdEstimate",
    "smallest_eigenpairs",
    "compute_modes",
    "compute_modes_on_grid",
    "lambda_bounded",
    "mu_curve",
    "hardy_variational",
    "hardy_certified",
    "hardy_upper_trial",
    "offset_factor",
    "stability_probe",
]

_DENSE_LIMIT = 1500


@dataclass
class EigResult:
    """One eigenpair of a pencil ``(A, M)``; ``vector`` is M-normalised."""

    value: float
    vector: np.ndarray
    residual: float
    iterations: int


def _as_pencil(form, mass=None):
    if isinstance(form, DiscreteForm):
        A, m = form.stiffness, form.mass
    else:
        A, m = form
        A = sp.csr_matrix(A)
        m = np.asarray(m.diagonal() if sp.issparse(m) else m, dtype=float)
        if m.ndim == 2:
            m = np.diag(m)
    if mass is not None:
        m = np.asarray(mass, dtype=float)
    if m.ndim != 1 or np.any(m <= 0):
        raise ValueError("mass must be a positive diagonal")
    return sp.csr_matrix(A), m


def smallest_eigenpairs(form, k: int = 1, tol: float = 1e-8, sigma: Optional[float] = None,
                        seed: int = 0, mass=None) -> List[EigResult]:
    """The ``k`` lowest eigenpairs of the symmetric pencil ``(A, M)``.

    Parameters
    ----------
    form : DiscreteForm or (A, M)
        ``M`` must be diagonal and positive.
    k : int
    tol : float
        Bound on the relative residual ``|Av - lam Mv| / |Mv|``.
    sigma : float, optional
        Shift for the shift-invert Lanczos iteration; must lie below the
        wanted eigenvalues. Defaults to ``-0.1``. Ignored for small or
        tridiagonal problems, which are solved directly.
    seed : int
        Seeds the Lanczos start vector, making results deterministic.
    mass : array_like, optional
        Replaces the diagonal mass of ``form``.

    Raises
    ------
    NotConverged
        If a residual exceeds ``tol``; carries the best Ritz value.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    A, m = _as_pencil(form, mass)
    n = m.size
    if k > n:
        raise ValueError("k exceeds problem size")
    d = 1.0 / np.sqrt(m)
    C = (sp.diags(d) @ A @ sp.diags(d)).tocsr()
    iters = 0
    if n <= _DENSE_LIMIT:
        vals, W = scipy.linalg.eigh(C.toarray(), subset_by_index=[0, k - 1])
    elif _bandwidth(C) <= 1:
        diag = C.diagonal()
        off = C.diagonal(1)
        vals, W = scipy.linalg.eigh_tridiagonal(diag, off, select="i", select_range=(0, k - 1))
    else:
        shift = -0.1 if sigma is None else float(sigma)
        lu = spla.splu((C - shift * sp.identity(n, format="csr")).tocsc())
        counter = [0]

        def solve(x):
            counter[0] += 1
            return lu.solve(np.asarray(x, dtype=float).ravel())

        op = spla.LinearOperator((n, n), matvec=solve, dtype=float)
        v0 = np.random.default_rng(seed).uniform(0.5, 1.5, n)
        try:
            vals, W = spla.eigsh(C, k=k, sigma=shift, which="LM", OPinv=op, v0=v0,
                                 tol=0.0, maxiter=max(1000, 20 * n))
        except spla.ArpackNoConvergence as exc:
            best = float(np.min(exc.eigenvalues)) if len(exc.eigenvalues) else None
            raise NotConverged("shift-invert Lanczos did not converge", best) from exc
        iters = counter[0]
        order = np.argsort(vals)
        vals, W = vals[order], W[:, order]
    out = []
    for j in range(k):
        v = d * W[:, j]
        v = v / math.sqrt(float(np.sum(m * v * v)))
        lam = float(v @ (A @ v))
        Mv = m * v
        res = float(np.linalg.norm(A @ v - lam * Mv) / np.linalg.norm(Mv))
        if res > tol:
            raise NotConverged(f"eigenpair {j} residual {res:.3e} exceeds {tol:.1e}", lam)
        out.append(EigResult(lam, v, res, iters))
    return out


def _bandwidth(C) -> int:
    coo = C.tocoo()
    return int(np.max(np.abs(coo.row - coo.col))) if coo.nnz else 0


# ---------------------------------------------------------------------------
# cross-section modes
# ---------------------------------------------------------------------------


@dataclass
class ModeSet:
    """First two Dirichlet eigenvalues of the cross-section and the ground mode."""

    E1: float
    E2: float
    J1: np.ndarray
    dtauJ1: np.ndarray
    a: float
    grid: Grid2D

    @property
    def dtauJ1_norm(self) -> float:
        """``|d_tau J1|`` including the flat-face rows of rectangular grids."""
        g = self.grid
        sq = float(np.sum(g.mass * self.dtauJ1 ** 2))
        if g.T_bnd is not None:
            sq += float(np.sum(g.w_bnd * (g.T_bnd @ self.J1) ** 2))
        return math.sqrt(sq)

    def to_dict(self) -> dict:
        g = self.grid
        return {"E1": self.E1, "E2": self.E2, "a": self.a,
                "dtauJ1_norm": self.dtauJ1_norm,
                "J1_dtauJ1_inner": float(np.sum(g.mass * self.J1 * self.dtauJ1)),
                "grid": g.describe()}


def compute_modes_on_grid(grid: Grid2D) -> ModeSet:
    """Cross-section modes on an existing grid (cached on the grid)."""
    if "modes" in grid._cache:
        return grid._cache["modes"]
    form = DiscreteForm(grid.stiffness(), grid.mass)
    pairs = smallest_eigenpairs(form, k=2, sigma=0.0)
    J1 = pairs[0].vector
    if J1.sum() < 0:
        J1 = -J1
    if J1.min() <= 0:
        raise NotConverged("ground mode is not positive on the interior", pairs[0].value)
    modes = ModeSet(pairs[0].value, pairs[1].value, J1, grid.T @ J1, grid.cross_section.a, grid)
    grid._cache["modes"] = modes
    return modes


def compute_modes(omega: CrossSection, h: float) -> ModeSet:
    """Build the cross-section grid at spacing ``h`` and compute its modes."""
    return compute_modes_on_grid(Grid2D.build(omega, h))


# ---------------------------------------------------------------------------
# bounded-interval threshold
# ---------------------------------------------------------------------------


@dataclass
class ThresholdEstimate:
    """Shifted threshold on a bounded tube; ``value`` is clamped at zero."""

    value: float
    raw: float
    residual: float
    meta: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return self.value


#: raw values in [-CLAMP, 0) are treated as round-off and reported as zero
CLAMP = 1e-8


def lambda_bounded(tube: TubeSpec, I: Sequence[float], grid2: Grid2D, n1: int = 64,
                   seed: int = 0) -> ThresholdEstimate:
    """Lowest eigenvalue of the natural-end form on ``I x omega`` minus ``E1h``."""
    modes = compute_modes_on_grid(grid2)
    form = assemble_bounded(tube, I, grid2, n1=n1).shifted(modes.E1)
    r = smallest_eigenpairs(form, 1, sigma=-0.05, seed=seed)[0]
    raw = r.value
    if raw < -CLAMP:
        warnings.warn(f"negative shifted threshold {raw:.3e} beyond round-off", RuntimeWarning,
                      stacklevel=2)
    value = max(raw, 0.0) if raw >= -CLAMP else raw
    return ThresholdEstimate(value, raw, r.residual,
                             {"I": [float(I[0]), float(I[1])], "n1": n1, "E1h": modes.E1})


# ---------------------------------------------------------------------------
# self-similar spectral curve
# ---------------------------------------------------------------------------


@dataclass
class SpectralCurve:
    """Samples ``(s, mu(s), residual, node_amp)`` of the self-similar threshold."""

    s: np.ndarray
    mu: np.ndarray
    residual: np.ndarray
    node_amp: np.ndarray
    grid: dict

    def __post_init__(self):
        if np.any(np.diff(self.s) <= 0):
            raise ValueError("s samples must strictly increase")

    def integral(self, s_end: float) -> float:
        """``int_0^s_end`` of the trapezoid interpolant (constant beyond the samples)."""
        s, mu = self.s, self.mu
        if s_end <= s[0]:
            return float(mu[0] * s_end)
        pts = np.concatenate([[0.0] if s[0] > 0 else [], s[s < s_end], [s_end]])
        vals = np.interp(pts, s, mu)
        trap = getattr(np, "trapezoid", None) or np.trapz
        return float(trap(vals, pts))

    def rows(self):
        return zip(self.s, self.mu, self.residual, self.node_amp)


def mu_curve(tube: TubeSpec, s_grid: Sequence[float], grid2: Grid2D,
             grid1: Optional[Grid1D] = None, h_coarse: float = 0.05,
             seed: int = 0) -> SpectralCurve:
    """Lowest eigenvalue of the self-similar form at each ``s``.

    One graded axial grid resolving ``supp sigma_s`` at the largest ``s`` is
    shared by all samples unless ``grid1`` is given.
    """
    s_grid = np.asarray(s_grid, dtype=float)
    if s_grid.ndim != 1 or s_grid.size == 0 or np.any(np.diff(s_grid) <= 0) or s_grid[0] < 0:
        raise ValueError("s_grid must be nonnegative and strictly increasing")
    if grid1 is None:
        grid1 = selfsim_grid(tube, float(s_grid[-1]), h_coarse=h_coarse)
    modes = compute_modes_on_grid(grid2)
    k0 = grid1.zero_index() - 1     # unknowns exclude the end nodes
    m = grid2.m
    mu, res, amp = [], [], []
    for s in s_grid:
        with warnings.catch_warnings():
            warnings.simplefilter("always", UnderResolved)
            form = assemble_selfsim(tube, float(s), grid1, grid2, modes.E1)
        r = smallest_eigenpairs(form, 1, sigma=0.0, seed=seed)[0]
        v = r.vector
        mu.append(r.value)
        res.append(r.residual)
        amp.append(float(np.max(np.abs(v[k0 * m:(k0 + 1) * m])) / np.max(np.abs(v))))
    desc = {"grid1": grid1.describe(), "grid2": grid2.describe(), "E1h": modes.E1}
    return SpectralCurve(s_grid, np.asarray(mu), np.asarray(res), np.asarray(amp), desc)


# ---------------------------------------------------------------------------
# Hardy constants
# ---------------------------------------------------------------------------


@dataclass
class HardyReport:
    """Variational and certified Hardy constants with their ingredients."""

    lambda_I: float
    cH_variational: Optional[float]
    cH_certified: float
    epsilon_star: float
    cS_lower: float
    interval: Optional[tuple]
    offset_factor: float

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def hardy_axial_grid(L: float, h_fine: float = 0.05, h_coarse: float = 0.25,
                     core: float = 2.0) -> Grid1D:
    """Default graded axial grid for Hardy and stability problems."""
    return Grid1D.graded(L, min(core, 0.5 * L), h_fine, h_coarse, 1.1)


def hardy_variational(tube: TubeSpec, grid2: Grid2D, grid1: Optional[Grid1D] = None,
                      seed: int = 0) -> float:
    """Best constant of the truncated Hardy inequality.

    Lowest eigenvalue of the pencil ``(A - E1h M, M_rho2)`` for the
    straightened form with Dirichlet ends at ``+-L``.
    """
    if grid1 is None:
        grid1 = hardy_axial_grid(tube.L)
    modes = compute_modes_on_grid(grid2)
    form = assemble_straightened(tube, grid1, grid2).shifted(modes.E1)
    w = assemble_weighted_mass(form, "rho2")
    return smallest_eigenpairs(form, 1, sigma=-1e-3, seed=seed, mass=w)[0].value


def offset_factor(center: float) -> float:
    """``min_x (1 + x^2) / (1 + (x - center)^2)`` in closed form."""
    c = float(center)
    if c == 0.0:
        return 1.0
    f = lambda x: (1 + x * x) / (1 + (x - c) ** 2)
    roots = ((c - math.sqrt(c * c + 4)) / 2, (c + math.sqrt(c * c + 4)) / 2)
    return min(1.0, *(f(x) for x in roots))


def hardy_certified(tube: TubeSpec, modes: ModeSet, lambda_I: float,
                    I: Optional[Sequence[float]] = None,
                    cH_variational: Optional[float] = None) -> HardyReport:
    """Constructive lower bound on the Hardy constant.

    The largest admissible ``eps`` solves the quadratic
    ``c1 eps^2 - (lam + c1 + c2) eps + lam >= 0`` with
    ``c1 = 1/8 + 4/|I|^2`` and ``c2 = |theta_dot|_inf^2 a^2 E1``, capped by
    ``1 / (1 + a^2 |theta_dot|_inf^2)``, and shrunk by a 0.99 safety factor.
    """
    if lambda_I < 0:
        raise ValueError("lambda_I must be nonnegative")
    if I is None:
        I = tube.twist.support
    lam = float(lambda_I)
    if I is None or lam == 0.0:
        return HardyReport(lam, cH_variational, 0.0, 0.0, 0.0,
                           None if I is None else tuple(I), 1.0)
    width = float(I[1] - I[0])
    center = 0.5 * float(I[0] + I[1])
    a, th = modes.a, tube.twist.sup_norm
    c1 = 0.125 + 4.0 / width ** 2
    c2 = th * th * a * a * modes.E1
    B = lam + c1 + c2
    eps_root = 2.0 * lam / (B + math.sqrt(B * B - 4.0 * c1 * lam))
    eps_cap = 1.0 / (1.0 + a * a * th * th)
    eps = 0.99 * min(eps_root, eps_cap)
    off = offset_factor(center)
    return HardyReport(lam, cH_variational, eps / 32.0 * off, eps, eps / 8.0,
                       (float(I[0]), float(I[1])), off)


def _arctan_diff(b, a):
    """``arctan(b) - arctan(a)`` for ``b > a > 0`` without cancellation."""
    return math.atan((b - a) / (1.0 + a * b))


def hardy_upper_trial(c: float, n: int, R: float = 2.0) -> float:
    """``b2 * (|phi_n'|^2 - c |rho phi_n|^2)`` for the piecewise trial profile.

    ``phi_n`` vanishes on ``[0, b1]``, rises linearly to 1 on ``[b1, b2]``,
    falls linearly to 0 on ``[b2, b3]`` with ``b1 = R^n``, ``b2 = R^(2n)``,
    ``b3 = R^(4n)``; both norms are evaluated in closed form.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    b1, b2, b3 = float(R) ** n, float(R) ** (2 * n), float(R) ** (4 * n)
    d12, d23 = b2 - b1, b3 - b2
    grad = 1.0 / d12 + 1.0 / d23
    rise = (d12 + (b1 * b1 - 1.0) * _arctan_diff(b2, b1)
            - b1 * (math.log1p(b2 * b2) - math.log1p(b1 * b1))) / d12 ** 2
    fall = (d23 + (b3 * b3 - 1.0) * _arctan_diff(b3, b2)
            - b3 * (math.log1p(b3 * b3) - math.log1p(b2 * b2))) / d23 ** 2
    return b2 * (grad - c * (rise + fall))


# ---------------------------------------------------------------------------
# stability of the threshold under an attractive Hardy-type potential
# ---------------------------------------------------------------------------


def stability_probe(tube: TubeSpec, eps_pot: float, grid2: Optional[Grid2D] = None,
                    grid1: Optional[Grid1D] = None, seed: int = 0) -> float:
    """Lowest eigenvalue of ``-Delta - eps_pot * rho^2`` minus ``E1h``.

    For untwisted tubes the problem separates and the axial operator
    ``-d^2/dx1^2 - eps_pot / (1 + x1^2)`` is solved on ``[-L, L]`` directly.
    """
    if grid1 is None:
        grid1 = hardy_axial_grid(tube.L, h_coarse=0.25 if tube.L <= 50 else 0.5)
    if not tube.twisted:
        from .discretize import _edge_ops, _gram
        unknown = np.ones(grid1.nodes.size, dtype=bool)
        unknown[[0, -1]] = False
        D, _, ell, _, dual = _edge_ops(grid1.nodes, unknown)
        x = grid1.nodes[unknown]
        A = _gram(D, ell) - sp.diags(eps_pot * dual / (1.0 + x * x))
        return smallest_eigenpairs((A, dual), 1, seed=seed)[0].value
    if grid2 is None:
        raise ValueError("twisted stability probe needs a cross-section grid")
    modes = compute_modes_on_grid(grid2)
    form = assemble_straightened(tube, grid1, grid2).shifted(modes.E1)
    w = assemble_weighted_mass(form, "rho2")
    A = (form.stiffness - sp.diags(eps_pot * w)).tocsr()
    return smallest_eigenpairs((A, form.mass), 1, sigma=-abs(eps_pot) - 0.05, seed=seed)[0].value
