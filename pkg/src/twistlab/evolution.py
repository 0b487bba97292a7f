"""Heat flow on the straightened tube, self-similar variables and decay fits.

The evolved equation is ``u_t = -(A - E1h M) u`` in the lumped mass inner
product, i.e. the Dirichlet heat equation shifted by the cross-section
threshold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .discretize import (
    K_LIMIT,
    DiscreteForm,
    Grid1D,
    Grid2D,
    assemble_oscillator,
    assemble_straightened,
)
from .errors import (
    BoundaryContaminated,
    LinearSolveFailure,
    PoorFit,
    StepTooLarge,
    WeightOverflow,
    WindowTooShort,
)
from .geometry import TubeSpec

__all__ = [
    "HeatState",
    "HeatStepper",
    "InitialData",
    "NormSeries",
    "DecayFit",
    "EnergySystemState",
    "state_norms",
    "step",
    "evolve_and_record",
    "evolution_axial_grid",
    "selfsim_map",
    "selfsim_inverse",
    "reduced_1d_evolve",
    "energy_system_integrate",
    "lambert_w_log",
    "lambert_closed_form",
    "fit_decay_rate",
    "semigroup_no_decay_witness",
]

SCHEMES = {"implicit_euler": 1.0, "crank_nicolson": 0.5}


# ---------------------------------------------------------------------------
# states and norms
# ---------------------------------------------------------------------------


@dataclass
class HeatState:
    """Grid solution at physical time ``t``.

    ``values`` has shape ``(n1, m)``: axial unknowns by cross-section nodes.
    ``x1`` holds the axial coordinates of the unknowns and ``dual`` their
    lumped lengths; Dirichlet end nodes are not stored (they are zero).
    """

    values: np.ndarray
    t: float
    x1: np.ndarray
    dual: np.ndarray
    grid2: Grid2D
    _norms: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).reshape(self.x1.size, self.grid2.m)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("state has non-finite values")

    @property
    def norms(self) -> dict:
        if not self._norms:
            self._norms.update(state_norms(self))
        return self._norms

    def replace(self, values, t) -> "HeatState":
        return HeatState(values, t, self.x1, self.dual, self.grid2)


def state_norms(state: HeatState) -> dict:
    """``L2``, self-similar ``K``, ``rho^-1`` and mixed ``L^1_x1 L^2_x'`` norms.

    ``norm_K`` is the weighted norm of the self-similar profile at
    ``s = log(1 + t)``, which equals ``int exp(x1^2 / (4 (1 + t))) u^2``;
    at ``t = 0`` it is the ``L^2(K)`` norm of the initial datum.
    """
    u, x, w, m2 = state.values, state.x1, state.dual, state.grid2.mass
    u2 = u * u
    slice2 = u2 @ m2
    out = {
        "norm_L2": math.sqrt(float(np.sum(w * slice2))),
        "norm_rhoinv": math.sqrt(float(np.sum(w * (1.0 + x * x) * slice2))),
        "norm_mixed1": math.sqrt(float(np.sum(m2 * (w @ np.abs(u)) ** 2))),
    }
    y = x / math.sqrt(1.0 + state.t)
    if np.max(np.abs(y)) > K_LIMIT:
        raise WeightOverflow(f"K weight overflows for |y1| > {K_LIMIT:.3f}")
    out["norm_K"] = math.sqrt(float(np.sum(w * np.exp(0.25 * y * y) * slice2)))
    return out


# ---------------------------------------------------------------------------
# time stepping
# ---------------------------------------------------------------------------


class HeatStepper:
    """Factorised one-step map for the shifted heat equation.

    Solves ``(M + dt*th*A) u+ = (M - dt*(1-th)*A) u`` with ``th = 1``
    (implicit Euler) or ``th = 1/2`` (Crank-Nicolson), where ``A`` is the
    shifted stiffness of ``form``.
    """

    def __init__(self, form: DiscreteForm, dt: float, scheme: str = "implicit_euler",
                 rtol: float = 1e-10):
        if dt <= 0:
            raise ValueError("dt must be positive")
        if scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {scheme!r}")
        th = SCHEMES[scheme]
        A, M = form.stiffness, sp.diags(form.mass)
        self.form, self.dt, self.scheme, self.rtol = form, float(dt), scheme, rtol
        self.lhs = (M + dt * th * A).tocsc()
        self.rhs = None if th == 1.0 else (M - dt * (1.0 - th) * A).tocsr()
        self._lu = spla.splu(self.lhs)

    def apply(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float).ravel()
        b = self.form.mass * u if self.rhs is None else self.rhs @ u
        if not np.any(b):
            return np.zeros_like(b)
        x = self._lu.solve(b)
        res = np.linalg.norm(self.lhs @ x - b) / np.linalg.norm(b)
        if not res <= self.rtol:
            x = x + self._lu.solve(b - self.lhs @ x)
            res = np.linalg.norm(self.lhs @ x - b) / np.linalg.norm(b)
            if not res <= self.rtol:
                raise LinearSolveFailure(f"relative residual {res:.2e} exceeds {self.rtol:.0e}")
        return x


def step(state: HeatState, dt: float, scheme: str, form: DiscreteForm) -> HeatState:
    """Advance ``state`` by one step on the shifted form ``A - E1h M``."""
    cache = form.meta.setdefault("_steppers", {})
    key = (float(dt), scheme)
    if key not in cache:
        cache[key] = HeatStepper(form, dt, scheme)
    return state.replace(cache[key].apply(state.values), state.t + dt)


@dataclass(frozen=True)
class InitialData:
    """Separable initial datum ``f(x1) * J1(x')``.

    ``family='gaussian'`` gives ``f = exp(-x1^2 / n)``; ``family='custom'``
    takes an axial callable ``f``.
    """

    family: str = "gaussian"
    n: float = 6.0
    f: Optional[Callable] = None

    def axial(self, x1) -> np.ndarray:
        x1 = np.asarray(x1, dtype=float)
        if self.family == "gaussian":
            return np.exp(-x1 * x1 / self.n)
        if self.family == "custom" and self.f is not None:
            return np.asarray(self.f(x1), dtype=float)
        raise ValueError(f"unknown initial family {self.family!r}")

    def half_width(self, tol: float = 1e-8) -> float:
        """Axial radius beyond which the datum is below ``tol`` of its peak."""
        if self.family == "gaussian":
            return math.sqrt(self.n * math.log(1.0 / tol))
        return float("nan")

    def K_finite(self) -> bool:
        """Whether the ``L^2(K)`` norm is finite on the whole line."""
        return self.family == "gaussian" and self.n < 8


def evolution_axial_grid(L: float = 40.0, h_fine: float = 0.05, h_coarse: float = 0.2,
                         core: float = 2.0) -> Grid1D:
    """Default graded axial grid for heat runs."""
    return Grid1D.graded(L, core, h_fine, h_coarse, 1.1)


DEFAULT_SCHEDULE = ((0.01, 2.0), (0.025, 5.0), (0.05, 20.0), (0.1, 50.0))


@dataclass
class NormSeries:
    """Norms recorded after every step of a heat run."""

    t: np.ndarray
    norm_L2: np.ndarray
    norm_K: np.ndarray
    norm_rhoinv: np.ndarray
    norm_mixed1: np.ndarray
    min_ratio: np.ndarray
    meta: dict = field(default_factory=dict)
    snapshots: dict = field(default_factory=dict, repr=False)

    COLUMNS = ("t", "norm_L2", "norm_K", "norm_rhoinv", "norm_mixed1")

    def columns(self):
        return [getattr(self, c) for c in self.COLUMNS]

    @property
    def non_expansive(self) -> bool:
        return bool(np.all(np.diff(self.norm_L2) <= 1e-14 * self.norm_L2[:-1]))

    @property
    def positive(self) -> bool:
        return bool(np.all(self.min_ratio >= -1e-12))


def _schedule(T_end: float, dt) -> List[Tuple[float, float]]:
    if np.isscalar(dt):
        return [(float(dt), float(T_end))]
    stages = [(float(d), min(float(tt), T_end)) for d, tt in dt]
    stages = [s for i, s in enumerate(stages) if i == 0 or stages[i - 1][1] < T_end]
    if stages[-1][1] < T_end:
        stages.append((stages[-1][0], float(T_end)))
    return stages


def evolve_and_record(tube: TubeSpec, u0: InitialData, T_end: float,
                      dt: Union[float, Sequence[Tuple[float, float]]] = DEFAULT_SCHEDULE,
                      scheme: str = "implicit_euler", grid2: Optional[Grid2D] = None,
                      grid1: Optional[Grid1D] = None, h_cross: float = math.pi / 10,
                      snapshot_times: Sequence[float] = ()) -> NormSeries:
    """Evolve ``u0 * J1`` on the straightened tube and record norms each step.

    ``dt`` is either a step size or a sequence of ``(dt, t_until)`` stages;
    the default refines the first steps where the solution varies fastest.
    """
    from .spectral import compute_modes_on_grid

    if grid2 is None:
        grid2 = Grid2D.build(tube.cross_section, h_cross)
    if grid1 is None:
        grid1 = evolution_axial_grid(tube.L)
    if u0.family == "gaussian" and not u0.K_finite():
        raise WeightOverflow("K-norms need the Gaussian family with n < 8")
    modes = compute_modes_on_grid(grid2)
    form = assemble_straightened(tube, grid1, grid2).shifted(modes.E1)
    x1 = form.meta["x1"]
    dual = form.mass.reshape(x1.size, grid2.m)[:, 0] / grid2.mass[0]
    state = HeatState(np.outer(u0.axial(x1), modes.J1), 0.0, x1, dual, grid2)
    snaps = sorted(float(v) for v in snapshot_times)
    rec = {c: [] for c in NormSeries.COLUMNS}
    mins, snapshots = [], {}

    def record(st):
        for c in NormSeries.COLUMNS[1:]:
            rec[c].append(st.norms[c])
        rec["t"].append(st.t)
        v = st.values
        peak = np.max(np.abs(v))
        mins.append(float(v.min() / peak) if peak > 0 else 0.0)

    record(state)
    if snaps and snaps[0] == 0.0:
        snapshots[0.0] = state
    for dt_k, t_until in _schedule(T_end, dt):
        stepper = HeatStepper(form, dt_k, scheme)
        n_steps = int(round((t_until - state.t) / dt_k))
        for _ in range(max(n_steps, 0)):
            state = state.replace(stepper.apply(state.values), state.t + dt_k)
            record(state)
            for ts in snaps:
                if ts not in snapshots and abs(state.t - ts) < 0.5 * dt_k:
                    snapshots[ts] = state
    arr = {c: np.asarray(v) for c, v in rec.items()}
    meta = {"scheme": scheme, "E1h": modes.E1, "L": tube.L, "twisted": tube.twisted,
            "grid1": grid1.describe(), "grid2": grid2.describe(),
            "support_width": _support_width(tube, u0)}
    return NormSeries(arr["t"], arr["norm_L2"], arr["norm_K"], arr["norm_rhoinv"],
                      arr["norm_mixed1"], np.asarray(mins), meta, snapshots)


def _support_width(tube: TubeSpec, u0: InitialData) -> float:
    supp = tube.twist.support
    reach = 0.0 if supp is None else max(abs(supp[0]), abs(supp[1]))
    w = u0.half_width()
    return max(reach, w) if np.isfinite(w) else reach


# ---------------------------------------------------------------------------
# self-similar variables
# ---------------------------------------------------------------------------


@dataclass
class SelfSimState:
    """Profile ``u~(y1, x') = e^{s/4} u(e^{s/2} y1, x', e^s - 1)`` on a y-grid."""

    values: np.ndarray
    s: float
    y1: np.ndarray
    dual: np.ndarray
    grid2: Grid2D

    def norm(self) -> float:
        return math.sqrt(float(np.sum(self.dual * ((self.values ** 2) @ self.grid2.mass))))


def _interp_matrix(x_from: np.ndarray, x_to: np.ndarray) -> sp.csr_matrix:
    """Piecewise-linear interpolation with zero boundary values outside the range.

    ``x_from`` are interior unknowns; the zero Dirichlet ends one cell beyond
    them are implicit.
    """
    n = x_from.size
    # extend with the implicit zero end nodes
    lo = x_from[0] - (x_from[1] - x_from[0])
    hi = x_from[-1] + (x_from[-1] - x_from[-2])
    xf = np.concatenate([[lo], x_from, [hi]])
    j = np.clip(np.searchsorted(xf, x_to, side="right") - 1, 0, xf.size - 2)
    t = (x_to - xf[j]) / (xf[j + 1] - xf[j])
    inside = (x_to >= xf[0]) & (x_to <= xf[-1])
    rows = np.concatenate([np.arange(x_to.size)] * 2)
    cols = np.concatenate([j, j + 1]) - 1          # shift back to unknown indices
    vals = np.concatenate([(1 - t) * inside, t * inside])
    keep = (cols >= 0) & (cols < n) & (vals != 0)
    return sp.csr_matrix((vals[keep], (rows[keep], cols[keep])), shape=(x_to.size, n))


def _dual_lengths(nodes: np.ndarray) -> np.ndarray:
    ext = np.concatenate([[2 * nodes[0] - nodes[1]], nodes, [2 * nodes[-1] - nodes[-2]]])
    return 0.5 * (ext[2:] - ext[:-2])


def selfsim_map(state: HeatState, y1: Optional[np.ndarray] = None) -> SelfSimState:
    """Self-similarity transform at ``s = log(1 + t)``.

    ``y1`` are the target axial nodes; by default the physical nodes scaled
    by ``e^{-s/2}``, on which the map is exact.
    """
    s = math.log1p(state.t)
    g = math.exp(0.5 * s)
    if y1 is None:
        y1 = state.x1 / g
        vals = state.values * math.exp(0.25 * s)
        dual = state.dual / g
    else:
        y1 = np.asarray(y1, dtype=float)
        P = _interp_matrix(state.x1, g * y1)
        vals = math.exp(0.25 * s) * (P @ state.values)
        dual = _dual_lengths(y1)
    return SelfSimState(vals, s, y1, dual, state.grid2)


def selfsim_inverse(sstate: SelfSimState, x1: Optional[np.ndarray] = None) -> HeatState:
    """Inverse transform back to physical variables at ``t = e^s - 1``."""
    g = math.exp(0.5 * sstate.s)
    if x1 is None:
        x1 = sstate.y1 * g
        vals = sstate.values * math.exp(-0.25 * sstate.s)
        dual = sstate.dual * g
    else:
        x1 = np.asarray(x1, dtype=float)
        P = _interp_matrix(sstate.y1, x1 / g)
        vals = math.exp(-0.25 * sstate.s) * (P @ sstate.values)
        dual = _dual_lengths(x1)
    return HeatState(vals, math.expm1(sstate.s), x1, dual, sstate.grid2)


# ---------------------------------------------------------------------------
# one-dimensional reduced flows
# ---------------------------------------------------------------------------


@dataclass
class ReducedSeries:
    """Norm history of a reduced 1D flow and its late-time log slope."""

    s: np.ndarray
    norm: np.ndarray
    slope: float


def reduced_1d_evolve(dirichlet_at_zero: bool, phi0=None, s_end: float = 20.0, ds: float = 0.01,
                      grid1: Optional[Grid1D] = None) -> ReducedSeries:
    """Implicit-Euler flow of ``h`` (or ``h_D``) and the late-time decay slope.

    Parameters
    ----------
    dirichlet_at_zero : bool
        Use ``h_D`` (extra Dirichlet condition at the origin).
    phi0 : callable or ndarray, optional
        Initial profile, either a function of ``y1`` or values on the unknowns.
        Defaults to the off-centre Gaussian ``exp(-(y1 - 0.7)^2)``.
    s_end, ds : float
    grid1 : Grid1D, optional
        Defaults to 2000 equal cells on ``[-20, 20]``.

    Returns
    -------
    ReducedSeries
        ``slope`` is the least-squares slope of ``log|phi|`` against ``s``
        over the last half of the run.
    """
    if grid1 is None:
        grid1 = Grid1D.uniform(20.0, 2000)
    form = assemble_oscillator(grid1, dirichlet_at_zero)
    y = form.meta["x1"]
    if phi0 is None:
        phi0 = lambda v: np.exp(-(v - 0.7) ** 2)
    phi = np.asarray(phi0(y) if callable(phi0) else phi0, dtype=float).copy()
    if phi.shape != y.shape:
        raise ValueError("initial profile does not match the grid unknowns")
    # tridiagonal system (M + ds A) in banded storage
    A = form.stiffness
    diag = form.mass + ds * A.diagonal()
    off = ds * A.diagonal(1)
    ab = np.zeros((3, y.size))
    ab[0, 1:] = off
    ab[1] = diag
    ab[2, :-1] = off
    n_steps = int(round(s_end / ds))
    s = ds * np.arange(n_steps + 1)
    norms = np.empty(n_steps + 1)
    norms[0] = math.sqrt(form.norm2(phi))
    for k in range(1, n_steps + 1):
        phi = scipy.linalg.solve_banded((1, 1), ab, form.mass * phi)
        norms[k] = math.sqrt(form.norm2(phi))
    half = s >= 0.5 * s_end
    slope = float(np.polyfit(s[half], np.log(norms[half]), 1)[0])
    return ReducedSeries(s, norms, slope)


# ---------------------------------------------------------------------------
# energy ODE system
# ---------------------------------------------------------------------------


@dataclass
class EnergySystemState:
    """Solution of the energy system: ``a = |u|^2`` and ``b = |rho^-1 u|^2``."""

    t: np.ndarray
    a: np.ndarray
    b: np.ndarray
    xi0: float
    cH: float


def _energy_rhs(a, b, cH):
    q = a * a / b
    return -2.0 * cH * q, 2.0 * (1.0 - cH) * a - 2.0 * q


def energy_system_integrate(a0: float, b0: float, cH: float, T_end: float,
                            dt: float = 0.01) -> EnergySystemState:
    """Classical RK4 for ``a' = -2 cH a^2/b``, ``b' = 2(1 - cH) a - 2 a^2/b``.

    Raises
    ------
    StepTooLarge
        If ``a`` or ``b`` changes by more than 10 % in one step.
    """
    if not 0 < a0 < b0:
        raise ValueError("need 0 < a0 < b0")
    if not 0 < cH <= 1:
        raise ValueError("need 0 < cH <= 1")
    n = int(round(T_end / dt))
    t = dt * np.arange(n + 1)
    a = np.empty(n + 1)
    b = np.empty(n + 1)
    a[0], b[0] = a0, b0
    for k in range(n):
        ak, bk = a[k], b[k]
        k1 = _energy_rhs(ak, bk, cH)
        k2 = _energy_rhs(ak + 0.5 * dt * k1[0], bk + 0.5 * dt * k1[1], cH)
        k3 = _energy_rhs(ak + 0.5 * dt * k2[0], bk + 0.5 * dt * k2[1], cH)
        k4 = _energy_rhs(ak + dt * k3[0], bk + dt * k3[1], cH)
        a[k + 1] = ak + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        b[k + 1] = bk + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        if abs(a[k + 1] - ak) > 0.1 * ak or abs(b[k + 1] - bk) > 0.1 * bk:
            raise StepTooLarge(f"relative change above 10% at t={t[k + 1]:.4g}; reduce dt")
    return EnergySystemState(t, a, b, b0 / a0 - 1.0, cH)


def lambert_w_log(log_z, tol: float = 1e-12, maxiter: int = 100):
    """Principal Lambert W of ``z = exp(log_z)``, from ``w + log(w) = log_z``.

    Newton iteration on the logarithmic form never forms ``z`` itself, so
    arguments far beyond the float range are fine.
    """
    lz = np.asarray(log_z, dtype=float)
    w = np.where(lz > 1.0, lz - np.log(np.maximum(lz, 1.0)), np.exp(np.minimum(lz, 1.0)) / 2.0)
    w = np.maximum(w, 1e-300)
    for _ in range(maxiter):
        f = w + np.log(w) - lz
        w_new = w - f / (1.0 + 1.0 / w)
        w_new = np.where(w_new <= 0, 0.5 * w, w_new)
        done = np.abs(w_new - w) <= tol * np.maximum(1.0, np.abs(w_new))
        w = w_new
        if np.all(done):
            break
    else:
        raise RuntimeError("Lambert W iteration did not converge")
    return w if w.ndim else float(w)


def lambert_closed_form(a0: float, b0: float, cH: float, t):
    """Exact solution of the energy system via Lambert W.

    ``a(t) = a0 (xi0 / W)^cH`` and ``b(t) = a(t) (1 + W)`` with
    ``W = W(xi0 exp(xi0 + 2t))`` and ``xi0 = b0/a0 - 1``.
    """
    xi0 = b0 / a0 - 1.0
    if not xi0 > 0:
        raise ValueError("need b0 > a0")
    t = np.asarray(t, dtype=float)
    W = lambert_w_log(math.log(xi0) + xi0 + 2.0 * t)
    a = a0 * (xi0 / W) ** cH
    return a, a * (1.0 + W)


# ---------------------------------------------------------------------------
# decay fits
# ---------------------------------------------------------------------------


@dataclass
class DecayFit:
    """Power-law fit ``|u(t)| ~ C (1 + t)^(-gamma_hat)``."""

    gamma_hat: float
    prefactor: float
    window: Tuple[float, float]
    r2: float
    n_samples: int

    def to_dict(self) -> dict:
        return {"gamma_hat": self.gamma_hat, "prefactor": self.prefactor,
                "window": list(self.window), "r2": self.r2, "n_samples": self.n_samples}


def boundary_time(L: float, width: float) -> float:
    """Time after which Dirichlet truncation contaminates the decay: ``(L - w)^2 / 16``."""
    return (L - width) ** 2 / 16.0


def fit_decay_rate(t, norms, window: Tuple[float, float] = (5.0, 50.0),
                   L: Optional[float] = None, width: float = 0.0,
                   min_samples: int = 20, r2_min: float = 0.98) -> DecayFit:
    """Least-squares slope of ``log|u|`` against ``log(1 + t)`` inside ``window``.

    Raises
    ------
    WindowTooShort
        Fewer than ``min_samples`` points in the window, or ``t_min < 1``.
    BoundaryContaminated
        The window ends after ``(L - width)^2 / 16`` (only checked if ``L`` given).
    PoorFit
        The coefficient of determination is below ``r2_min``.
    """
    t = np.asarray(t, dtype=float)
    norms = np.asarray(norms, dtype=float)
    lo, hi = float(window[0]), float(window[1])
    if lo < 1.0:
        raise WindowTooShort("window must start at t >= 1 (polynomial regime)")
    if L is not None and hi > boundary_time(L, width) * (1 + 1e-12):
        raise BoundaryContaminated(
            f"window end {hi} exceeds t_bc = {boundary_time(L, width):.4g}")
    sel = (t >= lo - 1e-12) & (t <= hi + 1e-12)
    if int(sel.sum()) < min_samples:
        raise WindowTooShort(f"{int(sel.sum())} samples in window, need {min_samples}")
    X = np.log1p(t[sel])
    Y = np.log(norms[sel])
    slope, icpt = np.polyfit(X, Y, 1)
    resid = Y - (slope * X + icpt)
    ss_tot = float(np.sum((Y - Y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    if r2 < r2_min:
        raise PoorFit(f"R^2 = {r2:.4f} below {r2_min}")
    return DecayFit(float(-slope), float(math.exp(icpt)), (lo, hi), r2, int(sel.sum()))


def semigroup_no_decay_witness(n: float, t: float, L: float = 200.0, h: float = 0.1,
                               dt: float = 0.01) -> float:
    """``|u(t)| / |u0|`` for ``u0 = exp(-x1^2/n) J1`` on an untwisted tube.

    The problem separates, so only the axial heat equation on ``[-L, L]`` is
    solved (Crank-Nicolson, tridiagonal).
    """
    if t == 0:
        return 1.0
    grid = Grid1D.uniform(L, int(round(2 * L / h)))
    x = grid.nodes[1:-1]
    hh = grid.spacing[0]
    u = np.exp(-x * x / n)
    n0 = math.sqrt(float(np.sum(u * u)))
    k = 0.5 * dt / hh ** 2
    ab = np.zeros((3, x.size))
    ab[0, 1:] = -k
    ab[1] = 1.0 + 2.0 * k
    ab[2, :-1] = -k
    steps = int(round(t / dt))
    for _ in range(steps):
        rhs = (1.0 - 2.0 * k) * u
        rhs[1:] += k * u[:-1]
        rhs[:-1] += k * u[1:]
        u = scipy.linalg.solve_banded((1, 1), ab, rhs)
    return math.sqrt(float(np.sum(u * u))) / n0
