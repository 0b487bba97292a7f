"""Discrete checks of the elementary inequalities behind the Hardy and decay estimates.

Each check returns a :class:`Margin`: the difference "larger side minus
smaller side" together with the magnitude of the larger side, so that
``margin / scale`` is a relative margin that should be nonnegative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .discretize import Grid1D, Grid2D, _edge_ops, _gram
from .errors import ZeroFunction
from .geometry import CrossSection

__all__ = [
    "Margin",
    "RandomFunctionSpec",
    "random_function_1d",
    "random_function_2d",
    "random_function_3d",
    "outside_profile",
    "check_angular_bound",
    "check_hardy_classical",
    "hardy_terms",
    "poincare_slice_margins",
    "SuiteRow",
    "check_sobolev_1d",
    "check_poincare_slice",
    "run_suite",
]


class Margin(NamedTuple):
    margin: float
    scale: float

    @property
    def relative(self) -> float:
        return self.margin / self.scale if self.scale > 0 else self.margin


@dataclass(frozen=True)
class RandomFunctionSpec:
    """Smoothed white noise, reproducible from ``seed``.

    Parameters
    ----------
    seed : int
    smoothing : int
        Number of damped Jacobi passes (weight 2/3) applied to the noise.
    envelope : {'gaussian', 'compact', 'none'}
        Axial envelope ``exp(-(x1/width)^2)`` or ``(1 - (x1/width)^2)_+``.
    width : float
    """

    seed: int = 0
    smoothing: int = 3
    envelope: str = "gaussian"
    width: float = 3.0

    def axial_envelope(self, x1) -> np.ndarray:
        x1 = np.asarray(x1, dtype=float)
        if self.envelope == "gaussian":
            return np.exp(-(x1 / self.width) ** 2)
        if self.envelope == "compact":
            return np.clip(1.0 - (x1 / self.width) ** 2, 0.0, None)
        if self.envelope == "none":
            return np.ones_like(x1)
        raise ValueError(f"unknown envelope {self.envelope!r}")


def _smooth(u: np.ndarray, K: sp.spmatrix, passes: int) -> np.ndarray:
    dinv = 1.0 / K.diagonal()
    for _ in range(passes):
        u = u - (2.0 / 3.0) * dinv * (K @ u)
    return u


def _laplacian_1d(grid1: Grid1D):
    unknown = np.ones(grid1.nodes.size, dtype=bool)
    unknown[[0, -1]] = False
    D, _, ell, _, dual = _edge_ops(grid1.nodes, unknown)
    return _gram(D, ell), dual, grid1.nodes[unknown]


def random_function_1d(grid1: Grid1D, spec: RandomFunctionSpec) -> np.ndarray:
    """Random profile on the interior nodes of ``grid1`` (zero at the ends)."""
    K, _, x = _laplacian_1d(grid1)
    rng = np.random.default_rng(spec.seed)
    u = _smooth(rng.standard_normal(x.size), K, spec.smoothing)
    return u * spec.axial_envelope(x)


def random_function_2d(grid2: Grid2D, spec: RandomFunctionSpec) -> np.ndarray:
    """Random function on the interior cross-section nodes."""
    rng = np.random.default_rng(spec.seed)
    return _smooth(rng.standard_normal(grid2.m), grid2.stiffness(), spec.smoothing)


def random_function_3d(grid1: Grid1D, grid2: Grid2D, spec: RandomFunctionSpec) -> np.ndarray:
    """Random function of shape ``(n1, m)`` on the tube unknowns."""
    K1, dual, x = _laplacian_1d(grid1)
    K2 = grid2.stiffness()
    K = sp.kron(K1, sp.diags(grid2.mass)) + sp.kron(sp.diags(dual), K2)
    rng = np.random.default_rng(spec.seed)
    u = _smooth(rng.standard_normal(x.size * grid2.m), K.tocsr(), spec.smoothing)
    return u.reshape(x.size, grid2.m) * spec.axial_envelope(x)[:, None]


def outside_profile(x1, inner: float, outer: float, power: float = 0.5) -> np.ndarray:
    """Even profile vanishing on ``[-inner, inner]`` and beyond ``outer``.

    ``|x|^power * sin(pi * log(|x|/inner) / log(outer/inner))`` between the
    two radii: a near-extremal family for the one-dimensional Hardy
    inequality away from the origin.
    """
    r = np.abs(np.asarray(x1, dtype=float))
    on = (r > inner) & (r < outer)
    out = np.zeros_like(r)
    out[on] = r[on] ** power * np.sin(np.pi * np.log(r[on] / inner) / math.log(outer / inner))
    return out


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------


def check_angular_bound(psi, grid2: Grid2D, a: Optional[float] = None) -> Margin:
    """``min over nodes of a|grad' psi| - |d_tau psi|`` with central differences."""
    psi = np.asarray(psi, dtype=float).ravel()
    a = grid2.cross_section.a if a is None else float(a)
    c1, c2 = (C @ psi for C in grid2.central)
    grad = np.hypot(c1, c2)
    tau = np.abs(grid2.T @ psi)
    gap = a * grad - tau
    return Margin(float(gap.min()), float(np.max(a * grad)))


def _axial_parts(psi, grid1: Grid1D, grid2: Grid2D):
    psi = np.asarray(psi, dtype=float)
    unknown = np.ones(grid1.nodes.size, dtype=bool)
    unknown[[0, -1]] = False
    D, _, ell, _, dual = _edge_ops(grid1.nodes, unknown)
    x = grid1.nodes[unknown]
    psi = psi.reshape(x.size, grid2.m)
    d = D @ psi
    grad = float(np.sum(ell * ((d * d) @ grid2.mass)))
    slices = (psi * psi) @ grid2.mass
    return x, dual, grad, slices


def check_hardy_classical(psi, grid1: Grid1D, grid2: Grid2D, I: Sequence[float],
                          coefficient: float = 16.0) -> Margin:
    """``c|d1 psi|^2 + (2 + 64/|I|^2)|psi|^2_{I x omega} - |rho psi|^2`` with ``c = 16``."""
    x, dual, grad, slices = _axial_parts(psi, grid1, grid2)
    lo, hi = float(I[0]), float(I[1])
    inside = (x >= lo) & (x <= hi)
    local = float(np.sum((dual * slices)[inside]))
    weighted = float(np.sum(dual * slices / (1.0 + x * x)))
    rhs = coefficient * grad + (2.0 + 64.0 / (hi - lo) ** 2) * local
    return Margin(rhs - weighted, rhs)


def hardy_terms(psi, grid1: Grid1D, grid2: Grid2D, I: Sequence[float]) -> dict:
    """The three terms of the classical Hardy check, for diagnostics."""
    x, dual, grad, slices = _axial_parts(psi, grid1, grid2)
    inside = (x >= I[0]) & (x <= I[1])
    return {"grad": grad, "local": float(np.sum((dual * slices)[inside])),
            "weighted": float(np.sum(dual * slices / (1.0 + x * x)))}


def check_sobolev_1d(phi, grid1: Grid1D) -> Margin:
    """``|phi'|^2 - |phi|_2^6 / (4 |phi|_1^4)`` on the interior nodes of ``grid1``."""
    phi = np.asarray(phi, dtype=float).ravel()
    if not np.any(phi):
        raise ZeroFunction("the Sobolev check needs a nonzero function")
    K, dual, _ = _laplacian_1d(grid1)
    grad = float(phi @ (K @ phi))
    l2 = float(np.sum(dual * phi * phi))
    l1 = float(np.sum(dual * np.abs(phi)))
    rhs = 0.25 * l2 ** 3 / l1 ** 4
    return Margin(grad - rhs, max(grad, rhs))


def poincare_slice_margins(psi, grid2: Grid2D, E1h: float) -> np.ndarray:
    """``|grad' psi_k|^2 - E1h |psi_k|^2`` for every axial slice ``k``."""
    psi = np.atleast_2d(np.asarray(psi, dtype=float))
    psi = psi.reshape(-1, grid2.m)
    K = grid2.stiffness()
    energy = np.einsum("kp,kp->k", psi, (K @ psi.T).T)
    mass = (psi * psi) @ grid2.mass
    return energy - E1h * mass, energy


def check_poincare_slice(psi, grid2: Grid2D, E1h: float) -> Margin:
    """Cross-section Poincare margin on the slice where it is relatively smallest.

    Slices that vanish identically are skipped; the zero function gives ``(0, 0)``.
    """
    margins, energy = poincare_slice_margins(psi, grid2, E1h)
    live = np.flatnonzero(energy > 0)
    if live.size == 0:
        return Margin(0.0, 0.0)
    k = live[np.argmin(margins[live] / energy[live])]
    return Margin(float(margins[k]), float(energy[k]))


# ---------------------------------------------------------------------------
# the seeded suite
# ---------------------------------------------------------------------------


@dataclass
class SuiteRow:
    check: str
    seed: int
    margin: float
    scale: float

    @property
    def relative(self) -> float:
        return self.margin / self.scale if self.scale > 0 else self.margin


def run_suite(n_seeds: int = 100, first_seed: int = 0, tol: float = 1e-9) -> List[SuiteRow]:
    """All four checks on ``n_seeds`` seeded random functions each."""
    from .spectral import compute_modes_on_grid

    square = Grid2D.build(CrossSection.square(), math.pi / 16)
    disc = Grid2D.build(CrossSection.disc(1.0), 1.0 / 12)
    small = Grid2D.build(CrossSection.square(), math.pi / 8)
    axial = Grid1D.uniform(10.0, 200)
    line = Grid1D.uniform(10.0, 1000)
    E1h = compute_modes_on_grid(small).E1
    rows = []
    for seed in range(first_seed, first_seed + n_seeds):
        g2 = square if seed % 2 == 0 else disc
        psi = random_function_2d(g2, RandomFunctionSpec(seed))
        rows.append(SuiteRow("angular_bound", seed, *check_angular_bound(psi, g2)))
        spec3 = RandomFunctionSpec(seed, width=1.0 + 4.0 * ((seed * 0.618) % 1.0))
        psi3 = random_function_3d(axial, small, spec3)
        rows.append(SuiteRow("hardy_classical", seed,
                             *check_hardy_classical(psi3, axial, small, (-1.0, 1.0))))
        rows.append(SuiteRow("poincare_slice", seed, *check_poincare_slice(psi3, small, E1h)))
        phi = random_function_1d(line, RandomFunctionSpec(seed, width=0.5 + 3.0 * ((seed * 0.382) % 1.0)))
        rows.append(SuiteRow("sobolev_1d", seed, *check_sobolev_1d(phi, line)))
    return rows
