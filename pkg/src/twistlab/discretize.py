"""Grids and sparse symmetric quadratic forms.

Every stiffness matrix is a sum of Gram products ``G.T @ W @ G`` of
first-derivative factors with positive diagonal weights, symmetrised
exactly, and every mass matrix is diagonal (lumped cell volumes).

Unknowns of a 3D form are ordered with the axial index slow:
``u[k * m + p]`` is the value at axial node ``k`` and cross-section node ``p``.
"""
from __future__ import annotations

import math
import sys
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.io
import scipy.sparse as sp

from .errors import DegenerateInterval, EmptyMask, GridMismatch, UnderResolved, WeightOverflow
from .geometry import CrossSection, TubeSpec, sigma_profile

__all__ = [
    "Grid1D",
    "Grid2D",
    "DiscreteForm",
    "assemble_cross_section",
    "assemble_straightened",
    "assemble_bounded",
    "assemble_selfsim",
    "selfsim_grid",
    "selfsim_fine_spacing",
    "assemble_oscillator",
    "assemble_weighted_mass",
    "weight_values",
    "K_LIMIT",
]

#: largest |y1| at which exp(y1**2 / 4) is finite in double precision
K_LIMIT = math.sqrt(4.0 * math.log(sys.float_info.max))


# ---------------------------------------------------------------------------
# 1D grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Grid1D:
    """Strictly increasing nodes on an axial interval.

    Use :meth:`uniform`, :meth:`graded` or :meth:`interval` to build one.
    """

    nodes: np.ndarray
    kind: str = "uniform"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.asarray(self.nodes, dtype=float)
        if x.ndim != 1 or x.size < 3 or np.any(np.diff(x) <= 0):
            raise ValueError("grid nodes must be a strictly increasing 1D array")
        x.setflags(write=False)
        object.__setattr__(self, "nodes", x)

    @classmethod
    def uniform(cls, L: float, n: int) -> "Grid1D":
        """``n`` equal cells on ``[-L, L]``."""
        return cls(np.linspace(-L, L, int(n) + 1), "uniform", {"L": float(L), "n": int(n)})

    @classmethod
    def interval(cls, lo: float, hi: float, n: int) -> "Grid1D":
        """``n`` equal cells on ``[lo, hi]``."""
        return cls(np.linspace(lo, hi, int(n) + 1), "uniform", {"lo": float(lo), "hi": float(hi), "n": int(n)})

    @classmethod
    def graded(cls, L: float, core: float, h_fine: float, h_coarse: float,
               ratio: float = 1.2) -> "Grid1D":
        """Symmetric grid with spacing ``h_fine`` on ``[-core, core]``.

        Spacing then grows geometrically by at most ``ratio`` up to
        ``h_coarse``; the outermost cells are equal and end exactly at ``L``.
        The node ``0`` is always present.
        """
        if not (0 < h_fine <= h_coarse and 0 < core < L and ratio > 1):
            raise ValueError("need 0 < h_fine <= h_coarse, 0 < core < L, ratio > 1")
        n_core = int(math.ceil(core / h_fine - 1e-9))
        half = list(h_fine * np.arange(n_core + 1))
        h = h_fine
        while h < h_coarse and half[-1] + 2 * min(h * ratio, h_coarse) < L:
            h = min(h * ratio, h_coarse)
            half.append(half[-1] + h)
        # equal outer cells; drop graded cells until the fill size stays within ratio
        while True:
            h_last = half[-1] - half[-2]
            rest = L - half[-1]
            m = int(math.ceil(rest / min(h_coarse, h_last * ratio) - 1e-9))
            if rest <= 1e-12 * L or ratio * rest / m >= h_last * (1 - 1e-12) or len(half) <= n_core + 1:
                break
            half.pop()
        if rest > 1e-12 * L:
            half.extend(half[-1] + rest * np.arange(1, m + 1) / m)
        half = np.asarray(half)
        half[-1] = L
        nodes = np.concatenate([-half[:0:-1], half])
        return cls(nodes, "graded", {"L": float(L), "core": float(core), "h_fine": float(h_fine),
                                     "h_coarse": float(h_coarse), "ratio": float(ratio)})

    @property
    def lo(self) -> float:
        return float(self.nodes[0])

    @property
    def hi(self) -> float:
        return float(self.nodes[-1])

    @property
    def L(self) -> float:
        return max(-self.lo, self.hi)

    @property
    def spacing(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def n_cells(self) -> int:
        return self.nodes.size - 1

    def zero_index(self) -> int:
        """Index of the node at the origin; raises if there is none."""
        k = int(np.argmin(np.abs(self.nodes)))
        if abs(self.nodes[k]) > 1e-12 * max(1.0, self.L):
            raise GridMismatch("grid has no node at 0")
        return k

    def describe(self) -> dict:
        return {"kind": self.kind, "n_nodes": int(self.nodes.size), **self.params}


def _edge_ops(nodes: np.ndarray, unknown: np.ndarray):
    """Axial difference and averaging factors restricted to unknown nodes.

    Returns ``(D, Av, lengths, midpoints, dual)``: ``D`` maps unknowns to
    forward differences on every cell, ``Av`` to cell averages, and ``dual``
    is the lumped length of each unknown node. Nodes not marked unknown are
    held at zero.
    """
    n = nodes.size
    ell = np.diff(nodes)
    col = np.full(n, -1)
    col[unknown] = np.arange(int(np.count_nonzero(unknown)))
    e = np.arange(n - 1)
    left, right = col[:-1], col[1:]
    rows, cols, dv, av = [], [], [], []
    for c, sign in ((left, -1.0), (right, 1.0)):
        keep = c >= 0
        rows.append(e[keep])
        cols.append(c[keep])
        dv.append(sign / ell[keep])
        av.append(np.full(int(keep.sum()), 0.5))
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    shape = (n - 1, int(np.count_nonzero(unknown)))
    D = sp.csr_matrix((np.concatenate(dv), (rows, cols)), shape=shape)
    Av = sp.csr_matrix((np.concatenate(av), (rows, cols)), shape=shape)
    full_dual = np.zeros(n)
    full_dual[:-1] += 0.5 * ell
    full_dual[1:] += 0.5 * ell
    mid = 0.5 * (nodes[:-1] + nodes[1:])
    return D, Av, ell, mid, full_dual[unknown]


def _gram(G, w) -> sp.csr_matrix:
    """Exactly symmetric ``G.T @ diag(w) @ G``."""
    A = (G.T @ sp.diags(w) @ G).tocsr()
    A = ((A + A.T) * 0.5).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return A


# ---------------------------------------------------------------------------
# 2D grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Interior nodes of a cross-section with derivative factors.

    Rectangles and ellipses use a uniform Cartesian grid on the bounding box
    with an interior mask. Discs and annuli use a polar tensor grid whose
    outer (and inner) radius falls on a node ring, so that radial functions
    stay exactly radial on the grid.

    Attributes
    ----------
    x2, x3 : ndarray
        Coordinates of the interior nodes.
    mass : ndarray
        Lumped cell area of each node.
    grads : list of (sparse matrix, ndarray)
        Forward-difference factors and edge weights; the Dirichlet form is
        ``sum(G.T @ diag(w) @ G)``.
    T : sparse matrix
        Central-difference angular derivative ``x3 d/dx2 - x2 d/dx3``,
        skew-adjoint in the lumped inner product.
    central : tuple of two sparse matrices
        Orthonormal components of the central-difference gradient at nodes.
    T_bnd, w_bnd : sparse matrix and ndarray, optional
        Angular derivative at nodes on the flat faces of a rectangle (one-sided
        normal differences) and their trapezoid weights. The angular
        derivative does not vanish there, so without these rows the twist
        energy of the boundary half-cells would be lost.
    """

    cross_section: CrossSection
    h: float
    kind: str
    x2: np.ndarray
    x3: np.ndarray
    mass: np.ndarray
    grads: list
    T: sp.csr_matrix
    central: tuple
    shape: tuple
    T_bnd: Optional[sp.csr_matrix] = None
    w_bnd: Optional[np.ndarray] = None
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def m(self) -> int:
        return self.x2.size

    @property
    def radius(self) -> np.ndarray:
        return np.hypot(self.x2, self.x3)

    def stiffness(self) -> sp.csr_matrix:
        if "K" not in self._cache:
            K = None
            for G, w in self.grads:
                part = _gram(G, w)
                K = part if K is None else K + part
            self._cache["K"] = K.tocsr()
        return self._cache["K"]

    def describe(self) -> dict:
        return {"kind": self.kind, "h": self.h, "m": self.m, "shape": list(self.shape),
                "cross_section": self.cross_section.to_dict()}

    @classmethod
    def build(cls, omega: CrossSection, h: float) -> "Grid2D":
        if not h > 0:
            raise ValueError("spacing must be positive")
        if omega.rotationally_symmetric:
            g = _polar_grid(omega, h)
        else:
            g = _cartesian_grid(omega, h)
        if g.m < 25:
            raise EmptyMask(f"only {g.m} interior nodes at h'={h}; need at least 25")
        return g


def _cartesian_grid(omega: CrossSection, h: float) -> Grid2D:
    b2, b3 = omega.half_widths
    n2 = max(2, int(math.ceil(2 * b2 / h - 1e-9)))
    n3 = max(2, int(math.ceil(2 * b3 / h - 1e-9)))
    h2, h3 = 2 * b2 / n2, 2 * b3 / n3
    g2 = -b2 + h2 * np.arange(n2 + 1)
    g3 = -b3 + h3 * np.arange(n3 + 1)
    X2, X3 = np.meshgrid(g2, g3, indexing="ij")
    inside = omega.contains(X2, X3)
    m = int(inside.sum())
    if m == 0:
        raise EmptyMask(f"no interior nodes at h'={h}")
    # pad with one ring of exterior so neighbour lookups never wrap
    idx = np.full((n2 + 3, n3 + 3), -1)
    idx[1:-1, 1:-1][inside] = np.arange(m)
    cell = h2 * h3

    def forward(axis, step):
        a = idx[:-1, :] if axis == 0 else idx[:, :-1]
        b = idx[1:, :] if axis == 0 else idx[:, 1:]
        a, b = a.ravel(), b.ravel()
        keep = (a >= 0) | (b >= 0)
        a, b = a[keep], b[keep]
        e = np.arange(a.size)
        rows = np.concatenate([e[a >= 0], e[b >= 0]])
        cols = np.concatenate([a[a >= 0], b[b >= 0]])
        vals = np.concatenate([np.full(int((a >= 0).sum()), -1.0 / step),
                               np.full(int((b >= 0).sum()), 1.0 / step)])
        G = sp.csr_matrix((vals, (rows, cols)), shape=(a.size, m))
        return G, np.full(a.size, cell)

    def central(axis, step):
        c = idx[1:-1, 1:-1]
        if axis == 0:
            plus, minus = idx[2:, 1:-1], idx[:-2, 1:-1]
        else:
            plus, minus = idx[1:-1, 2:], idx[1:-1, :-2]
        own = c >= 0
        p, q, r = plus[own], minus[own], c[own]
        rows = np.concatenate([r[p >= 0], r[q >= 0]])
        cols = np.concatenate([p[p >= 0], q[q >= 0]])
        vals = np.concatenate([np.full(int((p >= 0).sum()), 0.5 / step),
                               np.full(int((q >= 0).sum()), -0.5 / step)])
        return sp.csr_matrix((vals, (rows, cols)), shape=(m, m))

    x2, x3 = X2[inside], X3[inside]
    C2, C3 = central(0, h2), central(1, h3)
    T = (sp.diags(x3) @ C2 - sp.diags(x2) @ C3).tocsr()
    T_bnd = w_bnd = None
    if omega.kind == "rectangle":
        T_bnd, w_bnd = _face_rows(idx[1:-1, 1:-1], g2, g3, h2, h3, m)
    return Grid2D(omega, float(h), "cartesian", x2, x3, np.full(m, cell),
                  [forward(0, h2), forward(1, h3)], T, (C2, C3), (n2 + 1, n3 + 1),
                  T_bnd, w_bnd)


def _face_rows(idx, g2, g3, h2, h3, m):
    """Angular derivative on rectangle faces from second-order one-sided differences."""
    n2, n3 = idx.shape[0] - 1, idx.shape[1] - 1
    rows, cols, vals = [], [], []
    r = 0
    # faces x2 = -b2, +b2: d_tau = x3 * d/dx2
    for i, inward in ((0, 1), (n2, -1)):
        for j in range(1, n3):
            c = g3[j] * inward / (2 * h2)
            rows += [r, r]; cols += [idx[i + inward, j], idx[i + 2 * inward, j]]; vals += [4 * c, -c]
            r += 1
    # faces x3 = -b3, +b3: d_tau = -x2 * d/dx3
    for j, inward in ((0, 1), (n3, -1)):
        for i in range(1, n2):
            c = -g2[i] * inward / (2 * h3)
            rows += [r, r]; cols += [idx[i, j + inward], idx[i, j + 2 * inward]]; vals += [4 * c, -c]
            r += 1
    rows, cols, vals = np.asarray(rows), np.asarray(cols), np.asarray(vals)
    keep = cols >= 0
    T_bnd = sp.csr_matrix((vals[keep], (rows[keep], cols[keep])), shape=(r, m))
    return T_bnd, np.full(r, 0.5 * h2 * h3)


def _polar_grid(omega: CrossSection, h: float) -> Grid2D:
    if omega.kind == "disc":
        R = omega.params[0]
        nr = max(3, int(round(R / h)))
        dr = R / (nr + 0.5)
        r = (np.arange(nr) + 0.5) * dr
        r_edge = (np.arange(nr) + 1.0) * dr          # edge i joins ring i and i+1
        inner = np.arange(nr)                          # ring index at edge start
    else:
        r_in, r_out = omega.params
        nr = max(4, int(round((r_out - r_in) / h)))
        dr = (r_out - r_in) / nr
        r = r_in + np.arange(1, nr) * dr
        r_edge = r_in + (np.arange(nr) + 0.5) * dr
        inner = np.arange(-1, nr - 1)                  # -1 is the inner wall
    nphi = 4 * int(math.ceil(2 * math.pi * omega.params[-1] / (4 * h)))
    dphi = 2 * math.pi / nphi
    phi = dphi * np.arange(nphi)
    nring = r.size
    m = nring * nphi
    index = np.arange(m).reshape(nring, nphi)
    R_, P_ = np.meshgrid(r, phi, indexing="ij")
    x2, x3 = (R_ * np.cos(P_)).ravel(), (R_ * np.sin(P_)).ravel()
    mass = (R_ * dr * dphi).ravel()

    # radial forward differences
    rows, cols, vals, w = [], [], [], []
    e = 0
    for k, i in enumerate(inner):
        for j in range(nphi):
            if i >= 0:
                rows.append(e); cols.append(index[i, j]); vals.append(-1.0 / dr)
            if i + 1 < nring:
                rows.append(e); cols.append(index[i + 1, j]); vals.append(1.0 / dr)
            w.append(r_edge[k] * dr * dphi)
            e += 1
    Gr = sp.csr_matrix((vals, (rows, cols)), shape=(e, m))
    wr = np.asarray(w)
    # angular forward differences (periodic)
    jn = (np.arange(nphi) + 1) % nphi
    a = index.ravel()
    b = index[:, jn].ravel()
    rr = np.repeat(r, nphi)
    rows = np.concatenate([np.arange(m), np.arange(m)])
    Gp = sp.csr_matrix((np.concatenate([-1.0 / (rr * dphi), 1.0 / (rr * dphi)]),
                        (rows, np.concatenate([a, b]))), shape=(m, m))
    wp = rr * dr * dphi
    # central angular derivative; d/dphi = -(x3 d2 - x2 d3)
    jp, jm = (np.arange(nphi) + 1) % nphi, (np.arange(nphi) - 1) % nphi
    Cphi = sp.csr_matrix((np.concatenate([np.full(m, 0.5 / dphi), np.full(m, -0.5 / dphi)]),
                          (rows, np.concatenate([index[:, jp].ravel(), index[:, jm].ravel()]))),
                         shape=(m, m))
    T = (-Cphi).tocsr()
    # central radial derivative; through the centre of a disc use the opposite node
    rows, cols, vals = [], [], []
    for i in range(nring):
        for j in range(nphi):
            p = index[i, j]
            if i + 1 < nring:
                rows.append(p); cols.append(index[i + 1, j]); vals.append(0.5 / dr)
            if i > 0:
                rows.append(p); cols.append(index[i - 1, j]); vals.append(-0.5 / dr)
            elif omega.kind == "disc":
                rows.append(p); cols.append(index[0, (j + nphi // 2) % nphi]); vals.append(-0.5 / dr)
    Cr = sp.csr_matrix((vals, (rows, cols)), shape=(m, m))
    Ca = (sp.diags(1.0 / rr) @ Cphi).tocsr()
    return Grid2D(omega, float(h), "polar", x2, x3, mass, [(Gr, wr), (Gp, wp)], T,
                  (Cr, Ca), (nring, nphi))


# ---------------------------------------------------------------------------
# forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DiscreteForm:
    """Sparse symmetric stiffness matrix with a lumped diagonal mass.

    Attributes
    ----------
    stiffness : scipy.sparse.csr_matrix
    mass : ndarray
        Diagonal of the mass matrix (strictly positive).
    meta : dict
        Which continuum form, parameter values and grid handles.
    """

    stiffness: sp.csr_matrix
    mass: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.stiffness.shape != (self.mass.size, self.mass.size):
            raise GridMismatch("stiffness and mass sizes differ")
        if not np.all(self.mass > 0):
            raise ValueError("mass must be strictly positive")

    @property
    def n(self) -> int:
        return self.mass.size

    @property
    def M(self) -> sp.dia_matrix:
        return sp.diags(self.mass)

    def energy(self, v) -> float:
        v = np.asarray(v).ravel()
        return float(v @ (self.stiffness @ v))

    def norm2(self, v) -> float:
        v = np.asarray(v).ravel()
        return float(np.sum(self.mass * v * v))

    def rayleigh(self, v) -> float:
        return self.energy(v) / self.norm2(v)

    def shifted(self, c: float) -> "DiscreteForm":
        """Form of ``A - c M`` (symmetry is preserved exactly)."""
        A = (self.stiffness - sp.diags(c * self.mass)).tocsr()
        return DiscreteForm(A, self.mass, {**self.meta, "shift": self.meta.get("shift", 0.0) + c})

    def with_mass(self, mass) -> "DiscreteForm":
        return DiscreteForm(self.stiffness, np.asarray(mass, dtype=float), dict(self.meta))

    def to_matrix_market(self, path, comment: str = "") -> None:
        """Write the stiffness matrix in symmetric coordinate format."""
        scipy.io.mmwrite(str(path), sp.coo_matrix(self.stiffness), comment=comment,
                         field="real", symmetry="symmetric")


def assemble_cross_section(omega: CrossSection, h: float) -> DiscreteForm:
    """Dirichlet Laplacian of the cross-section (5-point on Cartesian grids)."""
    g = Grid2D.build(omega, h)
    return DiscreteForm(g.stiffness(), g.mass.copy(), {"form": "cross_section", "grid2": g})


def _check_grids(grid1: Grid1D, grid2: Grid2D, tube: Optional[TubeSpec] = None):
    if not isinstance(grid1, Grid1D) or not isinstance(grid2, Grid2D):
        raise GridMismatch("expected a Grid1D and a Grid2D")
    if tube is not None and grid2.cross_section != tube.cross_section:
        raise GridMismatch("cross-section grid does not match the tube")


def _tube_form(rate_edges, grid1: Grid1D, grid2: Grid2D, unknown: np.ndarray,
               transverse_scale: float = 1.0):
    """``B1.T W B1 + scale * transverse`` and the lumped mass."""
    D, Av, ell, mid, dual = _edge_ops(grid1.nodes, unknown)
    m = grid2.m
    Im = sp.identity(m, format="csr")
    B1 = sp.kron(D, Im, format="csr")
    W1 = np.kron(ell, grid2.mass)
    if np.any(rate_edges != 0):
        B1 = (B1 - sp.diags(np.repeat(rate_edges, m)) @ sp.kron(Av, grid2.T, format="csr")).tocsr()
        if grid2.T_bnd is not None:
            nb = grid2.T_bnd.shape[0]
            Bb = -sp.diags(np.repeat(rate_edges, nb)) @ sp.kron(Av, grid2.T_bnd, format="csr")
            B1 = sp.vstack([B1, Bb], format="csr")
            W1 = np.concatenate([W1, np.kron(ell, grid2.w_bnd)])
    A = _gram(B1, W1)
    A = A + sp.kron(sp.diags(transverse_scale * dual), grid2.stiffness(), format="csr")
    mass = np.kron(dual, grid2.mass)
    return A.tocsr(), mass, mid, dual


def _E1h(grid2: Grid2D, E1h):
    if E1h is not None:
        return float(E1h)
    from .spectral import compute_modes_on_grid
    return compute_modes_on_grid(grid2).E1


def assemble_straightened(tube: TubeSpec, grid1: Grid1D, grid2: Grid2D) -> DiscreteForm:
    """Straightened form with Dirichlet ends at the first and last axial node."""
    _check_grids(grid1, grid2, tube)
    if grid1.L > tube.L * (1 + 1e-12) or grid1.lo > -tube.L * (1 - 1e-12) or grid1.hi < tube.L * (1 - 1e-12):
        raise GridMismatch(f"axial grid must span [-{tube.L}, {tube.L}]")
    unknown = np.ones(grid1.nodes.size, dtype=bool)
    unknown[[0, -1]] = False
    mid = 0.5 * (grid1.nodes[:-1] + grid1.nodes[1:])
    A, mass, _, _ = _tube_form(tube.twist.rate(mid), grid1, grid2, unknown)
    return DiscreteForm(A, mass, {"form": "straightened", "grid1": grid1, "grid2": grid2,
                                  "x1": grid1.nodes[unknown], "L": tube.L})


def assemble_bounded(tube: TubeSpec, I: Sequence[float], grid2: Grid2D,
                     n1: Optional[int] = None, grid1: Optional[Grid1D] = None) -> DiscreteForm:
    """Form on ``I x omega`` with natural (no) conditions at the interval ends.

    Either give ``n1`` (number of equal cells on ``I``) or a ``grid1`` whose
    end nodes coincide with ``I``.
    """
    lo, hi = float(I[0]), float(I[1])
    if not hi > lo:
        raise DegenerateInterval(f"empty interval ({lo}, {hi})")
    if grid1 is None:
        grid1 = Grid1D.interval(lo, hi, 64 if n1 is None else n1)
    _check_grids(grid1, grid2, tube)
    if grid1.n_cells < 4:
        raise DegenerateInterval("interval must span at least 4 grid cells")
    if abs(grid1.lo - lo) > 1e-12 * (1 + abs(lo)) or abs(grid1.hi - hi) > 1e-12 * (1 + abs(hi)):
        raise GridMismatch("axial grid does not match the interval")
    if max(abs(lo), abs(hi)) > tube.L:
        raise GridMismatch("interval leaves the truncated tube")
    unknown = np.ones(grid1.nodes.size, dtype=bool)
    mid = 0.5 * (grid1.nodes[:-1] + grid1.nodes[1:])
    A, mass, _, _ = _tube_form(tube.twist.rate(mid), grid1, grid2, unknown)
    return DiscreteForm(A, mass, {"form": "bounded", "grid1": grid1, "grid2": grid2,
                                  "x1": grid1.nodes, "I": (lo, hi)})


def selfsim_fine_spacing(tube: TubeSpec, s: float) -> float:
    """Largest core spacing that resolves ``supp sigma_s`` (an eighth of its half-width)."""
    supp = tube.twist.support
    half = 1.0 if supp is None else 0.5 * (supp[1] - supp[0])
    return 0.125 * math.exp(-0.5 * s) * half


def selfsim_grid(tube: TubeSpec, s_max: float, h_coarse: float = 0.05, ratio: float = 1.1,
                 L: Optional[float] = None) -> Grid1D:
    """Graded grid whose core resolves ``supp sigma_s`` for every ``s <= s_max``."""
    L = tube.L if L is None else L
    h_f = selfsim_fine_spacing(tube, s_max)
    supp = tube.twist.support
    reach = 1.0 if supp is None else max(abs(supp[0]), abs(supp[1]))
    core = min(1.25 * math.exp(-0.5 * s_max) * reach, 0.5 * L)
    return Grid1D.graded(L, core, min(h_f, h_coarse), h_coarse, ratio)


def assemble_selfsim(tube: TubeSpec, s: float, grid1: Grid1D, grid2: Grid2D,
                     E1h: Optional[float] = None) -> DiscreteForm:
    """Self-similar form at time ``s``, shifted by ``E1h * e^s``.

    Warns with :class:`UnderResolved` if the core spacing of ``grid1`` is
    coarser than an eighth of the half-width of ``supp sigma_s``.
    """
    if s < 0:
        raise ValueError("s must be nonnegative")
    _check_grids(grid1, grid2, tube)
    E1h = _E1h(grid2, E1h)
    supp = tube.twist.support
    if supp is not None:
        g = math.exp(-0.5 * s)
        lo, hi = g * supp[0], g * supp[1]
        x = grid1.nodes
        inside = (x[1:] > lo) & (x[:-1] < hi)
        if np.any(inside) and grid1.spacing[inside].max() > selfsim_fine_spacing(tube, s) * (1 + 1e-9):
            warnings.warn(f"axial grid under-resolves the twist support at s={s}", UnderResolved,
                          stacklevel=2)
    unknown = np.ones(grid1.nodes.size, dtype=bool)
    unknown[[0, -1]] = False
    mid = 0.5 * (grid1.nodes[:-1] + grid1.nodes[1:])
    es = math.exp(s)
    A, mass, _, dual = _tube_form(sigma_profile(tube.twist, s, mid), grid1, grid2, unknown,
                                  transverse_scale=es)
    y = grid1.nodes[unknown]
    pot = np.kron(y * y / 16.0 * dual, grid2.mass)
    A = (A + sp.diags(pot - E1h * es * mass)).tocsr()
    return DiscreteForm(A, mass, {"form": "selfsim", "s": float(s), "grid1": grid1,
                                  "grid2": grid2, "x1": y, "E1h": E1h})


def assemble_oscillator(grid1: Grid1D, dirichlet_at_zero: bool = False) -> DiscreteForm:
    """``-d^2/dy^2 + y^2/16`` with Dirichlet ends (and optionally at 0)."""
    unknown = np.ones(grid1.nodes.size, dtype=bool)
    unknown[[0, -1]] = False
    if dirichlet_at_zero:
        unknown[grid1.zero_index()] = False
    D, _, ell, _, dual = _edge_ops(grid1.nodes, unknown)
    y = grid1.nodes[unknown]
    A = (_gram(D, ell) + sp.diags(y * y / 16.0 * dual)).tocsr()
    return DiscreteForm(A, dual, {"form": "oscillator_D" if dirichlet_at_zero else "oscillator",
                                  "grid1": grid1, "x1": y})


def weight_values(weight: str, x1) -> np.ndarray:
    """Axial weight functions: ``one``, ``rho2``, ``rho-2``, ``K`` and ``Kinv``."""
    x1 = np.asarray(x1, dtype=float)
    if weight == "one":
        return np.ones_like(x1)
    if weight == "rho2":
        return 1.0 / (1.0 + x1 * x1)
    if weight == "rho-2":
        return 1.0 + x1 * x1
    if weight in ("K", "Kinv"):
        if np.any(np.abs(x1) > K_LIMIT):
            raise WeightOverflow(f"K overflows for |y1| > {K_LIMIT:.4f}")
        e = np.exp((0.25 if weight == "K" else -0.25) * x1 * x1)
        return e
    raise ValueError(f"unknown weight {weight!r}")


def assemble_weighted_mass(form: DiscreteForm, weight: str) -> np.ndarray:
    """Diagonal of ``cell volume * weight(x1)`` on the unknowns of ``form``."""
    x1 = form.meta["x1"]
    w = weight_values(weight, x1)
    per = form.mass.size // x1.size
    return form.mass * np.repeat(w, per)
