"""Cross-sections, twist profiles and the twisting map.

A tube is the straight cylinder ``R x omega`` whose cross-section ``omega``
is rotated by the angle ``theta(x1)`` as one moves along the axis. Only the
rate ``theta_dot`` enters the quadratic forms; ``theta`` itself is recovered
by quadrature with ``theta(-inf) = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.interpolate import PchipInterpolator

__all__ = [
    "CrossSection",
    "TwistProfile",
    "TubeSpec",
    "twist_map",
    "jacobian_det",
    "is_twisted",
    "sigma_profile",
]

_KINDS = ("rectangle", "ellipse", "disc", "annulus")
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class CrossSection:
    """An origin-centred planar domain from one of four parametric families.

    Parameters
    ----------
    kind : {'rectangle', 'ellipse', 'disc', 'annulus'}
    params : tuple of float
        ``(d2, d3)`` full width and height for a rectangle, ``(alpha2, alpha3)``
        semi-axes for an ellipse, ``(r,)`` for a disc and ``(r_in, r_out)``
        for an annulus.
    """

    kind: str
    params: Tuple[float, ...]

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown cross-section kind {self.kind!r}")
        p = tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", p)
        expected = {"rectangle": 2, "ellipse": 2, "disc": 1, "annulus": 2}[self.kind]
        if len(p) != expected:
            raise ValueError(f"{self.kind} takes {expected} parameters, got {len(p)}")
        if any(not np.isfinite(v) or v <= 0 for v in p):
            raise ValueError("cross-section parameters must be positive")
        if self.kind == "annulus" and not p[0] < p[1]:
            raise ValueError("annulus requires r_in < r_out")

    # convenience constructors
    @classmethod
    def rectangle(cls, d2: float, d3: float) -> "CrossSection":
        return cls("rectangle", (d2, d3))

    @classmethod
    def square(cls, side: float = np.pi) -> "CrossSection":
        return cls("rectangle", (side, side))

    @classmethod
    def ellipse(cls, alpha2: float, alpha3: float) -> "CrossSection":
        return cls("ellipse", (alpha2, alpha3))

    @classmethod
    def disc(cls, r: float = 1.0) -> "CrossSection":
        return cls("disc", (r,))

    @classmethod
    def annulus(cls, r_in: float, r_out: float) -> "CrossSection":
        return cls("annulus", (r_in, r_out))

    @property
    def a(self) -> float:
        """Supremum of ``|x'|`` over the cross-section."""
        p = self.params
        if self.kind == "rectangle":
            return 0.5 * float(np.hypot(p[0], p[1]))
        if self.kind == "ellipse":
            return max(p)
        return p[-1]

    @property
    def rotationally_symmetric(self) -> bool:
        return self.kind in ("disc", "annulus")

    @property
    def half_widths(self) -> Tuple[float, float]:
        """Half-widths of the origin-centred bounding box."""
        p = self.params
        if self.kind == "rectangle":
            return 0.5 * p[0], 0.5 * p[1]
        if self.kind == "ellipse":
            return p[0], p[1]
        return p[-1], p[-1]

    def contains(self, x2, x3, tol: float = 1e-12) -> np.ndarray:
        """Strict membership predicate, vectorised over node arrays."""
        x2 = np.asarray(x2, dtype=float)
        x3 = np.asarray(x3, dtype=float)
        p = self.params
        if self.kind == "rectangle":
            return (np.abs(x2) < 0.5 * p[0] - tol) & (np.abs(x3) < 0.5 * p[1] - tol)
        if self.kind == "ellipse":
            return (x2 / p[0]) ** 2 + (x3 / p[1]) ** 2 < 1.0 - tol
        r = np.hypot(x2, x3)
        if self.kind == "disc":
            return r < p[0] - tol
        return (r > p[0] + tol) & (r < p[1] - tol)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}


@dataclass(frozen=True, eq=False)
class TwistProfile:
    """Rate of twisting ``theta_dot`` and its antiderivative ``theta``.

    Use the constructors :meth:`zero`, :meth:`bump` and :meth:`tabulated`.
    """

    family: str
    beta: float = 0.0
    width: float = 1.0
    samples: Optional[Tuple[np.ndarray, np.ndarray]] = None
    _interp: Optional[PchipInterpolator] = field(default=None, repr=False)
    _breaks: np.ndarray = field(default=None, repr=False)
    _cum: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.family not in ("zero", "bump", "tabulated"):
            raise ValueError(f"unknown twist family {self.family!r}")
        if self.family == "bump":
            if not self.width > 0:
                raise ValueError("bump half-width must be positive")
            breaks = np.array([-self.width, 0.0, self.width])
        elif self.family == "tabulated":
            x, y = (np.asarray(v, dtype=float) for v in self.samples)
            if x.ndim != 1 or x.shape != y.shape or x.size < 3:
                raise ValueError("tabulated twist needs matching 1D sample arrays")
            if np.any(np.diff(x) <= 0):
                raise ValueError("tabulated sample abscissae must increase")
            if y[0] != 0.0 or y[-1] != 0.0:
                raise ValueError("tabulated twist rate must vanish at both ends")
            object.__setattr__(self, "samples", (x, y))
            object.__setattr__(self, "_interp", PchipInterpolator(x, y, extrapolate=False))
            breaks = x
        else:
            breaks = np.array([0.0, 0.0])
        object.__setattr__(self, "_breaks", breaks)
        # theta at each breakpoint, panel by panel
        cum = np.zeros(breaks.size)
        for j in range(breaks.size - 1):
            cum[j + 1] = cum[j] + self._panel(breaks[j], breaks[j + 1])
        object.__setattr__(self, "_cum", cum)

    @classmethod
    def zero(cls) -> "TwistProfile":
        return cls("zero")

    @classmethod
    def bump(cls, beta: float, width: float = 1.0) -> "TwistProfile":
        """``theta_dot = beta * (1 - (x/width)**2)**2`` on ``[-width, width]``."""
        return cls("bump", beta=float(beta), width=float(width))

    @classmethod
    def tabulated(cls, x, thetadot) -> "TwistProfile":
        """Monotone cubic (PCHIP) interpolation of sampled twist rates."""
        return cls("tabulated", samples=(x, thetadot))

    @property
    def is_zero(self) -> bool:
        if self.family == "zero":
            return True
        if self.family == "bump":
            return self.beta == 0.0
        return not np.any(self.samples[1])

    @property
    def support(self) -> Optional[Tuple[float, float]]:
        """The interval ``I`` (closure of the support), or None for zero twist."""
        if self.is_zero:
            return None
        if self.family == "bump":
            return (-self.width, self.width)
        x, y = self.samples
        nz = np.flatnonzero(y)
        # the rate is nonzero strictly between neighbouring zero samples
        return (float(x[max(nz[0] - 1, 0)]), float(x[min(nz[-1] + 1, x.size - 1)]))

    @property
    def sup_norm(self) -> float:
        if self.is_zero:
            return 0.0
        if self.family == "bump":
            return abs(self.beta)
        x, _ = self.samples
        fine = np.linspace(x[0], x[-1], 64 * x.size)
        return float(np.max(np.abs(self.rate(fine))))

    def rate(self, x1) -> np.ndarray:
        """Evaluate ``theta_dot`` at ``x1``."""
        x1 = np.asarray(x1, dtype=float)
        if self.is_zero:
            return np.zeros_like(x1)
        if self.family == "bump":
            u = x1 / self.width
            return np.where(np.abs(u) < 1.0, self.beta * (1.0 - u * u) ** 2, 0.0)
        out = self._interp(x1)
        return np.nan_to_num(out, nan=0.0)

    def _panel(self, lo, hi):
        mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
        pts = mid[..., None] + np.multiply.outer(half, _GL_NODES) if np.ndim(lo) else mid + half * _GL_NODES
        return half * np.sum(self.rate(pts) * _GL_WEIGHTS, axis=-1)

    def angle(self, x1) -> np.ndarray:
        """``theta(x1) = int_{-inf}^{x1} theta_dot`` by panel-wise Gauss-Legendre."""
        x1 = np.asarray(x1, dtype=float)
        if self.is_zero:
            return np.zeros_like(x1)
        b = self._breaks
        xc = np.clip(x1, b[0], b[-1])
        j = np.clip(np.searchsorted(b, xc, side="right") - 1, 0, b.size - 2)
        return self._cum[j] + self._panel(b[j], xc)

    def total_angle(self) -> float:
        return float(self._cum[-1])

    def to_dict(self) -> dict:
        if self.family == "tabulated":
            return {"family": "tabulated", "x": self.samples[0].tolist(),
                    "thetadot": self.samples[1].tolist()}
        if self.family == "bump":
            return {"family": "bump", "beta": self.beta, "width": self.width}
        return {"family": "zero"}


@dataclass(frozen=True, eq=False)
class TubeSpec:
    """Cross-section, twist profile and truncation half-length ``L``."""

    cross_section: CrossSection
    twist: TwistProfile
    L: float = 20.0

    def __post_init__(self):
        supp = self.twist.support
        reach = 0.0 if supp is None else max(abs(supp[0]), abs(supp[1]))
        if not self.L > reach + 5.0:
            raise ValueError(f"L={self.L} must exceed sup|I| + 5 = {reach + 5.0}")

    @property
    def twisted(self) -> bool:
        return is_twisted(self)

    def with_L(self, L: float) -> "TubeSpec":
        return TubeSpec(self.cross_section, self.twist, float(L))


def twist_map(x, twist: TwistProfile) -> np.ndarray:
    """Apply ``L_theta`` to points of shape ``(..., 3)``."""
    x = np.asarray(x, dtype=float)
    th = twist.angle(x[..., 0])
    c, s = np.cos(th), np.sin(th)
    out = np.empty(np.broadcast(x, x).shape)
    out[..., 0] = x[..., 0]
    out[..., 1] = x[..., 1] * c + x[..., 2] * s
    out[..., 2] = -x[..., 1] * s + x[..., 2] * c
    return out


def jacobian_det(x, twist: TwistProfile, h: float = 1e-5) -> np.ndarray:
    """Determinant of the central-difference Jacobian of ``L_theta``."""
    x = np.asarray(x, dtype=float)
    cols = []
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        cols.append((twist_map(x + e, twist) - twist_map(x - e, twist)) / (2 * h))
    jac = np.stack(cols, axis=-1)
    return np.linalg.det(jac)


def is_twisted(tube: TubeSpec) -> bool:
    """True iff the twist is non-constant and the section is not rotationally symmetric."""
    return (not tube.twist.is_zero) and (not tube.cross_section.rotationally_symmetric)


def sigma_profile(twist: TwistProfile, s: float, y1) -> np.ndarray:
    """Self-similar rate ``sigma_s(y1) = e^{s/2} theta_dot(e^{s/2} y1)``."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    g = np.exp(0.5 * s)
    return g * twist.rate(g * np.asarray(y1, dtype=float))
