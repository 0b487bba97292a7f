import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from twistlab.discretize import Grid1D, Grid2D, assemble_cross_section
from twistlab.errors import ZeroFunction
from twistlab.geometry import CrossSection
from twistlab.inequalities import (
    RandomFunctionSpec,
    check_angular_bound,
    check_hardy_classical,
    check_poincare_slice,
    check_sobolev_1d,
    hardy_terms,
    outside_profile,
    poincare_slice_margins,
    random_function_1d,
    random_function_2d,
    random_function_3d,
    run_suite,
)
from twistlab.spectral import compute_modes_on_grid, smallest_eigenpairs

seeds = st.integers(0, 2 ** 32 - 1)


@pytest.fixture(scope="module")
def grids():
    return {
        "square": Grid2D.build(CrossSection.square(), math.pi / 16),
        "disc": Grid2D.build(CrossSection.disc(1.0), 1 / 12),
        "small": Grid2D.build(CrossSection.square(), math.pi / 8),
        "axial": Grid1D.uniform(10.0, 200),
        "line": Grid1D.uniform(10.0, 1000),
    }


def test_random_functions_are_reproducible(grids):
    spec = RandomFunctionSpec(7)
    np.testing.assert_array_equal(random_function_2d(grids["square"], spec),
                                  random_function_2d(grids["square"], spec))
    a = random_function_3d(grids["axial"], grids["small"], spec)
    assert a.shape == (199, grids["small"].m)
    assert not np.array_equal(a, random_function_3d(grids["axial"], grids["small"], RandomFunctionSpec(8)))
    compact = random_function_1d(grids["line"], RandomFunctionSpec(1, envelope="compact", width=2.0))
    x = grids["line"].nodes[1:-1]
    assert not np.any(compact[np.abs(x) >= 2.0])
    with pytest.raises(ValueError):
        RandomFunctionSpec(envelope="box").axial_envelope(x)


# ---------------------------------------------------------------------------
# angular derivative bound
# ---------------------------------------------------------------------------


def test_radial_function_has_no_angular_derivative(grids):
    g = grids["disc"]
    r2 = g.x2 ** 2 + g.x3 ** 2
    psi = 1.0 - r2
    assert np.max(np.abs(g.T @ psi)) < 1e-12
    assert check_angular_bound(psi, g).margin >= 0


def test_linear_function_on_square(grids):
    # d_tau x2 = -x3 up to sign, |grad x2| = 1, so the margin is a - max|x3|
    g = grids["square"]
    m = check_angular_bound(g.x2, g)
    assert m.margin == pytest.approx(g.cross_section.a - np.max(np.abs(g.x3)), abs=1e-10)


@pytest.mark.parametrize("name", ["square", "disc"])
@given(seed=seeds)
@settings(max_examples=100, deadline=None)
def test_angular_bound_random(grids, name, seed):
    g = grids[name]
    assert check_angular_bound(random_function_2d(g, RandomFunctionSpec(seed)), g).margin >= -1e-10


# ---------------------------------------------------------------------------
# classical Hardy inequality
# ---------------------------------------------------------------------------


def test_hardy_zero_function(grids):
    psi = np.zeros((199, grids["small"].m))
    m = check_hardy_classical(psi, grids["axial"], grids["small"], (-1, 1))
    assert m == (0.0, 0.0)


@given(seed=seeds, width=st.floats(0.5, 6.0))
@settings(max_examples=100, deadline=None)
def test_hardy_random(grids, seed, width):
    psi = random_function_3d(grids["axial"], grids["small"], RandomFunctionSpec(seed, width=width))
    assert check_hardy_classical(psi, grids["axial"], grids["small"], (-1, 1)).relative >= 0


@pytest.fixture(scope="module")
def far_line():
    return Grid1D.uniform(20.0, 4000)


@pytest.mark.parametrize("inner, outer, power", [(1, 3, 0.5), (1, 19, 0.5), (2, 10, 0.3), (1, 5, 1.0)])
def test_hardy_outside_profiles(grids, far_line, inner, outer, power):
    g2 = grids["small"]
    J1 = compute_modes_on_grid(g2).J1
    psi = np.outer(outside_profile(far_line.nodes[1:-1], inner, outer, power), J1)
    terms = hardy_terms(psi, far_line, g2, (-1, 1))
    assert terms["local"] == 0.0
    assert terms["weighted"] <= 0.7 * terms["grad"]
    assert check_hardy_classical(psi, far_line, g2, (-1, 1)).margin >= 0


def test_hardy_check_has_teeth(grids, far_line):
    # the weighted norm reaches about 2/3 of the gradient energy here,
    # so a coefficient of 1/2 must be rejected
    g2 = grids["small"]
    J1 = compute_modes_on_grid(g2).J1
    psi = np.outer(outside_profile(far_line.nodes[1:-1], 1, 19, 0.5), J1)
    assert check_hardy_classical(psi, far_line, g2, (-1, 1), coefficient=0.5).margin < 0


# ---------------------------------------------------------------------------
# one-dimensional Sobolev inequality
# ---------------------------------------------------------------------------


def test_sobolev_gaussian_against_quadrature(grids):
    g = grids["line"]
    x = g.nodes[1:-1]
    m = check_sobolev_1d(np.exp(-x * x), g)
    grad = quad(lambda t: 4 * t * t * math.exp(-2 * t * t), -np.inf, np.inf)[0]
    l2 = quad(lambda t: math.exp(-2 * t * t), -np.inf, np.inf)[0]
    l1 = quad(lambda t: math.exp(-t * t), -np.inf, np.inf)[0]
    assert m.margin == pytest.approx(grad - 0.25 * l2 ** 3 / l1 ** 4, rel=1e-3)


@given(seed=seeds, width=st.floats(0.3, 4.0), smoothing=st.integers(1, 8))
@settings(max_examples=100, deadline=None)
def test_sobolev_random(grids, seed, width, smoothing):
    phi = random_function_1d(grids["line"], RandomFunctionSpec(seed, smoothing, width=width))
    assert check_sobolev_1d(phi, grids["line"]).margin >= 0


@given(c=st.floats(1e-3, 1e3), lam=st.sampled_from([0.5, 2.0]))
@settings(max_examples=30, deadline=None)
def test_sobolev_scaling(grids, c, lam):
    g = grids["line"]
    x = g.nodes[1:-1]
    base = check_sobolev_1d(np.exp(-x * x), g)
    assert check_sobolev_1d(c * np.exp(-x * x), g).relative == pytest.approx(base.relative, rel=1e-9)
    # both sides scale linearly under dilation
    dil = check_sobolev_1d(np.exp(-(lam * x) ** 2), g)
    assert dil.margin == pytest.approx(lam * base.margin, rel=1e-2)


def test_sobolev_zero_function(grids):
    with pytest.raises(ZeroFunction):
        check_sobolev_1d(np.zeros(999), grids["line"])


# ---------------------------------------------------------------------------
# cross-section Poincare inequality
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def small_modes(grids):
    g = grids["small"]
    pairs = smallest_eigenpairs(assemble_cross_section(g.cross_section, g.h), 2)
    return g, pairs


def test_poincare_ground_state_is_sharp(grids, small_modes):
    g, (p1, _) = small_modes
    f = np.exp(-grids["axial"].nodes[1:-1] ** 2)
    psi = np.outer(f, p1.vector)
    margins, energy = poincare_slice_margins(psi, g, p1.value)
    assert np.max(np.abs(margins)) <= 1e-8 * np.max(energy)
    assert abs(check_poincare_slice(psi, g, p1.value).relative) <= 1e-8


def test_poincare_second_mode_gap(grids, small_modes):
    g, (p1, p2) = small_modes
    f = np.exp(-grids["axial"].nodes[1:-1] ** 2)
    psi = np.outer(f, p2.vector)
    margins, _ = poincare_slice_margins(psi, g, p1.value)
    np.testing.assert_allclose(margins, (p2.value - p1.value) * f ** 2, rtol=1e-7, atol=1e-300)


def test_poincare_zero_function(grids):
    g = grids["small"]
    assert check_poincare_slice(np.zeros((5, g.m)), g, 2.0) == (0.0, 0.0)


@given(seed=seeds)
@settings(max_examples=100, deadline=None)
def test_poincare_random(grids, small_modes, seed):
    g, (p1, _) = small_modes
    psi = random_function_3d(grids["axial"], g, RandomFunctionSpec(seed))
    assert check_poincare_slice(psi, g, p1.value).relative >= -1e-10


# ---------------------------------------------------------------------------
# the seeded suite
# ---------------------------------------------------------------------------


def test_suite_is_nonnegative_and_deterministic():
    rows = run_suite(10, first_seed=3)
    assert len(rows) == 40
    assert {r.check for r in rows} == {"angular_bound", "hardy_classical", "poincare_slice", "sobolev_1d"}
    assert all(r.relative >= -1e-9 for r in rows)
    assert [r.margin for r in rows] == [r.margin for r in run_suite(10, first_seed=3)]
