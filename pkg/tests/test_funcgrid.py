import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from bbkit.funcgrid import (
    Grid,
    SampledFunction,
    bb_l1_seminorm,
    bb_seminorm,
    closed_form,
    dft_along,
    fourier_transform,
    inverse_fourier,
    l1_seminorm,
    l2_inner,
    library_function,
    reflect,
    shift,
    sup_seminorm,
    zeros,
)
from bbkit.weights import WeightFunction, power

G128 = Grid.from_extent(1, 128, 8.0)

LIB_PARAMS = [
    ("gaussian", {}),
    ("gaussian", {"center": 1.5, "modulation": -0.75}),
    ("gaussian", {"scale": 1.7}),
    ("hermite", {"order": 1}),
    ("hermite", {"order": 3, "center": -0.5}),
    ("chi", {}),
    ("bump", {"radius": 3.0}),
]


# grid -----------------------------------------------------------------------


def test_grid_layout():
    g = Grid.from_extent(1, 256, 8.0)
    assert g.h == 1 / 16
    assert g.axis[0] == -8.0 and g.axis[g.N // 2] == 0.0
    fg = g.frequency_grid()
    assert fg.h == pytest.approx(1 / 16)
    assert fg.frequency_grid() == g
    assert Grid.from_dict(g.to_dict()) == g


@pytest.mark.parametrize("N", [0, 3, 100])
def test_grid_rejects_non_power_of_two(N):
    with pytest.raises(ValueError):
        Grid(1, N, 0.1)


def test_grid_rejects_bad_spacing_and_dim():
    with pytest.raises(ValueError):
        Grid(1, 8, 0.0)
    with pytest.raises(ValueError):
        Grid(0, 8, 0.1)


def test_sampled_function_validation():
    with pytest.raises(ValueError):
        SampledFunction(G128, np.zeros(5))
    with pytest.raises(ValueError):
        SampledFunction(G128, np.full(128, np.nan))
    f = library_function("gaussian", {}, G128)
    with pytest.raises(ValueError):
        f.values[0] = 2.0


# library ---------------------------------------------------------------------


def test_library_point_values():
    assert library_function("gaussian", {}, G128).at_origin() == 1.0
    assert library_function("chi", {}, G128).at_origin() == 1.0
    assert library_function("hermite", {"order": 1}, G128).at_origin() == 0.0


def test_library_rejects_unknown():
    with pytest.raises(ValueError):
        library_function("nope", {}, G128)
    with pytest.raises(ValueError):
        library_function("gaussian", {"bogus": 1}, G128)
    with pytest.raises(ValueError):
        library_function("gaussian", {}, None)


def test_library_matches_closed_forms():
    t = G128.axis
    np.testing.assert_allclose(library_function("gaussian", {"center": 1.5, "modulation": 0.5}, G128).values, oracles.gaussian(t, 1.5, 0.5), atol=1e-15)
    np.testing.assert_allclose(library_function("hermite", {"order": 1}, G128).values, oracles.hermite1(t), atol=1e-15)


def test_library_2d_is_separable():
    g2 = Grid.from_extent(2, 32, 4.0)
    f = library_function("gaussian", {"center": [0.5, -1.0]}, g2)
    t = g2.axis
    expect = np.outer(oracles.gaussian(t, 0.5), oracles.gaussian(t, -1.0))
    np.testing.assert_allclose(f.values, expect, atol=1e-15)


# Fourier transform -----------------------------------------------------------


def test_gaussian_self_duality(g256):
    F = fourier_transform(g256)
    assert np.max(np.abs(F.values - oracles.gaussian(F.grid.axis))) <= 1e-10


def test_fourier_of_zero():
    assert np.all(fourier_transform(zeros(G128)).values == 0)


@pytest.mark.parametrize("tag,params", LIB_PARAMS)
def test_fourier_matches_direct_quadrature(tag, params):
    f = library_function(tag, params, G128)
    F = fourier_transform(f)
    ref = oracles.direct_ft(f.values, G128.axis, F.grid.axis)
    assert np.max(np.abs(F.values - ref)) <= 1e-8


def test_fourier_2d_matches_direct():
    g2 = Grid.from_extent(2, 32, 4.0)
    f = library_function("hermite", {"order": [1, 2]}, g2)
    t = g2.axis
    xi = g2.frequency_grid().axis
    E = np.exp(-2j * np.pi * np.outer(xi, t)) * g2.h
    ref = E @ f.values @ E.T
    np.testing.assert_allclose(fourier_transform(f).values, ref, atol=1e-12)


def test_translate_modulation_law(g256):
    a = 1.0
    F0 = fourier_transform(g256)
    F1 = fourier_transform(library_function("gaussian", {"center": a}, g256.grid))
    xi = F0.grid.axis
    np.testing.assert_allclose(np.abs(F1.values), np.abs(F0.values), atol=1e-12)
    np.testing.assert_allclose(F1.values, F0.values * np.exp(-2j * np.pi * xi * a), atol=1e-12)


@pytest.mark.parametrize("tag,params,tol", [("gaussian", {}, 1e-10), ("hermite", {"order": 1}, 1e-9)])
def test_inverse_roundtrip(g256, tag, params, tol):
    f = library_function(tag, params, g256.grid)
    back = inverse_fourier(fourier_transform(f), f.grid)
    assert back.grid == f.grid
    assert np.max(np.abs(back.values - f.values)) <= tol


def test_inverse_rejects_wrong_grid(g256):
    with pytest.raises(ValueError):
        inverse_fourier(fourier_transform(g256), G128)


def test_parseval_scaling(g256):
    f = library_function("hermite", {"order": 2, "modulation": 0.3}, g256.grid)
    F = fourier_transform(f)
    lhs = f.grid.cell * np.sum(np.abs(f.values) ** 2)
    rhs = F.grid.cell * np.sum(np.abs(F.values) ** 2)
    assert abs(lhs - rhs) <= 1e-10


def test_dft_along_empty_axes_is_identity():
    v = np.arange(4.0)
    np.testing.assert_array_equal(dft_along(v, 0.5, ()), v.astype(complex))


# reflect / shift ---------------------------------------------------------------


def test_reflect_is_involution_and_matches_closed_form():
    f = library_function("gaussian", {"center": 1.25}, G128)
    r = reflect(f)
    np.testing.assert_allclose(r.values[1:], oracles.gaussian(-G128.axis[1:], 1.25), atol=1e-15)
    np.testing.assert_array_equal(reflect(r).values, f.values)


def test_shift_is_exact_index_move():
    f = library_function("gaussian", {}, G128)
    s = shift(f, 16)  # 16 nodes of h = 1/8
    np.testing.assert_allclose(s.values[16:], f.values[:-16])
    assert np.all(s.values[:16] == 0)
    assert np.all(shift(f, 1000).values == 0)


# seminorms -------------------------------------------------------------------


def test_sup_seminorm_examples(g256):
    assert sup_seminorm(g256).value == 1.0
    assert sup_seminorm(zeros(g256.grid)).value == 0.0
    fine = Grid.from_extent(1, 2**16, 8.0)
    w = WeightFunction.exponential(power(1.0), 1)
    val = sup_seminorm(library_function("gaussian", {}, fine), w).value
    assert val == pytest.approx(oracles.SUP_GAUSS_EXP, rel=1e-6)


def test_l1_seminorm_examples(g256):
    assert l1_seminorm(g256).value == pytest.approx(1.0, abs=1e-8)
    assert l1_seminorm(zeros(g256.grid)).value == 0.0
    bump = library_function("bump", {"radius": 2.0}, g256.grid)
    assert l1_seminorm(bump * 2.0).value == pytest.approx(2 * l1_seminorm(bump).value, rel=1e-15)


def test_bb_seminorms(g256):
    v = bb_seminorm(g256)
    assert v.value == pytest.approx(2.0, abs=1e-10)
    assert v.value == v.time_part + v.freq_part
    assert bb_seminorm(zeros(g256.grid)).value == 0.0
    v1 = bb_l1_seminorm(g256)
    assert v1.value == pytest.approx(2.0, abs=1e-8)
    assert v1.value - v1.time_part == v1.freq_part


def test_weight_dimension_mismatch(g256):
    w2 = WeightFunction.exponential(power(1.0), 2)
    with pytest.raises(ValueError):
        sup_seminorm(g256, w2)


def test_l2_inner_gaussian(g256):
    assert l2_inner(g256, g256) == pytest.approx(oracles.PAIRING_GAUSS, abs=1e-8)
    with pytest.raises(ValueError):
        l2_inner(g256, library_function("gaussian", {}, G128))


# properties ------------------------------------------------------------------

lib_choice = st.sampled_from(LIB_PARAMS)
scalars = st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False)
weights = st.sampled_from([None, WeightFunction.exponential(power(1.0), 1), WeightFunction.exponential(power(0.5), 1, 2.0)])


@given(lib_choice, scalars, weights)
def test_seminorms_absolutely_homogeneous(fp, c, w):
    f = library_function(*fp, G128)
    for norm in (sup_seminorm, l1_seminorm):
        assert norm(f * c, w).value == pytest.approx(abs(c) * norm(f, w).value, rel=1e-12, abs=1e-300)
    assert bb_seminorm(f * c, w, w).value == pytest.approx(abs(c) * bb_seminorm(f, w, w).value, rel=1e-12, abs=1e-300)


@given(lib_choice, lib_choice, weights)
def test_seminorm_triangle_inequality(fp, gp, w):
    f = library_function(*fp, G128)
    g = library_function(*gp, G128)
    for norm in (sup_seminorm, l1_seminorm):
        assert norm(f + g, w).value <= (norm(f, w).value + norm(g, w).value) * (1 + 1e-12)


@given(st.floats(-3, 3), st.floats(-2, 2), st.floats(0.5, 2.0))
def test_fourier_of_shifted_gaussian_closed_form(a, b, s):
    grid = Grid.from_extent(1, 256, 10.0)
    f = library_function("gaussian", {"center": a, "modulation": b, "scale": s}, grid)
    F = fourier_transform(f)
    xi = F.grid.axis
    # F[e^{2 pi i b t} g((t-a)/s)](xi) = s e^{-2 pi i (xi-b) a} g(s (xi-b))
    expect = s * np.exp(-2j * np.pi * (xi - b) * a) * np.exp(-np.pi * (s * (xi - b)) ** 2)
    assert np.max(np.abs(F.values - expect)) <= 1e-9


def test_closed_form_dimension_check():
    with pytest.raises(ValueError):
        closed_form("gaussian", {}, 2)(np.zeros((3, 1)))
