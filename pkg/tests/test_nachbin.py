import math

import numpy as np
import pytest

from bbkit.reports import COUNTEREXAMPLE
from bbkit.weights import (
    NachbinWeight,
    SearchSpec,
    WeightFunction,
    logpower,
    make_exponential_system,
    moderate_inequality_excess,
    nachbin_integrable_majorant,
    nachbin_membership,
    nachbin_moderate,
    nachbin_square_check,
    power,
)

W = make_exponential_system(power(), 1)
SMALL = SearchSpec(radius=8.0)
POLY = WeightFunction.exponential(logpower(), 1, 0.5)  # (1+|x|)^2


# membership ------------------------------------------------------------------


def test_member_dominated_on_lower_lattice():
    # e^{|x|/2} / e^{|x|/lam} is bounded exactly for lam <= 2
    low = [lam for lam in SearchSpec().lambdas if lam <= 2.0]
    r = nachbin_membership(W.member(2.0), W, lambdas=low)
    assert r.holds and all(row["C_prime"] == pytest.approx(1.0) for row in r.witness)
    full = nachbin_membership(W.member(2.0), W)
    assert {row["lambda"] for row in full.counterexample} == {lam for lam in SearchSpec().lambdas if lam > 2.0}


def test_polynomial_weight_is_member():
    assert nachbin_membership(POLY, W).holds


def test_unit_weight_member_everywhere():
    r = nachbin_membership(WeightFunction.unit(1), W)
    assert r.holds and all(row["C_prime"] == 1.0 for row in r.witness)


def test_double_exponent_not_member():
    w = WeightFunction.exponential(power(1.0, 2.0), 1)  # e^{2|x|}
    r = nachbin_membership(w, W)
    assert r.verdict == COUNTEREXAMPLE
    assert {row["lambda"] for row in r.counterexample} == {lam for lam in SearchSpec().lambdas if lam > 0.5}


# moderate majorant -----------------------------------------------------------


def test_moderate_inequality_on_grid():
    w = POLY
    wbar = nachbin_moderate(w, W, 1.0, search=SMALL)
    assert moderate_inequality_excess(w, wbar, W, 1.0, SMALL) <= 1e-9
    # wbar dominated by the best scaled lattice member
    x = np.linspace(-8, 8, 65)
    best = min(zip(wbar.lambdas, wbar.log_constants), key=lambda t: t[1])
    assert np.all(wbar.log(x) <= best[1] + W.log_weight(best[0], x) + 1e-12)


def test_moderate_unit_weight_is_bounded():
    w = WeightFunction.unit(1)
    wbar = nachbin_moderate(w, W, 1.0, search=SMALL)
    assert np.all(np.isfinite(wbar(np.linspace(-8, 8, 33))))
    assert moderate_inequality_excess(w, wbar, W, 1.0, SMALL) <= 1e-9


def test_single_term_is_scaled_member():
    w = POLY
    wbar = nachbin_moderate(w, W, 1.0, mus=[0.5], search=SMALL)
    assert wbar.depth == 1
    x = np.linspace(-4, 4, 9)
    np.testing.assert_allclose(wbar.log(x), wbar.log_constants[0] + W.log_weight(0.5, x))


def test_moderate_rejects_non_member():
    with pytest.raises(ValueError):
        nachbin_moderate(WeightFunction.exponential(power(3.0), 1), W, 1.0, search=SMALL)


def test_nachbin_weight_needs_terms():
    with pytest.raises(ValueError):
        NachbinWeight(W, (), ())


# squares ---------------------------------------------------------------------


def test_square_of_member():
    r = nachbin_square_check(W.member(1.0), W, lambdas=[0.5])
    assert r.holds
    (row,) = r.witness
    assert row["mu"] == 1.0 and math.exp(row["log_lhs"]) == pytest.approx(1.0)


def test_square_of_unit():
    assert nachbin_square_check(WeightFunction.unit(1), W).holds


def test_square_point_seven():
    w = WeightFunction.exponential(power(1.0, 0.7), 1)
    r = nachbin_square_check(w, W)
    assert r.verdict == COUNTEREXAMPLE
    ok = {row["lambda"] for row in r.witness}
    assert ok == {lam for lam in SearchSpec().lambdas if 1 / lam >= 1.4}


# integrable majorant ---------------------------------------------------------


def test_integrable_majorant_member():
    wbar = nachbin_integrable_majorant(W.member(1.0), W, N_max=8)
    assert wbar.depth == 8
    assert wbar.diagnostics["integral"] <= 1.0 + wbar.diagnostics["truncation_tolerance"]


def test_integrable_majorant_unit_and_depth_one():
    wbar = nachbin_integrable_majorant(WeightFunction.unit(1), W, N_max=8)
    assert math.isfinite(wbar.diagnostics["integral"])
    one = nachbin_integrable_majorant(W.member(1.0), W, N_max=1)
    assert one.depth == 1 and math.isfinite(one.diagnostics["integral"])
    with pytest.raises(ValueError):
        nachbin_integrable_majorant(W.member(1.0), W, N_max=0)
