import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cograph.errors import InvalidInputError
from cograph.interpolation import KINDS, FluxInterpolation, admissibility_suite

val = st.floats(-100, 100, allow_nan=False)


def test_upwind_examples():
    up = FluxInterpolation("upwind")
    assert up.eval(2, 3, 1) == 2
    assert up.eval(2, 3, -1) == -3


def test_product_mean_example():
    assert FluxInterpolation("product-mean").eval(1, 3, 2) == 4


@pytest.mark.parametrize("kind", KINDS)
@given(a=val, b=val)
def test_zero_velocity_gives_zero_flux(kind, a, b):
    assert FluxInterpolation(kind).eval(a, b, 0.0) == 0


def test_eval_rejects_non_finite():
    with pytest.raises(InvalidInputError):
        FluxInterpolation().eval(np.nan, 1, 1)
    with pytest.raises(InvalidInputError):
        FluxInterpolation().eval(1, 1, np.inf)


def test_constructor_validation():
    with pytest.raises(InvalidInputError):
        FluxInterpolation("central")
    with pytest.raises(InvalidInputError):
        FluxInterpolation("custom")
    with pytest.raises(InvalidInputError):
        FluxInterpolation.custom(lambda a, b, v: v, 0.0)


@pytest.mark.parametrize("kind", KINDS)
def test_builtin_kinds_are_admissible(kind):
    rep = admissibility_suite(FluxInterpolation(kind), samples=10_000, seed=1)
    assert rep.passed, rep.table()
    assert set(rep.checks) == {"degeneracy_velocity", "degeneracy_density", "lipschitz_velocity",
                               "lipschitz_density", "homogeneity", "joint_antisymmetry"}


def test_product_max_homogeneity_witness():
    phi = FluxInterpolation("product-max")
    assert phi.eval(2, -2, 1) == 2 == 2 * phi.eval(1, -1, 1)


def test_broken_flux_is_caught():
    broken = FluxInterpolation.custom(lambda a, b, v: v ** 2 + 0.0 * a, lipschitz=1.0)
    rep = admissibility_suite(broken, samples=2000, seed=0)
    assert rep["degeneracy_velocity"].passed
    assert not rep["homogeneity"].passed
    alpha, a, b, w = rep["homogeneity"].witness
    assert abs(broken.eval(alpha * a, alpha * b, w) - alpha * broken.eval(a, b, w)) > 0


@given(a=val, b=val, v=val)
def test_upwind_selects_donor(a, b, v):
    f = FluxInterpolation("upwind").eval(a, b, v)
    assert f == (a * v if v >= 0 else b * v)
