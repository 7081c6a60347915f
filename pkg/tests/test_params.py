import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from burgers_rb.errors import InvalidViscosityError, RangeError
from burgers_rb.params import (FrequencyStructure, ParameterRanges, eval_data, make_parameter_point,
                               sample_parameters)

TABLE1_FREQ = FrequencyStructure(omega_b0=[1], omega_b1=[1], omega_u0=[3], omega_fT=[2], omega_fS=[2])
TABLE1_RANGES = ParameterRanges(
    nu=(0.8, 1.2), amp_b0=[(0.9, 1.2)], amp_b1=[(0.9, 1.2)], f_m=(0, 2), amp_f=[[(0.7, 1.3)]],
    u0m=(0, 1), amp_u0=[(1.1, 3)],
)


def test_compatibility_high_viscosity():
    mu = make_parameter_point([1, 1, 1, 1, 1, 1, 2], TABLE1_FREQ, TABLE1_RANGES)
    assert mu.b1m == pytest.approx(1.28224, abs=5e-6)
    assert mu.b0m == 1.0


def test_zero_amplitudes_give_equal_means():
    mu = make_parameter_point([1, 0, 0, 0.5, 0, 0.3, 0], TABLE1_FREQ)
    assert mu.b0m == mu.b1m == mu.u0m == 0.3


def test_out_of_range():
    with pytest.raises(RangeError):
        make_parameter_point([0.5, 1, 1, 1, 1, 1, 2], TABLE1_FREQ, TABLE1_RANGES)


def test_nonpositive_viscosity():
    with pytest.raises(InvalidViscosityError):
        make_parameter_point([0.0, 1, 1, 1, 1, 1, 2], TABLE1_FREQ)
    with pytest.raises(InvalidViscosityError):
        make_parameter_point([-1.0, 1, 1, 1, 1, 1, 2], TABLE1_FREQ)


def test_wrong_coordinate_count():
    with pytest.raises(RangeError):
        make_parameter_point([1, 1, 1], TABLE1_FREQ)


def test_data_at_time_zero():
    mu = make_parameter_point([1, 1.1, 0.95, 0.4, 1.2, 0.6, 2.5], TABLE1_FREQ, TABLE1_RANGES)
    data = eval_data(mu, TABLE1_FREQ)
    x = np.linspace(0, 1, 11)
    assert data.b0(0.0) == mu.b0m
    assert np.allclose(data.f(0.0, x), mu.f_m)


def test_high_viscosity_source():
    mu = make_parameter_point([1, 1, 1, 1, 1, 1, 2], TABLE1_FREQ, TABLE1_RANGES)
    t, x = 0.37, np.linspace(0, 1, 7)
    assert np.allclose(mu.f(t, x), 1 + np.sin(2 * t) * np.sin(2 * x), atol=1e-15)
    assert np.allclose(mu.u0(x), 1 + 2 * np.sin(3 * x), atol=1e-15)
    assert mu.b0(t) == pytest.approx(1 + np.sin(t))


def test_eval_data_rejects_other_structure():
    mu = make_parameter_point([1, 1, 1, 1, 1, 1, 2], TABLE1_FREQ)
    with pytest.raises(RangeError):
        eval_data(mu, FrequencyStructure())


def test_degenerate_ranges_force_the_point():
    freq = FrequencyStructure(omega_u0=[3])
    ranges = ParameterRanges(nu=(0.7, 0.7), f_m=(1, 1), u0m=(0.2, 0.2), amp_u0=[(1.5, 1.5)])
    (mu,) = sample_parameters(ranges, freq, 1, seed=3)
    assert mu.nu == 0.7 and mu.u0m == 0.2 and mu.amp_u0[0] == 1.5


def test_sampling_is_deterministic():
    a = sample_parameters(TABLE1_RANGES, TABLE1_FREQ, 5, seed=11)
    b = sample_parameters(TABLE1_RANGES, TABLE1_FREQ, 5, seed=11)
    assert all(np.array_equal(p.coordinates(), q.coordinates()) for p, q in zip(a, b))


def test_sample_of_one_hundred_is_compliant():
    sample = sample_parameters(TABLE1_RANGES, TABLE1_FREQ, 100, seed=0)
    assert len(sample) == 100
    lo, hi = TABLE1_RANGES.bounds()
    for mu in sample:
        assert np.all((mu.free_vector() >= lo) & (mu.free_vector() <= hi))
        assert abs(mu.u0(0.0) - mu.b0(0.0)) <= 1e-14
        assert abs(mu.u0(1.0) - mu.b1(0.0)) <= 1e-14


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_full_bounds_contain_every_sample(seed):
    lo, hi = TABLE1_RANGES.full_bounds(TABLE1_FREQ)
    for mu in sample_parameters(TABLE1_RANGES, TABLE1_FREQ, 3, seed):
        c = mu.coordinates()
        assert np.all(c >= lo - 1e-12) and np.all(c <= hi + 1e-12)


def test_ranges_validation():
    with pytest.raises(RangeError):
        ParameterRanges(nu=(1.2, 0.8), f_m=(0, 1), u0m=(0, 1))
    with pytest.raises(RangeError):
        sample_parameters(ParameterRanges(nu=(1, 1), f_m=(0, 1), u0m=(0, 1)), TABLE1_FREQ, 1, 0)
