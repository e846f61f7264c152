import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import forr_reference, simulate_dense, sylvester
from qrounds.errors import DomainError, SamplingError, ValidationError
from qrounds.forrelation import (
    ForrelationInstance,
    PromiseLabel,
    apply_hadamard,
    delta,
    enumerate_instances,
    eval_forr,
    forr_algorithm,
    forr_polynomial,
    hadamard_matrix,
    label_value,
    sample_promise_instance,
)
from qrounds.query import simulate_accept_probs


@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_hadamard_matches_sylvester(m):
    h = hadamard_matrix(m)
    assert np.allclose(h, sylvester(m))
    assert np.allclose(h @ h, np.eye(1 << m))
    vec = np.arange(1 << m, dtype=float)
    assert np.allclose(apply_hadamard(vec), h @ vec)


@st.composite
def instances(draw, max_k=5, max_m=3):
    k = draw(st.integers(2, max_k))
    m = draw(st.integers(0, max_m))
    bits = draw(st.lists(st.sampled_from([1, -1]), min_size=k << m, max_size=k << m))
    return ForrelationInstance.from_input(k, m, bits)


@settings(max_examples=60, deadline=None)
@given(instances())
def test_eval_forr_matches_matrix_formula(inst):
    assert eval_forr(inst) == pytest.approx(forr_reference(inst.tables), abs=1e-12)
    batch = forr_polynomial(inst.k, inst.m)(inst.concatenated()[None, :])
    assert batch[0] == pytest.approx(eval_forr(inst), abs=1e-12)
    assert abs(eval_forr(inst)) <= 1 + 1e-12


def test_worked_example_k2():
    inst = ForrelationInstance(2, 1, ((1, 1), (1, 1)))
    assert eval_forr(inst) == pytest.approx(1 / math.sqrt(2))
    alg = forr_algorithm(2, 1)
    p = simulate_accept_probs(alg, [inst.concatenated()])[0]
    assert p == pytest.approx((1 + 1 / math.sqrt(2)) / 2, abs=1e-12)
    assert p == pytest.approx(0.8535534, abs=1e-7)


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_algorithm_shape(k):
    alg = forr_algorithm(k, 1)
    assert alg.r == math.ceil(k / 2)
    assert alg.t == 1
    assert alg.n == 2 * k


@pytest.mark.parametrize("k", [2, 3, 4])
def test_algorithm_identity_exhaustive_m1(k):
    alg = forr_algorithm(k, 1)
    for inst in enumerate_instances(k, 1):
        x = inst.concatenated()
        assert simulate_dense(alg, x) == pytest.approx((1 + forr_reference(inst.tables)) / 2, abs=1e-9)


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_algorithm_identity_sampled_m2(k):
    rng = np.random.default_rng(k)
    xs = rng.choice([-1, 1], size=(40, 4 * k))
    probs = simulate_accept_probs(forr_algorithm(k, 2), xs)
    for x, p in zip(xs, probs):
        inst = ForrelationInstance.from_input(k, 2, x)
        assert p == pytest.approx((1 + forr_reference(inst.tables)) / 2, abs=1e-9)


def test_labels_and_thresholds():
    k = 2
    dlt = delta(k)
    assert dlt == 2.0**-10
    assert label_value(dlt, k) is PromiseLabel.YES
    assert label_value(dlt / 2, k) is PromiseLabel.NO
    assert label_value(-dlt / 2, k) is PromiseLabel.NO
    assert label_value(0.75 * dlt, k) is PromiseLabel.OUTSIDE
    assert label_value(-dlt, k) is PromiseLabel.OUTSIDE


@pytest.mark.parametrize("want", ["YES", "NO"])
def test_promise_sampler_and_advantage(want):
    k, m = 2, 3
    inst = sample_promise_instance(k, m, want, seed=11)
    value = forr_reference(inst.tables)
    p = simulate_accept_probs(forr_algorithm(k, m), [inst.concatenated()])[0]
    if want == "YES":
        assert value >= delta(k)
        assert p >= 0.5 + delta(k) / 2 - 1e-12
    else:
        assert abs(value) <= delta(k) / 2
        assert abs(p - 0.5) <= delta(k) / 4 + 1e-12


def test_sampler_exhaustion():
    # at m=0 a single-entry table gives forr = +-1, never a NO instance
    with pytest.raises(SamplingError):
        sample_promise_instance(2, 0, "NO", seed=0, max_tries=20)
    with pytest.raises(DomainError):
        sample_promise_instance(2, 1, "OUTSIDE", seed=0)


def test_instance_validation_and_json():
    with pytest.raises(ValidationError):
        ForrelationInstance(2, 1, ((1, 1),))
    with pytest.raises(ValidationError):
        ForrelationInstance(2, 1, ((1, 0), (1, 1)))
    with pytest.raises(DomainError):
        ForrelationInstance(1, 1, ((1, 1),))
    inst = ForrelationInstance(3, 1, ((1, -1), (1, 1), (-1, -1)))
    assert ForrelationInstance.from_json(inst.to_json()) == inst
