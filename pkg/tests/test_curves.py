import math

import numpy as np
import pytest

from isoq.curves import ParametrizedCurve, StateEvaluator, check_compatible, get_kernel_model, transport_log
from isoq.errors import GeometryMismatch, PowerMismatch, ValidationError
from isoq.parallel import chunked_sum, fixed_chunks, ordered_map, tree_sum


def test_circle_length_and_immersion():
    curve = ParametrizedCurve.circle(1 - 2j, 0.5)
    curve.check_closed()
    assert curve.length() == pytest.approx(math.pi, rel=1e-12)
    assert curve.is_immersed()
    assert not curve.arclength


def test_point_is_not_immersed():
    curve = ParametrizedCurve.point(2j)
    assert not curve.is_immersed()
    assert curve.length() == 0.0


def test_period_must_be_positive():
    with pytest.raises(ValidationError):
        ParametrizedCurve(period=0.0, position=np.sin, velocity=np.cos)


def test_transport_log_integrates_a_constant_rate():
    t = np.linspace(0.0, 2.0, 5)
    logs = transport_log(lambda _: 1.5j, (0.0, 2.0), t)
    assert np.allclose(logs, 1.5j * t, atol=1e-12)


@pytest.mark.parametrize("name", ["bargmann", "hyperbolic"])
def test_registered_models(name):
    assert get_kernel_model(name).name == name


def test_unknown_model():
    with pytest.raises(ValidationError):
        get_kernel_model("sphere")


def test_state_lengths_must_agree():
    model = get_kernel_model("bargmann")
    with pytest.raises(ValidationError):
        StateEvaluator(p=1, nodes=np.zeros((3, 2)), weights=np.ones(2), payload=np.ones(3), model=model)


def _state(model_name, p):
    return StateEvaluator(
        p=p,
        nodes=np.zeros((1, 2)),
        weights=np.ones(1),
        payload=np.ones(1, complex),
        model=get_kernel_model(model_name),
    )


def test_compatibility_checks():
    check_compatible(_state("bargmann", 3), _state("bargmann", 3))
    with pytest.raises(PowerMismatch):
        check_compatible(_state("bargmann", 3), _state("bargmann", 4))
    with pytest.raises(GeometryMismatch):
        check_compatible(_state("bargmann", 3), _state("hyperbolic", 3))


def test_evaluate_keeps_batch_shape(unit_circle_20):
    _, state = unit_circle_20
    values = state.evaluate(np.zeros((4, 3, 2)))
    assert values.shape == (4, 3)
    assert isinstance(state.evaluate(np.zeros(2)), complex)


# =========================================================================
# Parallel helpers
# =========================================================================


def test_ordered_map_keeps_order():
    assert ordered_map(lambda x: x * x, range(10), workers=4) == [x * x for x in range(10)]


def test_fixed_chunks_cover_the_range():
    chunks = fixed_chunks(10, 4)
    assert [(s.start, s.stop) for s in chunks] == [(0, 4), (4, 8), (8, 10)]
    assert fixed_chunks(0, 4) == []


def test_fixed_chunks_rejects_zero():
    with pytest.raises(ValueError):
        fixed_chunks(10, 0)


def test_tree_sum():
    assert tree_sum([]) == 0j
    assert tree_sum([1.0, 2.0, 3.0]) == 6.0
    assert np.allclose(tree_sum([np.ones(2), 2 * np.ones(2), 3 * np.ones(2)]), [6.0, 6.0])


@pytest.mark.parametrize("workers", [1, 2, 3, 8])
def test_chunked_sum_is_bit_identical_across_workers(workers, rng):
    data = rng.normal(size=10_000) + 1j * rng.normal(size=10_000)

    def part(sl):
        return complex(np.sum(data[sl] * np.exp(1j * np.arange(sl.start, sl.stop))))

    assert chunked_sum(part, len(data), workers, chunk=333) == chunked_sum(part, len(data), 1, chunk=333)
