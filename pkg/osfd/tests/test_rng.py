import json

import numpy as np
from numpy.testing import assert_array_equal, assert_equal
import pytest

from osfd.exceptions import UsageError
from osfd.rng import SeededRng


def test_same_seed_same_stream():
    a = SeededRng(12345).generator.random(10)
    b = SeededRng(12345).generator.random(10)
    assert_array_equal(a, b)


def test_negative_seed():
    with pytest.raises(UsageError):
        SeededRng(-1)


def test_state_round_trip():
    rng = SeededRng(7)
    rng.generator.random(17)
    state = json.loads(json.dumps(rng.state))
    restored = SeededRng.from_state(state)
    assert_array_equal(restored.generator.random(100), rng.generator.random(100))
    assert_equal(restored.seed_seq.entropy, 7)


def test_state_after_spawn():
    rng = SeededRng(3)
    rng.spawn(2)
    restored = SeededRng.from_state(json.loads(json.dumps(rng.state)))
    expected = rng.spawn(1)[0].generator.random(5)
    assert_array_equal(restored.spawn(1)[0].generator.random(5), expected)


def test_spawn_independent():
    children = SeededRng(0).spawn(3)
    draws = [child.generator.random(5) for child in children]
    assert not np.array_equal(draws[0], draws[1])
    again = [child.generator.random(5) for child in SeededRng(0).spawn(3)]
    for a, b in zip(draws, again):
        assert_array_equal(a, b)


def test_bad_state():
    with pytest.raises(UsageError, match="invalid random state"):
        SeededRng.from_state({"entropy": 1})


def test_repr():
    assert "entropy=5" in repr(SeededRng(5))
