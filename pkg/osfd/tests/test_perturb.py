import math

import numpy as np
from numpy.testing import assert_, assert_allclose, assert_array_equal, assert_equal
import pytest

from osfd.exceptions import UsageError
from osfd.filldist import FillRecord
from osfd.geometry import assign_to_nearest
from osfd.perturb import (
    CandidateSet,
    EiModel,
    default_k2,
    ei_candidates,
    ei_perturbation,
    estimate_sigma2,
    expected_improvement,
    fit_ei_model,
    greedy_candidates,
    greedy_perturbation,
    propose,
    select_ei,
    select_greedy,
)
from osfd.rng import SeededRng


def candidates(points):
    points = np.asarray(points, dtype=float)
    return CandidateSet(points, np.full(points.shape[0], "uniform"))


def closed_form_ei(s, h_i, h_max):
    if s == 0:
        return 0.0
    u = (h_i - h_max) / s
    cdf = 0.5 * (1 + math.erf(u / math.sqrt(2)))
    pdf = math.exp(-0.5 * u * u) / math.sqrt(2 * math.pi)
    return s * (u * cdf + pdf)


@pytest.fixture(scope="module", params=[(2, 12), (3, 20), (5, 15)])
def design(request):
    p, m = request.param
    rng = np.random.default_rng(p * 100 + m)
    inputs = rng.random((m, p))
    h = rng.random(m)
    return inputs, FillRecord.from_distances(h)


def test_default_k2():
    assert_equal(default_k2(3), 6)


def test_select_greedy_one_dimensional():
    proposal = select_greedy([[0.0], [1.0]], 0, candidates([[0.1], [0.4], [0.6]]))
    assert_allclose(proposal.x, [0.4])
    assert_equal(proposal.rule, "greedy")


def test_select_greedy_empty_cell():
    proposal = select_greedy([[0.0], [1.0]], 0, candidates([[0.6], [0.9]]))
    assert_allclose(proposal.x, [0.6])
    assert_equal(proposal.rule, "greedy-cell-empty")


def test_select_greedy_exhaustive(design):
    inputs, record = design
    cand = greedy_candidates(inputs, record.i_star, SeededRng(0))
    proposal = select_greedy(inputs, record.i_star, cand)
    best, best_d = None, -1.0
    for c in cand.points:
        d = np.sqrt(((inputs - c) ** 2).sum(axis=1))
        if np.argmin(d) == record.i_star and d[record.i_star] > best_d:
            best, best_d = c, d[record.i_star]
    if best is not None:
        assert_array_equal(proposal.x, best)


def test_greedy_candidates(design):
    inputs, record = design
    m, p = inputs.shape
    k2 = min(2 * p, m - 1)
    cand = greedy_candidates(inputs, record.i_star, SeededRng(1))
    assert_(len(cand) <= 10 * p * (k2 + 1) + 10 * p * k2 + 10 * p)
    assert_(len(cand) > 10 * p * k2)
    assert_(np.all((cand.points >= 0) & (cand.points <= 1)))
    assert_equal(set(cand.sources), {"sobol-box", "ball"})
    assert_equal(np.unique(cand.points, axis=0).shape[0], len(cand))


def test_greedy_candidates_box():
    inputs = np.array([[0.5, 0.5], [0.6, 0.5], [0.5, 0.7], [0.1, 0.1]])
    cand = greedy_candidates(inputs, 0, SeededRng(3), k2=2)
    box = cand.points[cand.sources == "sobol-box"]
    # half-width is the distance to the second neighbor
    assert_(np.all(np.abs(box - 0.5) <= 0.2 + 1e-12))
    assert_equal(box.shape[0], 10 * 2 * 3)


def test_greedy_perturbation(design):
    inputs, record = design
    x = greedy_perturbation(inputs, record.i_star, SeededRng(2))
    assert_equal(x.shape, (inputs.shape[1],))
    assert_(np.all((x >= 0) & (x <= 1)))
    assert_(not np.any(np.all(inputs == x, axis=1)))
    proposal = propose(inputs, record, SeededRng(2), "greedy")
    assert_array_equal(proposal.x, x)
    if proposal.rule == "greedy":
        assert_equal(assign_to_nearest(x, inputs)[0], record.i_star)


def test_greedy_two_points():
    x = greedy_perturbation([[0.2, 0.2], [0.8, 0.8]], 0, SeededRng(0))
    assert_(np.all((x >= 0) & (x <= 1)))
    assert_equal(assign_to_nearest(x, [[0.2, 0.2], [0.8, 0.8]])[0], 0)


def test_greedy_errors():
    with pytest.raises(UsageError, match="at least 2"):
        greedy_perturbation([[0.5, 0.5]], 0, SeededRng(0))
    with pytest.raises(IndexError):
        greedy_perturbation([[0.5, 0.5], [0.1, 0.1]], 2, SeededRng(0))
    with pytest.raises(UsageError, match="k2"):
        greedy_perturbation([[0.5, 0.5], [0.1, 0.1]], 0, SeededRng(0), k2=0)


def test_candidate_set_build():
    inputs = np.array([[0.0, 0.0], [1.0, 1.0]])
    block = np.array([[1.2, 1.5], [0.3, 0.3], [0.3, 0.3], [0.0, 0.0], [-0.1, 0.5]])
    cand = CandidateSet.build([block, np.array([[0.3, 0.3]])], ["ball", "midpoint"], inputs)
    assert_array_equal(cand.points, [[0.3, 0.3], [0.0, 0.5]])
    assert_array_equal(cand.sources, ["ball", "ball"])


def test_estimate_sigma2():
    assert_allclose(estimate_sigma2([[0.0], [1.0]], [0.2, 0.5]), 0.09)
    rng = np.random.default_rng(0)
    inputs = rng.random((10, 2))
    assert_equal(estimate_sigma2(inputs, np.full(10, 0.3)), 0.0)
    h = rng.random(10)
    base = estimate_sigma2(inputs, h)
    assert_allclose(estimate_sigma2(inputs, 3 * h), 9 * base)
    perm = rng.permutation(10)
    assert_allclose(estimate_sigma2(inputs[perm], h[perm]), base)


def test_estimate_sigma2_duplicates():
    inputs = [[0.0], [0.0], [1.0]]
    # the two duplicates are each other's nearest input and are skipped
    assert_allclose(estimate_sigma2(inputs, [0.1, 0.2, 0.4]), (0.4 - 0.1) ** 2)
    assert_equal(estimate_sigma2([[0.5], [0.5]], [0.1, 0.2]), 0.0)
    with pytest.raises(UsageError):
        estimate_sigma2([[0.0], [1.0]], [0.1])


def test_ei_at_design_points(design):
    inputs, record = design
    model = fit_ei_model(inputs, record.d)
    assert_array_equal(expected_improvement(inputs, inputs, model), np.zeros(inputs.shape[0]))
    assert_equal(expected_improvement(inputs[0], inputs, model), 0.0)


def test_ei_in_best_cell():
    inputs = np.array([[0.0, 0.0], [1.0, 1.0]])
    model = fit_ei_model(inputs, [0.2, 0.5])
    x = np.array([0.9, 0.8])
    s = math.sqrt(model.sigma2 * math.hypot(0.1, 0.2))
    assert_allclose(expected_improvement(x, inputs, model), 0.3989422804014327 * s, rtol=1e-12)


def test_ei_zero_variance():
    model = EiModel(0.0, np.array([0.1, 0.2]), 0.2)
    assert_equal(expected_improvement([0.3, 0.3], [[0, 0], [1, 1]], model), 0.0)


def test_ei_monotone():
    inputs = np.array([[0.0, 0.0], [1.0, 1.0]])
    for h in ([0.5, 0.2], [0.2, 0.3]):
        model = fit_ei_model(inputs, h)
        t = np.linspace(0.01, 0.45, 30)
        ei = expected_improvement(np.column_stack([t, t]), inputs, model)
        assert_(np.all(ei > 0))
        assert_(np.all(np.diff(ei) > 0))


def test_ei_monte_carlo():
    rng = np.random.default_rng(20220601)
    for _ in range(20):
        p = int(rng.integers(1, 4))
        m = int(rng.integers(3, 12))
        inputs = rng.random((m, p))
        x = rng.random(p)
        i = int(assign_to_nearest(x, inputs)[0])
        other = (i + 1) % m
        sigma2 = float(rng.uniform(0.1, 2.0))
        s = math.sqrt(sigma2 * np.sqrt(((x - inputs[i]) ** 2).sum()))
        u = float(rng.uniform(-0.5, 0.0))
        h = 0.5 * rng.random(m)
        h[other] = 1.0
        h[i] = 1.0 + u * s
        model = EiModel(sigma2, h, float(h.max()))
        draws = h[i] + s * rng.standard_normal(1_000_000)
        mc = np.mean(np.maximum(0.0, draws - model.h_max))
        ei = expected_improvement(x, inputs, model)
        assert_allclose(ei, closed_form_ei(s, h[i], model.h_max), rtol=1e-10)
        assert_allclose(ei, mc, rtol=0.01)


def test_select_ei_hand():
    inputs = np.array([[0.0, 0.0], [1.0, 1.0]])
    h = np.array([0.2, 0.5])
    model = fit_ei_model(inputs, h)
    assert_allclose(model.sigma2, 0.09 / math.sqrt(2))
    cand = [[0.1, 0.1], [0.6, 0.6], [0.9, 0.9]]
    expected = [
        closed_form_ei(math.sqrt(model.sigma2 * math.hypot(0.1, 0.1)), 0.2, 0.5),
        closed_form_ei(math.sqrt(model.sigma2 * math.hypot(0.4, 0.4)), 0.5, 0.5),
        closed_form_ei(math.sqrt(model.sigma2 * math.hypot(0.1, 0.1)), 0.5, 0.5),
    ]
    assert_allclose(expected_improvement(cand, inputs, model), expected, rtol=1e-12)
    assert_allclose(select_ei(inputs, model, candidates(cand)), cand[int(np.argmax(expected))])
    assert_allclose(select_ei(inputs, model, candidates(cand)), [0.6, 0.6])


def test_ei_candidates(design):
    inputs, record = design
    m, p = inputs.shape
    cand = ei_candidates(inputs, record.i_star, SeededRng(4))
    assert_(np.all((cand.points >= 0) & (cand.points <= 1)))
    assert_equal(set(cand.sources), {"uniform", "ball", "midpoint"})
    assert_equal(np.sum(cand.sources == "uniform"), 10 * m)
    assert_(not np.any(np.all(cand.points[:, None, :] == inputs[None], axis=2)))


def test_ei_perturbation(design):
    inputs, record = design
    x = ei_perturbation(inputs, record, SeededRng(5))
    assert_(np.all((x >= 0) & (x <= 1)))
    assert_(not np.any(np.all(inputs == x, axis=1)))
    model = fit_ei_model(inputs, record.d)
    cand = ei_candidates(inputs, record.i_star, SeededRng(5))
    assert_array_equal(x, select_ei(inputs, model, cand))
    ei = expected_improvement(cand.points, inputs, model)
    assert_(expected_improvement(x, inputs, model) >= ei.max())
    assert_array_equal(x, ei_perturbation(inputs, record, SeededRng(5)))


def test_ei_falls_back_to_greedy():
    inputs = np.random.default_rng(0).random((6, 2))
    record = FillRecord.from_distances(np.full(6, 0.25))
    proposal = propose(inputs, record, SeededRng(1), "ei")
    assert_equal(proposal.rule, "greedy-fallback")
    assert_array_equal(proposal.x, greedy_perturbation(inputs, 0, SeededRng(1)))


def test_propose_errors():
    inputs = np.random.default_rng(0).random((4, 2))
    with pytest.raises(UsageError, match="method"):
        propose(inputs, FillRecord.from_distances(np.ones(4)), SeededRng(0), "random")
    with pytest.raises(UsageError, match="does not match"):
        propose(inputs, FillRecord.from_distances(np.ones(3)), SeededRng(0), "ei")
