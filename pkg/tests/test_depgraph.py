"""Dependence screening: p-values, DOT output, stream layout, fixture lock."""
from pathlib import Path

import numpy as np
import pytest

from recycling_gibbs.core import RngStream
from recycling_gibbs.depgraph import (PairResult, SurrogateNull, emit_graph, fit_pair,
                                      p_value, screen_all_pairs, screen_pair,
                                      standardize, synthetic_dependence_data)

FIXTURE = Path(__file__).parent / "data" / "dependence_fixture.csv"


def _pair(a, b, p):
    return PairResult(in_name=a, out_name=b, samples=np.zeros(1),
                      statistics={"mean": 0.0, "median": 0.0, "std": 0.0},
                      p_values={"mean": p, "median": p, "std": p})


def test_p_value_plus_one_arithmetic():
    null = np.arange(1.0, 100.0)  # 99 values: 1..99
    assert p_value(0.5, null) == pytest.approx(0.01)
    assert p_value(50.0, null) == pytest.approx(0.51)
    assert p_value(1000.0, null) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        p_value(0.5, np.array([]))
    with pytest.raises(ValueError):
        p_value(0.5, np.zeros((2, 2)))


def test_p_value_monotone_in_observed():
    rng = np.random.default_rng(0)
    null = rng.standard_normal(99)
    grid = np.linspace(-3, 3, 40)
    ps = [p_value(v, null) for v in grid]
    assert all(a <= b for a, b in zip(ps, ps[1:]))


def test_standardize():
    v = np.array([1.0, 2.0, 3.0, 10.0])
    out = standardize(v)
    assert out.mean() == pytest.approx(0.0, abs=1e-15)
    assert out.std() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        standardize(np.ones(5))
    with pytest.raises(ValueError):
        standardize(np.array([1.0, np.nan, 2.0]))
    with pytest.raises(ValueError):
        standardize(np.ones((2, 2)))
    with pytest.raises(ValueError):
        standardize(np.array([1.0]))


def test_surrogate_null_shape_validation():
    SurrogateNull(n_surrogates=3, values={"mean": np.zeros(3)})
    with pytest.raises(ValueError):
        SurrogateNull(n_surrogates=3, values={"mean": np.zeros(4)})
    with pytest.raises(ValueError):
        SurrogateNull(n_surrogates=0, values={})


def test_permutation_streams_are_bijections_and_reproducible():
    stream = RngStream(5, 12)
    perm_a = stream.derive(7).permutation(50)
    perm_b = RngStream(5, 12).derive(7).permutation(50)
    np.testing.assert_array_equal(perm_a, perm_b)
    np.testing.assert_array_equal(np.sort(perm_a), np.arange(50))


def test_emit_graph_text():
    results = [_pair("a", "b", 0.02), _pair("b", "a", 0.04),
               _pair("a", "c", 0.50), _pair("c", "a", 0.01),
               _pair("b", "c", 0.90), _pair("c", "b", 0.95)]
    dot = emit_graph(results, alpha=0.1)
    expected = (
        "graph dependence {\n"
        '  "a";\n'
        '  "b";\n'
        '  "c";\n'
        '  "a" -- "b" [style=solid, weight=0.960000];\n'
        '  "a" -- "c" [style=dashed, weight=0.500000];\n'
        '  "b" -- "c" [style=dashed, weight=0.050000];\n'
        "}\n"
    )
    assert dot == expected
    assert emit_graph(results, alpha=0.1) == dot


def test_emit_graph_validation():
    results = [_pair("a", "b", 0.02)]
    with pytest.raises(ValueError):
        emit_graph(results)  # missing the b -> a direction
    with pytest.raises(ValueError):
        emit_graph([], alpha=0.0)
    with pytest.raises(ValueError):
        emit_graph([], statistic="mode")
    no_p = PairResult(in_name="a", out_name="b", samples=np.zeros(1),
                      statistics={"mean": 0.0, "median": 0.0, "std": 0.0})
    with pytest.raises(ValueError):
        emit_graph([no_p, _pair("b", "a", 0.5)])


def test_fit_pair_shapes_and_determinism():
    rng = np.random.default_rng(10)
    x_in = rng.standard_normal(20)
    x_out = np.sin(2.0 * x_in)
    a = fit_pair(x_in, x_out, RngStream(3, 0), sweeps=30, inner_samples=4)
    b = fit_pair(x_in, x_out, RngStream(3, 0), sweeps=30, inner_samples=4)
    assert a.samples.shape == (30 * 2 * 4,)
    assert set(a.statistics) == {"mean", "median", "std"}
    assert np.all(a.samples > 0)
    np.testing.assert_array_equal(a.samples, b.samples)


def test_fit_pair_validation():
    with pytest.raises(ValueError):
        fit_pair(np.zeros(5), np.zeros(6), RngStream(1, 0))
    with pytest.raises(ValueError):
        fit_pair(np.arange(5.0), np.arange(5.0), RngStream(1, 0))


def test_screen_pair_populates_p_values():
    rng = np.random.default_rng(4)
    x_in = rng.standard_normal(15)
    x_out = rng.standard_normal(15)
    res = screen_pair(x_in, x_out, RngStream(2, 0), n_surrogates=3,
                      sweeps=15, inner_samples=2)
    assert set(res.p_values) == {"mean", "median", "std"}
    for p in res.p_values.values():
        assert 0.25 <= p <= 1.0  # plus-one floor with 3 surrogates is 1/4


def test_screen_all_pairs_layout_and_validation():
    rng = np.random.default_rng(6)
    data = rng.standard_normal((12, 3))
    results = screen_all_pairs(data, ["u", "v", "w"], seed=9, n_surrogates=2,
                               sweeps=10, inner_samples=2)
    assert [(r.in_name, r.out_name) for r in results] == [
        ("u", "v"), ("u", "w"), ("v", "u"), ("v", "w"), ("w", "u"), ("w", "v")]
    dot = emit_graph(results, alpha=0.5)
    assert dot.count(" -- ") == 3
    with pytest.raises(ValueError):
        screen_all_pairs(data.ravel(), ["u"], seed=1)
    with pytest.raises(ValueError):
        screen_all_pairs(data, ["u", "v"], seed=1)
    with pytest.raises(ValueError):
        screen_all_pairs(data, ["u", "u", "w"], seed=1)


def test_screen_all_pairs_matches_isolated_screen():
    """Pair k is reproducible alone via its documented base stream."""
    rng = np.random.default_rng(13)
    data = rng.standard_normal((12, 2))
    batch = screen_all_pairs(data, ["p", "q"], seed=21, n_surrogates=2,
                             sweeps=10, inner_samples=2)
    solo = screen_pair(data[:, 1], data[:, 0], RngStream(21, 1 * (2 + 1)),
                       n_surrogates=2, sweeps=10, inner_samples=2,
                       in_name="q", out_name="p")
    np.testing.assert_array_equal(batch[1].samples, solo.samples)
    assert batch[1].p_values == solo.p_values


def test_synthetic_fixture_is_locked():
    names, data = synthetic_dependence_data(100, seed=73)
    assert names == ("x1", "x2", "x3", "x4")
    lines = FIXTURE.read_text().splitlines()
    assert lines[0] == "x1,x2,x3,x4"
    stored = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    np.testing.assert_array_equal(stored, data)
    np.testing.assert_allclose(data[:, 1], np.sin(2.5 * data[:, 0]))
    with pytest.raises(ValueError):
        synthetic_dependence_data(5)
