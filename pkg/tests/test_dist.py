import math

import pytest

from certsample import Distribution, RngStream, f_map, hellinger, mix, point_mass, total_variation, uniform
from certsample.dist import (
    bhattacharyya,
    empirical,
    mixture_bound_holds,
    random_distribution,
)


def test_distribution_validation():
    with pytest.raises(ValueError):
        Distribution(2, {"00": 0.5, "11": 0.6})
    with pytest.raises(ValueError):
        Distribution(2, {"0": 1.0})
    with pytest.raises(ValueError):
        Distribution(1, {"0": 1.2, "1": -0.2})


def test_json_round_trip():
    d = Distribution(3, {"010": 0.25, "111": 0.75})
    back = Distribution.from_json(d.to_json())
    assert back.n == 3 and back.mass == d.mass


def test_hellinger_identical_and_disjoint():
    d = random_distribution(2, RngStream(1).substream("d").gen)
    assert hellinger(d, d) == 0
    assert hellinger(point_mass("00"), point_mass("11")) == 1
    assert total_variation(d, d) == 0
    assert total_variation(point_mass("00"), point_mass("11")) == 1


def test_hellinger_uniform_vs_point():
    # direct evaluation of sum sqrt(P Q): sqrt(1/2), so d_H = sqrt(1 - 1/sqrt(2))
    expected = math.sqrt(1 - 1 / math.sqrt(2))
    assert abs(hellinger(uniform(1), point_mass("0")) - expected) < 1e-12
    assert abs(total_variation(uniform(1), point_mass("0")) - 0.5) < 1e-12


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        hellinger(uniform(1), uniform(2))
    with pytest.raises(ValueError):
        total_variation(uniform(1), uniform(2))


def test_metric_axioms_random_triples():
    rng = RngStream(7)
    for i in range(200):
        gen = rng.substream(i).gen
        n = int(gen.integers(1, 4))
        p, q, r = (random_distribution(n, gen) for _ in range(3))
        for metric in (hellinger, total_variation):
            assert abs(metric(p, q) - metric(q, p)) <= 1e-10
            assert metric(p, q) <= metric(p, r) + metric(r, q) + 1e-10


def test_sandwich_and_identity():
    rng = RngStream(13)
    for i in range(1000):
        gen = rng.substream(i).gen
        n = int(gen.integers(1, 4))
        p = random_distribution(n, gen)
        q = random_distribution(n, gen)
        dh = hellinger(p, q)
        tv = total_variation(p, q)
        assert dh * dh <= tv + 1e-10
        assert tv <= math.sqrt(2) * dh + 1e-10
        assert abs(1 - dh * dh - bhattacharyya(p, q)) <= 1e-10


def test_f_map_endpoints_and_inverse():
    assert f_map(0.0) == 1.0
    assert f_map(1.0) == 0.5
    expected = math.sqrt(1 - 1 / math.sqrt(2))
    assert abs(f_map(0.75, "inverse") - expected) < 1e-12
    gen = RngStream(3).substream("f").gen
    for _ in range(100):
        y = 0.5 + 0.5 * gen.random()
        assert abs(f_map(f_map(y, "inverse")) - y) < 1e-12
    for _ in range(100):
        x = gen.random()
        assert f_map(x) <= 1 - x * x / 2 + 1e-12


def test_f_map_strictly_decreasing():
    xs = [i / 50 for i in range(51)]
    vals = [f_map(x) for x in xs]
    assert all(vals[i] > vals[i + 1] for i in range(len(vals) - 1))


def test_f_map_domain_errors():
    with pytest.raises(ValueError):
        f_map(0.4, "inverse")
    with pytest.raises(ValueError):
        f_map(1.5)
    with pytest.raises(ValueError):
        f_map(0.5, "sideways")


def test_mix_basics():
    d = random_distribution(2, RngStream(4).substream("m").gen)
    same = mix([(1.0, d)])
    assert all(abs(same.prob(k) - d.prob(k)) < 1e-12 for k in d.mass)
    u = mix([(0.5, point_mass("0")), (0.5, point_mass("1"))])
    assert abs(u.prob("0") - 0.5) < 1e-12


def test_mix_weight_validation():
    d = uniform(1)
    with pytest.raises(ValueError):
        mix([(0.6, d), (0.6, d)])
    with pytest.raises(ValueError):
        mix([(1.0, uniform(1)), (0.0, uniform(2))])


def test_mixture_convexity_of_tv():
    rng = RngStream(21)
    for i in range(100):
        gen = rng.substream(i).gen
        n = int(gen.integers(1, 3))
        k = int(gen.integers(1, 5))
        ref = random_distribution(n, gen)
        comps = [random_distribution(n, gen) for _ in range(k)]
        weights = gen.dirichlet([1.0] * k)
        mixed = mix(list(zip(weights, comps)))
        bound = sum(w * total_variation(d, ref) for w, d in zip(weights, comps))
        assert total_variation(mixed, ref) <= bound + 1e-10


def test_mixture_bound_small_scan():
    # smoke-scale version of the acceptance scan
    rng = RngStream(99)
    gen = rng.substream("scan").gen
    checked = 0
    for _ in range(3000):
        n = int(gen.integers(1, 3))
        k = int(gen.integers(1, 4))
        ref = random_distribution(n, gen)
        comps = [random_distribution(n, gen) for _ in range(k)]
        weights = gen.dirichlet([1.0] * k)
        sim = sum(w * f_map(hellinger(ref, d)) for w, d in zip(weights, comps))
        slack = max(1.0 - sim, 0.0)
        eta = math.sqrt(slack / 50.0) / max(gen.random(), 0.05) if slack > 0 else 0.01
        hypothesis, dist, bound = mixture_bound_holds(weights, comps, ref, eta)
        if hypothesis:
            checked += 1
            assert dist <= bound
    assert checked > 1000


def test_empirical():
    d = empirical(["01", "01", "11", "01"], 2)
    assert abs(d.prob("01") - 0.75) < 1e-12
    with pytest.raises(ValueError):
        empirical([], 2)


def test_sampling_matches_mass():
    d = Distribution(1, {"0": 0.3, "1": 0.7})
    gen = RngStream(8).substream("sample").gen
    draws = d.sample(gen, 20000)
    freq = sum(1 for x in draws if x == "1") / len(draws)
    assert abs(freq - 0.7) < 4 * math.sqrt(0.21 / 20000)
