"""Setting catalog: samplers, supports, normalization, determinism."""

from fractions import Fraction

import numpy as np
import pytest

from seqprice.errors import (
    InputError,
    SizeBudgetError,
    UnsupportedSettingError,
)
from seqprice.mechanism import Objective
from seqprice.settings import (
    enumerate_support,
    get_setting,
    independent_setting,
    normalize,
    sample_profile,
    setting_catalog,
    support_values,
)

CATALOG_SHAPES = {
    "prop1": (2, 1),
    "prop2": (3, 2),
    "prop3_bellwether": (6, 2),
    "prop4": (4, 2),
    "prop8_linear": (4, 3),
    "appD_nonidentical": (3, 2),
    "correlated": (20, 5),
    "colors": (30, 20),
    "two_worlds": (10, 1),
    "inventory": (20, 10),
    "kitchen_sink": (3, 3),
    "id_setting": (6, 2),
    "additive_types": (10, 6),
    "revenue_correlated": (20, 5),
    "maxmin_colors": (9, 10),
}


def test_catalog_names_and_shapes():
    catalog = {s.name: s for s in setting_catalog()}
    for name, (n, m) in CATALOG_SHAPES.items():
        assert name in catalog, name
        assert (catalog[name].n, catalog[name].m) == (n, m), name


def test_get_setting_errors():
    with pytest.raises(InputError):
        get_setting("no_such_setting")
    with pytest.raises(InputError):
        get_setting("prop1", n=5)
    with pytest.raises(InputError):
        get_setting("correlated", delta=2.0)


def test_prop1_sampler_values():
    spec = get_setting("prop1")
    for seed in range(10):
        profile = sample_profile(spec, seed)
        for agent in profile.agents:
            assert set(agent.values) <= {1.0, 3.0}


def test_correlated_delta_one_all_equal():
    spec = get_setting("correlated", n=6, m=2, delta=1.0)
    v = spec.sample_batch(np.random.default_rng(0), 100)
    for e in range(100):
        assert np.allclose(v[e], v[e, 0, 0])
        assert 0.0 <= v[e, 0, 0] <= 1.0


def test_correlated_delta_zero_uncorrelated():
    spec = get_setting("correlated", n=2, m=1, delta=0.0)
    v = spec.sample_batch(np.random.default_rng(1), 100_000)[:, :, 0]
    corr = np.corrcoef(v[:, 0], v[:, 1])[0, 1]
    assert abs(corr) < 0.02
    assert v.min() >= 0.0 and v.max() <= 1.0


def test_correlated_envelope():
    # v_i lies within (1-delta)/2 of a common z, everything inside [0, 1]
    spec = get_setting("correlated", n=8, m=1, delta=0.5)
    v = spec.sample_batch(np.random.default_rng(2), 20_000)[:, :, 0]
    assert v.min() >= 0.0 and v.max() <= 1.0
    spread = v.max(axis=1) - v.min(axis=1)
    assert spread.max() <= (1 - 0.5) + 1e-12


def test_enumerate_support_prop1_prop2():
    prop1 = enumerate_support(get_setting("prop1"))
    assert len(prop1) == 4
    assert all(p == Fraction(1, 4) for _, p in prop1)
    prop2 = enumerate_support(get_setting("prop2"))
    assert len(prop2) == 8
    assert all(p == Fraction(1, 8) for _, p in prop2)


def test_kitchen_sink_support_probabilities():
    values, probs = support_values(get_setting("kitchen_sink"))
    assert sorted(float(p) for p in probs) == [0.1, 0.1, 0.4, 0.4]
    assert values.shape == (4, 3, 3)
    assert sum(probs) == 1


def test_id_setting_support():
    values, probs = support_values(get_setting("id_setting"))
    assert len(probs) == 29
    assert sum(probs) == 1
    # followers are nonzero only when exactly one of agents 0-2 has value 60
    for v, _ in zip(values, probs):
        ones = (v[:3, 0] == 60.0).sum()
        if ones != 1:
            assert (v[3:] == 0).all()


def test_prop3_conditional_structure():
    values, probs = support_values(get_setting("prop3_bellwether"))
    assert sum(probs) == 1
    for v in values:
        v1, v2, v3, v4 = v[0, 0], v[1, 0], v[2, 0], v[3, 0]
        if v1 == 15.0:
            assert v2 in (2.0, 12.0)
            assert v3 in (3.0, 8.0) and v4 in (3.0, 8.0)
        else:
            assert v1 == 1.0
            assert v2 in (3.0, 8.0)
            assert v3 in (2.0, 12.0) and v4 in (2.0, 12.0)
        assert v[4, 0] == v[5, 0] == 4.0


def test_support_errors():
    with pytest.raises(UnsupportedSettingError):
        support_values(get_setting("correlated"))
    with pytest.raises(SizeBudgetError):
        support_values(get_setting("inventory"))


def test_normalize_scales_values_and_vmax():
    spec = normalize(get_setting("prop1"))
    assert spec.vmax == 1.0
    assert spec.normalized
    profile = sample_profile(spec, 0)
    for agent in profile.agents:
        assert set(agent.values) <= {1.0 / 3.0, 1.0}
    values, _ = support_values(spec)
    assert values.max() == 1.0

    colors = normalize(get_setting("colors"))
    v = colors.sample_batch(np.random.default_rng(0), 4)
    assert set(np.unique(v)) <= {0.0, 0.5, 1.0}


def test_sampled_values_within_vmax():
    for name in ("prop4", "colors", "kitchen_sink", "maxmin_colors", "additive_types"):
        spec = get_setting(name)
        v = spec.sample_batch(np.random.default_rng(3), 256)
        assert v.max() <= spec.vmax + 1e-12
        assert v.min() >= 0.0


def test_seed_determinism():
    for name in ("prop4", "correlated", "colors", "maxmin_colors"):
        spec_a = get_setting(name)
        spec_b = get_setting(name)
        va = spec_a.sample_batch(np.random.default_rng(1234), 32)
        vb = spec_b.sample_batch(np.random.default_rng(1234), 32)
        np.testing.assert_array_equal(va, vb)


def frequency_check(spec, draws=100_000, seed=0):
    """Empirical support frequencies within 4 sigma of exact probabilities."""
    values, probs = support_values(spec)
    sampled = spec.sample_batch(np.random.default_rng(seed), draws)
    keys = {v.tobytes(): k for k, v in enumerate(values)}
    counts = np.zeros(len(probs))
    for row in sampled:
        counts[keys[row.tobytes()]] += 1
    for k, p in enumerate(probs):
        p = float(p)
        sigma = np.sqrt(draws * p * (1 - p))
        assert abs(counts[k] - draws * p) <= 4 * sigma + 1e-9, (spec.name, k)


@pytest.mark.parametrize("name", ["prop1", "prop4", "kitchen_sink", "prop8_linear"])
def test_sampler_matches_support(name):
    frequency_check(get_setting(name))


def test_two_worlds_sampler_marginals():
    # full support is 2048 points; check the regime split and in-regime draws
    spec = get_setting("two_worlds")
    v = spec.sample_batch(np.random.default_rng(5), 100_000)[:, :, 0]
    high = v.max(axis=1) > 0.5
    assert abs(high.mean() - 0.5) < 0.01
    assert set(np.unique(v[high])) == {0.6, 1.0}
    assert set(np.unique(v[~high])) == {0.1, 0.4}
    frac_top = (v[high] == 1.0).mean()
    assert abs(frac_top - 0.5) < 0.01


def test_colors_sampler_blue_marginal_is_fair_coin():
    spec = get_setting("colors")
    v = spec.sample_batch(np.random.default_rng(6), 20_000)
    prefers_red = v[:, 20:, 0] == 2.0
    assert abs(prefers_red.mean() - 0.5) < 0.02
    # red and yellow agents are constant
    assert (v[:, :10, :10] == 1.0).all() and (v[:, :10, 10:] == 0.0).all()
    assert (v[:, 10:20, 10:] == 1.0).all() and (v[:, 10:20, :10] == 0.0).all()


def test_additive_sampler_shape_is_per_type():
    spec = get_setting("additive_types")
    v = spec.sample_batch(np.random.default_rng(7), 10)
    assert v.shape == (10, 10, 2)  # (episodes, agents, types)
    assert spec.item_types == (0, 0, 1, 1, 1, 1)


def test_independent_setting_builder():
    dists = (
        (((1.0, 0.0), Fraction(1, 2)), ((0.0, 2.0), Fraction(1, 2))),
        (((1.5, 1.5), Fraction(1),),),
    )
    spec = independent_setting("custom", dists)
    assert (spec.n, spec.m) == (2, 2)
    assert spec.vmax == 2.0
    assert spec.support_size == 2
    assert spec.objective_default is Objective.WELFARE
    values, probs = support_values(spec)
    assert sum(probs) == 1 and len(probs) == 2
    v = spec.sample_batch(np.random.default_rng(0), 50)
    assert ((v[:, 1, :] == 1.5).all())

    with pytest.raises(InputError):
        independent_setting("bad", ((((1.0,), Fraction(1, 2)),),))
    with pytest.raises(InputError):
        independent_setting(
            "bad", ((((1.0,), Fraction(1, 2)), ((1.0, 2.0), Fraction(1, 2))),)
        )
