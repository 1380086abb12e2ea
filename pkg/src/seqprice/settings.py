"""Named value-distribution settings: samplers, finite supports, normalization.

Every setting produces item-level value matrices of shape ``(n, m)`` for
unit-demand agents, or type-level matrices ``(n, T)`` for the additive
setting.  Finite-support settings additionally enumerate their complete
support with exact `Fraction` probabilities, which is what the exact solvers
consume.  Continuous settings only sample.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import product
from typing import Callable, Optional

import numpy as np

from seqprice.errors import (
    DegenerateSettingError,
    InputError,
    SizeBudgetError,
    UnsupportedSettingError,
)
from seqprice.mechanism import Objective
from seqprice.valuation import AdditiveAcrossTypes, UnitDemand, ValuationProfile

SUPPORT_BUDGET = 300_000

# per agent: ((value vector over items, probability), ...), independent across agents
IndependentDists = tuple[tuple[tuple[tuple[float, ...], Fraction], ...], ...]
# mixture of regimes; within a regime agents draw iid from a scalar distribution
Regimes = tuple[tuple[Fraction, tuple[tuple[float, Fraction], ...]], ...]


@dataclass(eq=False)
class SettingSpec:
    """A named value distribution over ``n`` agents and ``m`` items."""

    name: str
    n: int
    m: int
    objective_default: Objective
    vmax: float
    identical_items: bool
    valuation_kind: str = "unit_demand"  # or "additive"
    item_types: Optional[tuple[int, ...]] = None  # additive only, length m
    params: dict = field(default_factory=dict)
    normalized: bool = False
    support_size: Optional[int] = None
    independent_dists: Optional[IndependentDists] = None
    regimes: Optional[Regimes] = None
    _batch_sampler: Callable[[np.random.Generator, int], np.ndarray] = None
    _support_builder: Optional[Callable[[], list[tuple[np.ndarray, Fraction]]]] = None

    @property
    def n_types(self) -> int:
        return 0 if self.item_types is None else len(set(self.item_types))

    def sample_batch(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Value matrices for ``count`` independent profiles.

        Shape ``(count, n, m)`` for unit-demand, ``(count, n, T)`` (per-type
        values) for the additive setting.
        """
        return self._batch_sampler(rng, count)


def profile_from_values(spec: SettingSpec, values: np.ndarray) -> ValuationProfile:
    """Wrap one sampled value matrix into a ValuationProfile."""
    if spec.valuation_kind == "additive":
        agents = tuple(
            AdditiveAcrossTypes(spec.item_types, tuple(row)) for row in values
        )
    else:
        agents = tuple(UnitDemand(tuple(row)) for row in values)
    return ValuationProfile(spec.m, agents)


def sample_profile(spec: SettingSpec, seed: int) -> ValuationProfile:
    """One profile drawn deterministically from ``seed``."""
    rng = np.random.default_rng(seed)
    return profile_from_values(spec, spec.sample_batch(rng, 1)[0])


def support_values(spec: SettingSpec) -> tuple[np.ndarray, list[Fraction]]:
    """Complete finite support as a stacked value array plus probabilities."""
    if spec.support_size is not None and spec.support_size > SUPPORT_BUDGET:
        raise SizeBudgetError(
            f"setting {spec.name!r} has {spec.support_size} support points, "
            f"budget is {SUPPORT_BUDGET}"
        )
    if spec._support_builder is None:
        raise UnsupportedSettingError(
            f"setting {spec.name!r} has continuous support; no exact enumeration"
        )
    pairs = spec._support_builder()
    values = np.stack([v for v, _ in pairs])
    probs = [p for _, p in pairs]
    total = sum(probs)
    if total != 1:
        raise InputError(f"support probabilities of {spec.name!r} sum to {total}")
    return values, probs


def enumerate_support(spec: SettingSpec) -> list[tuple[ValuationProfile, Fraction]]:
    """All (profile, probability) pairs of a finite-support setting."""
    values, probs = support_values(spec)
    return [(profile_from_values(spec, v), p) for v, p in zip(values, probs)]


def normalize(spec: SettingSpec) -> SettingSpec:
    """Scale every value by 1/vmax so the highest possible value is 1."""
    if spec.vmax <= 0:
        raise DegenerateSettingError(f"setting {spec.name!r} has vmax {spec.vmax}")
    c = 1.0 / spec.vmax
    base_sampler = spec._batch_sampler
    base_support = spec._support_builder

    def sampler(rng: np.random.Generator, count: int) -> np.ndarray:
        return base_sampler(rng, count) * c

    builder = None
    if base_support is not None:
        def builder() -> list[tuple[np.ndarray, Fraction]]:
            return [(v * c, p) for v, p in base_support()]

    dists = None
    if spec.independent_dists is not None:
        dists = tuple(
            tuple((tuple(x * c for x in vec), p) for vec, p in agent)
            for agent in spec.independent_dists
        )
    regimes = None
    if spec.regimes is not None:
        regimes = tuple(
            (w, tuple((v * c, p) for v, p in dist)) for w, dist in spec.regimes
        )
    return replace(
        spec,
        vmax=1.0,
        normalized=True,
        independent_dists=dists,
        regimes=regimes,
        _batch_sampler=sampler,
        _support_builder=builder,
    )


def _product_support(
    per_agent: list[list[tuple[np.ndarray, Fraction]]]
) -> list[tuple[np.ndarray, Fraction]]:
    out = []
    for combo in product(*per_agent):
        mat = np.stack([vec for vec, _ in combo])
        p = Fraction(1)
        for _, q in combo:
            p *= q
        out.append((mat, p))
    return out


def _independent_dists_support(dists: IndependentDists) -> list[tuple[np.ndarray, Fraction]]:
    per_agent = [
        [(np.array(vec, dtype=float), p) for vec, p in agent] for agent in dists
    ]
    return _product_support(per_agent)


def _two_point_scalar(rng: np.random.Generator, lo: float, hi: float, shape) -> np.ndarray:
    return np.where(rng.random(shape) < 0.5, lo, hi)


# ---------------------------------------------------------------- proposition settings


def _make_prop1() -> SettingSpec:
    # One item, two iid agents with values uniform on {1, 3}.
    dists = tuple(
        (((1.0,), Fraction(1, 2)), ((3.0,), Fraction(1, 2))) for _ in range(2)
    )

    def sampler(rng, count):
        return _two_point_scalar(rng, 1.0, 3.0, (count, 2))[:, :, None]

    return SettingSpec(
        name="prop1", n=2, m=1, objective_default=Objective.WELFARE, vmax=3.0,
        identical_items=True, support_size=4, independent_dists=dists,
        regimes=((Fraction(1), ((1.0, Fraction(1, 2)), (3.0, Fraction(1, 2)))),),
        _batch_sampler=sampler,
        _support_builder=lambda: _independent_dists_support(dists),
    )


def _make_prop2() -> SettingSpec:
    # Two identical items, three iid agents with values uniform on {1, 3}.
    dists = tuple(
        (((1.0, 1.0), Fraction(1, 2)), ((3.0, 3.0), Fraction(1, 2))) for _ in range(3)
    )

    def sampler(rng, count):
        v = _two_point_scalar(rng, 1.0, 3.0, (count, 3))
        return np.repeat(v[:, :, None], 2, axis=2)

    return SettingSpec(
        name="prop2", n=3, m=2, objective_default=Objective.WELFARE, vmax=3.0,
        identical_items=True, support_size=8, independent_dists=dists,
        regimes=((Fraction(1), ((1.0, Fraction(1, 2)), (3.0, Fraction(1, 2)))),),
        _batch_sampler=sampler,
        _support_builder=lambda: _independent_dists_support(dists),
    )


def _make_prop3() -> SettingSpec:
    # Bellwether agent 1 on {1,15}; agent 2 follows {2,12} iff v1 is high,
    # agents 3-4 follow {2,12} iff v1 is low, else {3,8}; agents 5-6 constant 4.

    def sampler(rng, count):
        v1 = _two_point_scalar(rng, 1.0, 15.0, (count,))
        hi = v1 == 15.0
        a = _two_point_scalar(rng, 2.0, 12.0, (count, 3))
        b = _two_point_scalar(rng, 3.0, 8.0, (count, 3))
        v2 = np.where(hi, a[:, 0], b[:, 0])
        v3 = np.where(hi, b[:, 1], a[:, 1])
        v4 = np.where(hi, b[:, 2], a[:, 2])
        const = np.full((count,), 4.0)
        v = np.stack([v1, v2, v3, v4, const, const], axis=1)
        return np.repeat(v[:, :, None], 2, axis=2)

    def builder():
        out = []
        for v1 in (1.0, 15.0):
            follow = (2.0, 12.0) if v1 == 15.0 else (3.0, 8.0)
            other = (3.0, 8.0) if v1 == 15.0 else (2.0, 12.0)
            for v2 in follow:
                for v3 in other:
                    for v4 in other:
                        vals = np.array([v1, v2, v3, v4, 4.0, 4.0])
                        mat = np.repeat(vals[:, None], 2, axis=1)
                        out.append((mat, Fraction(1, 16)))
        return out

    return SettingSpec(
        name="prop3_bellwether", n=6, m=2, objective_default=Objective.WELFARE,
        vmax=15.0, identical_items=True, support_size=16,
        _batch_sampler=sampler, _support_builder=builder,
    )


def _make_prop4() -> SettingSpec:
    # Two identical items; independent values on {1,15}, {3,12}, {2,8}, {2,8}.
    pairs = [(1.0, 15.0), (3.0, 12.0), (2.0, 8.0), (2.0, 8.0)]
    dists = tuple(
        (((lo, lo), Fraction(1, 2)), ((hi, hi), Fraction(1, 2))) for lo, hi in pairs
    )

    def sampler(rng, count):
        cols = [_two_point_scalar(rng, lo, hi, (count,)) for lo, hi in pairs]
        v = np.stack(cols, axis=1)
        return np.repeat(v[:, :, None], 2, axis=2)

    return SettingSpec(
        name="prop4", n=4, m=2, objective_default=Objective.WELFARE, vmax=15.0,
        identical_items=True, support_size=16, independent_dists=dists,
        _batch_sampler=sampler,
        _support_builder=lambda: _independent_dists_support(dists),
    )


_PROP8_AB = np.array(
    [
        [[10.0, 10.0], [10.0, 10.0]],
        [[0.0, 0.0], [0.0, 0.0]],
        [[10.0, 0.0], [0.0, 0.0]],
        [[0.0, 10.0], [0.0, 0.0]],
        [[0.0, 0.0], [10.0, 0.0]],
        [[0.0, 0.0], [0.0, 10.0]],
    ]
)  # option -> values of agents (A, B) on items (0, 1)


def _make_prop8() -> SettingSpec:
    # Agents: Alice, Bob (items 0-1), Carl, Dan (item 2).  Whether Carl or Dan
    # is the risky {10 w.p. 1/10, else 0} agent depends on the best welfare
    # attainable from Alice and Bob (20 or 0 -> Carl risky; 10 -> Dan risky).

    def sampler(rng, count):
        opt = rng.integers(0, 6, size=count)
        risky = np.where(rng.random(count) < 0.1, 10.0, 0.0)
        v = np.zeros((count, 4, 3))
        v[:, :2, :2] = _PROP8_AB[opt]
        first_branch = opt < 2
        v[:, 2, 2] = np.where(first_branch, risky, 5.0)
        v[:, 3, 2] = np.where(first_branch, 5.0, risky)
        return v

    def builder():
        out = []
        for opt in range(6):
            for risky, p in ((10.0, Fraction(1, 10)), (0.0, Fraction(9, 10))):
                v = np.zeros((4, 3))
                v[:2, :2] = _PROP8_AB[opt]
                if opt < 2:
                    v[2, 2], v[3, 2] = risky, 5.0
                else:
                    v[2, 2], v[3, 2] = 5.0, risky
                out.append((v, Fraction(1, 6) * p))
        return out

    return SettingSpec(
        name="prop8_linear", n=4, m=3, objective_default=Objective.WELFARE,
        vmax=10.0, identical_items=False, support_size=12,
        _batch_sampler=sampler, _support_builder=builder,
    )


def _make_appd() -> SettingSpec:
    # Non-identical items (red=0, yellow=1); blue agent flips 15/1 across them,
    # red and yellow agents draw {12,3} on their own color and {8,2} on the other.
    blue = (((15.0, 1.0), Fraction(1, 2)), ((1.0, 15.0), Fraction(1, 2)))
    red = tuple(
        ((a, b), Fraction(1, 4)) for a in (12.0, 3.0) for b in (8.0, 2.0)
    )
    yellow = tuple(
        ((b, a), Fraction(1, 4)) for a in (12.0, 3.0) for b in (8.0, 2.0)
    )
    dists = (blue, red, yellow)

    def sampler(rng, count):
        v = np.zeros((count, 3, 2))
        flip = rng.random(count) < 0.5
        v[:, 0, 0] = np.where(flip, 1.0, 15.0)
        v[:, 0, 1] = np.where(flip, 15.0, 1.0)
        v[:, 1, 0] = _two_point_scalar(rng, 3.0, 12.0, (count,))
        v[:, 1, 1] = _two_point_scalar(rng, 2.0, 8.0, (count,))
        v[:, 2, 1] = _two_point_scalar(rng, 3.0, 12.0, (count,))
        v[:, 2, 0] = _two_point_scalar(rng, 2.0, 8.0, (count,))
        return v

    return SettingSpec(
        name="appD_nonidentical", n=3, m=2, objective_default=Objective.WELFARE,
        vmax=15.0, identical_items=False, support_size=32, independent_dists=dists,
        _batch_sampler=sampler,
        _support_builder=lambda: _independent_dists_support(dists),
    )


# ---------------------------------------------------------------- experiment settings


def _correlated_sampler(n: int, m: int, delta: float):
    half = (1.0 - delta) / 2.0

    def sampler(rng, count):
        z = rng.uniform(0.5 - half, 0.5 + half, size=(count, 1))
        v = rng.uniform(z - half, z + half, size=(count, n))
        return np.repeat(v[:, :, None], m, axis=2)

    return sampler


def _make_correlated(n: int = 20, m: int = 5, delta: float = 0.5) -> SettingSpec:
    if not 0.0 <= delta <= 1.0:
        raise InputError(f"delta must be in [0, 1], got {delta}")
    return SettingSpec(
        name="correlated", n=n, m=m, objective_default=Objective.WELFARE, vmax=1.0,
        identical_items=True, params={"n": n, "m": m, "delta": delta},
        _batch_sampler=_correlated_sampler(n, m, delta),
    )


def _make_revenue_correlated(n: int = 20, m: int = 5, delta: float = 0.5) -> SettingSpec:
    spec = _make_correlated(n, m, delta)
    spec.name = "revenue_correlated"
    spec.objective_default = Objective.REVENUE
    return spec


_COLORS_RED_ROW = np.array([1.0] * 10 + [0.0] * 10)
_COLORS_YELLOW_ROW = np.array([0.0] * 10 + [1.0] * 10)
_COLORS_BLUE_RED = np.array([2.0] * 10 + [0.0] * 10)
_COLORS_BLUE_YELLOW = np.array([0.0] * 10 + [2.0] * 10)


def _make_colors() -> SettingSpec:
    # Agents 0-9 red, 10-19 yellow, 20-29 blue; items 0-9 red, 10-19 yellow.
    # Blue preference: draw x ~ U[0,1], then red-preferring w.p. x, which
    # integrates out to an exact fair coin per blue agent.
    red = ((tuple(_COLORS_RED_ROW), Fraction(1)),)
    yellow = ((tuple(_COLORS_YELLOW_ROW), Fraction(1)),)
    blue = (
        (tuple(_COLORS_BLUE_RED), Fraction(1, 2)),
        (tuple(_COLORS_BLUE_YELLOW), Fraction(1, 2)),
    )
    dists = (red,) * 10 + (yellow,) * 10 + (blue,) * 10

    def sampler(rng, count):
        v = np.empty((count, 30, 20))
        v[:, :10, :] = _COLORS_RED_ROW
        v[:, 10:20, :] = _COLORS_YELLOW_ROW
        x = rng.uniform(size=(count, 10))
        prefers_red = rng.uniform(size=(count, 10)) < x
        v[:, 20:, :] = np.where(
            prefers_red[:, :, None], _COLORS_BLUE_RED, _COLORS_BLUE_YELLOW
        )
        return v

    def builder():
        out = []
        base = np.empty((30, 20))
        base[:10] = _COLORS_RED_ROW
        base[10:20] = _COLORS_YELLOW_ROW
        for bits in product((True, False), repeat=10):
            v = base.copy()
            for i, red_pref in enumerate(bits):
                v[20 + i] = _COLORS_BLUE_RED if red_pref else _COLORS_BLUE_YELLOW
            out.append((v, Fraction(1, 1024)))
        return out

    return SettingSpec(
        name="colors", n=30, m=20, objective_default=Objective.WELFARE, vmax=2.0,
        identical_items=False, support_size=1024, independent_dists=dists,
        _batch_sampler=sampler, _support_builder=builder,
    )


def _make_two_worlds() -> SettingSpec:
    # One item; regime high {0.6, 1} or low {0.1, 0.4} with equal probability,
    # ten agents drawing iid within the realized regime.
    regimes = (
        (Fraction(1, 2), ((0.6, Fraction(1, 2)), (1.0, Fraction(1, 2)))),
        (Fraction(1, 2), ((0.1, Fraction(1, 2)), (0.4, Fraction(1, 2)))),
    )

    def sampler(rng, count):
        high = rng.random(count) < 0.5
        v_high = _two_point_scalar(rng, 0.6, 1.0, (count, 10))
        v_low = _two_point_scalar(rng, 0.1, 0.4, (count, 10))
        v = np.where(high[:, None], v_high, v_low)
        return v[:, :, None]

    def builder():
        out = []
        for w, dist in regimes:
            vals = [v for v, _ in dist]
            for combo in product(vals, repeat=10):
                mat = np.array(combo)[:, None]
                out.append((mat, w * Fraction(1, 2 ** 10)))
        return out

    return SettingSpec(
        name="two_worlds", n=10, m=1, objective_default=Objective.WELFARE, vmax=1.0,
        identical_items=True, support_size=2048, regimes=regimes,
        _batch_sampler=sampler, _support_builder=builder,
    )


def _make_inventory() -> SettingSpec:
    # Twenty iid agents on {1/2, 1}, ten identical items.  The support is
    # finite (2^20 points) but over the enumeration budget; the iid regime
    # structure is what the exact solvers use.
    regimes = ((Fraction(1), ((0.5, Fraction(1, 2)), (1.0, Fraction(1, 2)))),)
    dists = tuple(
        (((0.5,) * 10, Fraction(1, 2)), ((1.0,) * 10, Fraction(1, 2)))
        for _ in range(20)
    )

    def sampler(rng, count):
        v = _two_point_scalar(rng, 0.5, 1.0, (count, 20))
        return np.repeat(v[:, :, None], 10, axis=2)

    return SettingSpec(
        name="inventory", n=20, m=10, objective_default=Objective.WELFARE, vmax=1.0,
        identical_items=True, support_size=2 ** 20, independent_dists=dists,
        regimes=regimes, _batch_sampler=sampler, _support_builder=None,
    )


_KITCHEN_SUPPORT = [
    (np.array([[0.01, 0, 0], [0, 0, 1.0], [0, 0, 5.0]]), Fraction(1, 10)),
    (np.array([[0.01, 0, 0], [0, 0, 1.0], [0, 0, 0.5]]), Fraction(4, 10)),
    (np.array([[0, 0.01, 0], [0, 0, 2.0], [0, 0, 0.499]]), Fraction(1, 10)),
    (np.array([[0, 0.01, 0], [0, 0, 0.0], [0, 0, 0.499]]), Fraction(4, 10)),
]


def _make_kitchen_sink() -> SettingSpec:
    # Items 0=A, 1=B, 2=C.  First branch: agent 1 wants A, agents 2-3 compete
    # for C at {1} vs {5 or 0.5}.  Second branch: agent 1 wants B, the roles
    # of agents 2-3 on C flip to {2 or 0} vs {0.499}.

    def sampler(rng, count):
        branch1 = rng.random(count) < 0.5
        high = rng.random(count) < 0.2
        idx = np.where(branch1, np.where(high, 0, 1), np.where(high, 2, 3))
        stack = np.stack([v for v, _ in _KITCHEN_SUPPORT])
        return stack[idx]

    return SettingSpec(
        name="kitchen_sink", n=3, m=3, objective_default=Objective.WELFARE,
        vmax=5.0, identical_items=False, support_size=4,
        _batch_sampler=sampler,
        _support_builder=lambda: [(v.copy(), p) for v, p in _KITCHEN_SUPPORT],
    )


def _make_id_setting() -> SettingSpec:
    # Agents 0-2 iid on {0, 60}; if exactly one of them is 60, one of agents
    # 3-5 (matched by index) draws {40, 0} and the other two draw {21, 0};
    # otherwise agents 3-5 are all 0.  Two identical items.

    def sampler(rng, count):
        v012 = _two_point_scalar(rng, 0.0, 60.0, (count, 3))
        r40 = _two_point_scalar(rng, 0.0, 40.0, (count,))
        r21 = _two_point_scalar(rng, 0.0, 21.0, (count, 2))
        sixty = v012 == 60.0
        only = sixty & (sixty.sum(axis=1, keepdims=True) == 1)
        rest = np.zeros((count, 3))
        for i in range(3):
            others = [k for k in range(3) if k != i]
            rest[only[:, i], i] = r40[only[:, i]]
            rest[only[:, i], others[0]] = r21[only[:, i], 0]
            rest[only[:, i], others[1]] = r21[only[:, i], 1]
        v = np.concatenate([v012, rest], axis=1)
        return np.repeat(v[:, :, None], 2, axis=2)

    def builder():
        out = []
        for combo in product((0.0, 60.0), repeat=3):
            sixty = [i for i, v in enumerate(combo) if v == 60.0]
            if len(sixty) == 1:
                i = sixty[0]
                others = [k for k in range(3) if k != i]
                for a in (40.0, 0.0):
                    for b in (21.0, 0.0):
                        for c in (21.0, 0.0):
                            rest = [0.0, 0.0, 0.0]
                            rest[i] = a
                            rest[others[0]] = b
                            rest[others[1]] = c
                            vals = np.array(list(combo) + rest)
                            mat = np.repeat(vals[:, None], 2, axis=1)
                            out.append((mat, Fraction(1, 64)))
            else:
                vals = np.array(list(combo) + [0.0, 0.0, 0.0])
                mat = np.repeat(vals[:, None], 2, axis=1)
                out.append((mat, Fraction(1, 8)))
        return out

    return SettingSpec(
        name="id_setting", n=6, m=2, objective_default=Objective.WELFARE,
        vmax=60.0, identical_items=True, support_size=29,
        _batch_sampler=sampler, _support_builder=builder,
    )


def _make_additive_types(delta: float = 0.5) -> SettingSpec:
    # Ten agents; 2 units of type A (items 0-1) and 4 units of type B (items
    # 2-5).  Per-type values follow the correlated draw with its own z.
    item_types = (0, 0, 1, 1, 1, 1)
    half = (1.0 - delta) / 2.0

    def sampler(rng, count):
        out = np.empty((count, 10, 2))
        for t in range(2):
            z = rng.uniform(0.5 - half, 0.5 + half, size=(count, 1))
            out[:, :, t] = rng.uniform(z - half, z + half, size=(count, 10))
        return out

    return SettingSpec(
        name="additive_types", n=10, m=6, objective_default=Objective.WELFARE,
        vmax=1.0, identical_items=False, valuation_kind="additive",
        item_types=item_types, params={"delta": delta}, _batch_sampler=sampler,
    )


def _make_maxmin_colors() -> SettingSpec:
    # Agent 0 orange, 1-4 blue, 5-8 red; items 0-4 black, 5-9 white.  A fair
    # coin swaps which group is strong on black and flips the orange agent's
    # preferred color; all values drawn iid per item within their ranges.

    def sampler(rng, count):
        v = np.zeros((count, 9, 10))
        flip = rng.random(count) < 0.5
        orange_strong = rng.uniform(0.5, 1.0, size=(count, 5))
        lo_black = rng.uniform(0.4, 0.5, size=(count, 4, 5))
        lo_white = rng.uniform(0.0, 0.25, size=(count, 4, 5))
        hi_black = rng.uniform(0.9, 1.0, size=(count, 4, 5))
        hi_white = rng.uniform(0.4, 0.5, size=(count, 4, 5))
        # not flipped: orange wants black, blue weak, red strong
        v[~flip, 0, :5] = orange_strong[~flip]
        v[~flip, 1:5, :5] = lo_black[~flip]
        v[~flip, 1:5, 5:] = lo_white[~flip]
        v[~flip, 5:9, :5] = hi_black[~flip]
        v[~flip, 5:9, 5:] = hi_white[~flip]
        # flipped: orange wants white, red weak, blue strong
        v[flip, 0, 5:] = orange_strong[flip]
        v[flip, 5:9, :5] = lo_black[flip]
        v[flip, 5:9, 5:] = lo_white[flip]
        v[flip, 1:5, :5] = hi_black[flip]
        v[flip, 1:5, 5:] = hi_white[flip]
        return v

    return SettingSpec(
        name="maxmin_colors", n=9, m=10, objective_default=Objective.MAXMIN,
        vmax=1.0, identical_items=False, _batch_sampler=sampler,
    )


_FACTORIES: dict[str, Callable[..., SettingSpec]] = {
    "prop1": _make_prop1,
    "prop2": _make_prop2,
    "prop3_bellwether": _make_prop3,
    "prop4": _make_prop4,
    "prop8_linear": _make_prop8,
    "appD_nonidentical": _make_appd,
    "correlated": _make_correlated,
    "colors": _make_colors,
    "two_worlds": _make_two_worlds,
    "inventory": _make_inventory,
    "kitchen_sink": _make_kitchen_sink,
    "id_setting": _make_id_setting,
    "additive_types": _make_additive_types,
    "revenue_correlated": _make_revenue_correlated,
    "maxmin_colors": _make_maxmin_colors,
}


def get_setting(name: str, **params) -> SettingSpec:
    """Build a catalog setting by name; params apply to parametric settings."""
    if name not in _FACTORIES:
        raise InputError(f"unknown setting {name!r}; known: {sorted(_FACTORIES)}")
    try:
        return _FACTORIES[name](**params)
    except TypeError as e:
        raise InputError(f"bad parameters for setting {name!r}: {e}") from None


def setting_catalog() -> list[SettingSpec]:
    """Every named setting with its default parameters."""
    return [factory() for factory in _FACTORIES.values()]


def independent_setting(
    name: str,
    dists: IndependentDists,
    objective: Objective = Objective.WELFARE,
) -> SettingSpec:
    """Build a finite setting from explicit per-agent independent marginals.

    ``dists[i]`` lists agent i's ``(value vector over items, probability)``
    pairs; probabilities must sum to 1 per agent.
    """
    if not dists:
        raise InputError("need at least one agent distribution")
    m = len(dists[0][0][0])
    per_agent = []
    for i, agent in enumerate(dists):
        total = sum(p for _, p in agent)
        if total != 1:
            raise InputError(f"agent {i} probabilities sum to {total}, not 1")
        if any(len(vec) != m for vec, _ in agent):
            raise InputError(f"agent {i} has value vectors of mixed length")
        per_agent.append([(np.array(vec, dtype=float), p) for vec, p in agent])
    n = len(dists)
    vmax = max(max(max(vec) for vec, _ in agent) for agent in per_agent)
    identical = all(
        all(len(set(vec)) == 1 for vec, _ in agent) for agent in dists
    )
    support_size = 1
    for agent in dists:
        support_size *= len(agent)

    cdfs = [
        (np.cumsum([float(p) for _, p in agent]), np.stack([v for v, _ in agent]))
        for agent in per_agent
    ]

    def sampler(rng: np.random.Generator, count: int) -> np.ndarray:
        out = np.empty((count, n, m))
        for i, (cdf, vecs) in enumerate(cdfs):
            idx = np.searchsorted(cdf, rng.random(count), side="right")
            out[:, i, :] = vecs[np.minimum(idx, len(vecs) - 1)]
        return out

    return SettingSpec(
        name=name, n=n, m=m, objective_default=objective, vmax=float(vmax),
        identical_items=identical, support_size=support_size,
        independent_dists=tuple(
            tuple((tuple(float(x) for x in vec), p) for vec, p in agent)
            for agent in dists
        ),
        _batch_sampler=sampler,
        _support_builder=lambda: _independent_dists_support(dists),
    )
