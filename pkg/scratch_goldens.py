"""Capture full-precision oracle values for freezing into tests."""
import time

import numpy as np

from seqprice.mechanism import Objective
from seqprice.oracle.beliefdp import anonymous_price_adaptive_order, best_static_order
from seqprice.oracle.evaluate import rsd_value, value_of_policy
from seqprice.oracle.grids import candidate_prices, item_price_classes
from seqprice.oracle.independent import q_table
from seqprice.oracle.solve import optimal_adaptive_spm, optimal_static, statistic_value
from seqprice.offline import offline_batch, offline_optimum
from seqprice.settings import enumerate_support, get_setting
from seqprice.valuation import ValuationProfile, UnitDemand

W = Objective.WELFARE


def show(label, v):
    print(f"{label} = {v!r}")


for name in ["prop1", "prop2", "prop4", "appD_nonidentical", "kitchen_sink", "prop8_linear"]:
    spec = get_setting(name)
    t0 = time.time()
    res = optimal_adaptive_spm(spec, W, "price_allocation_matrix")
    show(f"{name}.pam", res.value)
    show(f"{name}.method", res.method)
    try:
        show(f"{name}.ial", statistic_value(spec, W, "items_agents_left"))
    except Exception as e:
        show(f"{name}.ial", type(e).__name__)
    show(f"{name}.asp", optimal_static(spec, W, "ASP").value)
    show(f"{name}.psp", optimal_static(spec, W, "PSP").value)
    show(f"{name}.rsd", rsd_value(spec, W))
    # offline expectation over support
    off = sum(
        float(p) * offline_optimum(prof, W) for prof, p in enumerate_support(spec)
    )
    show(f"{name}.offline", off)
    print(f"  [{time.time()-t0:.1f}s]")

# prop1 tree structure
spec = get_setting("prop1")
res = optimal_adaptive_spm(spec, W)
root = res.tree.root
show("prop1.root.agent", root.agent)
show("prop1.root.prices", root.prices)
decl = root.children.get(frozenset())
show("prop1.decline.prices", decl.prices if decl else None)
show("prop1.replay", value_of_policy(res.tree, spec, W))

# prop4 subproblem table
spec = get_setting("prop4")
q = q_table(spec, W)
show("prop4.q[(2,{2,3},1)]", q[(2, frozenset({2, 3}), 1)])
show("prop4.q.size", len(q))
res4 = optimal_adaptive_spm(spec, W, "items_agents_left")
show("prop4.ial.replay", value_of_policy(res4.tree, spec, W))
grid = candidate_prices(spec, anonymous=True)
show("prop4.scalar_grid", grid.merged_scalar())

# prop3: adaptive-order single anonymous price, static order
spec = get_setting("prop3")
t0 = time.time()
show("prop3.pam", statistic_value(spec, W))
val, price, tree = anonymous_price_adaptive_order(spec, W)
show("prop3.ao_asp", (val, price))
show("prop3.so", best_static_order(spec, W))
print(f"  [{time.time()-t0:.1f}s]")

# prop8 structure
spec = get_setting("prop8_linear")
show("prop8.classes", item_price_classes(spec))
show("prop8.exact_frac", 15.5)

# two_worlds / inventory / colors
for name in ["two_worlds", "inventory", "colors"]:
    spec = get_setting(name)
    t0 = time.time()
    try:
        show(f"{name}.pam", statistic_value(spec, W))
    except Exception as e:
        show(f"{name}.pam", type(e).__name__)
    try:
        show(f"{name}.ial", statistic_value(spec, W, "items_agents_left"))
    except Exception as e:
        show(f"{name}.ial", type(e).__name__)
    try:
        r = optimal_static(spec, W, "PSP")
        show(f"{name}.psp", (r.value, r.restricted))
    except Exception as e:
        show(f"{name}.psp", type(e).__name__)
    try:
        r = optimal_static(spec, W, "ASP")
        show(f"{name}.asp", (r.value, r.prices[0][0]))
    except Exception as e:
        show(f"{name}.asp", type(e).__name__)
    print(f"  [{time.time()-t0:.1f}s]")

# inventory closed-form ASP cross-check: 20 iid Bernoulli(1/2) high values,
# stock 10: at p between 0.5 and 1 only highs buy -> E[min(Bin(20,.5),10)]
from math import comb

e_min = sum(comb(20, b) * 0.5 ** 20 * min(b, 10) for b in range(21))
show("inventory.asp.closed_form_highs", e_min * 1.0)
show("inventory.asp.closed_form_zero_price", 10 * 0.75)

# inventory full-optimum count DP: state (agents left, stock), price 0 vs 0.75
from functools import lru_cache


@lru_cache(maxsize=None)
def v_inv(k: int, s: int) -> float:
    if k == 0 or s == 0:
        return 0.0
    sell_all = 0.75 + v_inv(k - 1, s - 1)  # p=0: buys surely, E[v]=0.75
    sell_high = 0.5 * (1.0 + v_inv(k - 1, s - 1)) + 0.5 * v_inv(k - 1, s)
    return max(sell_all, sell_high)


show("inventory.dp_local", v_inv(20, 10))

# prop1 offline via batch sampler route
spec = get_setting("prop1")
rng = np.random.default_rng(0)
vals = spec.sample_batch(rng, 50_000)
show("prop1.offline_mc", float(offline_batch(spec, vals, W).mean()))

# prop2 realization offline example
spec = get_setting("prop2")
prof = ValuationProfile(2, tuple(UnitDemand((v, v)) for v in (3.0, 1.0, 3.0)))
show("prop2.realization_offline", offline_optimum(prof, W))
