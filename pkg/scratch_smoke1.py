import time

import numpy as np
from fractions import Fraction

from seqprice.mechanism import Objective
from seqprice.offline import offline_batch
from seqprice.oracle.evaluate import rsd_value
from seqprice.oracle.solve import optimal_adaptive_spm, statistic_value
from seqprice.oracle.static import eval_schedule
from seqprice.settings import get_setting, independent_setting, support_values

W = Objective.WELFARE

# 1. colors sandwich: ASP witness (p=0.5, blues first) == offline == 30
colors = get_setting("colors")
order = list(range(20, 30)) + list(range(0, 10)) + list(range(10, 20))
prices = np.full((30, 20), 0.5)
t0 = time.time()
asp_witness = eval_schedule(colors, order, prices, W)
vals, probs = support_values(colors)
off = float(sum(float(p) * o for p, o in zip(probs, offline_batch(colors, vals, W))))
print(f"colors: witness={asp_witness:.9f} offline={off:.9f} [{time.time()-t0:.1f}s]")

# 2. prop2 tree fallback structure
prop2 = get_setting("prop2")
res = optimal_adaptive_spm(prop2, W, kind="price_allocation_matrix", build_tree=True)
root = res.tree.root
print(f"prop2: value={res.value} root agent={root.agent} prices={root.prices}")
fallback = root.children.get(frozenset())
print(f"  fallback: agent={fallback.agent} prices={fallback.prices}")
ok = all(p < 1.0 for p in fallback.prices.values())
fb2 = fallback.children.get(frozenset())
if fb2 is not None:
    print(f"  fallback2: agent={fb2.agent} prices={fb2.prices}")
print(f"  fallback prices below 1: {ok}")

# 3. RSD smoke
for name, want in [("prop1", 2.0), ("prop2", 4.0), ("prop4", 12.75)]:
    got, _ = rsd_value(get_setting(name), W)
    print(f"rsd {name}: {got:.9f} want {want}")

# 4. routing smoke after milp rewrite
for name, want in [("prop1", 2.5), ("prop2", 4.75), ("prop4", 19.375)]:
    r = optimal_adaptive_spm(get_setting(name), W, kind="items_agents_left",
                             build_tree=False)
    print(f"ial {name}: {r.value:.9f} want {want} [{r.method}]")

# 5. criterion-6 prototype on a couple of random settings
rng = np.random.default_rng(7)


def random_two_point(rng):
    n = int(rng.integers(2, 6))
    m = int(rng.integers(1, n))
    dists = []
    for _ in range(n):
        lo = float(rng.integers(0, 4)) / 2.0
        hi = lo + float(rng.integers(1, 6)) / 2.0
        q = Fraction(int(rng.integers(1, 8)), 8)
        dists.append((((lo,) * m, q), ((hi,) * m, 1 - q)))
    return independent_setting("rand2pt", tuple(dists))


def best_psp_and_ordered(spec):
    from itertools import permutations, product as iproduct
    from seqprice.oracle.grids import candidate_prices

    grid = candidate_prices(spec, anonymous=False, objective=W)
    agent_grids = [grid.item_grid(i, 0) for i in range(spec.n)]
    best = float("-inf")
    for combo in iproduct(*agent_grids):
        pm = np.repeat(np.array(combo)[:, None], spec.m, axis=1)
        for order in permutations(range(spec.n)):
            v = eval_schedule(spec, order, pm, W)
            if v > best:
                best = v
    # descending E[v | buy] order, maximized over price combos
    best_ordered = float("-inf")
    for combo in iproduct(*agent_grids):
        keys = []
        for i, p in enumerate(combo):
            buys = [(float(vec[0]), float(pr)) for vec, pr in
                    spec.independent_dists[i]
                    if vec[0] > p or (vec[0] == p and vec[0] > 0)]
            mass = sum(pr for _, pr in buys)
            cond = sum(v * pr for v, pr in buys) / mass if mass else float("-inf")
            keys.append((-cond, i))
        order = [i for _, i in sorted(keys)]
        pm = np.repeat(np.array(combo)[:, None], spec.m, axis=1)
        v = eval_schedule(spec, order, pm, W)
        if v > best_ordered:
            best_ordered = v
    return best, best_ordered


for trial in range(3):
    spec = random_two_point(rng)
    t0 = time.time()
    b, bo = best_psp_and_ordered(spec)
    print(f"order-prop n={spec.n} m={spec.m}: all-orders={b:.9f} "
          f"ordered={bo:.9f} equal={b == bo} [{time.time()-t0:.1f}s]")
