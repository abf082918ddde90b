"""Random small subproblems shared by the test modules."""

import random

from trolleyopt.core import Subproblem


def random_subproblem(rng: random.Random, max_items=8, max_containers=4, max_pcbs=3,
                      capacity=None, tight=True) -> Subproblem:
    n = rng.randint(1, max_items)
    T = rng.randint(1, max_containers)
    cap = capacity or rng.randint(4, 12)
    items = [(f"c{k}", rng.randint(1, cap)) for k in range(n)]
    if rng.random() < 0.5:
        # small items make packing (and spread) choices interesting
        items = [(i, max(1, s // 2)) for i, s in items]
    P = rng.randint(1, max_pcbs)
    groups = {f"p{j}": set() for j in range(P)}
    for i, _ in items:
        for p in rng.sample(sorted(groups), rng.randint(1, P)):
            groups[p].add(i)
    for p, g in groups.items():
        if not g:
            g.add(rng.choice(items)[0])
    limits = {p: rng.randint(1, T) if tight else T for p in groups}
    return Subproblem(items, cap, T, groups, limits)
