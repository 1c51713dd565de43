"""Reference Bayesian agents in exact rational arithmetic.

Deliberately naive: every agent's decision rule is derived by summing over
all 2^n signal profiles, with no cones, components or vectorization.
"""

from __future__ import annotations

import itertools
from fractions import Fraction


def reference_rates(n, edges, order, q):
    """Decision rules and exact learning rates under a fixed ordering.

    Returns ``(rules, rates)``: ``rules[v]`` maps ``(own, observed actions)``
    to an action, ``rates[v]`` is ``Pr(a_v = theta)`` as a Fraction.
    """
    q = Fraction(q)
    pos = {v: i for i, v in enumerate(order)}
    nbrs = {v: set() for v in range(n)}
    for a, b in edges:
        nbrs[a].add(b)
        nbrs[b].add(a)
    profiles = list(itertools.product((0, 1), repeat=n))

    def weight(profile, theta):
        w = Fraction(1)
        for bit in profile:
            w *= q if bit == theta else 1 - q
        return w

    w1 = [weight(p, 1) for p in profiles]
    w0 = [weight(p, 0) for p in profiles]
    actions = [[None] * n for _ in profiles]
    rules = {}
    for v in order:
        prior = sorted((u for u in nbrs[v] if pos[u] < pos[v]), key=pos.get)
        like1, like0 = {}, {}
        for i, p in enumerate(profiles):
            cell = (p[v], tuple(actions[i][u] for u in prior))
            like1[cell] = like1.get(cell, 0) + w1[i]
            like0[cell] = like0.get(cell, 0) + w0[i]
        rule = {}
        for cell in like1:
            a, b = like1[cell], like0[cell]
            if a > b:
                rule[cell] = 1
            elif a < b:
                rule[cell] = 0
            else:
                rule[cell] = cell[0]
        rules[v] = (prior, rule)
        for i, p in enumerate(profiles):
            actions[i][v] = rule[(p[v], tuple(actions[i][u] for u in prior))]
    rates = []
    for v in range(n):
        r = sum(w1[i] for i in range(len(profiles)) if actions[i][v] == 1)
        r += sum(w0[i] for i in range(len(profiles)) if actions[i][v] == 0)
        rates.append(r / 2)
    return rules, rates


def reference_random_rates(n, edges, q):
    """Random-order rates by averaging over every ordering."""
    total = [Fraction(0)] * n
    count = 0
    for order in itertools.permutations(range(n)):
        _, rates = reference_rates(n, edges, order, q)
        total = [t + r for t, r in zip(total, rates)]
        count += 1
    return [t / count for t in total]
