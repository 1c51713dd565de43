"""Closed-form quantities: majority tails, Chernoff floor, q0 threshold,
Caro-Wei bound and the first-learner score."""

from __future__ import annotations

import math

from .graph import Graph


def first_learner_score(graph: Graph, v: int) -> float:
    """Sum of ``1/deg(u)`` over neighbours ``u`` of ``v``."""
    return sum(1.0 / graph.degree(u) for u in graph.adjacency[v])


def caro_wei(graph: Graph) -> float:
    return sum(1.0 / (1 + d) for d in graph.degrees)


def majority_tail(m: int, q: float) -> float:
    """Probability that a majority of ``m`` independent signals is correct.

    For even ``m`` the deciding agent breaks a tie with its own signal,
    which is one of the ``m`` and, given the tie, is correct half the time.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    total = sum(math.comb(m, j) * q**j * (1 - q) ** (m - j) for j in range(m // 2 + 1, m + 1))
    if m % 2 == 0:
        total += 0.5 * math.comb(m, m // 2) * (q * (1 - q)) ** (m // 2)
    return total


def majority_of_five_printed(q: float) -> float:
    """The five-signal rate with the ``10 q^3 (1 - q^2)`` third term as typeset
    in the source derivation. Kept for comparison only; it is not a
    probability of any event and has no balance point."""
    return q**5 + 5 * q**4 * (1 - q) + 10 * q**3 * (1 - q**2)


def chernoff_floor(m: float, q: float) -> float:
    """``1 - exp(-m / (8 q^2))``, the lower-bound form used for aggregating
    ``m`` independent signals."""
    if m <= 0:
        return 0.0
    return 1.0 - math.exp(-m / (8.0 * q * q))


def _balance_low(q: float, rate) -> float:
    # (1-q)^2 l(q) against its mirror image
    return (1 - q) ** 2 * rate(q) - q**2 * rate(1 - q)


def _balance_high(q: float, rate) -> float:
    # q (1-q)^3 l(q) against its mirror image
    return q * (1 - q) ** 3 * rate(q) - (1 - q) * q**3 * rate(1 - q)


def threshold_q0(variant: str = "low-q-fragile", form: str = "binomial", tol: float = 1e-9) -> float:
    """Signal quality at which an agent holding two signals against the
    five-signal majority agent is exactly indifferent (``low-q-fragile``), or
    the analogous balance with three against and one for (``high-q-fragile``).

    ``form`` selects the five-signal rate: ``binomial`` (default) or
    ``printed``; the latter has no root in (1/2, 1) and raises.
    """
    rate = {"binomial": lambda x: majority_tail(5, x), "printed": majority_of_five_printed}[form]
    balance = {"low-q-fragile": _balance_low, "high-q-fragile": _balance_high}[variant]
    # skip the trivial balance at q = 1/2 by walking to the first sign change
    grid = [0.5 + 0.005 * i for i in range(1, 100)]
    for a, b in zip(grid, grid[1:]):
        fa, fb = balance(a, rate), balance(b, rate)
        if fa == 0.0:
            return a
        if fa * fb < 0:
            lo, hi, flo = a, b, fa
            break
    else:
        raise ValueError(f"no balance point in (1/2, 1) for form={form!r}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = balance(mid, rate)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def balance_function(q: float, variant: str = "low-q-fragile") -> float:
    """``f(q)`` (low variant) or ``g(q)`` (high variant) with the binomial rate."""
    rate = majority_tail(5, q)
    if variant == "low-q-fragile":
        return (1 - q) ** 2 * rate
    return q * (1 - q) ** 3 * rate


def chebyshev_window_bound(k: int, eps: float) -> float:
    """Lower bound ``1 - 4/(k eps)`` on hitting the window ``[k eps/2, 3 k eps/2]``."""
    return 1.0 - 4.0 / (k * eps)


def good_neighborhood_bound(d: int, eps: float) -> float:
    return 1.0 - 1.0 / (d + 1) - 2.0 * eps * math.log(d) if d >= 1 else 0.0
