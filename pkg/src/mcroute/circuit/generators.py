"""Benchmark circuit families."""

from __future__ import annotations

import math
import random

from .dag import Gate


def _number(spec: list[tuple[str, tuple[int, ...]]]) -> list[Gate]:
    return [Gate(i, lab, qs) for i, (lab, qs) in enumerate(spec)]


def _check(n: int) -> None:
    if n < 2:
        raise ValueError("benchmark circuits need n >= 2")


def gen_ghz(n: int) -> list[Gate]:
    _check(n)
    return _number([("h", (0,))] + [("cx", (i, i + 1)) for i in range(n - 1)])


def gen_qft(n: int) -> list[Gate]:
    """Textbook QFT without the final reversal; each controlled phase becomes
    two CX plus phase rotations."""
    _check(n)
    spec: list[tuple[str, tuple[int, ...]]] = []
    for t in range(n):
        spec.append(("h", (t,)))
        for c in range(t + 1, n):
            half = math.pi / 2 ** (c - t + 1)
            spec += [
                (f"p({half:.12g})", (c,)),
                ("cx", (c, t)),
                (f"p({-half:.12g})", (t,)),
                ("cx", (c, t)),
                (f"p({half:.12g})", (t,)),
            ]
    return _number(spec)


def gen_graphstate(n: int) -> list[Gate]:
    """Ring graph state: H on every qubit, then one CZ per ring edge."""
    _check(n)
    spec = [("h", (q,)) for q in range(n)]
    edges = [(0, 1)] if n == 2 else [(i, (i + 1) % n) for i in range(n)]
    spec += [("cz", e) for e in edges]
    return _number(spec)


_RANDOM_1Q = ("h", "x", "s", "t", "sx")


def gen_random(n: int, two_q_count: int, seed: int) -> list[Gate]:
    """Uniform random CX pairs, each preceded by a random 1Q gate half the time."""
    _check(n)
    rng = random.Random(seed)
    spec: list[tuple[str, tuple[int, ...]]] = []
    for _ in range(two_q_count):
        if rng.random() < 0.5:
            spec.append((rng.choice(_RANDOM_1Q), (rng.randrange(n),)))
        a, b = rng.sample(range(n), 2)
        spec.append(("cx", (a, b)))
    return _number(spec)


FAMILIES = {"ghz": gen_ghz, "qft": gen_qft, "graphstate": gen_graphstate}


def circuit_from_spec(spec: str) -> tuple[str, list[Gate], int]:
    """``ghz:25``, ``qft:64``, ``graphstate:25`` or ``random:<n>:<cx>[:<seed>]``."""
    parts = spec.strip().lower().split(":")
    try:
        if parts[0] in FAMILIES and len(parts) == 2:
            n = int(parts[1])
            return spec, FAMILIES[parts[0]](n), n
        if parts[0] == "random" and len(parts) in (3, 4):
            n, cx = int(parts[1]), int(parts[2])
            seed = int(parts[3]) if len(parts) == 4 else 0
            return spec, gen_random(n, cx, seed), n
    except ValueError as exc:
        raise ValueError(f"bad circuit spec {spec!r}: {exc}") from None
    raise ValueError(f"bad circuit spec {spec!r}; expected ghz:N, qft:N, graphstate:N or random:N:CX[:SEED]")
