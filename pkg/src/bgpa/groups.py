"""Finite permutation groups: closure, cosets and double cosets.

Permutations are tuples p with p[i] the image of i; products compose right
to left, (p * q)[i] = p[q[i]].  Element order is BFS from the identity,
then sorted, so every listing is deterministic.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import permutations


def pmul(p: tuple, q: tuple) -> tuple:
    return tuple(p[i] for i in q)


def pinv(p: tuple) -> tuple:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def closure(generators, degree: int, max_order: int = 100000) -> list:
    ident = tuple(range(degree))
    seen = {ident}
    queue = deque([ident])
    while queue:
        x = queue.popleft()
        for s in generators:
            y = pmul(s, x)
            if y not in seen:
                seen.add(y)
                queue.append(y)
                if len(seen) > max_order:
                    raise ValueError("group closure exceeds max_order")
    return sorted(seen)


@dataclass
class PermGroup:
    degree: int
    generators: tuple
    name: str = ""
    elements: list = field(default=None, repr=False)

    def __post_init__(self):
        self.generators = tuple(tuple(g) for g in self.generators)
        for g in self.generators:
            if sorted(g) != list(range(self.degree)):
                raise ValueError(f"generator {g} is not a permutation of {self.degree} points")
        if self.elements is None:
            self.elements = closure(self.generators, self.degree)
        self.index = {x: i for i, x in enumerate(self.elements)}

    @property
    def identity(self) -> tuple:
        return tuple(range(self.degree))

    @property
    def order(self) -> int:
        return len(self.elements)

    def mul(self, p, q):
        return pmul(p, q)

    def inv(self, p):
        return pinv(p)

    def __contains__(self, p):
        return tuple(p) in self.index

    def subgroup(self, generators, name: str = "") -> "PermGroup":
        sub = PermGroup(self.degree, generators, name)
        if any(x not in self.index for x in sub.elements):
            raise ValueError("generators leave the ambient group")
        return sub

    def left_cosets(self, h: "PermGroup") -> list:
        """Left cosets gH as sorted tuples, ordered by their minimal element."""
        seen = {}
        for g in self.elements:
            if g in seen:
                continue
            c = tuple(sorted(pmul(g, x) for x in h.elements))
            for y in c:
                seen[y] = c
        return sorted(set(seen.values()))

    def coset_of(self, g, h: "PermGroup") -> tuple:
        return tuple(sorted(pmul(g, x) for x in h.elements))

    def double_cosets(self, h: "PermGroup", k: "PermGroup | None" = None) -> list:
        """Double cosets HgK as sorted tuples, ordered by minimal element."""
        k = k or h
        seen = set()
        out = []
        for g in self.elements:
            if g in seen:
                continue
            d = tuple(sorted({pmul(pmul(x, g), y) for x in h.elements for y in k.elements}))
            seen.update(d)
            out.append(d)
        return sorted(out)


def cyclic(n: int) -> PermGroup:
    if n == 1:
        return PermGroup(1, [(0,)], "Z1")
    return PermGroup(n, [tuple((i + 1) % n for i in range(n))], f"Z{n}")


def symmetric(n: int) -> PermGroup:
    if n == 1:
        return PermGroup(1, [(0,)], "S1")
    gens = [tuple([1, 0] + list(range(2, n)))]
    if n > 2:
        gens.append(tuple(list(range(1, n)) + [0]))
    g = PermGroup(n, gens, f"S{n}")
    return g


def from_cycles(degree: int, *cycles) -> tuple:
    """Permutation of range(degree) from 0-based cycles."""
    p = list(range(degree))
    for c in cycles:
        for i, x in enumerate(c):
            p[x] = c[(i + 1) % len(c)]
    return tuple(p)


def all_permutations(n: int) -> list:
    return sorted(permutations(range(n)))


def named_group(name: str) -> PermGroup:
    """Parse names like Z2, Z4, S3."""
    kind, num = name[0].upper(), int(name[1:])
    if kind == "Z":
        return cyclic(num)
    if kind == "S":
        return symmetric(num)
    raise ValueError(f"unknown group name {name!r}")
