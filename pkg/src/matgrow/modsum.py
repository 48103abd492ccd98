"""Modular flats and the generalized parallel connection."""

from __future__ import annotations

from dataclasses import dataclass

from .geometry import geometry_size, pg
from .matroid import (
    Matroid,
    MatroidError,
    _modular_pair,
    bits,
    flat_lattice,
    is_isomorphic,
    relabel,
    restrict,
    restrict_mask,
    same_independent_sets,
)


def is_modular_flat(M: Matroid, F) -> bool:
    fm = F if isinstance(F, int) else M.mask(F)
    if M.cl(fm) != fm:
        raise MatroidError(f"{sorted(M.elems(fm), key=repr)} is not a flat")
    return all(_modular_pair(M, fm, G) for level in flat_lattice(M) for G in level)


@dataclass
class SumSpec:
    left: Matroid
    right: Matroid

    @property
    def shared(self) -> frozenset:
        return self.left.ground & self.right.ground

    def validate(self) -> None:
        T = self.shared
        lm = self.left.mask(T)
        if self.left.cl(lm) != lm:
            raise MatroidError("shared set is not a flat of the left matroid")
        if not is_modular_flat(self.left, lm):
            raise MatroidError("shared set is not modular in the left matroid")
        if not same_independent_sets(restrict(self.left, T), restrict(self.right, T)):
            raise MatroidError("left and right disagree on the shared set")


class ModularSum(Matroid):
    """Generalized parallel connection of ``left`` and ``right`` along their common elements.

    Closure alternates the two closures until nothing changes; ranks are read
    off greedily from closures.
    """

    def __init__(self, spec: SumSpec, name=None):
        left, right = spec.left, spec.right
        labels = list(left.labels) + [x for x in right.labels if x not in left._index]
        super().__init__(len(labels), labels, name or "modular sum")
        self.left, self.right = left, right
        self._lpos = [self._index[x] for x in left.labels]
        self._rpos = [self._index[x] for x in right.labels]
        self.left_mask = sum(1 << i for i in self._lpos)
        self.right_mask = sum(1 << i for i in self._rpos)
        self._clcache: dict[int, int] = {}

    def _to(self, mask: int, pos: list[int]) -> int:
        out = 0
        for j, i in enumerate(pos):
            if mask >> i & 1:
                out |= 1 << j
        return out

    def _from(self, mask: int, pos: list[int]) -> int:
        out = 0
        for j in bits(mask):
            out |= 1 << pos[j]
        return out

    def closure(self, mask: int) -> int:
        try:
            return self._clcache[mask]
        except KeyError:
            pass
        X = mask
        while True:
            a = self._from(self.left.cl(self._to(X, self._lpos)), self._lpos)
            Y = X | a
            b = self._from(self.right.cl(self._to(Y, self._rpos)), self._rpos)
            Y |= b
            if Y == X:
                break
            X = Y
        self._clcache[mask] = X
        return X

    def cl(self, mask: int) -> int:
        return self.closure(mask)

    def _rank(self, mask):
        I, c = 0, self.closure(0)
        rank = 0
        for e in bits(mask):
            if not c >> e & 1:
                I |= 1 << e
                rank += 1
                c = self.closure(I)
        return rank

    def flat_rank(self, F: int) -> int:
        """r(F) for a flat F from the two sides and their overlap."""
        rl = self.left.r(self._to(F, self._lpos))
        rr = self.right.r(self._to(F, self._rpos))
        rt = self.left.r(self._to(F & self.right_mask, self._lpos))
        return rl + rr - rt


def modular_sum(spec: SumSpec, check: bool = True) -> Matroid:
    spec.validate()
    S = ModularSum(spec)
    if check:
        T = spec.shared
        expect = spec.left.rank + spec.right.rank - spec.left.r(spec.left.mask(T))
        if S.rank != expect:
            raise MatroidError(f"rank {S.rank} differs from r(left)+r(right)-r(shared) = {expect}")
        for side, mask in ((spec.left, S.left_mask), (spec.right, S.right_mask)):
            if side.n <= 16 and not same_independent_sets(side, restrict_mask(S, mask)):
                raise MatroidError("a summand is not a restriction of the sum")
    return S


def geometry_extend(M: Matroid, F, n: int, q: int) -> Matroid:
    """Glue PG(n-1, q) onto M along the spanning projective flat F."""
    fm = M.mask(F)
    r = M.rank
    if n < r:
        raise MatroidError(f"n = {n} is below r(M) = {r}")
    if M.r(fm) != r:
        raise MatroidError("F must span M")
    MF = restrict_mask(M, fm)
    G = pg(n, q)
    size = geometry_size(r, q)
    # the first points in lexicographic order span the last r coordinates
    flat = (1 << size) - 1
    phi = is_isomorphic(restrict_mask(G, flat), MF)
    if phi is None:
        raise MatroidError(f"M restricted to F is not PG({r - 1},{q})")
    names = {i: phi[i] if i in phi else ("g", i) for i in G.labels}
    Gl = relabel(G, names, name=f"PG({n - 1},{q})")
    return modular_sum(SumSpec(Gl, M), check=M.n + G.n <= 24)
