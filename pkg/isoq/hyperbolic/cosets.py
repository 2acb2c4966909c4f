"""
Left cosets of <g0> in SL2(Z), enumerated breadth-first over S, T, T^-1.

Each coset g<g0> is stored by a canonical representative: the element of
smallest Frobenius norm among g g0^k (lexicographic tie-break), with the
sign fixed so the first nonzero entry is positive.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import NotHyperbolic, ValidationError, WordLengthTooSmall
from .moebius import IDENTITY, MINUS_IDENTITY, S, T, T_INV, MoebiusElement

logger = logging.getLogger(__name__)

PSL2 = "psl2-distinct"
SL2 = "sl2-with-minus-identity"
CONVENTIONS = (PSL2, SL2)

GENERATORS = (S, T, T_INV)
MAX_SATURATION = 200


def _height(g: MoebiusElement) -> int:
    return g.a * g.a + g.b * g.b + g.c * g.c + g.d * g.d


def sign_normalize(g: MoebiusElement) -> MoebiusElement:
    """Choose between g and -g so the first nonzero entry is positive"""

    for x in g.as_tuple():
        if x != 0:
            return g if x > 0 else -g
    return g


def _key(g: MoebiusElement) -> tuple:
    return (_height(g), sign_normalize(g).as_tuple())


def canonical_rep(g: MoebiusElement, g0: MoebiusElement, order: Optional[int] = None) -> MoebiusElement:
    """
    Canonical representative of the coset g<g0>.

    For elliptic g0 of order n every g g0^k with 0 <= k < n is compared.
    For hyperbolic g0 the height of g g0^k is convex in k, so the search
    walks downhill from k = 0 in both directions.
    """

    if order is not None:
        candidates = [g]
        h = g
        for _ in range(order - 1):
            h = h @ g0
            candidates.append(h)
        return sign_normalize(min(candidates, key=_key))

    candidates = [g]
    for step in (g0, g0.inverse()):
        current = g
        while True:
            nxt = current @ step
            if _height(nxt) < _height(current):
                current = nxt
                continue
            if _height(nxt) == _height(current):
                candidates.append(nxt)
            break
        candidates.append(current)
    return sign_normalize(min(candidates, key=_key))


def orbifold_multiplicity(convention: str, g0: MoebiusElement) -> int:
    """
    Number of SL2(Z) cosets of <g0> per Moebius transformation.

    1 under psl2-distinct; under sl2-with-minus-identity, 2 when -I is not
    a power of g0 and 1 when it is.
    """

    if convention not in CONVENTIONS:
        raise ValidationError(f"Unknown convention: {convention}. Available: {list(CONVENTIONS)}")
    if convention == PSL2:
        return 1
    if g0.kind != "elliptic":
        return 2
    h = g0
    for _ in range(12):
        if np.allclose(h.matrix, MINUS_IDENTITY.matrix):
            return 1
        h = h @ g0
    return 2


def saturation_width(p: int) -> int:
    """Half-width K of the T-orbit kept around every base coset"""
    return min(MAX_SATURATION, math.ceil(3 * 10 ** (7 / p)))


@dataclass
class CosetTable:
    """
    Canonical coset representatives sorted by word length.

    `depths` holds the BFS word length of each entry; T-saturated entries
    inherit the depth of their base. `edge` marks entries at |k| = K of a
    T-orbit, which bound the saturation tail.
    """

    subgroup_generator: MoebiusElement
    representatives: list[MoebiusElement]
    depths: list[int]
    max_word_length: int
    convention: str = PSL2
    saturation: int = 0
    edge: list[bool] = field(default_factory=list)
    group: str = "SL2Z"

    def __post_init__(self):
        if not self.edge:
            self.edge = [False] * len(self.representatives)

    def __len__(self) -> int:
        return len(self.representatives)

    def __iter__(self):
        return iter(self.representatives)

    @property
    def multiplicity(self) -> int:
        return orbifold_multiplicity(self.convention, self.subgroup_generator)

    @property
    def order(self) -> Optional[int]:
        g0 = self.subgroup_generator
        return g0.elliptic_order() if g0.kind == "elliptic" else None

    def shells(self) -> list[slice]:
        """Slices of entries with equal depth, one per depth 0..max_word_length"""

        depths = np.asarray(self.depths)
        bounds = np.searchsorted(depths, np.arange(self.max_word_length + 2))
        return [slice(int(bounds[d]), int(bounds[d + 1])) for d in range(self.max_word_length + 1)]

    def shell_sizes(self) -> list[int]:
        return [s.stop - s.start for s in self.shells()]

    def conjugates(self) -> list[MoebiusElement]:
        """g g0 g^-1 for every representative"""
        g0 = self.subgroup_generator
        return [g0.conjugate_by(g) for g in self.representatives]

    def redecorated(self, powers: list[int]) -> "CosetTable":
        """Same cosets with representative i replaced by g_i g0^{k_i}"""

        g0 = self.subgroup_generator
        reps = [g @ g0.power(k) for g, k in zip(self.representatives, powers)]
        reps += self.representatives[len(powers) :]
        return CosetTable(
            g0, reps, list(self.depths), self.max_word_length, self.convention, self.saturation, list(self.edge)
        )

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "subgroup_generator": list(self.subgroup_generator.as_tuple()),
            "size": len(self),
            "max_word_length": self.max_word_length,
            "convention": self.convention,
            "saturation": self.saturation,
            "shell_sizes": self.shell_sizes(),
        }


def coset_reps(
    g0: MoebiusElement,
    max_word_length: int,
    convention: str = PSL2,
    saturation: int = 0,
) -> CosetTable:
    """
    Enumerate cosets g<g0> for words of length <= max_word_length.

    Args:
        g0: Subgroup generator in SL2(Z), hyperbolic or elliptic
        max_word_length: BFS depth over S, T, T^-1; 0 gives the identity only
        convention: psl2-distinct or sl2-with-minus-identity
        saturation: Add T^k g for 0 < |k| <= saturation to every entry

    Returns:
        CosetTable sorted by depth

    Raises:
        NotInteger: g0 is not integral
        WordLengthTooSmall: max_word_length < 0
        NotHyperbolic: g0 is parabolic
    """

    g0 = MoebiusElement.integral(g0.as_tuple())
    if max_word_length < 0:
        raise WordLengthTooSmall(f"max_word_length must be >= 0, got {max_word_length}")
    if convention not in CONVENTIONS:
        raise ValidationError(f"Unknown convention: {convention}. Available: {list(CONVENTIONS)}")
    if g0.kind == "parabolic":
        raise NotHyperbolic(f"{g0.as_tuple()} is parabolic")
    order = g0.elliptic_order() if g0.kind == "elliptic" else None

    identity = canonical_rep(IDENTITY, g0, order)
    seen: dict[tuple, list] = {identity.as_tuple(): [identity, 0, False]}
    frontier = [identity]

    for depth in range(1, max_word_length + 1):
        new = []
        for g in frontier:
            for gen in GENERATORS:
                h = canonical_rep(gen @ g, g0, order)
                key = h.as_tuple()
                if key not in seen:
                    seen[key] = [h, depth, False]
                    new.append(h)
        frontier = new
        logger.debug(f"coset shell {depth}: {len(new)} new cosets")

    if saturation > 0:
        bases = sorted(seen.values(), key=lambda e: e[1])
        for base, depth, _ in bases:
            for step in (T, T_INV):
                h = base
                for k in range(1, saturation + 1):
                    h = step @ h
                    rep = canonical_rep(h, g0, order)
                    key = rep.as_tuple()
                    entry = seen.get(key)
                    if entry is None:
                        seen[key] = [rep, depth, k == saturation]
                    elif depth < entry[1]:
                        entry[1] = depth
                        entry[2] = entry[2] and k == saturation
                    elif k < saturation:
                        entry[2] = False

    entries = sorted(seen.values(), key=lambda e: e[1])
    table = CosetTable(
        subgroup_generator=g0,
        representatives=[e[0] for e in entries],
        depths=[e[1] for e in entries],
        max_word_length=max_word_length,
        convention=convention,
        saturation=saturation,
        edge=[e[2] for e in entries],
    )
    logger.debug(f"coset table for {g0.as_tuple()}: {len(table)} entries, shells {table.shell_sizes()}")
    return table


def same_coset(g: MoebiusElement, h: MoebiusElement, g0: MoebiusElement, max_power: int = 50) -> bool:
    """Brute-force test of h^-1 g = +-g0^k for |k| <= max_power"""

    x = h.inverse() @ g
    targets = {IDENTITY.as_tuple(), MINUS_IDENTITY.as_tuple()}
    forward = IDENTITY
    backward = IDENTITY
    inv = g0.inverse()
    for _ in range(max_power + 1):
        for y in (forward, backward):
            if (y.inverse() @ x).as_tuple() in targets:
                return True
        forward = forward @ g0
        backward = backward @ inv
    return False
