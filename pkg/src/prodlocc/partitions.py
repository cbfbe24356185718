"""Set partitions of parties, coarse-graining, and relabelling of local bases."""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

from .states import ORTHO_TOL, ProductState, StateSet
from .tensor import kron_all


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class Partition:
    """Blocks of 1-based party indices, canonically ordered.

    Each block is a sorted tuple and blocks are sorted by their smallest
    element, so equal partitions compare equal.
    """

    blocks: tuple

    def __post_init__(self):
        blocks = [tuple(sorted(int(p) for p in b)) for b in self.blocks]
        if any(not b for b in blocks):
            raise PartitionError("empty block")
        blocks.sort(key=lambda b: b[0])
        flat = [p for b in blocks for p in b]
        if len(flat) != len(set(flat)):
            raise PartitionError(f"blocks overlap: {blocks}")
        object.__setattr__(self, "blocks", tuple(blocks))

    @property
    def n_parties(self):
        return sum(len(b) for b in self.blocks)

    @property
    def k(self):
        return len(self.blocks)

    @property
    def max_block(self):
        return max(len(b) for b in self.blocks)

    def validate(self, m):
        if sorted(p for b in self.blocks for p in b) != list(range(1, m + 1)):
            raise PartitionError(f"partition {self} does not cover parties 1..{m}")

    def block_of(self, party):
        for i, b in enumerate(self.blocks):
            if party in b:
                return i
        raise KeyError(party)

    def refines(self, other):
        """True if every block of ``self`` sits inside a block of ``other``."""
        return all(any(set(b) <= set(o) for o in other.blocks) for b in self.blocks)

    def __str__(self):
        return "|".join(",".join(map(str, b)) for b in self.blocks)

    def letters(self, names="ABCDEFGHIJ"):
        return "|".join("".join(names[p - 1] for p in b) for b in self.blocks)

    @classmethod
    def parse(cls, text, m=None):
        """Parse ``"1,3|2,4"``; validates coverage when ``m`` is given."""
        try:
            blocks = [[int(x) for x in part.split(",") if x.strip()] for part in text.split("|")]
        except ValueError as exc:
            raise PartitionError(f"cannot parse partition {text!r}") from exc
        p = cls(tuple(blocks))
        if m is not None:
            p.validate(m)
        return p

    @classmethod
    def all_separate(cls, m):
        return cls(tuple((i,) for i in range(1, m + 1)))

    @classmethod
    def merged(cls, m):
        return cls((tuple(range(1, m + 1)),))


def enumerate_k_partitions(m, k):
    """All partitions of parties ``1..m`` into exactly ``k`` blocks, canonical order."""
    if not 1 <= k <= m:
        raise PartitionError(f"k must satisfy 1 <= k <= m, got k={k}, m={m}")

    out = []

    def grow(p, blocks):
        if p > m:
            if len(blocks) == k:
                out.append(Partition(tuple(tuple(b) for b in blocks)))
            return
        # too few parties left to open the missing blocks
        if k - len(blocks) > m - p + 1:
            return
        for b in blocks:
            b.append(p)
            grow(p + 1, blocks)
            b.pop()
        if len(blocks) < k:
            blocks.append([p])
            grow(p + 1, blocks)
            blocks.pop()

    grow(1, [])
    return sorted(out, key=lambda q: q.blocks)


def cyclically_adjacent(i, j, m):
    """Parties ``i`` and ``j`` (1-based) are neighbours on the ring ``1..m``."""
    return (i - j) % m in (1, m - 1)


def coarse_grain(s, p):
    """Merge each block's factors into one factor (ascending party order)."""
    if p.n_parties != s.n_parties:
        raise PartitionError(f"partition {p} has {p.n_parties} parties, set has {s.n_parties}")
    p.validate(s.n_parties)
    dims = tuple(prod(s.dims[i - 1] for i in b) for b in p.blocks)
    states = [
        ProductState([kron_all(st.factors[i - 1] for i in b) for b in p.blocks], st.label)
        for st in s.states
    ]
    return StateSet(dims, states, f"{s.name}[{p}]")


def apply_relabeling(s, party, mapping):
    """Relabel computational basis vectors of one party (0-based ``party``).

    ``mapping`` maps old index -> new index and must be injective.  Indices
    missing from the mapping are assigned the unused new labels in
    ascending order so that the result is a permutation.  A factor with
    weight on an unmapped index is still carried along.
    """
    d = s.dims[party]
    mapping = {int(a): int(b) for a, b in dict(mapping).items()}
    if len(set(mapping.values())) != len(mapping):
        raise PartitionError("relabeling map is not injective")
    if any(not 0 <= a < d for a in mapping) or any(not 0 <= b < d for b in mapping.values()):
        raise PartitionError(f"relabeling map leaves the range 0..{d - 1}")
    free_new = [x for x in range(d) if x not in set(mapping.values())]
    perm = dict(mapping)
    for old in range(d):
        if old not in perm:
            perm[old] = free_new.pop(0)
    states = []
    for st in s.states:
        f = st.factors[party]
        g = np.zeros(d, dtype=complex)
        for old, new in perm.items():
            g[new] = f[old]
        facs = list(st.factors)
        facs[party] = g
        states.append(ProductState(facs, st.label))
    return StateSet(s.dims, states, s.name)


def restrict_party(s, party, indices):
    """Keep only the given computational indices of one party (0-based).

    Every state's factor must vanish outside ``indices``.
    """
    indices = list(indices)
    states = []
    for st in s.states:
        f = st.factors[party]
        outside = np.delete(f, indices)
        if np.any(np.abs(outside) > ORTHO_TOL):
            raise PartitionError(f"state {st.label!r} has support outside {indices}")
        facs = list(st.factors)
        facs[party] = f[indices]
        states.append(ProductState(facs, st.label))
    dims = list(s.dims)
    dims[party] = len(indices)
    return StateSet(tuple(dims), states, s.name)


def ray_set_equal(a, b, tol=ORTHO_TOL):
    """Equality of two state sets up to order, global phase, and normalisation."""
    if a.dims != b.dims or len(a) != len(b):
        return False
    if len(a) == 0:
        return True
    ov = np.abs(a.vectors().conj() @ b.vectors().T)
    match = ov >= 1 - tol
    used = set()
    for j in range(len(b)):
        hits = [i for i in np.flatnonzero(match[:, j]) if i not in used]
        if not hits:
            return False
        used.add(hits[0])
    return True
