"""LOCC (in)distinguishability of orthogonal product-state sets across partitions.

Two independent certificates are produced:

* a protocol tree of computational-basis coarse measurements whose leaves
  hold at most two orthogonal states (any two orthogonal pure states are
  LOCC distinguishable), certifying perfect discrimination;
* a list of orthogonality-preserving-measurement (OPM) analyses, one per
  block, all trivial, certifying that no block can start a nontrivial
  orthogonality-preserving measurement and hence that the set (or a
  subset of it) cannot be perfectly discriminated.

Neither search is complete; when both fail the verdict is ``inconclusive``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .partitions import Partition, coarse_grain, enumerate_k_partitions
from .states import ORTHO_TOL
from .tensor import RANK_RTOL, orthonormal_span, solve_hermitian_constraints

log = logging.getLogger(__name__)

DISTINGUISHABLE = "distinguishable"
INDISTINGUISHABLE = "indistinguishable"
INCONCLUSIVE = "inconclusive"


# -- orthogonality-preserving measurements --------------------------------------


@dataclass(frozen=True)
class ConstraintSystem:
    """Conditions ``<a_i|X|a_j> = 0`` on a POVM element ``X`` of one block."""

    block: tuple
    dim: int
    factors: np.ndarray  # normalised block factors, one row per state
    constraints: tuple  # ((bra, ket), ...)
    pairs: tuple  # state index pairs (i, j) behind each constraint
    support: np.ndarray  # orthonormal basis (columns) of span(factors)

    @property
    def support_dim(self):
        return self.support.shape[1]


def opm_constraints(s, p, block, tol=ORTHO_TOL):
    """Orthogonality-preservation conditions for block ``block`` (0-based) of ``p``.

    A pair of states ``i < j`` constrains the block's POVM element only when
    the remaining blocks do not already make them orthogonal.
    """
    cg = coarse_grain(s, p)
    facs = [np.array([st.normalized_factors()[b] for st in cg.states]) for b in range(p.k)]
    others = [b for b in range(p.k) if b != block]
    own = facs[block]
    n = len(cg)
    if others:
        overlap = np.ones((n, n), dtype=complex)
        for b in others:
            overlap *= facs[b].conj() @ facs[b].T
    else:
        overlap = np.ones((n, n), dtype=complex)
    cons, pairs = [], []
    for i, j in combinations(range(n), 2):
        if abs(overlap[i, j]) > tol:
            cons.append((own[i], own[j]))
            pairs.append((i, j))
    support = orthonormal_span(own) if n else np.zeros((cg.dims[block], 0))
    return ConstraintSystem(
        block=p.blocks[block],
        dim=cg.dims[block],
        factors=own,
        constraints=tuple(cons),
        pairs=tuple(pairs),
        support=support,
    )


@dataclass(frozen=True)
class OpmAnalysis:
    block: tuple
    support_dim: int
    solution_rank: int
    witness: np.ndarray | None = None  # on the support, traceless
    support: np.ndarray | None = field(default=None, repr=False)
    solutions: object = field(default=None, repr=False)

    @property
    def trivial(self):
        return self.solution_rank == 1

    def padded_witness(self):
        """The witness lifted back to the full block space."""
        if self.witness is None:
            return None
        q = self.support
        return q @ self.witness @ q.conj().T

    def to_dict(self):
        return {
            "block": list(self.block),
            "support_dim": self.support_dim,
            "solution_rank": self.solution_rank,
            "trivial": self.trivial,
        }


def compress(system):
    """Express each constraint in an orthonormal basis of the factors' span."""
    q = system.support
    return [(q.conj().T @ a, q.conj().T @ b) for a, b in system.constraints]


def opm_triviality(s, p, block, tol=ORTHO_TOL, rank_rtol=RANK_RTOL):
    """Solve for all Hermitian POVM elements of one block that keep the set orthogonal.

    The solution space is computed on the span of the block's local
    factors; the block cannot start a nontrivial orthogonality-preserving
    measurement iff that space is spanned by the identity.
    """
    system = opm_constraints(s, p, block, tol)
    r = system.support_dim
    space = solve_hermitian_constraints(r, compress(system), rank_rtol)
    witness = None
    if space.rank > 1:
        eye = np.eye(r)
        best = None
        for m in space.basis:
            w = m - np.trace(m).real / r * eye
            nrm = np.linalg.norm(w)
            if best is None or nrm > best[0]:
                best = (nrm, w)
        witness = best[1] / best[0]
    return OpmAnalysis(
        block=system.block,
        support_dim=r,
        solution_rank=space.rank,
        witness=witness,
        support=system.support,
        solutions=space,
    )


# -- protocol trees ---------------------------------------------------------------


@dataclass(frozen=True)
class Leaf:
    states: tuple  # labels

    @property
    def tag(self):
        return "singleton" if len(self.states) <= 1 else "walgate-pair"

    def to_dict(self):
        return {"leaf": list(self.states), "tag": self.tag}


@dataclass(frozen=True)
class Node:
    block: tuple  # parties measuring jointly
    groups: tuple  # tuple of tuples of merged computational indices
    children: tuple  # one subtree per group
    states: tuple  # labels entering this node

    def to_dict(self):
        return {
            "block": list(self.block),
            "groups": [list(g) for g in self.groups],
            "children": [c.to_dict() for c in self.children],
        }


def leaves(tree):
    if isinstance(tree, Leaf):
        return [tree]
    return [lf for c in tree.children for lf in leaves(c)]


def depth(tree):
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(depth(c) for c in tree.children)


class _Search:
    """Depth-first search for computational coarse-measurement protocols."""

    def __init__(self, s, p, tol=ORTHO_TOL):
        self.p = p
        self.cg = coarse_grain(s, p)
        self.labels = self.cg.labels
        self.supports = [
            [frozenset(np.flatnonzero(np.abs(st.factors[b]) > tol).tolist()) for b in range(p.k)]
            for st in self.cg.states
        ]
        self.memo = {}
        self.stuck = []

    def components(self, idx, b):
        """Group states by connected support at block ``b``; returns (states, indices) pairs."""
        parent = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        owner = {}
        for i in idx:
            parent[i] = i
            for k in self.supports[i][b]:
                if k in owner:
                    ra, rb = find(owner[k]), find(i)
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)
                else:
                    owner[k] = i
        comps = {}
        for i in idx:
            comps.setdefault(find(i), []).append(i)
        out = []
        for members in comps.values():
            ind = sorted(set().union(*(self.supports[i][b] for i in members)))
            out.append((tuple(members), ind))
        out.sort(key=lambda c: c[1][0])
        return out

    def solve(self, idx):
        idx = tuple(sorted(idx))
        if idx in self.memo:
            return self.memo[idx]
        labels = tuple(self.labels[i] for i in idx)
        if len(idx) <= 2:
            self.memo[idx] = Leaf(labels)
            return self.memo[idx]
        self.memo[idx] = None  # guards against re-entry while in progress
        split_found = False
        result = None
        for b in range(self.p.k):
            comps = self.components(idx, b)
            if len(comps) < 2:
                continue
            split_found = True
            children = []
            for members, _ in comps:
                sub = self.solve(members)
                if sub is None:
                    break
                children.append(sub)
            else:
                result = Node(self.p.blocks[b], self._groups(comps, b), tuple(children), labels)
                break
        if not split_found:
            self.stuck.append(idx)
        self.memo[idx] = result
        return result

    def _groups(self, comps, b):
        # unused indices join the largest group (the "failure" projector)
        dim = self.cg.dims[b]
        groups = [list(ind) for _, ind in comps]
        used = {k for g in groups for k in g}
        rest = [k for k in range(dim) if k not in used]
        if rest:
            big = max(range(len(groups)), key=lambda g: (len(groups[g]), -g))
            groups[big] = sorted(groups[big] + rest)
        return tuple(tuple(g) for g in groups)


def distinguishability_search(s, p, tol=ORTHO_TOL):
    """A protocol tree discriminating ``s`` across ``p``, or ``None`` if none is found."""
    return _Search(s, p, tol).solve(range(len(s)))


@dataclass(frozen=True)
class ReplayReport:
    ok: bool
    problems: tuple


def replay_protocol(s, p, tree, tol=ORTHO_TOL):
    """Check a protocol tree against the set, independently of how it was found."""
    cg = coarse_grain(s, p)
    by_label = {st.label: st for st in cg.states}
    problems = []
    seen = []

    def walk(t, labels):
        if isinstance(t, Leaf):
            if set(t.states) != set(labels):
                problems.append(f"leaf {t.states} does not match arriving states {labels}")
            if len(labels) > 2:
                problems.append(f"leaf with {len(labels)} states")
            if len(labels) == 2:
                a, b = (by_label[x].vector() for x in labels)
                if abs(np.vdot(a, b)) > tol:
                    problems.append(f"leaf states {labels} not orthogonal")
            seen.extend(labels)
            return
        if t.block not in p.blocks:
            problems.append(f"node acts on {t.block}, not a block of {p}")
            return
        b = p.blocks.index(t.block)
        dim = cg.dims[b]
        flat = sorted(k for g in t.groups for k in g)
        if flat != list(range(dim)):
            problems.append(f"groups at block {t.block} do not partition 0..{dim - 1}")
        if len(t.children) != len(t.groups):
            problems.append("child count differs from group count")
            return
        for g, child in zip(t.groups, t.children):
            proj = np.zeros(dim)
            proj[list(g)] = 1
            arriving = []
            for lab in labels:
                f = by_label[lab].normalized_factors()[b]
                kept = np.linalg.norm(proj * f)
                if kept > 1 - tol:
                    arriving.append(lab)
                elif kept > tol:
                    problems.append(f"group {g} disturbs state {lab}")
            walk(child, arriving)

    walk(tree, [st.label for st in cg.states])
    if sorted(seen) != sorted(by_label):
        problems.append("leaves do not cover every state exactly once")
    return ReplayReport(not problems, tuple(problems))


# -- verdicts -----------------------------------------------------------------------


@dataclass(frozen=True)
class IndistinguishabilityCertificate:
    partition: Partition
    subset: tuple  # labels of the states the analyses refer to
    analyses: tuple

    def to_dict(self):
        return {
            "partition": str(self.partition),
            "subset": list(self.subset),
            "blocks": [a.to_dict() for a in self.analyses],
        }


def _all_trivial(s, p, tol, rank_rtol):
    analyses = tuple(opm_triviality(s, p, b, tol, rank_rtol) for b in range(p.k))
    return analyses if all(a.trivial for a in analyses) else None


def indistinguishability_certificate(s, p, tol=ORTHO_TOL, rank_rtol=RANK_RTOL, search=None):
    """All-blocks-trivial OPM certificate for ``s`` or for one of its subsets.

    The full set is tried first.  Failing that, the subsets on which the
    protocol search got stuck (no block can split them by a computational
    coarse measurement) are tried, largest first.  A certificate for a
    subset suffices: a set is LOCC distinguishable only if all its subsets
    are.
    """
    if len(s) < 2 or p.k == 1:
        # one party holding everything measures in the set's own basis
        return None
    analyses = _all_trivial(s, p, tol, rank_rtol)
    if analyses is not None:
        return IndistinguishabilityCertificate(p, tuple(s.labels), analyses)
    if search is None:
        search = _Search(s, p, tol)
        search.solve(range(len(s)))
    for idx in sorted(set(search.stuck), key=lambda t: (-len(t), t)):
        if len(idx) == len(s):
            continue
        sub = s.subset(idx)
        analyses = _all_trivial(sub, p, tol, rank_rtol)
        if analyses is not None:
            return IndistinguishabilityCertificate(p, tuple(sub.labels), analyses)
    return None


@dataclass(frozen=True)
class DistinguishabilityVerdict:
    partition: Partition
    status: str
    tree: object = None
    certificate: IndistinguishabilityCertificate | None = None

    @property
    def distinguishable(self):
        return self.status == DISTINGUISHABLE

    @property
    def conclusive(self):
        return self.status != INCONCLUSIVE

    def to_dict(self):
        cert = None
        if self.tree is not None:
            cert = self.tree.to_dict()
        elif self.certificate is not None:
            cert = self.certificate.to_dict()
        return {"partition": str(self.partition), "status": self.status, "certificate": cert}


def analyze_partition(s, p, tol=ORTHO_TOL, rank_rtol=RANK_RTOL):
    p.validate(s.n_parties)
    search = _Search(s, p, tol)
    tree = search.solve(range(len(s)))
    if tree is not None:
        return DistinguishabilityVerdict(p, DISTINGUISHABLE, tree=tree)
    cert = indistinguishability_certificate(s, p, tol, rank_rtol, search=search)
    if cert is not None:
        return DistinguishabilityVerdict(p, INDISTINGUISHABLE, certificate=cert)
    return DistinguishabilityVerdict(p, INCONCLUSIVE)


def sweep(s, k=None, tol=ORTHO_TOL, rank_rtol=RANK_RTOL):
    """Verdicts for every k-partition (all k when ``k`` is None), in canonical order."""
    m = s.n_parties
    ks = range(1, m + 1) if k is None else [k]
    return [analyze_partition(s, p, tol, rank_rtol) for kk in ks for p in enumerate_k_partitions(m, kk)]


# -- tripartite classification ------------------------------------------------------

CLASS_NAMES = {
    "i": "indistinguishable across every bipartition (genuinely nonlocal)",
    "ii": "indistinguishable across exactly two bipartitions",
    "iii": "indistinguishable across exactly one bipartition",
    "iv": "distinguishable across every bipartition",
}

_TRIPARTITE_BIPARTITIONS = ("1|2,3", "2|1,3", "3|1,2")


@dataclass(frozen=True)
class Classification:
    cls: str | None
    possible: tuple
    bipartitions: tuple  # verdicts for A|BC, B|CA, C|AB
    separate: DistinguishabilityVerdict

    @property
    def fully_distinguishable(self):
        return self.separate.distinguishable

    @property
    def fully_bi_distinguishable(self):
        return self.cls == "iv" and self.separate.status == INDISTINGUISHABLE

    @property
    def inconclusive(self):
        return any(not v.conclusive for v in self.bipartitions) or not self.separate.conclusive

    def to_dict(self):
        return {
            "class": self.cls,
            "description": CLASS_NAMES.get(self.cls),
            "possible_classes": list(self.possible),
            "fully_distinguishable": self.fully_distinguishable,
            "fully_bi_distinguishable": self.fully_bi_distinguishable,
            "inconclusive": self.inconclusive,
            "bipartitions": [v.to_dict() for v in self.bipartitions],
            "all_separate": self.separate.to_dict(),
        }


def classify_tripartite(s, tol=ORTHO_TOL, rank_rtol=RANK_RTOL):
    if s.n_parties != 3:
        raise ValueError(f"classification needs 3 parties, got {s.n_parties}")
    verdicts = tuple(
        analyze_partition(s, Partition.parse(t, 3), tol, rank_rtol) for t in _TRIPARTITE_BIPARTITIONS
    )
    separate = analyze_partition(s, Partition.all_separate(3), tol, rank_rtol)
    n_dist = sum(v.distinguishable for v in verdicts)
    n_open = sum(not v.conclusive for v in verdicts)
    by_count = {0: "i", 1: "ii", 2: "iii", 3: "iv"}
    possible = tuple(by_count[c] for c in range(n_dist, n_dist + n_open + 1))
    cls = possible[0] if len(possible) == 1 else None
    return Classification(cls, possible, verdicts, separate)


# -- threshold and resource placement ----------------------------------------------


@dataclass(frozen=True)
class ThresholdReport:
    verdicts: tuple
    threshold: int | None
    upper_bound_only: bool

    def to_dict(self):
        return {
            "threshold": self.threshold,
            "upper_bound_only": self.upper_bound_only,
            "verdicts": [v.to_dict() for v in self.verdicts],
        }


def threshold_scan(s, tol=ORTHO_TOL, rank_rtol=RANK_RTOL):
    """Smallest largest-block size over partitions that admit a protocol."""
    verdicts = tuple(sweep(s, tol=tol, rank_rtol=rank_rtol))
    sizes = [v.partition.max_block for v in verdicts if v.distinguishable]
    threshold = min(sizes) if sizes else None
    upper = any(
        not v.conclusive and (threshold is None or v.partition.max_block < threshold) for v in verdicts
    )
    return ThresholdReport(verdicts, threshold, upper)


@dataclass(frozen=True)
class ResourceReport:
    pairs: tuple  # valid (i, j), 1-based
    verdicts: tuple

    def to_dict(self):
        return {
            "valid_pairs": [list(pr) for pr in self.pairs],
            "verdicts": [v.to_dict() for v in self.verdicts],
        }


def resource_placement_analysis(s, tol=ORTHO_TOL, rank_rtol=RANK_RTOL):
    """Party pairs whose merging (e.g. by teleportation) makes the set distinguishable."""
    m = s.n_parties
    verdicts = []
    for i, j in combinations(range(1, m + 1), 2):
        blocks = [(i, j)] + [(q,) for q in range(1, m + 1) if q not in (i, j)]
        verdicts.append(analyze_partition(s, Partition(tuple(blocks)), tol, rank_rtol))
    pairs = tuple(
        next(b for b in v.partition.blocks if len(b) == 2) for v in verdicts if v.distinguishable
    )
    return ResourceReport(pairs, tuple(verdicts))
