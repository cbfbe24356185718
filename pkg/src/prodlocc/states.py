"""Orthogonal product-state families and their integrity checks.

Local factors are stored as unnormalised amplitude vectors (small integer
combinations of computational kets); normalisation is applied on demand.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from math import prod

import numpy as np

from .tensor import kron_all

ORTHO_TOL = 1e-9


class StateSetError(ValueError):
    pass


def _as_factor(v):
    v = np.asarray(v, dtype=complex)
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class ProductState:
    factors: tuple
    label: str = ""

    def __post_init__(self):
        facs = tuple(_as_factor(f) for f in self.factors)
        for f in facs:
            if f.ndim != 1 or not np.any(np.abs(f) > 0):
                raise StateSetError(f"state {self.label!r} has a zero or malformed factor")
        object.__setattr__(self, "factors", facs)

    @property
    def dims(self):
        return tuple(len(f) for f in self.factors)

    def normalized_factors(self):
        return tuple(f / np.linalg.norm(f) for f in self.factors)

    def vector(self):
        """Normalised global ket (big-endian over parties)."""
        return kron_all(self.normalized_factors())


@dataclass(frozen=True)
class StateSet:
    dims: tuple
    states: tuple
    name: str = ""
    _labels: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        states = tuple(self.states)
        for s in states:
            if s.dims != dims:
                raise StateSetError(f"state {s.label!r} has dims {s.dims}, set has {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "_labels", {s.label: i for i, s in enumerate(states)})

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    @property
    def n_parties(self):
        return len(self.dims)

    @property
    def labels(self):
        return [s.label for s in self.states]

    def vectors(self):
        """Normalised global kets as the rows of an array."""
        if not self.states:
            return np.zeros((0, prod(self.dims)), dtype=complex)
        return np.array([s.vector() for s in self.states])

    def gram(self):
        v = self.vectors()
        return v.conj() @ v.T

    def subset(self, selector, name=None):
        """Sub-family chosen by labels or positional indices, in the given order."""
        idx = [self._labels[k] if isinstance(k, str) else int(k) for k in selector]
        return StateSet(self.dims, [self.states[i] for i in idx], name or self.name)


# -- ket strings ---------------------------------------------------------------

_TERM = re.compile(r"([+-]?)(\d+)")


def parse_factor(text, d):
    """``"0-1"`` -> amplitudes (1, -1, 0, ...) of length ``d``."""
    v = np.zeros(d, dtype=complex)
    pos = 0
    text = text.replace(" ", "")
    for m in _TERM.finditer(text):
        if m.start() != pos:
            raise StateSetError(f"cannot parse local ket {text!r}")
        k = int(m.group(2))
        if k >= d:
            raise StateSetError(f"index {k} out of range for dimension {d}")
        v[k] += -1 if m.group(1) == "-" else 1
        pos = m.end()
    if pos != len(text) or not text:
        raise StateSetError(f"cannot parse local ket {text!r}")
    return v


def parse_product(text, dims, label=None):
    """``"0,0,1,0+1"`` -> ProductState; factors separated by commas."""
    parts = text.split(",")
    if len(parts) != len(dims):
        raise StateSetError(f"{text!r} has {len(parts)} factors, expected {len(dims)}")
    facs = [parse_factor(p, d) for p, d in zip(parts, dims)]
    return ProductState(facs, label if label is not None else ket_label(parts))


def ket_label(parts):
    return "".join(f"|{p}>" for p in parts)


def expand_pm(text):
    """Expand each ``±`` in a ket string into the ``+`` and ``-`` variants."""
    if "±" not in text:
        return [text]
    head, tail = text.split("±", 1)
    return [v for sign in "+-" for v in expand_pm(head + sign + tail)]


def from_strings(dims, rows, name):
    states = []
    for row in rows:
        for t in expand_pm(row):
            states.append(parse_product(t, dims))
    return StateSet(dims, states, name)


# -- families --------------------------------------------------------------------

_BENNETT_QUTRIT = ["0,0±1", "0±1,2", "2,1±2", "1±2,0", "1,1"]


def bennett_qutrit_basis():
    """Nine-state orthogonal product basis of two qutrits."""
    return from_strings((3, 3), _BENNETT_QUTRIT, "bennett-qutrit")


def bennett_subset_S():
    """The first eight states of the two-qutrit basis (``|1>|1>`` removed)."""
    return from_strings((3, 3), _BENNETT_QUTRIT[:4], "bennett-S")


def bennett_three_qubit_basis():
    rows = ["0,1,0±1", "1,0±1,0", "0±1,0,1", "0,0,0", "1,1,1"]
    return from_strings((2, 2, 2), rows, "bennett-3qubit")


def eq3_set(m, d):
    """Cyclic family of ``2m(d-1)`` states in ``(C^d)^{⊗m}``.

    Family ``j`` (1-based) places ``|i>`` at party ``m-j`` and ``|0±i>`` at
    party ``m-j+1`` (positions cyclic, 1-based), ``|0>`` elsewhere.
    """
    if m < 3 or d < 3:
        raise StateSetError(f"need m >= 3 and d >= 3, got m={m}, d={d}")
    dims = (d,) * m
    states = []
    for j in range(1, m + 1):
        pos_i = (m - j - 1) % m
        pos_pm = (m - j) % m
        for i in range(1, d):
            for sign, suffix in (("+", ""), ("-", "^perp")):
                parts = ["0"] * m
                parts[pos_i] = str(i)
                parts[pos_pm] = f"0{sign}{i}"
                st = parse_product(",".join(parts), dims, f"psi_{{{j},{i}}}{suffix}")
                states.append(st)
    s = StateSet(dims, states, f"eq3-m{m}-d{d}")
    _require_orthogonal(s)
    return s


def cyclic_tripartite_set(d):
    """The ``6(d-1)`` tripartite states ``psi_{ji}``, ``psi_{ji}^perp`` in ``(C^d)^{⊗3}``."""
    if d < 3:
        raise StateSetError(f"need d >= 3, got {d}")
    s = eq3_set(3, d)
    return StateSet(s.dims, s.states, f"eq1-d{d}")


halder_tripartite_set = cyclic_tripartite_set  # name fixed by the public API


_EQ2 = [
    "0-1,0,0", "0+1,0,0",
    "2-0,1,0", "2+0,1,0",
    "1,1,0-1", "1,1,0+1",
    "1-2,0,1", "1+2,0,1",
    "0,0-1,1", "0,0+1,1",
]


def eq2_set():
    """Ten states in ``C^3 ⊗ C^2 ⊗ C^2``, labelled ``psi1`` ... ``psi10``."""
    dims = (3, 2, 2)
    states = [parse_product(t, dims, f"psi{k}") for k, t in enumerate(_EQ2, 1)]
    return StateSet(dims, states, "eq2")


def six_state_set():
    """``psi1, psi3, psi5, psi7, psi9`` of the ten-state set plus ``|s> = |0+1+2>|0+1>|0+1>``."""
    base = eq2_set().subset(["psi1", "psi3", "psi5", "psi7", "psi9"])
    s = parse_product("0+1+2,0+1,0+1", base.dims, "s")
    return StateSet(base.dims, list(base.states) + [s], "six-state")


_EQ5_TWISTED = [
    "0,0,1,0±1", "0,0,2,0±2", "2,1,0,0±1", "1,1,2,0±1", "2,1,2,0±2",
    "0,1,0±1,0", "0,2,0±2,0", "1,0,0±1,2", "1,2,0±1,1", "1,2,0±2,2",
    "1,0±1,0,0", "2,0±2,0,0", "0,0±1,2,1", "2,0±1,1,1", "2,0±2,2,1",
    "0±1,0,0,1", "0±2,0,0,2", "0±1,2,1,0", "0±1,1,1,2", "0±2,2,1,2",
]

_EQ5_PLAIN = [
    "0000", "0012", "0101", "0102", "0111", "0120",
    "0122", "0201", "0202", "0211", "0221", "0222",
    "1010", "1011", "1020", "1021", "1022", "1101",
    "1102", "1110", "1111", "1122", "1200", "1212",
    "1220", "1221", "2001", "2010", "2012", "2020",
    "2022", "2102", "2110", "2112", "2121", "2201",
    "2202", "2210", "2211", "2220", "2222",
]


def eq5_basis():
    """Complete 81-state product basis of four qutrits: 40 twisted, 41 computational."""
    rows = _EQ5_TWISTED + [",".join(p) for p in _EQ5_PLAIN]
    return from_strings((3, 3, 3, 3), rows, "eq5")


def eq5_cyclic_subset():
    """The 16 states of the basis that coincide with the four-party cyclic family."""
    full = eq5_basis()
    picks = [0, 1, 2, 3, 10, 11, 12, 13, 20, 21, 22, 23, 30, 31, 32, 33]
    return full.subset(picks, "eq5-cyclic16")


def computational_basis(dims):
    dims = tuple(dims)
    states = []
    for idx in np.ndindex(*dims):
        facs = []
        for k, d in zip(idx, dims):
            v = np.zeros(d)
            v[k] = 1
            facs.append(v)
        states.append(ProductState(facs, ket_label(map(str, idx))))
    return StateSet(dims, states, "computational-" + "x".join(map(str, dims)))


# -- checks ----------------------------------------------------------------------


@dataclass(frozen=True)
class SetReport:
    orthogonal: bool
    complete: bool
    gram_residual: float
    completeness_residual: float | None

    def to_dict(self):
        return {
            "orthogonal": self.orthogonal,
            "complete": self.complete,
            "gram_residual": self.gram_residual,
            "completeness_residual": self.completeness_residual,
        }


def verify_set(s, tol=ORTHO_TOL):
    g = s.gram()
    off = g - np.diag(np.diag(g))
    gram_residual = float(np.max(np.abs(off), initial=0.0))
    orthogonal = gram_residual <= tol
    full = prod(s.dims)
    comp_resid = None
    complete = False
    if len(s) == full:
        v = s.vectors()
        comp_resid = float(np.max(np.abs(v.T @ v.conj() - np.eye(full))))
        complete = comp_resid <= tol
    return SetReport(orthogonal, complete, gram_residual, comp_resid)


def _require_orthogonal(s):
    rep = verify_set(s)
    if not rep.orthogonal:
        raise StateSetError(f"{s.name}: states not orthogonal (max overlap {rep.gram_residual:.3g})")


# -- JSON ------------------------------------------------------------------------


def to_json_dict(s):
    return {
        "name": s.name,
        "dims": list(s.dims),
        "states": [
            {
                "label": st.label,
                "factors": [[[float(a.real), float(a.imag)] for a in f] for f in st.factors],
            }
            for st in s.states
        ],
    }


def from_json_dict(data):
    try:
        dims = tuple(int(d) for d in data["dims"])
        states = []
        for k, entry in enumerate(data["states"]):
            facs = [np.array([complex(re_, im) for re_, im in f]) for f in entry["factors"]]
            states.append(ProductState(facs, entry.get("label", f"state{k}")))
        return StateSet(dims, states, data.get("name", ""))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, StateSetError):
            raise
        raise StateSetError(f"malformed state-set JSON: {exc}") from exc


def load_json(path):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise StateSetError(f"{path}: invalid JSON: {exc}") from exc
    return from_json_dict(data)
