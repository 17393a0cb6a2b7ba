"""Finite groups as validated Cayley tables, plus the built-in library.

A group of order n is stored as an n by n table of element indices with
``table[a, b] = a*b``.  Validation happens at construction and raises
``GroupTableError`` naming the violated axiom (bad row, missing identity,
associativity failure), so everything downstream can assume a genuine
group.  Functions on a group are plain complex arrays indexed by element.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Tuple, Union

import numpy as np

__all__ = [
    "GroupTableError",
    "FiniteGroup",
    "GroupFunction",
    "cyclic_group",
    "symmetric_group",
    "dihedral_group",
    "quaternion_group",
    "direct_product",
    "group_from_table",
    "group_from_name",
    "load_group",
    "BUILTIN_GROUP_NAMES",
]


class GroupTableError(ValueError):
    """A multiplication table that fails one of the group axioms."""


def _validate_table(table: np.ndarray) -> Tuple[int, np.ndarray]:
    """Check the group axioms; return (identity index, inverse array)."""
    if table.ndim != 2 or table.shape[0] != table.shape[1]:
        raise GroupTableError(f"table must be square, got shape {table.shape}")
    n = table.shape[0]
    if n == 0:
        raise GroupTableError("empty table")
    if table.min() < 0 or table.max() >= n:
        raise GroupTableError(
            f"table entries must be element indices in [0, {n}), "
            f"found {table.min()}..{table.max()}"
        )
    ref = np.arange(n)
    for i in range(n):
        if not np.array_equal(np.sort(table[i]), ref):
            raise GroupTableError(f"row {i} is not a permutation (Latin square fails)")
    for j in range(n):
        if not np.array_equal(np.sort(table[:, j]), ref):
            raise GroupTableError(
                f"column {j} is not a permutation (Latin square fails)"
            )

    identity = None
    for e in range(n):
        if np.array_equal(table[e], ref) and np.array_equal(table[:, e], ref):
            identity = e
            break
    if identity is None:
        raise GroupTableError("no identity element")

    left = table[table]  # left[a, b, c] = (a*b)*c
    right = table[:, table]  # right[a, b, c] = a*(b*c)
    if not np.array_equal(left, right):
        a, b, c = (int(v) for v in np.argwhere(left != right)[0])
        raise GroupTableError(f"associativity fails at triple ({a}, {b}, {c})")

    inverses = np.empty(n, dtype=int)
    for g in range(n):
        h = int(np.flatnonzero(table[g] == identity)[0])
        if table[h, g] != identity:
            raise GroupTableError(f"element {g} has no two-sided inverse")
        inverses[g] = h
    return identity, inverses


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """A finite group given by its Cayley table (validated on construction)."""

    cayley: np.ndarray
    name: str = ""
    identity: int = field(init=False)
    inverses: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        table = np.asarray(self.cayley, dtype=int)
        identity, inverses = _validate_table(table)
        object.__setattr__(self, "cayley", table)
        object.__setattr__(self, "identity", identity)
        object.__setattr__(self, "inverses", inverses)

    @property
    def order(self) -> int:
        return self.cayley.shape[0]

    def mul(self, a: int, b: int) -> int:
        return int(self.cayley[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverses[a])

    def elements(self) -> range:
        return range(self.order)

    @property
    def is_abelian(self) -> bool:
        return np.array_equal(self.cayley, self.cayley.T)

    def noncommuting_pair(self) -> Optional[Tuple[int, int]]:
        """A witness (a, b) with ab != ba, or None for abelian groups."""
        diff = np.argwhere(self.cayley != self.cayley.T)
        if diff.size == 0:
            return None
        a, b = diff[0]
        return int(a), int(b)

    def __repr__(self) -> str:
        label = self.name or "group"
        return f"FiniteGroup({label}, order={self.order})"


@dataclass
class GroupFunction:
    """A complex-valued function on a finite group, indexed by element."""

    group: FiniteGroup
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=complex).ravel()
        if vals.shape[0] != self.group.order:
            raise ValueError(
                f"function has {vals.shape[0]} values for a group of order "
                f"{self.group.order}"
            )
        self.values = vals

    def __call__(self, s: int) -> complex:
        return complex(self.values[s])

    @classmethod
    def delta(cls, group: FiniteGroup, s: Optional[int] = None) -> "GroupFunction":
        """Indicator of a single element (the identity by default)."""
        vals = np.zeros(group.order, dtype=complex)
        vals[group.identity if s is None else s] = 1.0
        return cls(group, vals)

    @classmethod
    def one(cls, group: FiniteGroup) -> "GroupFunction":
        return cls(group, np.ones(group.order, dtype=complex))

    @classmethod
    def character(cls, group: FiniteGroup, k: int) -> "GroupFunction":
        """The k-th character of a cyclic group (requires Z_n labeling)."""
        n = group.order
        if not np.array_equal(group.cayley, cyclic_group(n).cayley):
            raise ValueError("characters by index require a cyclic group table")
        t = np.arange(n)
        return cls(group, np.exp(2j * np.pi * k * t / n))

    def pointwise(self, other: "GroupFunction") -> "GroupFunction":
        if other.group is not self.group and other.group.order != self.group.order:
            raise ValueError("group mismatch in pointwise product")
        return GroupFunction(self.group, self.values * other.values)

    def outer(self, other: "GroupFunction") -> "GroupFunction":
        """(u x v)(s, t) = u(s) v(t) on the direct product group."""
        prod = direct_product(self.group, other.group)
        vals = np.kron(self.values, other.values)
        return GroupFunction(prod, vals)


def cyclic_group(n: int) -> FiniteGroup:
    if n < 1:
        raise ValueError("cyclic group needs order >= 1")
    a = np.arange(n)
    return FiniteGroup((a[:, None] + a[None, :]) % n, name=f"Z_{n}")


def symmetric_group(n: int) -> FiniteGroup:
    """S_n with elements in lexicographic permutation order."""
    perms = list(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    size = len(perms)
    table = np.empty((size, size), dtype=int)
    for i, p in enumerate(perms):
        for j, q in enumerate(perms):
            table[i, j] = index[tuple(p[q[k]] for k in range(n))]
    return FiniteGroup(table, name=f"S_{n}")


def dihedral_group(n: int) -> FiniteGroup:
    """D_n of order 2n: rotations r^k and reflections r^k s."""
    if n < 1:
        raise ValueError("dihedral group needs n >= 1")

    def idx(k: int, f: int) -> int:
        return k % n + n * f

    size = 2 * n
    table = np.empty((size, size), dtype=int)
    for k1 in range(n):
        for f1 in range(2):
            for k2 in range(n):
                for f2 in range(2):
                    sign = -1 if f1 else 1
                    table[idx(k1, f1), idx(k2, f2)] = idx(k1 + sign * k2, (f1 + f2) % 2)
    return FiniteGroup(table, name=f"D_{n}")


_QUATERNION_UNITS = [
    (1, 0, 0, 0), (-1, 0, 0, 0),
    (0, 1, 0, 0), (0, -1, 0, 0),
    (0, 0, 1, 0), (0, 0, -1, 0),
    (0, 0, 0, 1), (0, 0, 0, -1),
]


def quaternion_group() -> FiniteGroup:
    """Q_8 = {+-1, +-i, +-j, +-k} under the Hamilton product."""

    def hamilton(a, b):
        w1, x1, y1, z1 = a
        w2, x2, y2, z2 = b
        return (
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    index = {u: i for i, u in enumerate(_QUATERNION_UNITS)}
    table = np.empty((8, 8), dtype=int)
    for i, a in enumerate(_QUATERNION_UNITS):
        for j, b in enumerate(_QUATERNION_UNITS):
            table[i, j] = index[hamilton(a, b)]
    return FiniteGroup(table, name="Q_8")


def direct_product(g: FiniteGroup, h: FiniteGroup) -> FiniteGroup:
    """G x H with (a, b) encoded as a*|H| + b."""
    nh = h.order
    tg = g.cayley
    th = h.cayley
    table = (tg[:, None, :, None] * nh + th[None, :, None, :]).reshape(
        g.order * nh, g.order * nh
    )
    name = f"{g.name or 'G'}x{h.name or 'H'}"
    return FiniteGroup(table, name=name)


def group_from_table(
    table: Iterable[int], order: int, identity: Optional[int] = None, name: str = ""
) -> FiniteGroup:
    """Build a group from a row-major flattened table, cross-checking identity."""
    flat = np.asarray(list(table), dtype=int)
    if flat.size != order * order:
        raise GroupTableError(
            f"table has {flat.size} entries, expected order^2 = {order * order}"
        )
    group = FiniteGroup(flat.reshape(order, order), name=name)
    if identity is not None and group.identity != identity:
        raise GroupTableError(
            f"declared identity {identity} but the table identity is {group.identity}"
        )
    return group


def _builtin_factories() -> Dict[str, object]:
    reg: Dict[str, object] = {f"Z_{n}": (lambda n=n: cyclic_group(n)) for n in range(2, 9)}
    reg["S_3"] = lambda: symmetric_group(3)
    reg["S_4"] = lambda: symmetric_group(4)
    reg["D_4"] = lambda: dihedral_group(4)
    reg["Q_8"] = quaternion_group
    return reg


_BUILTINS = _builtin_factories()
BUILTIN_GROUP_NAMES = tuple(sorted(_BUILTINS))


def group_from_name(name: str) -> FiniteGroup:
    """Resolve a built-in name, or an 'AxB' direct product of built-ins."""
    if name in _BUILTINS:
        return _BUILTINS[name]()
    if "x" in name:
        head, _, tail = name.partition("x")
        if head and tail:
            return direct_product(group_from_name(head), group_from_name(tail))
    raise GroupTableError(
        f"unknown group {name!r}; built-ins: {', '.join(BUILTIN_GROUP_NAMES)} "
        "(products like Z_2xZ_3 also work)"
    )


def load_group(source: Union[str, "os.PathLike"]) -> FiniteGroup:
    """A built-in name, a product name, or a path to a JSON table file.

    The file format is one JSON object with integer fields ``order`` and
    ``identity`` and a row-major flattened ``table`` of order^2 indices.
    """
    import os

    text = str(source)
    if not os.path.exists(text):
        try:
            return group_from_name(text)
        except KeyError:
            raise GroupTableError(
                f"{text!r} is neither a built-in group nor an existing file"
            ) from None
    with open(text, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GroupTableError(f"invalid JSON in group file {text}: {exc}") from exc
    for key in ("order", "table"):
        if key not in doc:
            raise GroupTableError(f"group file {text} is missing field {key!r}")
    return group_from_table(
        doc["table"],
        int(doc["order"]),
        identity=int(doc["identity"]) if "identity" in doc else None,
        name=str(doc.get("name", os.path.basename(text))),
    )
