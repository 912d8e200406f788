"""Set partitions of ``{0, ..., n-1}`` ordered by reverse refinement.

``leq(a, b)`` means every block of ``b`` is a union of blocks of ``a``, so the
finest partition (all singletons) is the bottom element.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

__all__ = [
    "Partition",
    "PartitionTuple",
    "meet",
    "join",
    "leq",
    "enumerate_above",
    "enumerate_partitions",
    "kernel_of",
    "moebius_coefficient",
    "bell_number",
]


class Partition:
    """Immutable set partition in canonical form.

    Blocks are sorted tuples, ordered by their least element, so two
    partitions compare and hash equal exactly when they are the same.
    """

    __slots__ = ("_n", "_blocks", "_labels")

    def __init__(self, ground_size: int, blocks: Iterable[Iterable[int]]) -> None:
        if ground_size < 0:
            raise ValueError("ground_size must be nonnegative")
        labels = [-1] * ground_size
        canon = []
        for block in blocks:
            b = tuple(sorted(set(block)))
            if not b:
                raise ValueError("empty block")
            for v in b:
                if not 0 <= v < ground_size:
                    raise ValueError(f"element {v} outside 0..{ground_size - 1}")
                if labels[v] != -1:
                    raise ValueError(f"element {v} appears in two blocks")
                labels[v] = 0
            canon.append(b)
        if any(x == -1 for x in labels):
            missing = [v for v, x in enumerate(labels) if x == -1]
            raise ValueError(f"blocks do not cover elements {missing}")
        canon.sort(key=lambda b: b[0])
        for i, b in enumerate(canon):
            for v in b:
                labels[v] = i
        self._n = ground_size
        self._blocks = tuple(canon)
        self._labels = tuple(labels)

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> Partition:
        """Partition whose blocks are the fibres of ``labels``."""
        groups: dict[int, list[int]] = {}
        for v, x in enumerate(labels):
            groups.setdefault(x, []).append(v)
        return cls(len(labels), groups.values())

    @classmethod
    def bottom(cls, n: int) -> Partition:
        return cls(n, ([v] for v in range(n)))

    @classmethod
    def top(cls, n: int) -> Partition:
        return cls(n, [range(n)] if n else [])

    @property
    def ground_size(self) -> int:
        return self._n

    @property
    def blocks(self) -> tuple[tuple[int, ...], ...]:
        return self._blocks

    @property
    def labels(self) -> tuple[int, ...]:
        """Block index of each element (blocks numbered in canonical order)."""
        return self._labels

    def __len__(self) -> int:
        return len(self._blocks)

    def block_of(self, v: int) -> int:
        return self._labels[v]

    def same_block(self, v: int, w: int) -> bool:
        return self._labels[v] == self._labels[w]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self._n == other._n and self._blocks == other._blocks

    def __hash__(self) -> int:
        return hash((self._n, self._blocks))

    def __repr__(self) -> str:
        inner = ", ".join("{" + ",".join(map(str, b)) + "}" for b in self._blocks)
        return f"Partition({self._n}, [{inner}])"

    def named(self, names: Sequence[str]) -> list[list[str]]:
        """Blocks with elements replaced by external names."""
        return [[names[v] for v in b] for b in self._blocks]


def _check_sizes(a: Partition, b: Partition) -> None:
    if a.ground_size != b.ground_size:
        raise ValueError(f"ground sizes differ: {a.ground_size} vs {b.ground_size}")


def meet(a: Partition, b: Partition) -> Partition:
    """Coarsest common refinement."""
    _check_sizes(a, b)
    return Partition.from_labels(list(zip(a.labels, b.labels)))


def _find(parent: list[int], x: int) -> int:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def join(a: Partition, b: Partition) -> Partition:
    """Finest common coarsening (union-find over both block systems)."""
    _check_sizes(a, b)
    parent = list(range(a.ground_size))
    for p in (a, b):
        for block in p.blocks:
            r0 = _find(parent, block[0])
            for v in block[1:]:
                r = _find(parent, v)
                if r != r0:
                    parent[r] = r0
    return Partition.from_labels([_find(parent, v) for v in range(a.ground_size)])


def leq(a: Partition, b: Partition) -> bool:
    """True iff ``a`` refines ``b``."""
    _check_sizes(a, b)
    lb = b.labels
    return all(len({lb[v] for v in block}) == 1 for block in a.blocks)


def _restricted_growth(k: int) -> Iterator[list[int]]:
    # restricted growth strings enumerate set partitions of k items lazily
    if k == 0:
        yield []
        return
    rgs = [0] * k
    maxes = [0] * k
    while True:
        yield list(rgs)
        i = k - 1
        while i > 0 and rgs[i] == maxes[i - 1] + 1:
            i -= 1
        if i == 0:
            return
        rgs[i] += 1
        maxes[i] = max(maxes[i - 1], rgs[i])
        for j in range(i + 1, k):
            rgs[j] = 0
            maxes[j] = maxes[i]


def enumerate_above(floor: Partition) -> Iterator[Partition]:
    """Lazily yield every partition ``p`` with ``leq(floor, p)``, once each."""
    blocks = floor.blocks
    for rgs in _restricted_growth(len(blocks)):
        groups: dict[int, list[int]] = {}
        for block, g in zip(blocks, rgs):
            groups.setdefault(g, []).extend(block)
        yield Partition(floor.ground_size, groups.values())


def enumerate_partitions(n: int) -> Iterator[Partition]:
    """All partitions of ``{0, ..., n-1}``."""
    return enumerate_above(Partition.bottom(n))


def kernel_of(mapping: Sequence[object]) -> Partition:
    """Partition identifying positions that carry equal values."""
    if len(mapping) == 0:
        raise ValueError("kernel_of needs a nonempty map")
    return Partition.from_labels(list(mapping))


def moebius_coefficient(a: Partition, b: Partition) -> int:
    """Moebius function of the interval ``[a, b]`` in the partition lattice.

    The interval factors as a product of full partition lattices, one per
    block of ``b``, each of rank ``m - 1`` where ``m`` counts the blocks of
    ``a`` inside it.
    """
    if not leq(a, b):
        raise ValueError("moebius_coefficient needs leq(a, b)")
    counts: dict[int, int] = {}
    for block in a.blocks:
        j = b.labels[block[0]]
        counts[j] = counts.get(j, 0) + 1
    result = 1
    for m in counts.values():
        result *= (-1) ** (m - 1) * math.factorial(m - 1)
    return result


def bell_number(n: int) -> int:
    """Number of set partitions of an ``n``-element set (Bell triangle)."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


@dataclass(frozen=True)
class PartitionTuple:
    """One partition of the same ground set per string."""

    strings: tuple[str, ...]
    parts: tuple[Partition, ...]

    def __post_init__(self) -> None:
        if len(self.strings) != len(self.parts):
            raise ValueError("one partition per string required")
        if len(set(self.strings)) != len(self.strings):
            raise ValueError("duplicate string ids")
        sizes = {p.ground_size for p in self.parts}
        if len(sizes) > 1:
            raise ValueError(f"partitions have different ground sizes {sorted(sizes)}")

    @classmethod
    def from_mapping(cls, strings: Sequence[str], parts: Mapping[str, Partition]) -> PartitionTuple:
        return cls(tuple(strings), tuple(parts[s] for s in strings))

    @property
    def ground_size(self) -> int:
        return self.parts[0].ground_size if self.parts else 0

    def __getitem__(self, s: str) -> Partition:
        try:
            return self.parts[self.strings.index(s)]
        except ValueError:
            raise KeyError(s) from None

    def items(self) -> Iterator[tuple[str, Partition]]:
        return iter(zip(self.strings, self.parts))

    def block_counts(self) -> tuple[int, ...]:
        return tuple(len(p) for p in self.parts)
