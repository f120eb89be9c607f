"""Batcher odd-even merge sorting networks and cut accounting."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..errors import DomainError, SizeError

Comparator = Tuple[int, int]
MAX_WIRES = 64


@dataclass(frozen=True)
class SortingNetwork:
    """Layers of comparators; a comparator ``(i, j)`` with ``i < j`` puts the minimum on ``i``."""

    n_wires: int
    layers: Tuple[Tuple[Comparator, ...], ...]

    def __post_init__(self) -> None:
        layers = tuple(tuple(sorted((min(i, j), max(i, j)) for i, j in layer)) for layer in self.layers)
        object.__setattr__(self, "layers", layers)
        for k, layer in enumerate(layers):
            touched: set = set()
            for i, j in layer:
                if i == j or not (0 <= i < self.n_wires and 0 <= j < self.n_wires):
                    raise DomainError(f"bad comparator {(i, j)} in layer {k}")
                if i in touched or j in touched:
                    raise DomainError(f"layer {k} reuses a wire")
                touched.update((i, j))

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def size(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def apply(self, values: Sequence[int]) -> List[int]:
        v = list(values)
        for layer in self.layers:
            for i, j in layer:
                if v[i] > v[j]:
                    v[i], v[j] = v[j], v[i]
        return v

    def dump(self) -> str:
        """One line per layer, comparators as ``i:j``."""
        return "\n".join(" ".join(f"{i}:{j}" for i, j in layer) for layer in self.layers) + "\n"

    @classmethod
    def load(cls, n_wires: int, text: str) -> "SortingNetwork":
        layers = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            try:
                layers.append(tuple(tuple(int(x) for x in tok.split(":")) for tok in line.split()))
            except ValueError as exc:
                raise DomainError(f"bad network line {line!r}") from exc
        return cls(n_wires, tuple(layers))


def _parallel(a: List[List[Comparator]], b: List[List[Comparator]]) -> List[List[Comparator]]:
    out = []
    for k in range(max(len(a), len(b))):
        out.append((a[k] if k < len(a) else []) + (b[k] if k < len(b) else []))
    return out


def _merge(lo: int, n: int, r: int) -> List[List[Comparator]]:
    """Layers merging the two sorted halves of the ``r``-strided subsequence starting at ``lo``."""
    step = 2 * r
    if step >= n:
        return [[(lo, lo + r)]]
    layers = _parallel(_merge(lo, n, step), _merge(lo + r, n, step))
    layers.append([(i, i + r) for i in range(lo + r, lo + n - r, step)])
    return layers


def _sort(lo: int, n: int) -> List[List[Comparator]]:
    if n <= 1:
        return []
    half = n // 2
    return _parallel(_sort(lo, half), _sort(lo + half, half)) + _merge(lo, n, 1)


def batcher(n_wires: int) -> SortingNetwork:
    """Odd-even merge sort on ``n_wires`` (a power of two, at most 64)."""
    if n_wires < 1 or n_wires & (n_wires - 1):
        raise DomainError(f"n_wires must be a power of two, got {n_wires}")
    if n_wires > MAX_WIRES:
        raise SizeError(f"n_wires capped at {MAX_WIRES}")
    return SortingNetwork(n_wires, tuple(tuple(layer) for layer in _sort(0, n_wires)))


def expected_depth(n_wires: int) -> int:
    """Layer count of the recursive construction: ``k (k + 1) / 2`` for ``n = 2**k``."""
    k = n_wires.bit_length() - 1
    return k * (k + 1) // 2


def check_zero_one(net: SortingNetwork, cap: int = 20) -> Tuple[int, int]:
    """Number of sorted outputs over all ``2**n`` Boolean inputs, and the total."""
    n = net.n_wires
    if n > cap:
        raise SizeError(f"exhaustive 0-1 check capped at {cap} wires")
    idx = np.arange(1 << n, dtype=np.int64)
    v = ((idx[:, None] >> np.arange(n)) & 1).astype(np.int8)
    for layer in net.layers:
        for i, j in layer:
            lo = np.minimum(v[:, i], v[:, j])
            hi = np.maximum(v[:, i], v[:, j])
            v[:, i], v[:, j] = lo, hi
    ok = np.all(v[:, :-1] <= v[:, 1:], axis=1) if n > 1 else np.ones(len(idx), dtype=bool)
    return int(ok.sum()), len(idx)


@dataclass
class CutReport:
    """``table[layer][c - 1]`` counts comparators ``(i, j)`` with ``i < c <= j``."""

    n_wires: int
    table: List[List[int]]

    @property
    def per_layer_max(self) -> List[int]:
        return [max(row) if row else 0 for row in self.table]

    @property
    def per_cut_total(self) -> List[int]:
        return [sum(col) for col in zip(*self.table)] if self.table else []

    @property
    def global_max(self) -> int:
        return max(self.per_layer_max, default=0)

    def as_text(self) -> str:
        lines = ["layer " + " ".join(f"c{c}" for c in range(1, self.n_wires))]
        for k, row in enumerate(self.table):
            lines.append(f"{k:>5} " + " ".join(str(v) for v in row))
        lines.append(f"max {self.global_max}")
        return "\n".join(lines)


def cut_accounting(net: SortingNetwork) -> CutReport:
    table = []
    for layer in net.layers:
        row = [0] * max(net.n_wires - 1, 0)
        for i, j in layer:
            for c in range(i + 1, j + 1):
                row[c - 1] += 1
        table.append(row)
    return CutReport(net.n_wires, table)


def cut_growth(sizes: Sequence[int]) -> Dict[int, int]:
    """Global max cut for each network size."""
    return {n: cut_accounting(batcher(n)).global_max for n in sizes}
