"""Sparse graph substrate: CSR adjacency and matrix-free spectral operators.

The CSR adjacency is the single source of truth. The normalized Laplacian
L = I - D^{-1/2} A D^{-1/2}, its reflection 2I - L, and the self-loop
normalized propagation D_hat^{-1/2} (A+I) D_hat^{-1/2} are all applied
matrix-free: no operator matrix is ever materialized, sparsely or densely.

Isolated nodes: D^{-1/2} is undefined at degree 0, so the normalized
adjacency row/column of an isolated node is taken to be zero. L then acts
as the identity on that node, which keeps the spectrum inside [0, 2].
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DataError, InputError


@dataclass(frozen=True)
class SparseGraph:
    """Undirected, unweighted graph in CSR form.

    ``col_idx`` is sorted within each row and duplicate-free; edge (u, v) is
    stored in both rows (a self-loop is stored once). ``degrees[i]`` equals
    the number of stored neighbors of node i, as a float so degree-modifying
    variants stay representable.
    """

    n: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    degrees: np.ndarray

    def __post_init__(self):
        for a in (self.row_ptr, self.col_idx, self.degrees):
            a.flags.writeable = False

    @property
    def nnz(self) -> int:
        return int(self.col_idx.shape[0])

    @cached_property
    def num_self_loops(self) -> int:
        rows = np.repeat(np.arange(self.n), np.diff(self.row_ptr))
        return int(np.count_nonzero(rows == self.col_idx))

    @cached_property
    def num_edges(self) -> int:
        """Undirected edge count; each self-loop counts once."""
        return (self.nnz + self.num_self_loops) // 2

    @cached_property
    def fingerprint(self) -> int:
        crc = zlib.crc32(self.row_ptr.tobytes())
        return zlib.crc32(self.col_idx.tobytes(), crc)

    def neighbors(self, i: int) -> np.ndarray:
        return self.col_idx[self.row_ptr[i]:self.row_ptr[i + 1]]

    # Apply-loop caches; reduceat needs strictly increasing segment starts,
    # so empty rows are masked out once here instead of per call.
    @cached_property
    def _nonempty_rows(self) -> np.ndarray | None:
        mask = self.row_ptr[1:] > self.row_ptr[:-1]
        return None if mask.all() else mask

    @cached_property
    def _inv_sqrt_degrees(self) -> np.ndarray:
        d = np.zeros(self.n)
        pos = self.degrees > 0
        d[pos] = 1.0 / np.sqrt(self.degrees[pos])
        d.flags.writeable = False
        return d


def build_csr(edges, n: int) -> SparseGraph:
    """Build a symmetric, deduplicated, row-sorted CSR adjacency.

    ``edges`` is an iterable of (u, v) pairs; each pair is mirrored, and
    duplicates (including pre-mirrored inputs) collapse to one stored entry
    per direction. Self-loops in the input are preserved exactly once.
    """
    if n < 0:
        raise InputError(f"node count must be non-negative, got {n}")
    pairs = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
    if pairs.size and (pairs.min() < 0 or pairs.max() >= n):
        bad = pairs[(pairs < 0).any(axis=1) | (pairs >= n).any(axis=1)][0]
        raise InputError(f"edge ({bad[0]}, {bad[1]}) out of range for n={n}")

    u, v = pairs[:, 0], pairs[:, 1]
    src = np.concatenate([u, v])
    dst = np.concatenate([v, u])
    keys = src * n + dst if n > 0 else src
    keys = np.unique(keys)
    if n > 0:
        src, dst = keys // n, keys % n
    else:
        src = dst = keys

    counts = np.bincount(src, minlength=n)
    row_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=row_ptr[1:])
    return SparseGraph(
        n=n,
        row_ptr=row_ptr,
        col_idx=dst.astype(np.int64),
        degrees=counts.astype(np.float64),
    )


def _as_columns(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        return arr[:, None], True
    if arr.ndim != 2:
        raise InputError(f"expected vector or matrix, got ndim={arr.ndim}")
    return arr, False


def _check_rows(g: SparseGraph, X: np.ndarray):
    if X.shape[0] != g.n:
        raise InputError(f"feature rows {X.shape[0]} != node count {g.n}")


def adjacency_apply(g: SparseGraph, X) -> np.ndarray:
    """A @ X from the CSR structure; rows without neighbors yield zero."""
    X2, squeeze = _as_columns(X)
    _check_rows(g, X2)
    out = _adjacency_apply2(g, X2)
    return out[:, 0] if squeeze else out


def _adjacency_apply2(g: SparseGraph, X2: np.ndarray) -> np.ndarray:
    if not g.nnz:
        return np.zeros_like(X2)
    gathered = X2[g.col_idx]
    nonempty = g._nonempty_rows
    if nonempty is None:
        return np.add.reduceat(gathered, g.row_ptr[:-1], axis=0)
    out = np.zeros_like(X2)
    out[nonempty] = np.add.reduceat(gathered, g.row_ptr[:-1][nonempty], axis=0)
    return out


def _normalized_adjacency_apply(g: SparseGraph, X2: np.ndarray) -> np.ndarray:
    dinv = g._inv_sqrt_degrees[:, None]
    return dinv * _adjacency_apply2(g, dinv * X2)


def laplacian_apply(g: SparseGraph, X) -> np.ndarray:
    """(I - D^{-1/2} A D^{-1/2}) X, matrix-free."""
    X2, squeeze = _as_columns(X)
    _check_rows(g, X2)
    out = X2 - _normalized_adjacency_apply(g, X2)
    return out[:, 0] if squeeze else out


def shifted_apply(g: SparseGraph, X) -> np.ndarray:
    """(2I - L) X = X + D^{-1/2} A D^{-1/2} X, matrix-free."""
    X2, squeeze = _as_columns(X)
    _check_rows(g, X2)
    out = X2 + _normalized_adjacency_apply(g, X2)
    return out[:, 0] if squeeze else out


def gcn_norm_apply(g: SparseGraph, X) -> np.ndarray:
    """D_hat^{-1/2} (A + I) D_hat^{-1/2} X with D_hat = D + I.

    The self-loop is added virtually; the input graph is expected to be
    loop-free (a stored loop would be counted on top of the virtual one).
    """
    X2, squeeze = _as_columns(X)
    _check_rows(g, X2)
    dinv = 1.0 / np.sqrt(g.degrees + 1.0)
    dinv = dinv[:, None]
    out = dinv * _adjacency_apply2(g, dinv * X2) + dinv * dinv * X2
    return out[:, 0] if squeeze else out


def permute_graph(g: SparseGraph, X, perm) -> tuple[SparseGraph, np.ndarray]:
    """Relabel nodes so output node i is input node perm[i].

    Returns the CSR of P A P^T (rows re-sorted canonically) and P X.
    """
    p = np.asarray(perm, dtype=np.int64)
    if p.shape != (g.n,) or not np.array_equal(np.sort(p), np.arange(g.n)):
        raise InputError("perm is not a bijection on [0, n)")
    X2, squeeze = _as_columns(X)
    _check_rows(g, X2)

    inv = np.empty(g.n, dtype=np.int64)
    inv[p] = np.arange(g.n)

    counts = (g.row_ptr[p + 1] - g.row_ptr[p]).astype(np.int64)
    row_ptr = np.zeros(g.n + 1, dtype=np.int64)
    np.cumsum(counts, out=row_ptr[1:])
    col_idx = np.empty(g.nnz, dtype=np.int64)
    for i in range(g.n):
        nbrs = inv[g.neighbors(p[i])]
        col_idx[row_ptr[i]:row_ptr[i + 1]] = np.sort(nbrs)

    gp = SparseGraph(n=g.n, row_ptr=row_ptr, col_idx=col_idx,
                     degrees=g.degrees[p].copy())
    Xp = X2[p].copy()
    return gp, (Xp[:, 0] if squeeze else Xp)


def connected_components(g: SparseGraph) -> np.ndarray:
    """Component label per node (labels are 0..k-1 in discovery order)."""
    labels = np.full(g.n, -1, dtype=np.int64)
    comp = 0
    for start in range(g.n):
        if labels[start] >= 0:
            continue
        stack = [start]
        labels[start] = comp
        while stack:
            u = stack.pop()
            for w in g.neighbors(u):
                if labels[w] < 0:
                    labels[w] = comp
                    stack.append(int(w))
        comp += 1
    return labels


def num_components(g: SparseGraph) -> int:
    if g.n == 0:
        return 0
    return int(connected_components(g).max()) + 1


def read_edge_list(path, n: int | None = None) -> list[tuple[int, int]]:
    """Parse a `u v` per line edge file; `#` lines and blank lines skipped.

    Undirected edges may be listed once or twice (build_csr dedups).
    """
    edges = []
    try:
        f = open(path, "r", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open edge file: {exc}", path)
    with f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise DataError(f"expected 'u v', got {line!r}", path, lineno)
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise DataError(f"non-integer endpoint in {line!r}", path, lineno)
            if u < 0 or v < 0 or (n is not None and (u >= n or v >= n)):
                raise DataError(f"edge ({u}, {v}) out of range", path, lineno)
            edges.append((u, v))
    return edges


def write_edge_list(path, g: SparseGraph):
    """Write each undirected edge once (u <= v)."""
    with open(path, "w", encoding="utf-8") as f:
        for u in range(g.n):
            for v in g.neighbors(u):
                if v >= u:
                    f.write(f"{u} {v}\n")
