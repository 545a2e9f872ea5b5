"""Polynomial basis blocks and filter combination.

The filter Z = (sum_i alpha_i (2I-L)^i + sum_j beta_j L^j) X is evaluated
against cached propagated-feature blocks P_i = (2I-L)^i X and Q_j = L^j X,
built by the one-step recurrences P_{i+1} = (2I-L) P_i, Q_{j+1} = L Q_j.
Blocks live at the n x d feature level, never as n x n operators, so a
cache build costs (K1+K2) sparse applies and combination is a weighted sum
of dense blocks: O((K1+K2) * nnz * d) total.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .graph import SparseGraph, laplacian_apply, shifted_apply, gcn_norm_apply


@dataclass(frozen=True)
class FilterSpec:
    """Coefficients of the two-family polynomial filter.

    ``alpha[i]`` multiplies (2I-L)^i and ``beta[j]`` multiplies L^j; the
    degrees are implied by the vector lengths (k1 = len(alpha) - 1). An
    empty vector switches that family off entirely (degree -1), which is
    how the pure positive/negative ablations are expressed.
    """

    alpha: np.ndarray = field(default_factory=lambda: np.zeros(0))
    beta: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        object.__setattr__(self, "alpha",
                           np.asarray(self.alpha, dtype=np.float64).reshape(-1))
        object.__setattr__(self, "beta",
                           np.asarray(self.beta, dtype=np.float64).reshape(-1))
        if not (np.isfinite(self.alpha).all() and np.isfinite(self.beta).all()):
            raise InputError("filter coefficients must be finite")

    @property
    def k1(self) -> int:
        return self.alpha.shape[0] - 1

    @property
    def k2(self) -> int:
        return self.beta.shape[0] - 1

    def to_json(self) -> dict:
        return {"k1": self.k1, "k2": self.k2,
                "alpha": self.alpha.tolist(), "beta": self.beta.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "FilterSpec":
        spec = cls(alpha=np.asarray(obj.get("alpha", []), dtype=np.float64),
                   beta=np.asarray(obj.get("beta", []), dtype=np.float64))
        for key, got in (("k1", spec.k1), ("k2", spec.k2)):
            if key in obj and int(obj[key]) != got:
                raise InputError(
                    f"filter degree mismatch: {key}={obj[key]} but "
                    f"coefficient vector implies {got}")
        return spec


@dataclass(frozen=True)
class BasisCache:
    """Propagated blocks P_i = (2I-L)^i X (i <= k1), Q_j = L^j X (j <= k2).

    ``provenance`` records (graph fingerprint, feature fingerprint, k1, k2)
    of the build inputs. P_0 and Q_0 are the input X itself, bit-exact.
    """

    p_blocks: tuple
    q_blocks: tuple
    provenance: tuple

    @property
    def k1(self) -> int:
        return len(self.p_blocks) - 1

    @property
    def k2(self) -> int:
        return len(self.q_blocks) - 1


def build_basis_cache(g: SparseGraph, X, k1: int, k2: int) -> BasisCache:
    """Build both block families by the one-step recurrences."""
    if k1 < 0 or k2 < 0:
        raise InputError(f"degrees must be non-negative, got ({k1}, {k2})")
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] != g.n:
        raise InputError(f"feature rows {X.shape[0]} != node count {g.n}")

    p_blocks = [X]
    for _ in range(k1):
        p_blocks.append(shifted_apply(g, p_blocks[-1]))
    q_blocks = [X]
    for _ in range(k2):
        q_blocks.append(laplacian_apply(g, q_blocks[-1]))

    provenance = (g.fingerprint, zlib.crc32(X.tobytes()), k1, k2)
    return BasisCache(tuple(p_blocks), tuple(q_blocks), provenance)


def gsc_combine(cache: BasisCache, spec: FilterSpec) -> np.ndarray:
    """Z = sum_i alpha_i P_i + sum_j beta_j Q_j; linear in (alpha, beta)."""
    if spec.k1 > cache.k1 or spec.k2 > cache.k2:
        raise InputError(
            f"filter degrees ({spec.k1}, {spec.k2}) exceed cache degrees "
            f"({cache.k1}, {cache.k2})")
    Z = np.zeros_like(cache.p_blocks[0])
    for i, a in enumerate(spec.alpha):
        Z += a * cache.p_blocks[i]
    for j, b in enumerate(spec.beta):
        Z += b * cache.q_blocks[j]
    return Z


def bernstein_term(g: SparseGraph, X, K: int, k: int) -> np.ndarray:
    """(2I-L)^{K-k} L^k X by repeated sparse application."""
    if not 0 <= k <= K:
        raise InputError(f"term index k={k} out of range for degree K={K}")
    Y = np.asarray(X, dtype=np.float64)
    for _ in range(k):
        Y = laplacian_apply(g, Y)
    for _ in range(K - k):
        Y = shifted_apply(g, Y)
    return Y


def monomial_prop(g: SparseGraph, X, k: int) -> np.ndarray:
    """k-step self-loop-normalized propagation; k = 0 is the identity."""
    if k < 0:
        raise InputError(f"step count must be non-negative, got {k}")
    Y = np.asarray(X, dtype=np.float64)
    for _ in range(k):
        Y = gcn_norm_apply(g, Y)
    return Y
