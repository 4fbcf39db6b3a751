"""Random design ensembles with bounded entries and known expected Gram."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

__all__ = [
    "DesignSpec",
    "DesignMatrix",
    "GramSpectrum",
    "expected_gram",
    "sample",
    "gram_spectrum",
    "eigvals_2x2",
    "as_generator",
]

KINDS = ("rademacher", "uniform", "fixed_block")

# rank_ok threshold, relative to lambda_max
RANK_RTOL = 1e-10


def as_generator(seed) -> np.random.Generator:
    """Accept an int, a ``SeedSequence`` or an existing ``Generator``."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class DesignSpec:
    """Ensemble of ``N x p`` designs with ``|a_ni| <= alpha`` almost surely.

    ``rademacher`` draws entries uniformly from ``{-alpha, +alpha}``,
    ``uniform`` from ``U(-alpha, alpha)``. ``fixed_block`` is deterministic:
    the rows of ``block`` repeated ``N / len(block)`` times.
    """

    kind: str
    p: int
    alpha: float
    block: tuple[tuple[float, ...], ...] | None = field(default=None)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown design kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == "fixed_block":
            if self.block is None:
                raise ValueError("fixed_block design needs a block matrix")
            b = np.asarray(self.block, dtype=float)
            if b.ndim != 2 or b.shape[1] != self.p:
                raise ValueError(f"block must be 2-D with {self.p} columns, got shape {b.shape}")
            if np.abs(b).max() > self.alpha:
                raise ValueError("block entries exceed alpha")
        elif self.block is not None:
            raise ValueError(f"{self.kind} design takes no block")
        if int(self.p) != self.p or self.p < 1:
            raise ValueError(f"p must be a positive integer, got {self.p!r}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")

    @classmethod
    def rademacher(cls, p: int, alpha: float) -> DesignSpec:
        return cls("rademacher", int(p), float(alpha))

    @classmethod
    def uniform(cls, p: int, alpha: float) -> DesignSpec:
        return cls("uniform", int(p), float(alpha))

    @classmethod
    def fixed_block(cls, block) -> DesignSpec:
        b = np.atleast_2d(np.asarray(block, dtype=float))
        alpha = float(np.abs(b).max())
        if alpha == 0:
            raise ValueError("fixed_block with an all-zero block cannot have full rank")
        return cls("fixed_block", b.shape[1], alpha, tuple(map(tuple, b.tolist())))

    @property
    def block_array(self) -> np.ndarray:
        return np.asarray(self.block, dtype=float)

    @property
    def step(self) -> int:
        """Admissible sample counts are multiples of this."""
        return len(self.block) if self.kind == "fixed_block" else 1

    @property
    def min_samples(self) -> int:
        return -(-self.p // self.step) * self.step

    def admissible(self, n: int) -> int:
        """Smallest admissible sample count ``>= n``."""
        n = max(int(n), self.min_samples)
        return -(-n // self.step) * self.step

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "p": self.p, "alpha": self.alpha}
        if self.block is not None:
            d = {"kind": self.kind, "block": [list(row) for row in self.block]}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> DesignSpec:
        d = dict(d)
        kind = d.pop("kind", None)
        if kind == "fixed_block":
            if "block" not in d:
                raise KeyError("block")
            spec = cls.fixed_block(d.pop("block"))
            for key in ("p", "alpha"):
                if key in d and not np.isclose(d.pop(key), getattr(spec, key)):
                    raise ValueError(f"design.{key} disagrees with the block")
        elif kind in ("rademacher", "uniform"):
            for key in ("p", "alpha"):
                if key not in d:
                    raise KeyError(key)
            spec = cls(kind, int(d.pop("p")), float(d.pop("alpha")))
        else:
            raise ValueError(f"unknown design kind {kind!r}; expected one of {KINDS}")
        if d:
            raise ValueError(f"unknown design keys: {sorted(d)}")
        return spec


@dataclass(frozen=True)
class DesignMatrix:
    entries: np.ndarray
    spec: DesignSpec

    @property
    def N(self) -> int:
        return self.entries.shape[0]

    @property
    def gram(self) -> np.ndarray:
        """Normalised Gram matrix ``A^T A / N``."""
        return self.entries.T @ self.entries / self.N


class GramSpectrum(NamedTuple):
    lambda_min: float
    lambda_max: float
    rank_ok: bool


def expected_gram(spec: DesignSpec) -> np.ndarray:
    """``M = E(A^T A) / N``, which does not depend on ``N`` for these ensembles."""
    if spec.kind == "rademacher":
        return spec.alpha**2 * np.eye(spec.p)
    if spec.kind == "uniform":
        return spec.alpha**2 / 3 * np.eye(spec.p)
    b = spec.block_array
    return b.T @ b / b.shape[0]


def sample(spec: DesignSpec, N: int, seed) -> DesignMatrix:
    """Draw one ``N x p`` design. Deterministic given ``(spec, N, seed)``."""
    N = int(N)
    if N < spec.p:
        raise ValueError(f"N={N} < p={spec.p}: the Gram matrix cannot have full rank")
    if spec.kind == "fixed_block":
        if N % spec.step:
            raise ValueError(f"N={N} is not a multiple of the block height {spec.step}")
        return DesignMatrix(np.tile(spec.block_array, (N // spec.step, 1)), spec)
    rng = as_generator(seed)
    if spec.kind == "rademacher":
        signs = rng.integers(0, 2, size=(N, spec.p), dtype=np.int8) * 2 - 1
        entries = spec.alpha * signs.astype(float)
    else:
        entries = rng.uniform(-spec.alpha, spec.alpha, size=(N, spec.p))
    return DesignMatrix(entries, spec)


def eigvals_2x2(g: np.ndarray) -> tuple[float, float]:
    """Eigenvalues of a symmetric 2x2 matrix from the characteristic quadratic."""
    a, b, d = g[0, 0], g[0, 1], g[1, 1]
    mid = (a + d) / 2
    rad = np.hypot((a - d) / 2, b)
    return float(mid - rad), float(mid + rad)


def gram_spectrum(A) -> GramSpectrum:
    """Extreme eigenvalues of ``A^T A / N`` and the full-rank flag.

    Rank failure is reported through ``rank_ok``, never raised.
    """
    entries = A.entries if isinstance(A, DesignMatrix) else np.atleast_2d(np.asarray(A, float))
    g = entries.T @ entries / entries.shape[0]
    eig = np.linalg.eigvalsh(g)
    lo, hi = float(eig[0]), float(eig[-1])
    return GramSpectrum(lo, hi, bool(hi > 0 and lo > RANK_RTOL * hi))
