"""Configurations selecting an operator family: Riemannian ``(n, k)`` or Kähler ``(n, p, q)``."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .exterior import BidegreeSpace, ExteriorSpace, TensorSpace

KAHLER_FAMILIES = ("L1", "L2")


@dataclass(frozen=True)
class RiemannianConfig:
    """``k``-forms on an ``n``-dimensional Riemannian manifold."""

    n: int
    k: int

    def __post_init__(self):
        if self.n < 1 or not 0 <= self.k <= self.n:
            raise ValueError(f"invalid Riemannian configuration n={self.n}, k={self.k}")

    @property
    def space(self) -> ExteriorSpace:
        return ExteriorSpace(self.n, self.k)

    @property
    def tensor_space(self) -> TensorSpace:
        return TensorSpace(self.space)

    def as_dict(self) -> dict:
        return {"variant": "riemannian", "n": self.n, "k": self.k}


@dataclass(frozen=True)
class KahlerConfig:
    """``(p, q)``-forms on a Kähler manifold of complex dimension ``n``.

    ``family`` picks ``L1`` (the d-bar-free pair del, del*) or ``L2`` (the
    pair d-bar, d-bar*); ``None`` means both, where that is meaningful.
    """

    n: int
    p: int
    q: int
    family: Optional[str] = None

    def __post_init__(self):
        if self.n < 1 or not (0 <= self.p <= self.n and 0 <= self.q <= self.n):
            raise ValueError(f"invalid Kähler configuration n={self.n}, p={self.p}, q={self.q}")
        if self.family is not None and self.family not in KAHLER_FAMILIES:
            raise ValueError(f"unknown Kähler family {self.family!r}")

    @property
    def space(self) -> BidegreeSpace:
        return BidegreeSpace(self.n, self.p, self.q)

    @property
    def tensor_space(self) -> TensorSpace:
        return TensorSpace(self.space)

    def with_family(self, family: Optional[str]) -> "KahlerConfig":
        return KahlerConfig(self.n, self.p, self.q, family)

    def as_dict(self) -> dict:
        d = {"variant": "kahler", "n": self.n, "p": self.p, "q": self.q}
        if self.family is not None:
            d["family"] = self.family
        return d


SpaceConfig = Union[RiemannianConfig, KahlerConfig]
