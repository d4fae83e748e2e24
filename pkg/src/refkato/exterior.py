"""Exterior algebra of R^n and the bidegree algebra of C^n, in orthonormal blade bases.

Blades are encoded as integer bitmasks (bit ``i-1`` set means ``e_i`` is a
factor) and always listed in increasing index order. Basis ordering inside a
degree is lexicographic, as produced by :func:`itertools.combinations`.

A bidegree space ``Lambda^{p,q}`` is stored as the tensor product
``Lambda^p (1,0-forms) (x) Lambda^q (0,1-forms)`` with the holomorphic factor
as the major index. Operators acting on the second factor do not pick up a
Koszul sign from the first one.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

__all__ = [
    "MultiIndex",
    "ExteriorSpace",
    "BidegreeSpace",
    "TensorSpace",
    "DirectSum",
    "Subspace",
    "FormVector",
    "ComplexCovector",
    "basis_masks",
    "blade",
    "wedge_sign",
    "wedge_matrix",
    "contract_matrix",
    "interior_matrix",
    "hodge_star_matrix",
    "wedge",
    "contract",
    "inner",
    "hodge_star",
    "bidegree_split",
]


def _mask(indices) -> int:
    bits = 0
    for i in indices:
        if i < 1:
            raise ValueError(f"blade indices are 1-based, got {i}")
        if bits >> (i - 1) & 1:
            raise ValueError(f"repeated index {i}")
        bits |= 1 << (i - 1)
    return bits


@dataclass(frozen=True, order=True)
class MultiIndex:
    """An increasing multi-index ``I`` stored as a bitmask."""

    bits: int

    @classmethod
    def from_indices(cls, *indices: int) -> "MultiIndex":
        return cls(_mask(indices))

    @property
    def cardinality(self) -> int:
        return self.bits.bit_count()

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in range(self.bits.bit_length()) if self.bits >> i & 1)

    def __repr__(self) -> str:
        return "e" + ("".join(map(str, self.indices)) if self.bits else "()")


@lru_cache(maxsize=None)
def basis_masks(n: int, k: int) -> tuple[int, ...]:
    if not 0 <= k <= n:
        raise ValueError(f"degree {k} out of range for n={n}")
    return tuple(sum(1 << i for i in c) for c in itertools.combinations(range(n), k))


@lru_cache(maxsize=None)
def _mask_lookup(n: int, k: int) -> dict[int, int]:
    return {m: i for i, m in enumerate(basis_masks(n, k))}


def wedge_sign(a: int, b: int) -> int:
    """Sign of ``e_a ^ e_b`` relative to the canonical blade ``e_{a|b}`` (0 if they share an index)."""
    if a & b:
        return 0
    swaps = 0
    rest = b
    while rest:
        low = rest & -rest
        swaps += (a & ~((low << 1) - 1)).bit_count()
        rest ^= low
    return -1 if swaps & 1 else 1


# -- spaces -------------------------------------------------------------------


@dataclass(frozen=True)
class ExteriorSpace:
    """``Lambda^k R^n`` with its orthonormal blade basis."""

    n: int
    k: int
    scalar_kind: str = field(default="real", compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("ambient dimension must be positive")
        if not 0 <= self.k <= self.n:
            raise ValueError(f"degree k={self.k} outside 0..{self.n}")
        if self.scalar_kind not in ("real", "complex"):
            raise ValueError(f"unknown scalar kind {self.scalar_kind!r}")

    @property
    def dim(self) -> int:
        return comb(self.n, self.k)

    @property
    def basis(self) -> tuple[MultiIndex, ...]:
        return tuple(MultiIndex(m) for m in basis_masks(self.n, self.k))

    @property
    def orientation(self) -> MultiIndex:
        return MultiIndex((1 << self.n) - 1)

    def index_of(self, blade_: MultiIndex | int) -> int:
        bits = blade_.bits if isinstance(blade_, MultiIndex) else blade_
        return _mask_lookup(self.n, self.k)[bits]

    def label(self) -> str:
        return f"L^{self.k}(R^{self.n})"


@dataclass(frozen=True)
class BidegreeSpace:
    """``Lambda^{p,q} = Lambda^p (1,0) (x) Lambda^q (0,1)`` over C^n."""

    n: int
    p: int
    q: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("complex dimension must be positive")
        if not (0 <= self.p <= self.n and 0 <= self.q <= self.n):
            raise ValueError(f"bidegree ({self.p},{self.q}) outside 0..{self.n}")

    scalar_kind = "complex"

    @property
    def dim(self) -> int:
        return comb(self.n, self.p) * comb(self.n, self.q)

    @property
    def basis(self) -> tuple[tuple[MultiIndex, MultiIndex], ...]:
        return tuple(
            (MultiIndex(h), MultiIndex(a))
            for h in basis_masks(self.n, self.p)
            for a in basis_masks(self.n, self.q)
        )

    def index_of(self, holo: MultiIndex | int, anti: MultiIndex | int) -> int:
        h = holo.bits if isinstance(holo, MultiIndex) else holo
        a = anti.bits if isinstance(anti, MultiIndex) else anti
        return _mask_lookup(self.n, self.p)[h] * comb(self.n, self.q) + _mask_lookup(self.n, self.q)[a]

    def label(self) -> str:
        return f"L^({self.p},{self.q})(C^{self.n})"


@dataclass(frozen=True)
class TensorSpace:
    """Cotangent factor tensored with a form space, slot-major.

    Over an :class:`ExteriorSpace` there are ``n`` slots (the real covectors
    ``e_j``). Over a :class:`BidegreeSpace` there are ``2n`` slots: the unit
    (1,0)-covectors first, then the unit (0,1)-covectors.
    """

    base: ExteriorSpace | BidegreeSpace

    @property
    def slots(self) -> int:
        return self.base.n if isinstance(self.base, ExteriorSpace) else 2 * self.base.n

    @property
    def dim(self) -> int:
        return self.slots * self.base.dim

    def label(self) -> str:
        return f"T*(x){self.base.label()}"


@dataclass(frozen=True)
class DirectSum:
    parts: tuple

    @property
    def dim(self) -> int:
        return sum(p.dim for p in self.parts)

    def offsets(self) -> list[int]:
        return list(itertools.accumulate([0] + [p.dim for p in self.parts]))

    def label(self) -> str:
        return " + ".join(p.label() for p in self.parts)


@dataclass(frozen=True)
class Subspace:
    """A space known only by name and dimension (e.g. an orthogonal complement)."""

    name: str
    dim: int

    def label(self) -> str:
        return self.name


# -- vectors --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FormVector:
    """Coefficients of a vector in the orthonormal basis of ``space``."""

    space: object
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, copy=True)
        if c.dtype.kind not in "fc":
            c = c.astype(float)
        if c.shape != (self.space.dim,):
            raise ValueError(f"expected {self.space.dim} coefficients for {self.space.label()}, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, space, dtype=float) -> "FormVector":
        return cls(space, np.zeros(space.dim, dtype=dtype))

    @property
    def degree(self) -> int:
        return self.space.k

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def _check(self, other: "FormVector"):
        if not isinstance(other, FormVector) or other.space != self.space:
            raise ValueError("form vectors live in different spaces")

    def __add__(self, other):
        self._check(other)
        return FormVector(self.space, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return FormVector(self.space, self.coeffs - other.coeffs)

    def __neg__(self):
        return FormVector(self.space, -self.coeffs)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return FormVector(self.space, scalar * self.coeffs)

    __rmul__ = __mul__

    def allclose(self, other: "FormVector", atol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.allclose(self.coeffs, other.coeffs, rtol=0, atol=atol))

    def __repr__(self) -> str:
        terms = []
        if isinstance(self.space, ExteriorSpace):
            for b, c in zip(self.space.basis, self.coeffs):
                if c != 0:
                    terms.append(f"{c:g}*{b!r}")
        else:
            terms = [f"{c:g}@{i}" for i, c in enumerate(self.coeffs) if c != 0]
        return f"FormVector({self.space.label()}: {' + '.join(terms) or '0'})"


def blade(space: ExteriorSpace, *indices: int) -> FormVector:
    """The unit blade ``e_{i1...ik}`` (indices in any order; sign follows the ordering)."""
    if len(indices) != space.k:
        raise ValueError(f"need {space.k} indices for {space.label()}")
    sign, bits = 1, 0
    for i in indices:
        b = _mask([i])
        s = wedge_sign(bits, b)
        if s == 0:
            raise ValueError(f"repeated index {i}")
        sign *= s
        bits |= b
    out = np.zeros(space.dim)
    out[space.index_of(bits)] = sign
    return FormVector(space, out)


# -- matrices of elementary operators --------------------------------------------


@lru_cache(maxsize=None)
def _wedge_basis(n: int, k: int) -> np.ndarray:
    """Stack of matrices ``W_j : Lambda^k -> Lambda^{k+1}``, ``W_j w = e_j ^ w``."""
    if not 0 <= k < n:
        raise ValueError(f"no wedge from degree {k} in dimension {n}")
    lookup = _mask_lookup(n, k + 1)
    out = np.zeros((n, comb(n, k + 1), comb(n, k)))
    for col, m in enumerate(basis_masks(n, k)):
        for j in range(n):
            s = wedge_sign(1 << j, m)
            if s:
                out[j, lookup[m | 1 << j], col] = s
    out.setflags(write=False)
    return out


def wedge_matrix(n: int, k: int, v) -> np.ndarray:
    """Matrix of ``w -> v ^ w`` from degree ``k`` to ``k+1`` (complex-linear in ``v``)."""
    v = np.asarray(v)
    if v.shape != (n,):
        raise ValueError(f"covector must have length {n}")
    return np.tensordot(v, _wedge_basis(n, k), axes=1)


def interior_matrix(n: int, k: int, v) -> np.ndarray:
    """Contraction ``Lambda^k -> Lambda^{k-1}`` pairing ``v`` bilinearly (complex-linear in ``v``)."""
    if k < 1:
        raise ValueError("cannot contract a 0-form")
    return wedge_matrix(n, k - 1, v).T


def contract_matrix(n: int, k: int, v) -> np.ndarray:
    """Hermitian adjoint of ``wedge_matrix(n, k-1, v)``; conjugate-linear in ``v``."""
    return interior_matrix(n, k, np.conj(np.asarray(v)))


@lru_cache(maxsize=None)
def hodge_star_matrix(n: int, k: int) -> np.ndarray:
    full = (1 << n) - 1
    target = _mask_lookup(n, n - k)
    out = np.zeros((comb(n, n - k), comb(n, k)))
    for col, m in enumerate(basis_masks(n, k)):
        rest = full ^ m
        out[target[rest], col] = wedge_sign(m, rest)
    out.setflags(write=False)
    return out


# -- operations on FormVectors ----------------------------------------------------


def _require_exterior(*vs):
    for v in vs:
        if not isinstance(v.space, ExteriorSpace):
            raise TypeError(f"expected a form on R^n, got {v.space.label()}")


def wedge(a: FormVector, b: FormVector) -> FormVector:
    _require_exterior(a, b)
    n = a.space.n
    if b.space.n != n:
        raise ValueError("wedge of forms over different ambient dimensions")
    k, l = a.space.k, b.space.k
    if k + l > n:
        raise ValueError(f"degree overflow: {k} + {l} > {n}")
    target = ExteriorSpace(n, k + l, scalar_kind="complex" if "complex" in (a.space.scalar_kind, b.space.scalar_kind) else "real")
    lookup = _mask_lookup(n, k + l)
    dtype = np.result_type(a.coeffs, b.coeffs)
    out = np.zeros(target.dim, dtype=dtype)
    ma, mb = basis_masks(n, k), basis_masks(n, l)
    for i in np.flatnonzero(a.coeffs):
        for j in np.flatnonzero(b.coeffs):
            s = wedge_sign(ma[i], mb[j])
            if s:
                out[lookup[ma[i] | mb[j]]] += s * a.coeffs[i] * b.coeffs[j]
    return FormVector(target, out)


def contract(v, w: FormVector, factor: str | None = None) -> FormVector:
    """Contraction ``iota_v w``, the adjoint of wedging with ``v``.

    For a bidegree form, ``factor`` selects the factor being contracted:
    ``"holo"`` (the (1,0) part) or ``"antiholo"`` (the (0,1) part).
    """
    v = np.asarray(v)
    sp = w.space
    if isinstance(sp, ExteriorSpace):
        if sp.k == 0:
            raise ValueError("cannot contract a 0-form")
        return FormVector(ExteriorSpace(sp.n, sp.k - 1, sp.scalar_kind), contract_matrix(sp.n, sp.k, v) @ w.coeffs)
    if isinstance(sp, BidegreeSpace):
        if factor == "holo":
            if sp.p == 0:
                raise ValueError("no (1,0) factor to contract")
            m = np.kron(contract_matrix(sp.n, sp.p, v), np.eye(comb(sp.n, sp.q)))
            return FormVector(BidegreeSpace(sp.n, sp.p - 1, sp.q), m @ w.coeffs)
        if factor == "antiholo":
            if sp.q == 0:
                raise ValueError("no (0,1) factor to contract")
            m = np.kron(np.eye(comb(sp.n, sp.p)), contract_matrix(sp.n, sp.q, v))
            return FormVector(BidegreeSpace(sp.n, sp.p, sp.q - 1), m @ w.coeffs)
        raise ValueError("factor must be 'holo' or 'antiholo' for bidegree forms")
    raise TypeError(f"cannot contract into {sp.label()}")


def inner(a: FormVector, b: FormVector):
    """``<a, b>``, linear in ``a`` and conjugate-linear in ``b``."""
    if a.space != b.space:
        raise ValueError(f"inner product of {a.space.label()} and {b.space.label()}")
    val = np.vdot(b.coeffs, a.coeffs)
    return float(val.real) if np.isrealobj(a.coeffs) and np.isrealobj(b.coeffs) else complex(val)


def hodge_star(w: FormVector) -> FormVector:
    _require_exterior(w)
    sp = w.space
    return FormVector(ExteriorSpace(sp.n, sp.n - sp.k, sp.scalar_kind), hodge_star_matrix(sp.n, sp.k) @ w.coeffs)


# -- complexified covectors --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ComplexCovector:
    """``xi = xi^{1,0} + xi^{0,1}`` in unit (1,0)/(0,1) bases.

    Real coordinates on C^n are ordered ``(x_1..x_n, y_1..y_n)`` and the unit
    (1,0)-covectors are ``dz_j / sqrt(2)``.
    """

    real_part: np.ndarray | None
    holo: np.ndarray
    antiholo: np.ndarray

    @property
    def n(self) -> int:
        return len(self.holo)

    def norm(self) -> float:
        return float(np.sqrt(np.linalg.norm(self.holo) ** 2 + np.linalg.norm(self.antiholo) ** 2))

    def slots(self) -> np.ndarray:
        """Coefficients in the ``2n`` cotangent slots of a Kähler :class:`TensorSpace`."""
        return np.concatenate([self.holo, self.antiholo])

    def to_real(self) -> np.ndarray:
        """Inverse of :func:`bidegree_split`; only meaningful when ``antiholo == conj(holo)``."""
        h = self.holo
        return np.concatenate([np.sqrt(2) * h.real, -np.sqrt(2) * h.imag])


def bidegree_split(xi) -> ComplexCovector:
    xi = np.asarray(xi, dtype=float)
    if xi.ndim != 1 or len(xi) % 2:
        raise ValueError("bidegree split needs a real covector of even length")
    n = len(xi) // 2
    a, b = xi[:n], xi[n:]
    holo = (a - 1j * b) / np.sqrt(2)
    return ComplexCovector(xi.copy(), holo, np.conj(holo))
