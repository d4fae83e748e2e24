"""Intertwiners, projections and symbols of the Hodge-de Rham and Dolbeault families.

Every map here is a dense matrix between explicit spaces. The intertwiners
``theta`` are built blade by blade from their defining sums; the projections
``Pi`` are built from wedge/contraction matrices. The two constructions are
independent, which is what makes ``Pi o theta = id`` a real check.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, sqrt

import numpy as np
import scipy.linalg

from .config import KahlerConfig, RiemannianConfig, SpaceConfig
from .exterior import (
    BidegreeSpace,
    ComplexCovector,
    DirectSum,
    ExteriorSpace,
    FormVector,
    Subspace,
    TensorSpace,
    _mask_lookup,
    basis_masks,
    bidegree_split,
    contract_matrix,
    inner,
    wedge,
    wedge_matrix,
    wedge_sign,
)

__all__ = [
    "LinearMap",
    "OperatorKind",
    "RIEMANNIAN_TAGS",
    "KAHLER_TAGS",
    "theta1",
    "theta2",
    "theta_kahler",
    "theta_for",
    "symbol",
    "symbol_matrix",
    "tensor_symbol",
    "normalization",
    "projection_pair",
    "projection_blocks",
    "verify_linalg_identities",
    "uniqueness_scan",
    "UniquenessReport",
    "image_overlap",
]

RIEMANNIAN_TAGS = ("d", "d_star")
KAHLER_TAGS = ("del", "delbar", "del_star", "delbar_star")
FAMILY_TAGS = {
    "hodge_de_rham": ("d", "d_star"),
    "L1": ("del", "del_star"),
    "L2": ("delbar", "delbar_star"),
}


@dataclass(frozen=True, eq=False)
class LinearMap:
    domain: object
    codomain: object
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, copy=True)
        if m.shape != (self.codomain.dim, self.domain.dim):
            raise ValueError(
                f"matrix shape {m.shape} does not match {self.domain.label()} -> {self.codomain.label()}"
            )
        if np.iscomplexobj(m) and not np.any(m.imag):
            m = m.real.copy()
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other: "LinearMap") -> "LinearMap":
        if other.codomain != self.domain:
            raise ValueError(f"cannot compose {self.domain.label()} with {other.codomain.label()}")
        return LinearMap(other.domain, self.codomain, self.matrix @ other.matrix)

    def __call__(self, v: FormVector) -> FormVector:
        if v.space != self.domain:
            raise ValueError(f"map expects {self.domain.label()}, got {v.space.label()}")
        return FormVector(self.codomain, self.matrix @ v.coeffs)

    def __mul__(self, scalar) -> "LinearMap":
        return LinearMap(self.domain, self.codomain, scalar * self.matrix)

    __rmul__ = __mul__

    @property
    def H(self) -> "LinearMap":
        return LinearMap(self.codomain, self.domain, self.matrix.conj().T)

    def adjoint(self) -> "LinearMap":
        return self.H


@dataclass(frozen=True)
class OperatorKind:
    tag: str
    config: SpaceConfig

    def __post_init__(self):
        if isinstance(self.config, RiemannianConfig):
            if self.tag not in RIEMANNIAN_TAGS:
                raise ValueError(f"tag {self.tag!r} needs a Kähler configuration")
        elif isinstance(self.config, KahlerConfig):
            if self.tag not in KAHLER_TAGS:
                raise ValueError(f"tag {self.tag!r} is not a Dolbeault operator")
        else:
            raise TypeError("config must be a RiemannianConfig or KahlerConfig")

    @property
    def source(self):
        return self.config.space

    @property
    def target(self):
        return _target_space(self.tag, self.config)

    @property
    def defined(self) -> bool:
        try:
            self.target
        except ValueError:
            return False
        return True


def _target_space(tag: str, config: SpaceConfig):
    if isinstance(config, RiemannianConfig):
        n, k = config.n, config.k
        return ExteriorSpace(n, k + 1 if tag == "d" else k - 1)
    n, p, q = config.n, config.p, config.q
    shift = {"del": (1, 0), "delbar": (0, 1), "del_star": (-1, 0), "delbar_star": (0, -1)}[tag]
    return BidegreeSpace(n, p + shift[0], q + shift[1])


def normalization(tag: str, config: SpaceConfig) -> float:
    """The scale making ``-i * c * sigma`` a coisometry (``1/sqrt(k+1)`` for d, ...)."""
    if isinstance(config, RiemannianConfig):
        n, deg = config.n, config.k
    else:
        n = config.n
        deg = config.p if tag in ("del", "del_star") else config.q
    return 1 / sqrt(deg + 1) if tag in ("d", "del", "delbar") else 1 / sqrt(n - deg + 1)


# -- symbols ----------------------------------------------------------------------


def _as_covector(config: SpaceConfig, xi):
    if isinstance(config, RiemannianConfig):
        xi = np.asarray(xi)
        if xi.shape != (config.n,):
            raise ValueError(f"covector must have length {config.n}")
        return xi
    if isinstance(xi, ComplexCovector):
        if xi.n != config.n:
            raise ValueError("covector dimension mismatch")
        return xi
    xi = np.asarray(xi)
    if xi.shape != (2 * config.n,):
        raise ValueError(f"real covector must have length {2 * config.n}")
    return bidegree_split(xi)


def symbol_matrix(tag: str, config: SpaceConfig, xi) -> np.ndarray:
    """Matrix of ``sigma_xi`` for one of the six first-order operators.

    Riemannian: ``sigma(d) = i xi ^``, ``sigma(d*) = -i iota_{xi*}``.
    Kähler: ``sigma(del) = i xi^{1,0} ^``, ``sigma(delbar) = i xi^{0,1} ^``,
    ``sigma(del*) = -i iota_{(xi^{0,1})*}``, ``sigma(delbar*) = -i iota_{(xi^{1,0})*}``.
    """
    OperatorKind(tag, config).target  # validates tag/config/range
    xi = _as_covector(config, xi)
    if isinstance(config, RiemannianConfig):
        n, k = config.n, config.k
        if tag == "d":
            return 1j * wedge_matrix(n, k, xi)
        return -1j * contract_matrix(n, k, xi)
    n, p, q = config.n, config.p, config.q
    ip, iq = np.eye(comb(n, p)), np.eye(comb(n, q))
    if tag == "del":
        return 1j * np.kron(wedge_matrix(n, p, xi.holo), iq)
    if tag == "delbar":
        return 1j * np.kron(ip, wedge_matrix(n, q, xi.antiholo))
    # metric dual pairs the (0,1) coefficients with (1,0) slots bilinearly
    if tag == "del_star":
        return -1j * np.kron(wedge_matrix(n, p - 1, xi.antiholo).T, iq)
    return -1j * np.kron(ip, wedge_matrix(n, q - 1, xi.holo).T)


def symbol(kind: OperatorKind, xi) -> LinearMap:
    return LinearMap(kind.source, kind.target, symbol_matrix(kind.tag, kind.config, xi))


def _slot_covectors(config: SpaceConfig):
    n = config.n
    if isinstance(config, RiemannianConfig):
        return list(np.eye(n))
    eye = np.eye(n)
    zero = np.zeros(n)
    return [ComplexCovector(None, eye[j], zero) for j in range(n)] + [
        ComplexCovector(None, zero, eye[j]) for j in range(n)
    ]


def tensor_symbol(kind: OperatorKind) -> LinearMap:
    """The symbol seen as a map on ``T* (x) E``: block ``j`` is ``sigma`` at the ``j``-th slot covector."""
    cfg = kind.config
    blocks = [symbol_matrix(kind.tag, cfg, c) for c in _slot_covectors(cfg)]
    return LinearMap(cfg.tensor_space, kind.target, np.hstack(blocks))


# -- intertwiners ------------------------------------------------------------------


def _indices(mask: int) -> list[int]:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def theta1(n: int, k: int) -> LinearMap:
    """``v1^...^v_{k+1} -> (k+1)^{-1/2} sum_i (-1)^{i-1} v_i (x) v1^..^v_i-hat^..^v_{k+1}``."""
    if not 0 <= k <= n - 1:
        raise ValueError(f"theta1 needs 0 <= k <= n-1, got n={n}, k={k}")
    src, tgt = ExteriorSpace(n, k + 1), TensorSpace(ExteriorSpace(n, k))
    dim_e = comb(n, k)
    lookup = _mask_lookup(n, k)
    m = np.zeros((tgt.dim, src.dim))
    c = 1 / sqrt(k + 1)
    for col, mask in enumerate(basis_masks(n, k + 1)):
        for pos, i in enumerate(_indices(mask)):
            m[i * dim_e + lookup[mask & ~(1 << i)], col] += (-1) ** pos * c
    return LinearMap(src, tgt, m)


def theta2(n: int, k: int) -> LinearMap:
    """``w -> -(n-k+1)^{-1/2} sum_i e_i (x) (e_i ^ w)`` on ``Lambda^{k-1}``."""
    if not 1 <= k <= n:
        raise ValueError(f"theta2 needs 1 <= k <= n, got n={n}, k={k}")
    src, tgt = ExteriorSpace(n, k - 1), TensorSpace(ExteriorSpace(n, k))
    dim_e = comb(n, k)
    lookup = _mask_lookup(n, k)
    m = np.zeros((tgt.dim, src.dim))
    c = -1 / sqrt(n - k + 1)
    for col, mask in enumerate(basis_masks(n, k - 1)):
        for i in range(n):
            s = wedge_sign(1 << i, mask)
            if s:
                m[i * dim_e + lookup[mask | 1 << i], col] += c * s
    return LinearMap(src, tgt, m)


def theta_kahler(tag: str, n: int, p: int, q: int) -> LinearMap:
    """The U(n) intertwiner paired with ``tag``, landing in ``(C^n-bar + C^n) (x) Lambda^{p,q}``."""
    if tag not in KAHLER_TAGS:
        raise ValueError(f"unknown Dolbeault tag {tag!r}")
    tgt_base = BidegreeSpace(n, p, q)
    tgt = TensorSpace(tgt_base)
    dq = comb(n, q)
    hl, al = _mask_lookup(n, p), _mask_lookup(n, q)
    dim_e = tgt_base.dim

    def row(slot, h, a):
        return slot * dim_e + hl[h] * dq + al[a]

    if tag == "del":
        if p > n - 1:
            raise ValueError("theta^del needs p <= n-1")
        src = BidegreeSpace(n, p + 1, q)
        m = np.zeros((tgt.dim, src.dim))
        c = 1 / sqrt(p + 1)
        for col, (h, a) in enumerate((h, a) for h in basis_masks(n, p + 1) for a in basis_masks(n, q)):
            for pos, i in enumerate(_indices(h)):
                m[row(i, h & ~(1 << i), a), col] += (-1) ** pos * c
    elif tag == "delbar":
        if q > n - 1:
            raise ValueError("theta^delbar needs q <= n-1")
        src = BidegreeSpace(n, p, q + 1)
        m = np.zeros((tgt.dim, src.dim))
        c = 1 / sqrt(q + 1)
        for col, (h, a) in enumerate((h, a) for h in basis_masks(n, p) for a in basis_masks(n, q + 1)):
            for pos, i in enumerate(_indices(a)):
                m[row(n + i, h, a & ~(1 << i)), col] += (-1) ** pos * c
    elif tag == "del_star":
        if p < 1:
            raise ValueError("theta^del* needs p >= 1")
        src = BidegreeSpace(n, p - 1, q)
        m = np.zeros((tgt.dim, src.dim), dtype=float)
        c = -1 / sqrt(n - p + 1)
        for col, (h, a) in enumerate((h, a) for h in basis_masks(n, p - 1) for a in basis_masks(n, q)):
            for i in range(n):
                s = wedge_sign(1 << i, h)
                if s:
                    m[row(n + i, h | 1 << i, a), col] += c * s
    else:
        if q < 1:
            raise ValueError("theta^delbar* needs q >= 1")
        src = BidegreeSpace(n, p, q - 1)
        m = np.zeros((tgt.dim, src.dim), dtype=float)
        c = -1 / sqrt(n - q + 1)
        for col, (h, a) in enumerate((h, a) for h in basis_masks(n, p) for a in basis_masks(n, q - 1)):
            for i in range(n):
                s = wedge_sign(1 << i, a)
                if s:
                    m[row(i, h, a | 1 << i), col] += c * s
    return LinearMap(src, tgt, m)


def theta_for(kind: OperatorKind) -> LinearMap:
    """The intertwiner that ``Pi`` for ``kind`` inverts on the left."""
    cfg = kind.config
    if isinstance(cfg, RiemannianConfig):
        return theta1(cfg.n, cfg.k) if kind.tag == "d" else theta2(cfg.n, cfg.k)
    return theta_kahler(kind.tag, cfg.n, cfg.p, cfg.q)


# -- projections -------------------------------------------------------------------


def _family_config(config: SpaceConfig, family: str) -> SpaceConfig:
    if family == "hodge_de_rham":
        if not isinstance(config, RiemannianConfig):
            raise ValueError("the Hodge-de Rham family needs a Riemannian configuration")
    elif family in ("L1", "L2"):
        if not isinstance(config, KahlerConfig):
            raise ValueError(f"family {family} needs a Kähler configuration")
    else:
        raise ValueError(f"unknown family {family!r}")
    return config


def projection_blocks(config: SpaceConfig, family: str) -> dict[str, LinearMap]:
    """The nonzero summands ``Pi_i = -i c_i sigma_i`` of ``Pi``, keyed by operator tag."""
    _family_config(config, family)
    out = {}
    for tag in FAMILY_TAGS[family]:
        kind = OperatorKind(tag, config)
        if not kind.defined:
            continue
        out[tag] = -1j * normalization(tag, config) * tensor_symbol(kind)
    return out


def projection_pair(config: SpaceConfig, family: str) -> tuple[LinearMap, LinearMap]:
    """``(Pi, Pi_perp)`` with ``Pi`` stacked over the defined summands and ``Pi_perp`` onto ``ker Pi``.

    Degrees at the ends of the range drop the empty summand, so for ``k = 0``
    the codomain of ``Pi`` is just ``Lambda^1``.
    """
    blocks = projection_blocks(config, family)
    parts = tuple(b.codomain for b in blocks.values())
    pi = LinearMap(config.tensor_space, DirectSum(parts), np.vstack([b.matrix for b in blocks.values()]))
    kernel = scipy.linalg.null_space(pi.matrix)
    perp = LinearMap(config.tensor_space, Subspace("ker Pi", kernel.shape[1]), kernel.conj().T)
    return pi, perp


# -- checks from the algebra -----------------------------------------------------------


def verify_linalg_identities(n: int, k: int, seed: int = 0) -> dict:
    """Check both expansion identities exhaustively over ``xi = e_p`` and basis blades ``e_I``.

    (a) ``<xi ^ w, eta_1^...^eta_{k+1}> = sum_i (-1)^{i-1} <xi, eta_i> <w, eta_1^..hat..^eta_{k+1}>``
    (b) ``<iota_xi w, theta> = sum_i <xi, e_i> <w, e_i ^ theta>``

    ``w`` is a random ``k``-form. A side is reported as skipped when its
    degrees fall outside ``0..n``.
    """
    if not 1 <= n <= 8:
        raise ValueError("identity verification is limited to 1 <= n <= 8")
    if not 0 <= k <= n:
        raise ValueError(f"degree {k} out of range")
    rng = np.random.default_rng(seed)
    space = ExteriorSpace(n, k)
    omega = FormVector(space, rng.standard_normal(space.dim))
    line = ExteriorSpace(n, 1)
    unit = [FormVector(line, row) for row in np.eye(n)]
    report = {"n": n, "k": k, "a": None, "b": None, "notes": []}

    if k + 1 <= n:
        worst = 0.0
        for p in range(n):
            xi = unit[p]
            lhs_form = wedge(xi, omega)
            for mask in basis_masks(n, k + 1):
                idx = _indices(mask)
                target = _blade_from(n, idx)
                lhs = inner(lhs_form, target)
                rhs = 0.0
                for i, j in enumerate(idx):
                    rest = _blade_from(n, idx[:i] + idx[i + 1 :])
                    rhs += (-1) ** i * inner(xi, unit[j]) * inner(omega, rest)
                worst = max(worst, abs(lhs - rhs))
        report["a"] = worst
    else:
        report["notes"].append("identity (a) skipped: k+1 > n")

    if k >= 1:
        worst = 0.0
        for p in range(n):
            xi = np.eye(n)[p]
            contracted = FormVector(ExteriorSpace(n, k - 1), contract_matrix(n, k, xi) @ omega.coeffs)
            for mask in basis_masks(n, k - 1):
                theta = _blade_from(n, _indices(mask))
                lhs = inner(contracted, theta)
                rhs = sum(xi[i] * inner(omega, wedge(unit[i], theta)) for i in range(n))
                worst = max(worst, abs(lhs - rhs))
        report["b"] = worst
    else:
        report["notes"].append("identity (b) skipped: contraction undefined on 0-forms")

    found = [r for r in (report["a"], report["b"]) if r is not None]
    report["max_residual"] = max(found) if found else 0.0
    return report


def _blade_from(n: int, zero_based: list[int]) -> FormVector:
    space = ExteriorSpace(n, len(zero_based))
    c = np.zeros(space.dim)
    mask = sum(1 << i for i in zero_based)
    c[space.index_of(mask)] = 1.0
    return FormVector(space, c)


@dataclass
class UniquenessReport:
    kind: OperatorKind
    canonical: float
    passing: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict)

    @property
    def passing_moduli(self) -> set:
        return {round(abs(c), 12) for c in self.passing}

    @property
    def exact(self) -> bool:
        """True iff the passing candidates are exactly those of canonical modulus."""
        return bool(self.passing) and all(abs(abs(c) - self.canonical) < 1e-10 for c in self.passing)


def uniqueness_scan(kind: OperatorKind, candidates, tol: float = 1e-10) -> UniquenessReport:
    """Find which rescalings ``c * sigma`` are coisometries ``T* (x) E -> F``."""
    s = tensor_symbol(kind).matrix
    gram = s @ s.conj().T
    eye = np.eye(len(gram))
    rep = UniquenessReport(kind, normalization(kind.tag, kind.config))
    for c in candidates:
        res = float(np.abs(abs(c) ** 2 * gram - eye).max())
        rep.residuals[c] = res
        if res < tol:
            rep.passing.append(c)
    return rep


def image_overlap(a: LinearMap, b: LinearMap) -> float:
    """Largest cosine of a principal angle between ``im a`` and ``im b`` (0 iff orthogonal)."""
    if a.codomain != b.codomain:
        raise ValueError("maps must share a codomain")
    qa, qb = scipy.linalg.orth(a.matrix), scipy.linalg.orth(b.matrix)
    if qa.shape[1] == 0 or qb.shape[1] == 0:
        raise ValueError("image_overlap of a zero map")
    # cosines can exceed 1 by rounding
    return min(1.0, float(np.linalg.svd(qa.conj().T @ qb, compute_uv=False).max()))
