"""Identity suites behind ``refkato verify``.

Every suite returns a list of :class:`~refkato.report.Check`. A
:class:`Perturbation` can be threaded through to add seeded noise to the
intertwiner and projection matrices, which should make the suites fail.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb, sqrt
from typing import Iterator, Optional

import numpy as np
import scipy.linalg

from .config import KahlerConfig, RiemannianConfig
from .exterior import hodge_star_matrix, interior_matrix, wedge_matrix
from .groups import apply_action, random_element
from .report import Check
from .steinweiss import (
    OperatorKind,
    image_overlap,
    normalization,
    projection_blocks,
    projection_pair,
    symbol_matrix,
    tensor_symbol,
    theta_for,
    theta_kahler,
    uniqueness_scan,
    verify_linalg_identities,
)

__all__ = [
    "Perturbation",
    "TOL_EXACT",
    "TOL_EIGEN",
    "riemannian_configs",
    "kahler_configs",
    "candidate_grid",
    "linalg_identity_checks",
    "hodge_star_checks",
    "cartan_checks",
    "section_checks",
    "complement_checks",
    "laplacian_checks",
    "equivariance_checks",
    "uniqueness_checks",
    "orthogonality_checks",
    "no_go_checks",
    "run_verify",
]

TOL_EXACT = 1e-12
TOL_EIGEN = 1e-10
LINALG_N_MAX = 8


@dataclass
class Perturbation:
    """Adds ``eps`` times seeded Gaussian noise to matrices; ``eps = 0`` is a no-op."""

    eps: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.eps < 0:
            raise ValueError("perturbation size must be non-negative")
        self._rng = np.random.default_rng(self.seed)

    def __call__(self, m: np.ndarray) -> np.ndarray:
        if not self.eps:
            return m
        noise = self._rng.standard_normal(m.shape)
        if np.iscomplexobj(m):
            noise = noise + 1j * self._rng.standard_normal(m.shape)
        return m + self.eps * noise


def riemannian_configs(n_max: int, n_min: int = 1) -> Iterator[RiemannianConfig]:
    for n in range(n_min, n_max + 1):
        for k in range(n + 1):
            yield RiemannianConfig(n, k)


def kahler_configs(n_max: int, n_min: int = 1) -> Iterator[KahlerConfig]:
    for n in range(n_min, n_max + 1):
        for p in range(n + 1):
            for q in range(n + 1):
                yield KahlerConfig(n, p, q)


def _families(cfg):
    return ("hodge_de_rham",) if isinstance(cfg, RiemannianConfig) else ("L1", "L2")


def _cfg(cfg, **extra) -> dict:
    d = cfg.as_dict()
    d.update(extra)
    return d


def _maxabs(m) -> float:
    return float(np.abs(m).max(initial=0.0))


def candidate_grid(canonical, size: int = 200, hi: float = 1.5) -> list:
    """``size`` evenly spaced values in ``(0, hi]`` with the nearest ones replaced by ``canonical``.

    A plain grid generally misses irrational moduli such as ``1/sqrt(2)``, so
    each canonical value takes the place of its nearest grid point and the
    grid keeps ``size`` entries.
    """
    grid = [hi * (i + 1) / size for i in range(size)]
    for c in canonical:
        j = min(range(size), key=lambda i: abs(grid[i] - c))
        grid[j] = float(c)
    return sorted(set(grid))


# -- exterior algebra --------------------------------------------------------------


def linalg_identity_checks(n_max: int, seed: int = 0) -> list:
    out = []
    for cfg in riemannian_configs(min(n_max, LINALG_N_MAX)):
        r = verify_linalg_identities(cfg.n, cfg.k, seed=seed)
        out.append(
            Check("linalg_identities", _cfg(cfg), r["max_residual"], 0.0, r["max_residual"], TOL_EXACT, note="; ".join(r["notes"]))
        )
    return out


def hodge_star_checks(n_max: int) -> list:
    """Isometry and ``** = (-1)^{k(n-k)}``."""
    out = []
    for cfg in riemannian_configs(n_max):
        n, k = cfg.n, cfg.k
        s = hodge_star_matrix(n, k)
        back = hodge_star_matrix(n, n - k)
        iso = _maxabs(s.T @ s - np.eye(len(s)))
        inv = _maxabs(back @ s - (-1) ** (k * (n - k)) * np.eye(len(s)))
        out.append(Check("hodge_star", _cfg(cfg), None, None, max(iso, inv), TOL_EXACT))
    return out


def cartan_checks(n_max: int, seed: int = 0, samples: int = 4) -> list:
    """``e_u iota_u + iota_u e_u = |u|^2`` on every degree."""
    rng = np.random.default_rng(seed)
    out = []
    for cfg in riemannian_configs(n_max):
        n, k = cfg.n, cfg.k
        worst = 0.0
        for _ in range(samples):
            u = rng.standard_normal(n)
            lhs = np.zeros((comb(n, k), comb(n, k)))
            if k >= 1:
                lhs += wedge_matrix(n, k - 1, u) @ interior_matrix(n, k, u)
            if k < n:
                lhs += interior_matrix(n, k + 1, u) @ wedge_matrix(n, k, u)
            worst = max(worst, _maxabs(lhs - (u @ u) * np.eye(len(lhs))) / max(1.0, float(u @ u)))
        out.append(Check("cartan", _cfg(cfg), None, None, worst, TOL_EXACT))
    return out


# -- intertwiners and projections ----------------------------------------------------


def section_checks(configs, perturb: Optional[Perturbation] = None) -> list:
    """``Pi_i theta_i = id``, ``theta_i`` isometric and ``Pi_i`` zero on ``(im theta_i)^perp``."""
    perturb = perturb or Perturbation()
    out = []
    for cfg in configs:
        for fam in _families(cfg):
            blocks = projection_blocks(cfg, fam)
            for tag, pi in blocks.items():
                th = perturb(theta_for(OperatorKind(tag, cfg)).matrix)
                p = perturb(pi.matrix)
                eye = np.eye(th.shape[1])
                c = _cfg(cfg, operator=tag)
                out.append(Check("section", c, None, None, _maxabs(p @ th - eye), TOL_EXACT))
                out.append(Check("isometry", c, None, None, _maxabs(th.conj().T @ th - eye), TOL_EXACT))
                # p restricted to (im th)^perp is p (1 - th th^H)
                out.append(Check("kernel", c, None, None, _maxabs(p - (p @ th) @ th.conj().T), TOL_EXACT))
    return out


def complement_checks(configs, perturb: Optional[Perturbation] = None) -> list:
    """``Pi^* Pi + Pi_perp^* Pi_perp = id`` on the tensor space, plus the rank of ``Pi``."""
    perturb = perturb or Perturbation()
    out = []
    for cfg in configs:
        for fam in _families(cfg):
            pi, perp = projection_pair(cfg, fam)
            p, q = perturb(pi.matrix), perturb(perp.matrix)
            total = p.conj().T @ p + q.conj().T @ q
            res = _maxabs(total - np.eye(len(total)))
            c = _cfg(cfg, family=fam)
            out.append(Check("complement", c, None, None, res, TOL_EIGEN))
            rank = int(np.linalg.matrix_rank(p, tol=1e-8))
            out.append(Check("projection_rank", c, float(rank), float(pi.codomain.dim), abs(rank - pi.codomain.dim), 0.5))
    return out


def _sym(tag, cfg, xi):
    kind = OperatorKind(tag, cfg)
    return symbol_matrix(tag, cfg, xi) if kind.defined else None


def _laplacian(cfg, up, down, xi):
    """``sigma(down) sigma(up) + sigma(up) sigma(down)`` on the space of ``cfg``."""
    dim = cfg.space.dim
    total = np.zeros((dim, dim), dtype=complex)
    s_up = _sym(up, cfg, xi)
    if s_up is not None:
        total += _sym(down, _shift(cfg, up), xi) @ s_up
    s_down = _sym(down, cfg, xi)
    if s_down is not None:
        total += _sym(up, _shift(cfg, down), xi) @ s_down
    return total


def _shift(cfg, tag):
    if isinstance(cfg, RiemannianConfig):
        return RiemannianConfig(cfg.n, cfg.k + (1 if tag == "d" else -1))
    dp = {"del": 1, "del_star": -1}.get(tag, 0)
    dq = {"delbar": 1, "delbar_star": -1}.get(tag, 0)
    return KahlerConfig(cfg.n, cfg.p + dp, cfg.q + dq)


def laplacian_checks(configs, seed: int = 0, samples: int = 4) -> list:
    """Symbol-level ``Delta = id`` for unit real ``xi`` and ``Delta = 2 Delta_del = 2 Delta_delbar``."""
    rng = np.random.default_rng(seed)
    out = []
    for cfg in configs:
        dim = cfg.n if isinstance(cfg, RiemannianConfig) else 2 * cfg.n
        eye = np.eye(cfg.space.dim)
        worst = 0.0
        for _ in range(samples):
            xi = rng.standard_normal(dim)
            xi /= np.linalg.norm(xi)
            if isinstance(cfg, RiemannianConfig):
                worst = max(worst, _maxabs(_laplacian(cfg, "d", "d_star", xi) - eye))
            else:
                for up, down in (("del", "del_star"), ("delbar", "delbar_star")):
                    worst = max(worst, _maxabs(2 * _laplacian(cfg, up, down, xi) - eye))
        out.append(Check("laplacian_split", _cfg(cfg), None, None, worst, TOL_EIGEN))
    return out


def equivariance_checks(configs, n_elements: int = 100, seed: int = 0, perturb: Optional[Perturbation] = None) -> list:
    """``g theta = theta g`` and ``g Pi = Pi g`` over random group elements."""
    perturb = perturb or Perturbation()
    out = []
    for cfg in configs:
        kind_name = "orthogonal" if isinstance(cfg, RiemannianConfig) else "unitary"
        maps = []
        for fam in _families(cfg):
            for tag, pi in projection_blocks(cfg, fam).items():
                th = theta_for(OperatorKind(tag, cfg))
                maps.append((tag, th.domain, th.codomain, perturb(th.matrix), pi.domain, pi.codomain, perturb(pi.matrix)))
        if not maps:
            continue
        worst = {tag: 0.0 for tag, *_ in maps}
        for i in range(n_elements):
            g = random_element(kind_name, cfg.n, seed=(seed, cfg.n, i))
            for tag, t_src, t_tgt, th, p_src, p_tgt, pi in maps:
                r1 = _maxabs(apply_action(g, t_tgt, th) - th @ apply_action(g, t_src, np.eye(t_src.dim)))
                r2 = _maxabs(apply_action(g, p_tgt, pi) - pi @ apply_action(g, p_src, np.eye(p_src.dim)))
                worst[tag] = max(worst[tag], r1, r2)
        for tag, res in worst.items():
            out.append(Check("equivariance", _cfg(cfg, operator=tag, elements=n_elements), None, None, res, TOL_EIGEN))
    return out


# -- rescaling and orthogonality ------------------------------------------------------


def uniqueness_checks(n_max: int, size: int = 200, hi: float = 1.5, perturb: Optional[Perturbation] = None) -> list:
    """Only the canonical modulus makes ``c sigma`` a coisometry, for d and d* on every degree."""
    perturb = perturb or Perturbation()
    out = []
    for cfg in riemannian_configs(n_max):
        n, k = cfg.n, cfg.k
        grid = candidate_grid({1 / sqrt(k + 1), 1 / sqrt(n - k + 1)}, size, hi)
        for tag in ("d", "d_star"):
            kind = OperatorKind(tag, cfg)
            if not kind.defined:
                continue
            if perturb.eps:
                rep = _scan_matrix(perturb(tensor_symbol(kind).matrix), grid)
            else:
                rep = uniqueness_scan(kind, grid, tol=TOL_EIGEN).passing
            canonical = normalization(tag, cfg)
            exact = len(rep) == 1 and abs(rep[0] - canonical) < TOL_EIGEN
            out.append(
                Check(
                    "uniqueness",
                    _cfg(cfg, operator=tag, candidates=len(grid)),
                    float(len(rep)),
                    1.0,
                    0.0 if exact else 1.0,
                    TOL_EIGEN,
                    note="passing: " + ", ".join(f"{c:.12f}" for c in rep),
                )
            )
    return out


def _scan_matrix(s, grid):
    gram = s @ s.conj().T
    eye = np.eye(len(gram))
    return [c for c in grid if _maxabs(c * c * gram - eye) < TOL_EIGEN]


def orthogonality_checks(n_max: int, perturb: Optional[Perturbation] = None) -> list:
    """Images of theta1 and theta2 are orthogonal wherever both exist."""
    perturb = perturb or Perturbation()
    out = []
    for cfg in riemannian_configs(n_max):
        if not 1 <= cfg.k <= cfg.n - 1:
            continue
        a = perturb(theta_for(OperatorKind("d", cfg)).matrix)
        b = perturb(theta_for(OperatorKind("d_star", cfg)).matrix)
        ov = _overlap(a, b)
        out.append(Check("image_orthogonality", _cfg(cfg), ov, 0.0, ov, TOL_EXACT))
    return out


def _overlap(a, b):
    qa, qb = scipy.linalg.orth(a), scipy.linalg.orth(b)
    return min(1.0, float(np.linalg.svd(qa.conj().T @ qb, compute_uv=False).max()))


def no_go_checks(complex_n_max: int, threshold: float = 0.1) -> tuple:
    """Overlap of ``im theta^{del*}`` and ``im theta^{delbar}`` over all bidegrees where both exist.

    Returns ``(checks, rows)``: one check that some overlap exceeds the
    threshold, and the per-configuration overlaps as a table.
    """
    rows = []
    for n in range(1, complex_n_max + 1):
        for p in range(1, n + 1):
            for q in range(0, n):
                a = theta_kahler("del_star", n, p, q)
                b = theta_kahler("delbar", n, p, q)
                rows.append({"n": n, "p": p, "q": q, "overlap": image_overlap(a, b)})
    best = max((r["overlap"] for r in rows), default=0.0)
    arg = max(rows, key=lambda r: r["overlap"]) if rows else {}
    cfg = {"complex_n_max": complex_n_max, "threshold": threshold}
    if arg:
        cfg["argmax"] = f"n={arg['n']},p={arg['p']},q={arg['q']}"
    check = Check("no_go_overlap", cfg, best, threshold, max(0.0, threshold - best), TOL_EXACT)
    return [check], rows


# -- driver ----------------------------------------------------------------------


def run_verify(
    n_max: int = 6,
    complex_n_max: int = 3,
    seed: int = 0,
    perturb: float = 0.0,
    equivariance_n_max: int = 4,
    equivariance_complex_n_max: int = 2,
    n_elements: int = 100,
    tol_scale: float = 1.0,
):
    """Run every suite and return ``(checks, tables)``.

    ``tol_scale`` multiplies every tolerance (``--tol`` on the command line
    sets it relative to the exact-algebra default).
    """
    pert = Perturbation(perturb, seed)
    real = list(riemannian_configs(n_max))
    cplx = list(kahler_configs(complex_n_max))
    checks = []
    checks += linalg_identity_checks(n_max, seed)
    checks += hodge_star_checks(n_max)
    checks += cartan_checks(n_max, seed)
    checks += section_checks(real + cplx, pert)
    checks += complement_checks(real + cplx, pert)
    checks += laplacian_checks(real + cplx, seed)
    checks += equivariance_checks(
        list(riemannian_configs(min(n_max, equivariance_n_max)))
        + list(kahler_configs(min(complex_n_max, equivariance_complex_n_max))),
        n_elements,
        seed,
        pert,
    )
    checks += uniqueness_checks(n_max, perturb=pert)
    checks += orthogonality_checks(n_max, pert)
    nogo, rows = no_go_checks(complex_n_max)
    checks += nogo
    if tol_scale != 1.0:
        for c in checks:
            c.tol *= tol_scale
    return checks, {"no_go_overlap": rows}
