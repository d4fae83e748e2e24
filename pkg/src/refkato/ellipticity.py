"""Ellipticity constants of ``L*L`` and the refined Kato constants they produce."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt
from typing import Optional

import numpy as np

from .config import KahlerConfig, RiemannianConfig, SpaceConfig
from .steinweiss import FAMILY_TAGS, OperatorKind, normalization, symbol_matrix

__all__ = [
    "EllipticityResult",
    "KatoConstant",
    "symbol_LstarL",
    "epsilon_closed_form",
    "riemannian_alpha_squared",
    "kahler_alpha_squared",
    "ellipticity_constant",
    "kato_constant",
    "direct_sum_constant",
    "constants_table",
    "random_unit_covectors",
]

REAL_N_MAX = 10
COMPLEX_N_MAX = 6


@dataclass(frozen=True)
class EllipticityResult:
    config: SpaceConfig
    epsilon_numeric: float
    epsilon_closed_form: float
    xi_spread: float
    n_samples: int

    @property
    def residual(self) -> float:
        return abs(self.epsilon_numeric - self.epsilon_closed_form)


@dataclass(frozen=True)
class KatoConstant:
    """A refined Kato constant ``alpha = sqrt(1 - eps)``.

    ``parallel`` marks degrees where the conclusion is that the form is
    parallel rather than a Kato bound; ``alpha`` is then 0.
    """

    alpha_squared: float
    source: str
    parallel: bool = False
    breakdown: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not -1e-12 <= self.alpha_squared <= 1 + 1e-12:
            raise ValueError(f"alpha^2 = {self.alpha_squared} outside [0, 1]")

    @property
    def alpha(self) -> float:
        return sqrt(max(self.alpha_squared, 0.0))

    @classmethod
    def from_alpha(cls, alpha: float, source: str = "given") -> "KatoConstant":
        if not 0 <= alpha <= 1:
            raise ValueError(f"Kato constant {alpha} outside [0, 1]")
        return cls(alpha * alpha, source)


def random_unit_covectors(dim: int, n_samples: int, seed=None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    xs = rng.standard_normal((n_samples, dim))
    return xs / np.linalg.norm(xs, axis=1, keepdims=True)


def _family_tags(config: SpaceConfig):
    if isinstance(config, RiemannianConfig):
        return FAMILY_TAGS["hodge_de_rham"]
    if config.family is None:
        raise ValueError("a Kähler configuration needs family L1 or L2 here")
    return FAMILY_TAGS[config.family]


def symbol_LstarL(config: SpaceConfig, xi) -> np.ndarray:
    """``sigma_xi(L*L) = sum_i c_i^2 sigma_i^* sigma_i`` over the defined summands of ``L``."""
    xi = np.asarray(xi, dtype=float)
    if abs(np.linalg.norm(xi) - 1) > 1e-12:
        raise ValueError("symbol_LstarL needs a unit covector")
    dim = config.space.dim
    out = np.zeros((dim, dim), dtype=complex)
    for tag in _family_tags(config):
        kind = OperatorKind(tag, config)
        if not kind.defined:
            continue
        s = symbol_matrix(tag, config, xi)
        out += normalization(tag, config) ** 2 * (s.conj().T @ s)
    if not np.any(out.imag):
        out = out.real
    return out


def epsilon_closed_form(config: SpaceConfig) -> float:
    if isinstance(config, RiemannianConfig):
        n, k = config.n, config.k
        if k in (0, n):
            return 1.0
        return min(1 / (k + 1), 1 / (n - k + 1))
    deg = config.p if _family_tags(config)[0] == "del" else config.q
    n = config.n
    if deg in (0, n):
        return 0.5
    return 0.5 * min(1 / (deg + 1), 1 / (n - deg + 1))


def riemannian_alpha_squared(n: int, k: int) -> Optional[float]:
    """The two-branch Riemannian constant squared; ``None`` for ``k`` in ``{0, n}`` (parallel)."""
    if k in (0, n):
        return None
    if k <= n / 2:
        return (n - k) / (n - k + 1)
    return k / (k + 1)


def kahler_alpha_squared(n: int, p: int, q: int) -> float:
    if p in (0, n) or q in (0, n):
        return 0.5
    return min(
        max((2 * p + 1) / (2 * p + 2), (2 * n - 2 * p + 1) / (2 * n - 2 * p + 2)),
        max((2 * q + 1) / (2 * q + 2), (2 * n - 2 * q + 1) / (2 * n - 2 * q + 2)),
    )


def ellipticity_constant(config: SpaceConfig, n_samples: int = 16, seed=0) -> EllipticityResult:
    """Minimum symbol eigenvalue of ``L*L`` over sampled unit covectors."""
    if n_samples < 1:
        raise ValueError("need at least one sample")
    dim = config.n if isinstance(config, RiemannianConfig) else 2 * config.n
    lows = []
    for xi in random_unit_covectors(dim, n_samples, seed):
        lows.append(np.linalg.eigvalsh(symbol_LstarL(config, xi))[0])
    lows = np.array(lows)
    return EllipticityResult(
        config=config,
        epsilon_numeric=float(lows.min()),
        epsilon_closed_form=epsilon_closed_form(config),
        xi_spread=float(lows.max() - lows.min()),
        n_samples=n_samples,
    )


def kato_constant(config: SpaceConfig, n_samples: int = 4, seed=0) -> KatoConstant:
    """Refined Kato constant for harmonic fields of the given type.

    Kähler configurations report the Kähler constant (minimum over L1, L2 of
    ``1 - eps``) as ``alpha``, with a breakdown holding the per-family values,
    the Riemannian constant in real dimension ``2n`` and degree ``p+q``, and
    the smaller of the two.
    """
    if isinstance(config, RiemannianConfig):
        res = ellipticity_constant(config, n_samples, seed)
        parallel = config.k in (0, config.n)
        a2 = 0.0 if parallel else max(0.0, 1 - res.epsilon_numeric)
        return KatoConstant(a2, "riemannian", parallel=parallel, breakdown={"epsilon": res.epsilon_numeric})
    per_family = {}
    for fam in ("L1", "L2"):
        res = ellipticity_constant(config.with_family(fam), n_samples, seed)
        per_family[fam] = 1 - res.epsilon_numeric
    kahler = min(per_family.values())
    riem = riemannian_alpha_squared(2 * config.n, config.p + config.q)
    riem = 0.0 if riem is None else riem
    breakdown = {**per_family, "kahler": kahler, "riemannian": riem, "minimum": min(kahler, riem)}
    return KatoConstant(kahler, "kahler", breakdown=breakdown)


def direct_sum_constant(a1: KatoConstant, a2: KatoConstant) -> KatoConstant:
    """Constant valid for a pair of sections, each satisfying its own inequality."""
    for a in (a1, a2):
        if not 0 <= a.alpha <= 1:
            raise ValueError("Kato constants must lie in [0, 1]")
    return KatoConstant(max(a1.alpha_squared, a2.alpha_squared), "direct_sum")


def constants_table(n_max: int, complex_n_max: Optional[int] = None, n_samples: int = 4, seed=0) -> dict:
    """Riemannian rows for ``1 <= n <= n_max`` and Kähler rows for ``1 <= n <= complex_n_max``."""
    if n_max < 1:
        raise ValueError("empty range: n_max must be at least 1")
    if n_max > REAL_N_MAX:
        raise ValueError(f"n_max is limited to {REAL_N_MAX}")
    if complex_n_max is not None and not 0 <= complex_n_max <= COMPLEX_N_MAX:
        raise ValueError(f"complex n_max is limited to {COMPLEX_N_MAX}")
    real_rows = []
    for n in range(1, n_max + 1):
        for k in range(n + 1):
            cfg = RiemannianConfig(n, k)
            res = ellipticity_constant(cfg, n_samples, seed)
            closed = riemannian_alpha_squared(n, k)
            parallel = closed is None
            numeric = 0.0 if parallel else 1 - res.epsilon_numeric
            closed = 0.0 if parallel else closed
            real_rows.append(
                {
                    "n": n,
                    "k": k,
                    "parallel": parallel,
                    "epsilon": res.epsilon_numeric,
                    "epsilon_closed_form": res.epsilon_closed_form,
                    "alpha_squared": numeric,
                    "alpha_squared_closed_form": closed,
                    "alpha": sqrt(max(numeric, 0.0)),
                    "residual": max(res.residual, abs(numeric - closed)),
                }
            )
    by_nk = {(r["n"], r["k"]): r["alpha_squared"] for r in real_rows}
    duality = max(abs(by_nk[(n, k)] - by_nk[(n, n - k)]) for (n, k) in by_nk)
    complex_rows = []
    for n in range(1, (complex_n_max or 0) + 1):
        for p in range(n + 1):
            for q in range(n + 1):
                kc = kato_constant(KahlerConfig(n, p, q), n_samples, seed)
                closed = kahler_alpha_squared(n, p, q)
                complex_rows.append(
                    {
                        "n": n,
                        "p": p,
                        "q": q,
                        "alpha_squared_L1": kc.breakdown["L1"],
                        "alpha_squared_L2": kc.breakdown["L2"],
                        "alpha_squared": kc.alpha_squared,
                        "alpha_squared_closed_form": closed,
                        "alpha": kc.alpha,
                        "riemannian_alpha_squared": kc.breakdown["riemannian"],
                        "minimum_alpha_squared": kc.breakdown["minimum"],
                        "residual": abs(kc.alpha_squared - closed),
                    }
                )
    return {"riemannian": real_rows, "kahler": complex_rows, "duality_residual": duality}
