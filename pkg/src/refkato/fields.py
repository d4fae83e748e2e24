"""Analytic form fields on flat R^n and C^n with exact first derivatives.

Fields are given by sympy expressions for their coefficients in the unit
blade basis; derivatives are taken symbolically and compiled with
``lambdify``. On flat space the Levi-Civita derivative of a field is the
coordinate derivative of its coefficients, so ``nabla`` here is exact.

Real coordinates on C^n are ``(x_1..x_n, y_1..y_n)`` with ``z_j = x_j + i y_j``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional

import numpy as np
import sympy as sp

from .config import KahlerConfig, RiemannianConfig
from .exterior import (
    BidegreeSpace,
    ExteriorSpace,
    FormVector,
    bidegree_split,
    hodge_star_matrix,
    wedge_matrix,
)
from .steinweiss import OperatorKind, symbol_matrix, theta1, theta2

__all__ = [
    "FormField",
    "coordinate_symbols",
    "expression_namespace",
    "gradient_field",
    "holomorphic_field",
    "split_one_form",
    "assemble_d_and_dstar",
    "assemble_operator",
    "operator_residuals",
    "harmonic_residual",
    "kato_ratio",
    "kato_ratios",
    "sweep_ratio",
    "SweepResult",
    "equality_residual_riemannian",
    "equality_residual_kahler",
    "finite_diff_check",
    "convergence_order",
    "hodge_star_parallel_check",
    "box_grid",
]

ZERO_FRACTION = 1e-8


def coordinate_symbols(ambient: str, n: int) -> tuple:
    if ambient == "real":
        return sp.symbols(f"x1:{n + 1}", real=True)
    if ambient == "complex":
        return sp.symbols(f"x1:{n + 1}", real=True) + sp.symbols(f"y1:{n + 1}", real=True)
    raise ValueError(f"unknown ambient {ambient!r}")


def expression_namespace(ambient: str, n: int) -> dict:
    """Names available when parsing coefficient expressions."""
    syms = coordinate_symbols(ambient, n)
    ns = {str(s): s for s in syms}
    if ambient == "complex":
        for j in range(n):
            x, y = syms[j], syms[n + j]
            ns[f"z{j + 1}"] = x + sp.I * y
            ns[f"zb{j + 1}"] = x - sp.I * y
    ns.update({"I": sp.I, "pi": sp.pi, "E": sp.E, "sqrt": sp.sqrt, "exp": sp.exp, "cos": sp.cos,
               "sin": sp.sin, "cosh": sp.cosh, "sinh": sp.sinh, "re": sp.re, "im": sp.im,
               "conjugate": sp.conjugate, "Rational": sp.Rational})
    return ns


def _compile(expr, syms):
    f = sp.lambdify(syms, expr, modules="numpy")
    return f


class FormField:
    """A form-valued function on flat ``R^n`` (ambient ``"real"``) or ``C^n`` (``"complex"``).

    ``coefficients`` maps basis positions of ``space`` to sympy expressions in
    the coordinate symbols; missing positions are zero.
    """

    def __init__(self, space, coefficients: Mapping[int, sp.Expr], name: str = ""):
        if isinstance(space, ExteriorSpace):
            self.ambient = "real"
            self.ambient_dim = space.n
        elif isinstance(space, BidegreeSpace):
            self.ambient = "complex"
            self.ambient_dim = 2 * space.n
        else:
            raise TypeError("fields take values in an ExteriorSpace or BidegreeSpace")
        self.space = space
        self.name = name
        self.symbols = coordinate_symbols(self.ambient, space.n)
        exprs = {}
        for i, e in coefficients.items():
            if not 0 <= i < space.dim:
                raise ValueError(f"basis position {i} out of range for {space.label()}")
            e = sp.sympify(e)
            stray = e.free_symbols - set(self.symbols)
            if stray:
                raise ValueError(f"unknown symbols {sorted(map(str, stray))} in coefficient")
            if e != 0:
                exprs[i] = e
        self.expressions = exprs
        self._values = {i: _compile(e, self.symbols) for i, e in exprs.items()}
        self._derivs = {}
        for i, e in exprs.items():
            for j, s in enumerate(self.symbols):
                de = sp.diff(e, s)
                if de != 0:
                    self._derivs[(j, i)] = _compile(de, self.symbols)
        self.is_complex = self.ambient == "complex" or any(e.has(sp.I) for e in exprs.values())

    def __repr__(self) -> str:
        return f"FormField({self.name or '?'}: {self.space.label()})"

    @property
    def dtype(self):
        return complex if self.is_complex else float

    def _columns(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.ambient_dim:
            raise ValueError(f"points must have {self.ambient_dim} coordinates")
        return pts, [pts[:, j] for j in range(self.ambient_dim)]

    def values(self, points) -> np.ndarray:
        """Coefficients at each point, shape ``(m, dim)``."""
        pts, cols = self._columns(points)
        out = np.zeros((len(pts), self.space.dim), dtype=self.dtype)
        for i, f in self._values.items():
            out[:, i] = np.broadcast_to(f(*cols), (len(pts),))
        return out

    def nabla(self, points) -> np.ndarray:
        """Exact first derivatives, shape ``(m, ambient_dim, dim)``; ``[:, j]`` is the derivative along coordinate ``j``."""
        pts, cols = self._columns(points)
        out = np.zeros((len(pts), self.ambient_dim, self.space.dim), dtype=self.dtype)
        for (j, i), f in self._derivs.items():
            out[:, j, i] = np.broadcast_to(f(*cols), (len(pts),))
        return out

    def eval(self, x) -> FormVector:
        return FormVector(self.space, self.values(x)[0])

    def eval_nabla(self, x) -> np.ndarray:
        return self.nabla(x)[0]

    def map_linear(self, matrix, space, name: str = "") -> "FormField":
        """The field ``x -> matrix @ omega(x)``, built symbolically."""
        matrix = np.asarray(matrix)
        if matrix.shape != (space.dim, self.space.dim):
            raise ValueError("matrix shape does not match spaces")
        coeffs = {}
        for r in range(space.dim):
            e = sum((sp.nsimplify(matrix[r, i]) * expr for i, expr in self.expressions.items() if matrix[r, i] != 0), sp.Integer(0))
            if e != 0:
                coeffs[r] = e
        out = FormField(space, coeffs, name or f"map({self.name})")
        if self.is_complex:
            out.is_complex = True
        return out


def gradient_field(potential, n: int, name: str = "") -> FormField:
    """``df`` for a scalar expression ``f`` in ``x1..xn``."""
    syms = coordinate_symbols("real", n)
    f = sp.sympify(potential, locals=expression_namespace("real", n)) if isinstance(potential, str) else potential
    return FormField(ExteriorSpace(n, 1), {j: sp.diff(f, s) for j, s in enumerate(syms)}, name or f"d({f})")


def holomorphic_field(n: int, p: int, coefficients: Mapping[tuple, object], name: str = "") -> FormField:
    """A ``(p, 0)``-field ``sum_I g_I(z) eps_I`` with unit (1,0)-blades ``eps_I``.

    ``coefficients`` maps 1-based index tuples to expressions (strings may use ``z1..zn``).
    """
    space = BidegreeSpace(n, p, 0)
    ns = expression_namespace("complex", n)
    out = {}
    for idx, g in coefficients.items():
        mask = sum(1 << (i - 1) for i in idx)
        out[space.index_of(mask, 0)] = sp.sympify(g, locals=ns) if isinstance(g, str) else g
    return FormField(space, out, name)


def split_one_form(potential, n: int):
    """Real 1-form ``df`` on ``C^n = R^{2n}`` with its (1,0) and (0,1) parts.

    With unit (1,0)-covectors ``eps_j = dz_j / sqrt(2)``, the parts are
    ``sqrt(2) d_{z_j} f eps_j`` and ``sqrt(2) d_{zbar_j} f epsbar_j``.
    """
    ns = expression_namespace("complex", n)
    f = sp.sympify(potential, locals=ns) if isinstance(potential, str) else potential
    syms = coordinate_symbols("complex", n)
    # the real field lives on R^{2n} with coordinates x1..x2n
    flat = dict(zip(syms, coordinate_symbols("real", 2 * n)))
    real = FormField(ExteriorSpace(2 * n, 1), {j: sp.diff(f, s).subs(flat) for j, s in enumerate(syms)}, "df")
    holo, anti = {}, {}
    for j in range(n):
        dx, dy = sp.diff(f, syms[j]), sp.diff(f, syms[n + j])
        holo[j] = sp.expand((dx - sp.I * dy) / sp.sqrt(2))
        anti[j] = sp.expand((dx + sp.I * dy) / sp.sqrt(2))
    return (
        real,
        FormField(BidegreeSpace(n, 1, 0), {BidegreeSpace(n, 1, 0).index_of(1 << j, 0): e for j, e in holo.items()}, "df(1,0)"),
        FormField(BidegreeSpace(n, 0, 1), {BidegreeSpace(n, 0, 1).index_of(0, 1 << j): e for j, e in anti.items()}, "df(0,1)"),
    )


# -- first-order operators assembled from symbols ----------------------------------


def _config_of(field: FormField):
    sp_ = field.space
    if isinstance(sp_, ExteriorSpace):
        return RiemannianConfig(sp_.n, sp_.k)
    return KahlerConfig(sp_.n, sp_.p, sp_.q)


def _operator_blocks(field: FormField, tag: str):
    """``[-i sigma(P)_{dx_j}]_j``, so that ``P omega = sum_j block_j @ d_j omega``."""
    cfg = _config_of(field)
    kind = OperatorKind(tag, cfg)
    if not kind.defined:
        return None
    out = []
    for j in range(field.ambient_dim):
        e = np.zeros(field.ambient_dim)
        e[j] = 1.0
        out.append(-1j * symbol_matrix(tag, cfg, e))
    blocks = np.array(out)
    if not np.any(blocks.imag):
        blocks = blocks.real
    return blocks


def assemble_operator(field: FormField, points, tag: str) -> Optional[np.ndarray]:
    """Values of ``P omega`` at each point, shape ``(m, dim target)``; ``None`` if ``P`` leaves the degree range."""
    blocks = _operator_blocks(field, tag)
    if blocks is None:
        return None
    return np.einsum("jab,mjb->ma", blocks, field.nabla(points))


def assemble_d_and_dstar(field: FormField, x):
    """``(d omega(x), d* omega(x))`` for a real field; ``None`` where the target degree does not exist."""
    if field.ambient != "real":
        raise ValueError("d and d* are assembled here for fields on R^n")
    n, k = field.space.n, field.space.k
    out = []
    for tag, deg in (("d", k + 1), ("d_star", k - 1)):
        vals = assemble_operator(field, x, tag)
        out.append(None if vals is None else FormVector(ExteriorSpace(n, deg), vals[0]))
    return out[0], out[1]


_RESIDUAL_TAGS = {
    "hodge": None,  # every operator defined for the field's type
    "dbar": ("delbar", "delbar_star"),
    "del": ("del", "del_star"),
}


def operator_residuals(field: FormField, points, family: str = "hodge") -> np.ndarray:
    """Pointwise ``sum |P omega|`` over the operators of ``family``, shape ``(m,)``.

    ``"hodge"`` means ``d, d*`` on R^n and all four Dolbeault operators on C^n
    (for a pure-type form, ``(d + d*) omega = 0`` splits into these).
    """
    if family not in _RESIDUAL_TAGS:
        raise ValueError(f"unknown residual family {family!r}")
    tags = _RESIDUAL_TAGS[family]
    if tags is None:
        tags = ("d", "d_star") if field.ambient == "real" else ("del", "delbar", "del_star", "delbar_star")
    elif field.ambient == "real":
        raise ValueError(f"family {family!r} needs a field on C^n")
    pts = np.atleast_2d(points)
    total = np.zeros(len(pts))
    for tag in tags:
        vals = assemble_operator(field, pts, tag)
        if vals is not None:
            total += np.linalg.norm(vals, axis=1)
    return total


def harmonic_residual(field: FormField, grid, family: str = "hodge") -> float:
    if len(np.atleast_2d(grid)) == 0:
        raise ValueError("empty grid")
    return float(operator_residuals(field, grid, family).max())


# -- Kato ratios ----------------------------------------------------------------


def kato_ratios(field: FormField, points, scale: Optional[float] = None):
    """Ratios ``|d|omega|| / |nabla omega|`` at each point, NaN where undefined.

    ``d|omega|`` is ``Re<nabla omega, omega> / |omega|`` per coordinate
    direction. A point is undefined when ``|omega|`` or ``|nabla omega|`` is
    below ``1e-8`` times the largest value seen (or ``scale``).
    """
    vals = field.values(points)
    nab = field.nabla(points)
    norm = np.linalg.norm(vals, axis=1)
    nab_norm = np.linalg.norm(nab.reshape(len(nab), -1), axis=1)
    s_val = scale if scale is not None else max(norm.max(initial=0.0), 1e-300)
    s_nab = scale if scale is not None else max(nab_norm.max(initial=0.0), 1e-300)
    undefined = (norm < ZERO_FRACTION * s_val) | (nab_norm < ZERO_FRACTION * s_nab)
    num = np.einsum("mjb,mb->mj", nab, vals.conj()).real
    with np.errstate(invalid="ignore", divide="ignore"):
        grad_abs = np.linalg.norm(num, axis=1) / norm
        ratio = grad_abs / nab_norm
    ratio[undefined] = np.nan
    return ratio


def kato_ratio(field: FormField, x, scale: float = 1.0) -> Optional[float]:
    r = kato_ratios(field, np.atleast_2d(x), scale=scale)[0]
    return None if np.isnan(r) else float(r)


@dataclass(frozen=True)
class SweepResult:
    max_ratio: float
    argmax: Optional[tuple]
    expected_alpha: float
    n_points: int
    n_undefined: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.n_undefined == self.n_points or self.max_ratio <= self.expected_alpha + self.tol

    @property
    def attainment_gap(self) -> float:
        return self.expected_alpha - self.max_ratio


def sweep_ratio(field: FormField, grid, expected_alpha: float, tol: float = 1e-9) -> SweepResult:
    grid = np.atleast_2d(grid)
    ratios = kato_ratios(field, grid)
    defined = ~np.isnan(ratios)
    if defined.any():
        i = int(np.nanargmax(ratios))
        best, arg = float(ratios[i]), tuple(float(v) for v in grid[i])
    else:
        best, arg = float("nan"), None
    return SweepResult(best, arg, float(expected_alpha), len(grid), int((~defined).sum()), tol)


# -- equality conditions -----------------------------------------------------------


def equality_residual_riemannian(field: FormField, x) -> Optional[float]:
    """Distance from ``nabla omega`` to ``xi (x) omega - theta1(Pi1(xi (x) omega)) - theta2(Pi2(xi (x) omega))``.

    ``xi`` points along ``d|omega|^2`` and its length is the least-squares
    best fit. ``None`` at zeros of ``omega``.
    """
    if field.ambient != "real":
        raise ValueError("the Riemannian equality condition is for fields on R^n")
    n, k = field.space.n, field.space.k
    omega = field.values(x)[0]
    nab = field.nabla(x)[0]
    if np.linalg.norm(omega) < ZERO_FRACTION:
        return None
    grad_sq = 2 * (nab @ omega.conj()).real
    if np.linalg.norm(grad_sq) <= ZERO_FRACTION * np.linalg.norm(nab) * np.linalg.norm(omega):
        return float(np.linalg.norm(nab))
    xi0 = grad_sq / np.linalg.norm(grad_sq)
    rhs = np.outer(xi0, omega).ravel()
    if k < n:
        wedge_part = wedge_matrix(n, k, xi0) @ omega / np.sqrt(k + 1)
        rhs = rhs - theta1(n, k).matrix @ wedge_part
    if k > 0:
        contract_part = -(wedge_matrix(n, k - 1, xi0).T @ omega) / np.sqrt(n - k + 1)
        rhs = rhs - theta2(n, k).matrix @ contract_part
    target = nab.ravel()
    denom = np.vdot(rhs, rhs).real
    scale = np.vdot(rhs, target).real / denom if denom > 0 else 0.0
    return float(np.linalg.norm(target - scale * rhs))


def _slot_tensor(field: FormField, nab: np.ndarray) -> np.ndarray:
    """Rewrite real-direction derivatives as (1,0)/(0,1)-slot components, shape ``(2n, dim)``."""
    n = field.space.n
    dx, dy = nab[:n], nab[n:]
    return np.concatenate([(dx - 1j * dy) / np.sqrt(2), (dx + 1j * dy) / np.sqrt(2)])


def equality_residual_kahler(field: FormField, x, slot: Optional[str] = None) -> Optional[float]:
    """``min over real xi`` of ``|nabla omega - xi^{a} (x) omega|`` with ``a`` the (1,0) or (0,1) part.

    By default the part is chosen from the bidegree: ``(0,q)`` and ``(p,n)``
    use ``xi^{0,1}``; ``(p,0)`` and ``(n,q)`` use ``xi^{1,0}``. When both
    readings apply, the smaller residual is returned.
    """
    if field.ambient != "complex":
        raise ValueError("the Kähler equality condition is for fields on C^n")
    n, p, q = field.space.n, field.space.p, field.space.q
    if slot is None:
        slots = set()
        if p == 0 or q == n:
            slots.add("antiholo")
        if q == 0 or p == n:
            slots.add("holo")
        if not slots:
            raise ValueError("equality condition is only characterised for (0,q), (p,0), (n,q) and (p,n) fields")
    else:
        slots = {slot}
    omega = field.values(x)[0]
    if np.linalg.norm(omega) < ZERO_FRACTION:
        return None
    target = _slot_tensor(field, field.nabla(x)[0]).ravel()
    best = None
    for which in sorted(slots):
        cols = []
        for j in range(2 * n):
            e = np.zeros(2 * n)
            e[j] = 1.0
            xi = bidegree_split(e)
            part = np.zeros(2 * n, dtype=complex)
            if which == "holo":
                part[:n] = xi.holo
            else:
                part[n:] = xi.antiholo
            cols.append(np.outer(part, omega).ravel())
        design = np.array(cols).T
        # real least squares over xi in R^{2n}
        a = np.vstack([design.real, design.imag])
        b = np.concatenate([target.real, target.imag])
        coef, *_ = np.linalg.lstsq(a, b, rcond=None)
        r = float(np.linalg.norm(a @ coef - b))
        best = r if best is None else min(best, r)
    return best


# -- derivative and star checks ------------------------------------------------------


def finite_diff_check(field: FormField, x, h: float) -> float:
    """``|centered difference - nabla|`` at ``x``; ``O(h^2)`` for smooth fields."""
    if h <= 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=float)
    eye = np.eye(field.ambient_dim)
    plus = field.values(x + h * eye)
    minus = field.values(x - h * eye)
    approx = (plus - minus) / (2 * h)
    return float(np.linalg.norm(approx - field.eval_nabla(x)))


def convergence_order(field: FormField, x, h: float = 1e-2, levels: int = 3, exact_tol: float = 1e-10):
    """Observed orders from successive halvings of ``h``; empty if all residuals are rounding-level."""
    res = [finite_diff_check(field, x, h / 2**i) for i in range(levels)]
    scale = max(1.0, float(np.linalg.norm(field.eval_nabla(x))))
    if max(res) < exact_tol * scale:
        return res, []
    return res, [float(np.log2(res[i] / res[i + 1])) for i in range(levels - 1)]


def hodge_star_parallel_check(field: FormField, grid) -> float:
    """``max |d_i(*omega) - *(d_i omega)|`` over grid points and directions."""
    if field.ambient != "real":
        raise ValueError("the Hodge star check needs a field on R^n")
    n, k = field.space.n, field.space.k
    star = hodge_star_matrix(n, k)
    starred = field.map_linear(star, ExteriorSpace(n, n - k), f"*{field.name}")
    lhs = starred.nabla(grid)
    rhs = np.einsum("ab,mjb->mja", star, field.nabla(grid))
    return float(np.abs(lhs - rhs).max(initial=0.0))


def box_grid(dim: int, box: float = 2.0, points: int = 21, jitter: Optional[float] = None, seed=None) -> np.ndarray:
    """Uniform grid on ``[-box, box]^dim``; optional seeded jitter of relative size ``jitter``."""
    if points < 1:
        raise ValueError("need at least one point per axis")
    axis = np.linspace(-box, box, points) if points > 1 else np.zeros(1)
    grid = np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    if jitter:
        step = 2 * box / max(points - 1, 1)
        grid = grid + np.random.default_rng(seed).uniform(-jitter, jitter, grid.shape) * step
    return grid
