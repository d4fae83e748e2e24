"""Build :class:`~refkato.report.Report` objects for the three commands."""
from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .catalog import FieldCatalogEntry, load_catalog
from .ellipticity import COMPLEX_N_MAX, REAL_N_MAX, constants_table
from .fields import (
    convergence_order,
    equality_residual_kahler,
    equality_residual_riemannian,
    harmonic_residual,
    hodge_star_parallel_check,
    kato_ratios,
    sweep_ratio,
)
from .report import Check, Report
from .suites import TOL_EIGEN, TOL_EXACT, run_verify

__all__ = ["run_constants", "run_verify_report", "run_fields", "TOL_FIELD", "MAX_GRID_POINTS"]

TOL_FIELD = 1e-9
MAX_GRID_POINTS = 200_000
MIN_FD_ORDER = 1.9


def run_constants(n_max: int = 6, complex_n_max: Optional[int] = None, tol: float = TOL_EIGEN, seed: int = 42) -> Report:
    """Riemannian rows for ``n <= n_max``; Kähler rows for ``n <= complex_n_max`` when given."""
    if n_max < 1:
        raise ValueError("empty range: --n-max must be at least 1")
    if n_max > REAL_N_MAX:
        raise ValueError(f"--n-max is limited to {REAL_N_MAX} for real constants")
    if complex_n_max is not None and not 1 <= complex_n_max <= COMPLEX_N_MAX:
        raise ValueError(f"complex dimension must lie in 1..{COMPLEX_N_MAX}")
    rep = Report("constants", {"n_max": n_max, "complex_n_max": complex_n_max, "tol": tol, "seed": seed})
    table = constants_table(n_max, complex_n_max, seed=seed)
    for row in table["riemannian"]:
        cfg = {"n": row["n"], "k": row["k"]}
        rep.add(Check("riemannian_epsilon", cfg, row["epsilon"], row["epsilon_closed_form"], abs(row["epsilon"] - row["epsilon_closed_form"]), tol))
        if not row["parallel"]:
            rep.add(
                Check(
                    "riemannian_alpha",
                    cfg,
                    row["alpha"],
                    math.sqrt(row["alpha_squared_closed_form"]),
                    abs(row["alpha"] - math.sqrt(row["alpha_squared_closed_form"])),
                    tol,
                )
            )
    rep.add(Check("degree_duality", {"n_max": n_max}, table["duality_residual"], 0.0, table["duality_residual"], tol))
    for row in table["kahler"]:
        cfg = {"n": row["n"], "p": row["p"], "q": row["q"]}
        rep.add(Check("kahler_alpha_squared", cfg, row["alpha_squared"], row["alpha_squared_closed_form"], row["residual"], tol))
    rep.tables["riemannian"] = [
        {k: r[k] for k in ("n", "k", "parallel", "epsilon", "alpha_squared", "alpha", "alpha_squared_closed_form", "residual")}
        for r in table["riemannian"]
    ]
    if table["kahler"]:
        rep.tables["kahler"] = [
            {
                **{k: r[k] for k in ("n", "p", "q", "alpha_squared_L1", "alpha_squared_L2", "alpha_squared", "alpha", "residual")},
                "riemannian_alpha_squared": r["riemannian_alpha_squared"],
                "minimum_alpha_squared": r["minimum_alpha_squared"],
            }
            for r in table["kahler"]
        ]
    return rep


def run_verify_report(
    n_max: int = 6,
    complex_n_max: int = 3,
    tol: Optional[float] = None,
    seed: int = 42,
    perturb: float = 0.0,
) -> Report:
    """All identity suites. ``tol`` overrides the exact-algebra tolerance; the others scale with it."""
    if n_max < 1 or complex_n_max < 0:
        raise ValueError("empty range: dimensions must be at least 1")
    if n_max > 8:
        raise ValueError("--n-max is limited to 8 for the identity suites")
    if complex_n_max > 4:
        raise ValueError("complex dimension is limited to 4 for the identity suites")
    if tol is not None and tol <= 0:
        raise ValueError("tolerance must be positive")
    if perturb < 0:
        raise ValueError("perturbation size must be non-negative")
    scale = 1.0 if tol is None else tol / TOL_EXACT
    checks, tables = run_verify(n_max, complex_n_max, seed=seed, perturb=perturb, tol_scale=scale)
    rep = Report(
        "verify",
        {"n_max": n_max, "complex_n_max": complex_n_max, "tol": tol if tol is not None else TOL_EXACT, "seed": seed, "perturb": perturb},
    )
    rep.checks = checks
    rep.tables = tables
    return rep


def _effective_grid(entry: FieldCatalogEntry, points: Optional[int], box: Optional[float]):
    dim = entry.grid(points=1).shape[1]
    req = int(points if points is not None else entry.domain.get("grid", 21))
    if req < 1:
        raise ValueError("grid size must be positive")
    cap = int(np.floor(MAX_GRID_POINTS ** (1 / dim) + 1e-9))
    eff = min(req, cap)
    return entry.grid(points=eff, box=box), eff, eff < req


def _entry_checks(entry: FieldCatalogEntry, points, box, tol: float) -> tuple[list, dict]:
    f = entry.build_field()
    grid, eff, capped = _effective_grid(entry, points, box)
    ctl = entry.expected_violation
    cfg = {"entry": entry.name, "family": entry.family, "grid": eff, "points": len(grid)}
    note = "grid capped" if capped else ""
    out = []

    hr = harmonic_residual(f, grid, entry.residual_family)
    out.append(Check("harmonic_residual", cfg, hr, 0.0, hr, TOL_EIGEN, expected_fail=ctl, note=note))

    ratios = kato_ratios(f, grid)
    defined = ratios[~np.isnan(ratios)]
    top = float(defined.max()) if len(defined) else None
    out.append(Check("classical_bound", cfg, top, 1.0, 0.0 if top is None else max(0.0, top - 1.0), TOL_EXACT))

    sw = sweep_ratio(f, grid, entry.expected_alpha, tol)
    undefined_all = sw.n_undefined == sw.n_points
    excess = 0.0 if undefined_all else max(0.0, sw.max_ratio - entry.expected_alpha)
    out.append(
        Check(
            "ratio_bound",
            cfg,
            None if undefined_all else sw.max_ratio,
            entry.expected_alpha,
            excess,
            tol,
            expected_fail=ctl,
            undefined_points=sw.n_undefined,
            note="ratio undefined on the whole grid (parallel field)" if undefined_all else note,
        )
    )
    row = {
        "entry": entry.name,
        "family": entry.family,
        "points": len(grid),
        "undefined_points": sw.n_undefined,
        "harmonic_residual": hr,
        "max_ratio": None if undefined_all else sw.max_ratio,
        "expected_alpha": entry.expected_alpha,
        "attainment_gap": None if undefined_all else sw.attainment_gap,
        "equality_residual": None,
    }

    att = entry.expected_attainment
    if att is not None:
        r = _ratio_at(f, grid, att)
        gap = float("inf") if r is None else abs(r - entry.expected_alpha)
        out.append(Check("attainment", {**cfg, "point": list(map(float, att))}, r, entry.expected_alpha, gap, tol))
        eq = equality_residual_riemannian(f, att) if f.ambient == "real" else equality_residual_kahler(f, att)
        eq = float("inf") if eq is None else eq
        row["equality_residual"] = eq
        out.append(Check("equality_condition", {**cfg, "point": list(map(float, att))}, eq, 0.0, eq, tol))

    if entry.constant_ratio:
        d = defined
        dev = float(np.abs(d - entry.expected_alpha).max()) if len(d) else float("inf")
        out.append(Check("constant_ratio", cfg, float(d.min()) if len(d) else None, entry.expected_alpha, dev, TOL_EIGEN))

    x0 = _probe_point(grid.shape[1])
    _, orders = convergence_order(f, x0)
    worst = min(orders) if orders else None
    out.append(
        Check(
            "finite_difference_order",
            {**cfg, "point": [float(v) for v in x0]},
            worst,
            MIN_FD_ORDER,
            0.0 if worst is None else max(0.0, MIN_FD_ORDER - worst),
            TOL_EXACT,
            note="centered differences exact at rounding level" if worst is None else "",
        )
    )

    if f.ambient == "real" and not ctl:
        star = hodge_star_parallel_check(f, grid)
        out.append(Check("star_parallel", cfg, star, 0.0, star, tol))
    return out, row


def _probe_point(dim: int) -> np.ndarray:
    """A fixed off-lattice point for derivative checks."""
    return np.array([0.5 + 0.1 * (j + 1) * (-1) ** j for j in range(dim)])


def _ratio_at(f, grid, x):
    """Ratio at ``x`` with the zero-set threshold taken relative to the whole grid."""
    pts = np.vstack([grid, np.asarray(x, dtype=float)])
    r = kato_ratios(f, pts)[-1]
    return None if np.isnan(r) else float(r)


def run_fields(catalog=None, points: Optional[int] = None, box: Optional[float] = None, tol: float = TOL_FIELD, seed: int = 42) -> Report:
    """Sweep every catalog entry; ``points`` and ``box`` override the per-entry domain."""
    if box is not None and box <= 0:
        raise ValueError("box half-width must be positive")
    entries = load_catalog(catalog)
    rep = Report(
        "fields",
        {"catalog": str(catalog) if catalog is not None else "default", "grid": points, "box": box, "tol": tol, "seed": seed},
    )
    rows = []
    for entry in entries:
        checks, row = _entry_checks(entry, points, box, tol)
        rep.checks.extend(checks)
        rows.append(row)
    rep.tables["fields"] = rows
    return rep
