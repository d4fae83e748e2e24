"""Line-oriented catalog of test fields.

Each non-blank line not starting with ``#`` reads::

    name | family | params | expected_alpha | domain

``params`` and ``domain`` are ``key=value`` pairs separated by ``;``.
Coefficient keys are ``c[1,2]`` (real blade ``e_12``), ``c[1;2]`` (bidegree
blade ``eps_1 (x) epsbar_2``) or ``c[1]`` for holomorphic ``(p,0)`` blades.

Families:

``hodge``
    real ``k``-form on ``R^n`` in the kernel of ``d + d*``. Either
    ``potential=`` (the field is ``df``) or coefficients. ``star=1`` replaces
    the field by its Hodge star.
``kahler``
    ``(p,q)``-form on ``C^n`` in the kernel of ``d + d*``.
``holomorphic``
    ``(p,0)``-form on ``C^n`` in the kernel of ``dbar``.
``control``
    like ``hodge`` but not harmonic; it is expected to break the refined bound.

Domain keys: ``box`` (half-width), ``grid`` (points per axis), ``jitter``,
``seed``, ``attain`` (a point where the ratio should equal the expected
constant) and ``constant=1`` (the ratio equals it at every defined point).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np
import sympy as sp

from .exterior import BidegreeSpace, ExteriorSpace, hodge_star_matrix
from .fields import FormField, box_grid, expression_namespace, gradient_field

__all__ = ["CatalogError", "FieldCatalogEntry", "parse_catalog", "load_catalog", "default_catalog_path", "FAMILIES"]

FAMILIES = ("hodge", "kahler", "holomorphic", "control")
_PARAM_KEYS = {"n", "k", "p", "q", "potential", "star"}
_COEFF = re.compile(r"^c\[([0-9,\s]*)(?:;([0-9,\s]*))?\]$")


class CatalogError(ValueError):
    def __init__(self, message: str, lineno: Optional[int] = None, source: str = "<catalog>"):
        self.message = message
        self.lineno = lineno
        where = f"{source}:{lineno}: " if lineno is not None else ""
        super().__init__(where + message)


@dataclass
class FieldCatalogEntry:
    name: str
    family: str
    params: dict
    expected_alpha: float
    domain: dict = field(default_factory=dict)
    lineno: Optional[int] = None

    @property
    def expected_violation(self) -> bool:
        return self.family == "control"

    @property
    def residual_family(self) -> str:
        return "dbar" if self.family == "holomorphic" else "hodge"

    @property
    def constant_ratio(self) -> bool:
        return self.domain.get("constant") in ("1", "true", "yes")

    @property
    def expected_attainment(self) -> Optional[np.ndarray]:
        a = self.domain.get("attain")
        return None if a is None else np.array(a, dtype=float)

    def build_field(self) -> FormField:
        p = self.params
        for key in p:
            if key not in _PARAM_KEYS and not key.startswith("c["):
                raise CatalogError(f"unknown parameter {key!r}", self.lineno)
        n = _int(p, "n", self)
        if self.family in ("hodge", "control"):
            ns = expression_namespace("real", n)
            if "potential" in p:
                f = gradient_field(_expr(p["potential"], ns, self), n, self.name)
            else:
                k = _int(p, "k", self)
                space = ExteriorSpace(n, k)
                coeffs = {}
                for key, (holo, anti) in _coeff_keys(p, self):
                    if anti is not None or len(holo) != k:
                        raise CatalogError(f"coefficient {key} does not index a {k}-blade", self.lineno)
                    coeffs[_blade_position(space, holo, self)] = _expr(p[key], ns, self)
                f = FormField(space, coeffs, self.name)
            if p.get("star") in ("1", "true", "yes"):
                sp_ = f.space
                f = f.map_linear(hodge_star_matrix(sp_.n, sp_.k), ExteriorSpace(sp_.n, sp_.n - sp_.k), self.name)
            return f
        ns = expression_namespace("complex", n)
        pdeg = _int(p, "p", self)
        qdeg = 0 if self.family == "holomorphic" else _int(p, "q", self)
        space = BidegreeSpace(n, pdeg, qdeg)
        coeffs = {}
        for key, (holo, anti) in _coeff_keys(p, self):
            anti = anti or ()
            if len(holo) != pdeg or len(anti) != qdeg:
                raise CatalogError(f"coefficient {key} does not index a ({pdeg},{qdeg})-blade", self.lineno)
            try:
                pos = space.index_of(_mask(holo, n, self), _mask(anti, n, self))
            except KeyError:
                raise CatalogError(f"bad blade in {key}", self.lineno) from None
            coeffs[pos] = _expr(p[key], ns, self)
        return FormField(space, coeffs, self.name)

    def grid(self, points: Optional[int] = None, box: Optional[float] = None, dim: Optional[int] = None) -> np.ndarray:
        if dim is None:
            n = int(self.params["n"])
            dim = 2 * n if self.family in ("kahler", "holomorphic") else n
        g = box_grid(
            dim,
            box=float(box if box is not None else self.domain.get("box", 2.0)),
            points=int(points if points is not None else self.domain.get("grid", 21)),
            jitter=float(self.domain["jitter"]) if "jitter" in self.domain else None,
            seed=int(self.domain.get("seed", 0)),
        )
        att = self.expected_attainment
        if att is not None:
            g = np.vstack([g, att])
        return g


def _int(params, key, entry) -> int:
    try:
        return int(params[key])
    except KeyError:
        raise CatalogError(f"missing parameter {key!r}", entry.lineno) from None
    except ValueError:
        raise CatalogError(f"parameter {key!r} must be an integer", entry.lineno) from None


def _expr(text, ns, entry):
    try:
        e = sp.sympify(text, locals=ns)
    except (sp.SympifyError, SyntaxError, TypeError) as exc:
        raise CatalogError(f"cannot parse expression {text!r}: {exc}", entry.lineno) from None
    known = {v for v in ns.values() if isinstance(v, sp.Symbol)}
    stray = getattr(e, "free_symbols", set()) - known
    if stray:
        raise CatalogError(f"unknown symbols {sorted(map(str, stray))} in {text!r}", entry.lineno)
    return e


def _coeff_keys(params, entry):
    found = []
    for key in params:
        if not key.startswith("c["):
            continue
        m = _COEFF.match(key)
        if not m:
            raise CatalogError(f"malformed coefficient key {key!r}", entry.lineno)
        holo = tuple(int(t) for t in m.group(1).replace(" ", "").split(",") if t)
        anti = None if m.group(2) is None else tuple(int(t) for t in m.group(2).replace(" ", "").split(",") if t)
        found.append((key, (holo, anti)))
    if not found:
        raise CatalogError("no coefficients given", entry.lineno)
    return found


def _mask(indices, n, entry) -> int:
    if list(indices) != sorted(set(indices)) or any(not 1 <= i <= n for i in indices):
        raise CatalogError(f"blade indices {indices} must be increasing and within 1..{n}", entry.lineno)
    return sum(1 << (i - 1) for i in indices)


def _blade_position(space: ExteriorSpace, indices, entry) -> int:
    return space.index_of(_mask(indices, space.n, entry))


def _split_pairs(text: str, lineno: int) -> dict:
    """Split ``a=1; c[1;2]=x`` at top-level semicolons."""
    items, depth, cur = [], 0, []
    for ch in text:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == ";" and depth == 0:
            items.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    items.append("".join(cur))
    out = {}
    for item in items:
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise CatalogError(f"expected key=value, got {item!r}", lineno)
        key, value = item.split("=", 1)
        key = key.strip()
        if key in out:
            raise CatalogError(f"duplicate key {key!r}", lineno)
        out[key] = value.strip()
    return out


def parse_catalog(text: str, source: str = "<catalog>") -> list[FieldCatalogEntry]:
    entries, names = [], set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        cols = [c.strip() for c in line.split("|")]
        if len(cols) != 5:
            raise CatalogError(f"expected 5 '|'-separated columns, got {len(cols)}", lineno, source)
        name, family, params, alpha, domain = cols
        if not name:
            raise CatalogError("empty entry name", lineno, source)
        if name in names:
            raise CatalogError(f"duplicate entry name {name!r}", lineno, source)
        if family not in FAMILIES:
            raise CatalogError(f"unknown family {family!r}", lineno, source)
        try:
            alpha_val = float(sp.sympify(alpha, locals={"sqrt": sp.sqrt}))
        except (sp.SympifyError, SyntaxError, TypeError, ValueError):
            raise CatalogError(f"cannot read expected alpha {alpha!r}", lineno, source) from None
        if not 0 <= alpha_val <= 1:
            raise CatalogError(f"expected alpha {alpha_val} outside [0, 1]", lineno, source)
        try:
            dom = _split_pairs(domain, lineno)
            if "attain" in dom:
                dom["attain"] = [float(sp.sympify(v)) for v in dom["attain"].split(",")]
            entry = FieldCatalogEntry(name, family, _split_pairs(params, lineno), alpha_val, dom, lineno)
            entry.build_field()
        except CatalogError as exc:
            raise CatalogError(exc.message, lineno, source) from None
        except (ValueError, TypeError, KeyError) as exc:
            raise CatalogError(f"invalid entry: {exc}", lineno, source) from None
        names.add(name)
        entries.append(entry)
    return entries


def default_catalog_path() -> Path:
    return Path(str(resources.files("refkato") / "data" / "catalog.txt"))


def load_catalog(path=None) -> list[FieldCatalogEntry]:
    path = Path(path) if path is not None else default_catalog_path()
    return parse_catalog(path.read_text(encoding="utf-8"), source=str(path))
