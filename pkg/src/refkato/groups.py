"""Induced actions of SO(n) and U(n) on form and tensor spaces."""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np
from scipy.linalg import block_diag

from .exterior import BidegreeSpace, ExteriorSpace, FormVector, TensorSpace, basis_masks

__all__ = [
    "GroupElement",
    "random_element",
    "compound_matrix",
    "form_action_matrix",
    "slot_action_matrix",
    "act_on_form",
    "act_on_tensor",
    "apply_action",
]


@dataclass(frozen=True, eq=False)
class GroupElement:
    kind: str
    matrix: np.ndarray

    def __post_init__(self):
        if self.kind not in ("orthogonal", "unitary"):
            raise ValueError(f"unknown group kind {self.kind!r}")
        m = np.array(self.matrix, dtype=complex if self.kind == "unitary" else float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("group element must be a square matrix")
        if not np.allclose(m.conj().T @ m, np.eye(len(m)), atol=1e-10):
            raise ValueError(f"matrix is not {self.kind}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return len(self.matrix)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        kind = "unitary" if "unitary" in (self.kind, other.kind) else "orthogonal"
        return GroupElement(kind, self.matrix @ other.matrix)

    @classmethod
    def identity(cls, kind: str, n: int) -> "GroupElement":
        return cls(kind, np.eye(n))


def random_element(kind: str, n: int, seed=None) -> GroupElement:
    """Haar-distributed sample from SO(n) or U(n), via QR of a seeded Gaussian matrix."""
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    if kind == "orthogonal":
        a = rng.standard_normal((n, n))
    elif kind == "unitary":
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    else:
        raise ValueError(f"unknown group kind {kind!r}")
    q, r = np.linalg.qr(a)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    if kind == "orthogonal" and np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return GroupElement(kind, q)


def compound_matrix(g: np.ndarray, k: int) -> np.ndarray:
    """``Lambda^k g``: entries are the ``k x k`` minors ``det g[I, J]``."""
    n = len(g)
    if k == 0:
        return np.ones((1, 1), dtype=g.dtype)
    idx = [tuple(i for i in range(n) if m >> i & 1) for m in basis_masks(n, k)]
    rows = np.array(idx)
    sub = g[rows[:, None, :, None], rows[None, :, None, :]]
    return np.linalg.det(sub)


def form_action_matrix(g: GroupElement, space) -> np.ndarray:
    """Matrix of the induced action on ``space``.

    On ``Lambda^{p,q}`` the (1,0) factor transforms under the conjugate
    representation and the (0,1) factor under the standard one.
    """
    m = g.matrix
    if len(m) != space.n:
        raise ValueError(f"group element of size {len(m)} cannot act on {space.label()}")
    if isinstance(space, ExteriorSpace):
        if g.kind != "orthogonal":
            raise ValueError("real forms carry an orthogonal action")
        return compound_matrix(m, space.k)
    if isinstance(space, BidegreeSpace):
        return np.kron(compound_matrix(m.conj(), space.p), compound_matrix(m, space.q))
    raise TypeError(f"no form action on {space.label()}")


def slot_action_matrix(g: GroupElement, space: TensorSpace) -> np.ndarray:
    m = g.matrix
    if isinstance(space.base, ExteriorSpace):
        return m
    return block_diag(m.conj(), m)


def apply_action(g: GroupElement, space, arr: np.ndarray) -> np.ndarray:
    """Apply the action of ``g`` on ``space`` to every column of ``arr`` (or to a vector)."""
    arr = np.asarray(arr)
    vec = arr.ndim == 1
    cols = arr[:, None] if vec else arr
    if isinstance(space, TensorSpace):
        s = slot_action_matrix(g, space)
        e = form_action_matrix(g, space.base)
        t = cols.reshape(space.slots, space.base.dim, -1)
        out = np.einsum("ab,cd,bdk->ack", s, e, t, optimize=True).reshape(space.dim, -1)
    elif hasattr(space, "parts"):
        blocks = [form_action_matrix(g, p) if not isinstance(p, TensorSpace) else None for p in space.parts]
        if any(b is None for b in blocks):
            raise TypeError("direct sums of tensor spaces are not supported")
        out = reduce(lambda a, b: block_diag(a, b), blocks) @ cols
    else:
        out = form_action_matrix(g, space) @ cols
    return out[:, 0] if vec else out


def act_on_form(g: GroupElement, w: FormVector) -> FormVector:
    return FormVector(w.space, form_action_matrix(g, w.space) @ w.coeffs)


def act_on_tensor(g: GroupElement, t: FormVector) -> FormVector:
    if not isinstance(t.space, TensorSpace):
        raise TypeError("act_on_tensor expects an element of a TensorSpace")
    return FormVector(t.space, apply_action(g, t.space, t.coeffs))
