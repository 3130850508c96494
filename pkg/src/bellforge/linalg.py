"""Dense complex operators on tensor-product spaces.

Every operator is stored as a row-major complex matrix tagged with the
ordered dimensions of its tensor factors.  Values are immutable after
construction and all functions here are pure, so they are safe to share
across threads.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "HERMITICITY_TOL",
    "PSD_TOL",
    "TensorOperator",
    "Spectrum",
    "identity",
    "kron",
    "adjoint",
    "trace",
    "frobenius_distance",
    "partial_trace",
    "reorder_factors",
    "eig_hermitian",
    "hermitian_sign",
    "operator_norm",
    "trace_norm",
    "is_psd",
    "operator_to_text",
    "operator_from_text",
    "save_operator",
    "load_operator",
]

# Relative Frobenius asymmetry allowed before a matrix is rejected as
# non-Hermitian by the spectral routines.
HERMITICITY_TOL = 1e-10

# Most-negative eigenvalue tolerated by the positive-semidefinite check.
PSD_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TensorOperator:
    """Square complex matrix on an ordered product of finite-dimensional factors."""

    entries: np.ndarray
    factor_dims: tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.factor_dims)
        if not dims or min(dims) < 1:
            raise ValueError(f"factor dimensions must be positive integers, got {dims}")
        side = math.prod(dims)
        mat = np.array(self.entries, dtype=np.complex128, order="C")
        if mat.shape != (side, side):
            raise ValueError(
                f"matrix shape {mat.shape} does not match factor dimensions {dims}; "
                f"expected ({side}, {side})"
            )
        if not np.isfinite(mat).all():
            raise ValueError("matrix entries must all be finite")
        mat.setflags(write=False)
        object.__setattr__(self, "entries", mat)
        object.__setattr__(self, "factor_dims", dims)

    @property
    def side(self) -> int:
        """Number of rows (= columns) of the matrix."""
        return self.entries.shape[0]

    @property
    def nfactors(self) -> int:
        """Number of tensor factors."""
        return len(self.factor_dims)

    def _require_same_space(self, other: TensorOperator) -> None:
        if self.factor_dims != other.factor_dims:
            raise ValueError(
                f"operators act on different spaces: {self.factor_dims} vs {other.factor_dims}"
            )

    def __add__(self, other: TensorOperator) -> TensorOperator:
        self._require_same_space(other)
        return TensorOperator(self.entries + other.entries, self.factor_dims)

    def __sub__(self, other: TensorOperator) -> TensorOperator:
        self._require_same_space(other)
        return TensorOperator(self.entries - other.entries, self.factor_dims)

    def __neg__(self) -> TensorOperator:
        return TensorOperator(-self.entries, self.factor_dims)

    def __mul__(self, scalar: numbers.Number) -> TensorOperator:
        if not isinstance(scalar, numbers.Number):
            return NotImplemented
        return TensorOperator(self.entries * scalar, self.factor_dims)

    __rmul__ = __mul__

    def __matmul__(self, other: TensorOperator) -> TensorOperator:
        self._require_same_space(other)
        return TensorOperator(self.entries @ other.entries, self.factor_dims)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"TensorOperator(side={self.side}, factor_dims={self.factor_dims})"


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigendecomposition of a Hermitian operator, eigenvalues descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self) -> None:
        vals = np.array(self.eigenvalues, dtype=np.float64)
        vecs = np.array(self.eigenvectors, dtype=np.complex128, order="C")
        if vals.ndim != 1 or vecs.shape != (vals.size, vals.size):
            raise ValueError("spectrum needs n eigenvalues and an n-by-n eigenvector matrix")
        vals.setflags(write=False)
        vecs.setflags(write=False)
        object.__setattr__(self, "eigenvalues", vals)
        object.__setattr__(self, "eigenvectors", vecs)


def identity(factor_dims: tuple[int, ...]) -> TensorOperator:
    """Identity operator on the product space with the given factor dimensions."""
    side = math.prod(factor_dims)
    return TensorOperator(np.eye(side, dtype=np.complex128), tuple(factor_dims))


def kron(a: TensorOperator, b: TensorOperator) -> TensorOperator:
    """Tensor product; the factor list of ``a`` is extended by that of ``b``."""
    return TensorOperator(np.kron(a.entries, b.entries), a.factor_dims + b.factor_dims)


def adjoint(t: TensorOperator) -> TensorOperator:
    """Conjugate transpose."""
    return TensorOperator(t.entries.conj().T, t.factor_dims)


def trace(t: TensorOperator) -> complex:
    """Matrix trace as a complex scalar."""
    return complex(np.trace(t.entries))


def frobenius_distance(a: TensorOperator, b: TensorOperator) -> float:
    """Frobenius norm of the difference of two operators on the same space."""
    a._require_same_space(b)
    return float(np.linalg.norm(a.entries - b.entries))


def partial_trace(t: TensorOperator, j: int) -> TensorOperator:
    """Trace out the ``j``-th tensor factor (1-based); the others keep their order."""
    n = t.nfactors
    if n < 2:
        raise ValueError("partial trace needs at least two tensor factors")
    if not 1 <= j <= n:
        raise ValueError(f"factor index {j} outside 1..{n}")
    dims = t.factor_dims
    tens = t.entries.reshape(dims + dims)
    reduced = np.trace(tens, axis1=j - 1, axis2=n + j - 1)
    kept = dims[: j - 1] + dims[j:]
    side = math.prod(kept)
    return TensorOperator(reduced.reshape(side, side), kept)


def reorder_factors(t: TensorOperator, order: tuple[int, ...]) -> TensorOperator:
    """Permute tensor factors; ``order[k]`` is the 1-based old position moved to slot k+1."""
    n = t.nfactors
    if sorted(order) != list(range(1, n + 1)):
        raise ValueError(f"order {order} is not a permutation of 1..{n}")
    src = tuple(o - 1 for o in order)
    axes = src + tuple(n + o for o in src)
    tens = t.entries.reshape(t.factor_dims + t.factor_dims)
    new_dims = tuple(t.factor_dims[o] for o in src)
    return TensorOperator(tens.transpose(axes).reshape(t.side, t.side), new_dims)


def _hermitian_part(t: TensorOperator, tol: float) -> np.ndarray:
    """Symmetrized matrix of ``t``; reject if the asymmetry exceeds ``tol`` relatively."""
    m = t.entries
    asym = float(np.linalg.norm(m - m.conj().T))
    scale = max(1.0, float(np.linalg.norm(m)))
    if asym > tol * scale:
        raise ValueError(
            f"matrix is not Hermitian: asymmetry {asym:.3e} exceeds {tol:.1e} relative tolerance"
        )
    return (m + m.conj().T) / 2.0


def eig_hermitian(t: TensorOperator, tol: float = HERMITICITY_TOL) -> Spectrum:
    """Real eigenvalues (descending) and matching orthonormal eigenvectors."""
    h = _hermitian_part(t, tol)
    vals, vecs = np.linalg.eigh(h)
    return Spectrum(vals[::-1].copy(), vecs[:, ::-1].copy())


def hermitian_sign(t: TensorOperator, tol: float = HERMITICITY_TOL) -> TensorOperator:
    """Spectral sign map: eigenvalues >= 0 become +1, negative ones become -1.

    The result is the norm-one Hermitian operator maximizing ``tr(t @ w)``
    over Hermitian ``w`` with operator norm at most one.
    """
    h = _hermitian_part(t, tol)
    vals, vecs = np.linalg.eigh(h)
    signs = np.where(vals >= 0.0, 1.0, -1.0)
    m = (vecs * signs) @ vecs.conj().T
    return TensorOperator((m + m.conj().T) / 2.0, t.factor_dims)


def operator_norm(t: TensorOperator, tol: float = HERMITICITY_TOL) -> float:
    """Largest absolute eigenvalue of a Hermitian operator."""
    h = _hermitian_part(t, tol)
    vals = np.linalg.eigvalsh(h)
    return float(np.max(np.abs(vals))) if vals.size else 0.0


def trace_norm(t: TensorOperator, tol: float = HERMITICITY_TOL) -> float:
    """Sum of absolute eigenvalues of a Hermitian operator."""
    h = _hermitian_part(t, tol)
    vals = np.linalg.eigvalsh(h)
    return float(np.sum(np.abs(vals)))


def is_psd(t: TensorOperator, tol: float = PSD_TOL, herm_tol: float = HERMITICITY_TOL) -> bool:
    """Whether the Hermitian operator has no eigenvalue below ``-tol``."""
    h = _hermitian_part(t, herm_tol)
    vals = np.linalg.eigvalsh(h)
    return bool(vals[0] >= -tol)


def operator_to_text(t: TensorOperator) -> str:
    """Serialize to the plain-text matrix format.

    The first line is ``dims: d1 d2 ...``; every following line is
    ``row col real imag`` for one nonzero entry, 0-based indices, floats
    printed with 17 significant digits.  Entries that are exactly zero
    are omitted and read back as zero.
    """
    lines = ["dims: " + " ".join(str(d) for d in t.factor_dims)]
    m = t.entries
    for row in range(m.shape[0]):
        for col in range(m.shape[1]):
            z = m[row, col]
            if z != 0:
                lines.append(f"{row} {col} {z.real:.17g} {z.imag:.17g}")
    return "\n".join(lines) + "\n"


def operator_from_text(text: str) -> TensorOperator:
    """Parse the plain-text matrix format produced by :func:`operator_to_text`."""
    rows = [line.strip() for line in text.splitlines()]
    rows = [line for line in rows if line]
    if not rows or not rows[0].startswith("dims:"):
        raise ValueError("matrix text must start with a 'dims:' header line")
    try:
        dims = tuple(int(tok) for tok in rows[0][len("dims:"):].split())
    except ValueError as exc:
        raise ValueError(f"unreadable dims header {rows[0]!r}") from exc
    if not dims or min(dims) < 1:
        raise ValueError(f"dims header must list positive integers, got {dims}")
    side = math.prod(dims)
    mat = np.zeros((side, side), dtype=np.complex128)
    for line in rows[1:]:
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"bad entry line {line!r}; expected 'row col real imag'")
        try:
            row, col = int(parts[0]), int(parts[1])
            re, im = float(parts[2]), float(parts[3])
        except ValueError as exc:
            raise ValueError(f"bad entry line {line!r}") from exc
        if not (0 <= row < side and 0 <= col < side):
            raise ValueError(f"entry index ({row}, {col}) outside 0..{side - 1}")
        mat[row, col] = complex(re, im)
    return TensorOperator(mat, dims)


def save_operator(t: TensorOperator, path: str | Path) -> None:
    """Write an operator to ``path`` in the plain-text matrix format."""
    Path(path).write_text(operator_to_text(t), encoding="ascii")


def load_operator(path: str | Path) -> TensorOperator:
    """Read an operator from a plain-text matrix file."""
    return operator_from_text(Path(path).read_text(encoding="ascii"))
