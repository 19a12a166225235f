"""Dense Hermitian linear algebra for bipartite operators.

Operators are plain complex ``numpy`` arrays.  ``DensityMatrix`` adds the
validation and the optional bipartite split ``(d_A, d_B)`` that the measures
need.  All logarithms are natural.
"""

import json
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np

from .errors import DomainError, ValidationError

HERMITIAN_ATOL = 1e-12
STATE_ATOL = 1e-10
DEFAULT_EIG_FLOOR = 1e-14

Dims = Tuple[int, int]


class Spectrum(NamedTuple):
    eigenvalues: np.ndarray  # ascending, real
    eigenvectors: np.ndarray  # orthonormal columns


def as_operator(mat) -> np.ndarray:
    """Return ``mat`` as a square complex array, raising on bad shape."""
    arr = np.asarray(mat, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def check_hermitian(mat, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    arr = as_operator(mat)
    dev = np.max(np.abs(arr - arr.conj().T)) if arr.size else 0.0
    if dev > atol:
        raise ValidationError(f"matrix is not Hermitian (max deviation {dev:.3e})")
    return arr


def hermitize(mat: np.ndarray) -> np.ndarray:
    return 0.5 * (mat + np.swapaxes(mat, -1, -2).conj())


def eig_decompose(h) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix with ascending eigenvalues."""
    arr = check_hermitian(h)
    w, v = np.linalg.eigh(hermitize(arr))
    return Spectrum(w, v)


def _apply(h: np.ndarray, f: Callable, eig_floor: Optional[float]) -> np.ndarray:
    # works on stacks (..., d, d); no validation
    w, v = np.linalg.eigh(h)
    if eig_floor is not None:
        w = np.maximum(w, eig_floor)
    fw = f(w)
    return (v * fw[..., None, :]) @ np.swapaxes(v, -1, -2).conj()


def matrix_fn(h, f: Callable, eig_floor: Optional[float] = None) -> np.ndarray:
    """Apply the scalar function ``f`` to the spectrum of Hermitian ``h``.

    Eigenvalues below ``eig_floor`` are raised to it before ``f`` is applied.
    ``f`` must act elementwise on a float array.
    """
    arr = hermitize(check_hermitian(h))
    w, v = np.linalg.eigh(arr)
    if eig_floor is not None:
        w = np.maximum(w, eig_floor)
    with np.errstate(all="ignore"):
        fw = np.asarray(f(w), dtype=float)
    bad = ~np.isfinite(fw)
    if np.any(bad):
        lam = float(w[bad][0])
        raise DomainError(f"function undefined at eigenvalue {lam!r}", eigenvalue=lam)
    return hermitize((v * fw) @ v.conj().T)


def logm(h, eig_floor: Optional[float] = DEFAULT_EIG_FLOOR) -> np.ndarray:
    return matrix_fn(h, np.log, eig_floor)


def expm(h) -> np.ndarray:
    return matrix_fn(h, np.exp)


def powm(h, p: float, eig_floor: Optional[float] = DEFAULT_EIG_FLOOR) -> np.ndarray:
    """Fractional power of a PSD matrix.

    For ``p > 0`` negative rounding noise is clipped to zero and no floor is
    applied; for ``p <= 0`` eigenvalues are floored.
    """
    if p > 0:
        return matrix_fn(h, lambda w: np.maximum(w, 0.0) ** p)
    return matrix_fn(h, lambda w: w**p, eig_floor)


def kron(a, b) -> np.ndarray:
    return np.kron(as_operator(a), as_operator(b))


def _check_dims(mat: np.ndarray, dims: Dims) -> Tuple[int, int]:
    d_a, d_b = (int(d) for d in dims)
    if d_a < 1 or d_b < 1 or d_a * d_b != mat.shape[-1]:
        raise ValidationError(f"dims {dims} inconsistent with matrix of size {mat.shape[-1]}")
    return d_a, d_b


def partial_trace(mat, dims: Dims, keep: str = "A") -> np.ndarray:
    """Trace out one factor of a bipartite operator; ``keep`` is ``"A"`` or ``"B"``."""
    arr = as_operator(mat)
    d_a, d_b = _check_dims(arr, dims)
    t = arr.reshape(d_a, d_b, d_a, d_b)
    if keep == "A":
        return np.einsum("ibjb->ij", t)
    if keep == "B":
        return np.einsum("aiaj->ij", t)
    raise ValidationError(f"keep must be 'A' or 'B', got {keep!r}")


def partial_transpose(mat, dims: Dims) -> np.ndarray:
    """Transpose the B factor."""
    arr = as_operator(mat)
    d_a, d_b = _check_dims(arr, dims)
    t = arr.reshape(d_a, d_b, d_a, d_b).transpose(0, 3, 2, 1)
    return t.reshape(d_a * d_b, d_a * d_b)


def op_norm(h) -> float:
    """Operator norm (largest absolute eigenvalue) of a Hermitian matrix."""
    w = np.linalg.eigvalsh(hermitize(check_hermitian(h)))
    return float(np.max(np.abs(w))) if w.size else 0.0


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated density matrix with an optional bipartite split."""

    data: np.ndarray
    dims: Optional[Dims] = None

    def __post_init__(self):
        arr = hermitize(check_hermitian(self.data))
        tr = np.trace(arr).real
        if abs(tr - 1.0) > STATE_ATOL:
            raise ValidationError(f"trace is {tr!r}, expected 1")
        lmin = np.linalg.eigvalsh(arr)[0]
        if lmin < -STATE_ATOL:
            raise ValidationError(f"minimum eigenvalue {lmin:.3e} is negative")
        if self.dims is not None:
            dims = tuple(int(d) for d in self.dims)
            _check_dims(arr, dims)
            object.__setattr__(self, "dims", dims)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_vector(cls, psi, dims: Optional[Dims] = None) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), dims)

    @classmethod
    def maximally_mixed(cls, d_a: int, d_b: int = 1) -> "DensityMatrix":
        d = d_a * d_b
        dims = (d_a, d_b) if d_b > 1 else None
        return cls(np.eye(d, dtype=complex) / d, dims)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def d_a(self) -> int:
        return self._require_dims()[0]

    @property
    def d_b(self) -> int:
        return self._require_dims()[1]

    def _require_dims(self) -> Dims:
        if self.dims is None:
            raise ValidationError("state has no bipartite dims")
        return self.dims

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.data)

    def with_dims(self, dims: Dims) -> "DensityMatrix":
        return DensityMatrix(self.data, dims)

    def swapped(self) -> "DensityMatrix":
        """The same state with the A and B factors exchanged."""
        d_a, d_b = self._require_dims()
        t = self.data.reshape(d_a, d_b, d_a, d_b).transpose(1, 0, 3, 2)
        return DensityMatrix(t.reshape(self.dim, self.dim), (d_b, d_a))

    def to_json(self) -> dict:
        return matrix_to_json(self.data, self.dims)

    @classmethod
    def from_json(cls, obj: dict) -> "DensityMatrix":
        mat, dims = matrix_from_json(obj)
        return cls(mat, dims)

    def save(self, path) -> None:
        save_matrix(path, self.data, self.dims)

    @classmethod
    def load(cls, path) -> "DensityMatrix":
        mat, dims = load_matrix(path)
        return cls(mat, dims)


def random_density_matrix(d: int, rng: np.random.Generator, rank: Optional[int] = None,
                          dims: Optional[Dims] = None) -> DensityMatrix:
    """Random state from the induced (Ginibre) measure."""
    k = d if rank is None else rank
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real, dims)


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (g + g.conj().T)


def haar_vectors(d: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` Haar-random unit vectors in C^d, one per row."""
    # (count, d, 2) layout: a larger count from the same seed extends the sample
    g = rng.standard_normal((count, d, 2))
    z = g[..., 0] + 1j * g[..., 1]
    return z / np.linalg.norm(z, axis=1, keepdims=True)


# --- matrix file format -------------------------------------------------------

def matrix_to_json(mat, dims: Optional[Dims] = None) -> dict:
    arr = as_operator(mat)
    flat = arr.ravel()
    return {
        "dim": int(arr.shape[0]),
        "dims": None if dims is None else [int(d) for d in dims],
        "entries": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_json(obj: dict):
    try:
        dim = int(obj["dim"])
        entries = np.asarray(obj["entries"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed matrix document: {exc}") from exc
    if entries.shape != (dim * dim, 2):
        raise ValidationError(f"expected {dim * dim} [re, im] entries, got shape {entries.shape}")
    mat = (entries[:, 0] + 1j * entries[:, 1]).reshape(dim, dim)
    dims = obj.get("dims")
    return mat, (None if dims is None else (int(dims[0]), int(dims[1])))


def save_matrix(path, mat, dims: Optional[Dims] = None) -> None:
    # repr-based float output round-trips exactly (17 significant digits)
    with open(path, "w") as fh:
        json.dump(matrix_to_json(mat, dims), fh)


def load_matrix(path):
    with open(path) as fh:
        return matrix_from_json(json.load(fh))
