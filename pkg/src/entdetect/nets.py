"""Finite point sets covering real spheres and complex unit spheres.

The real construction starts from ``n`` equally spaced points on the circle
and recursively adds one coordinate per level, giving ``n**d`` points on the
``d``-sphere.  The complex net on ``C^d`` reuses the real net on the
``(2d-2)``-sphere, pairing coordinates into complex entries while keeping the
first one real.
"""

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ParameterError, ValidationError
from .linalg import haar_vectors

MAX_NET_POINTS = 1_100_000


@dataclass(frozen=True, eq=False)
class RealNet:
    n: int
    d: int
    points: np.ndarray  # (n**d, d + 1)

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True, eq=False)
class ComplexNet:
    n: int
    d: int
    points: np.ndarray  # (size, d), complex unit rows
    eps2_bound: float

    def __len__(self):
        return self.points.shape[0]

    @property
    def projectors(self) -> np.ndarray:
        """Stack of rank-one projectors ``|psi_c><psi_c|``, shape ``(size, d, d)``."""
        p = self.points
        return p[:, :, None] * p[:, None, :].conj()

    @classmethod
    def from_points(cls, points, eps2_bound: float, n: int = 0) -> "ComplexNet":
        pts = np.asarray(points, dtype=complex)
        if pts.ndim != 2:
            raise ValidationError("points must be a 2-d array, one vector per row")
        norms = np.linalg.norm(pts, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-12):
            raise ValidationError("net points must be unit vectors")
        return cls(n, pts.shape[1], pts, float(eps2_bound))

    def to_json(self) -> dict:
        return {
            "n": int(self.n),
            "d": int(self.d),
            "points": [[[float(z.real), float(z.imag)] for z in row] for row in self.points],
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path) -> "ComplexNet":
        with open(path) as fh:
            obj = json.load(fh)
        arr = np.asarray(obj["points"], dtype=float)
        pts = arr[..., 0] + 1j * arr[..., 1]
        n, d = int(obj["n"]), int(obj["d"])
        bound = 2 * math.sqrt(d) * math.pi / n if n else math.nan
        return cls.from_points(pts, bound, n)


def _check_size(size: int) -> None:
    if size > MAX_NET_POINTS:
        raise ParameterError(
            f"net would hold {size} points (limit {MAX_NET_POINTS}); "
            "reduce n or the dimension"
        )


def real_net(n: int, d: int) -> RealNet:
    """The ``n**d`` point subset of the unit ``d``-sphere in ``R^(d+1)``."""
    if n < 3:
        raise ParameterError(f"n must be at least 3, got {n}")
    if d < 1:
        raise ParameterError(f"d must be at least 1, got {d}")
    _check_size(n**d)
    theta = 2 * np.pi * np.arange(n) / n
    c, s = np.cos(theta), np.sin(theta)
    pts = np.stack([c, s], axis=1)
    for _ in range(d - 1):
        m = pts.shape[0]
        head = c[:, None, None] * pts[None, :, :]
        tail = np.broadcast_to(s[:, None, None], (n, m, 1))
        pts = np.concatenate([head, tail], axis=2).reshape(n * m, -1)
    return RealNet(n, d, pts)


def complex_net(n: int, d: int) -> ComplexNet:
    """The ``n**(2d-2)`` point net of unit vectors in ``C^d``."""
    if d < 2:
        raise ParameterError(f"complex nets need d >= 2, got {d}")
    _check_size(n ** (2 * d - 2))
    x = real_net(n, 2 * d - 2).points
    pts = np.empty((x.shape[0], d), dtype=complex)
    pts[:, 0] = x[:, 0]
    pts[:, 1:] = x[:, 1::2] + 1j * x[:, 2::2]
    return ComplexNet(n, d, pts, 2 * math.sqrt(d) * math.pi / n)


def basis_net(d: int) -> ComplexNet:
    """The computational basis of ``C^d`` used as a (coarse) net."""
    return ComplexNet(0, d, np.eye(d, dtype=complex), 2 * math.sqrt(1 - 1 / d))


def granularity_for_eps2(eps2: float, d: int) -> int:
    """Smallest ``n`` whose complex net on ``C^d`` has bound at most ``eps2``."""
    if not eps2 > 0:
        raise ParameterError(f"eps2 must be positive, got {eps2!r}")
    target = math.sqrt(4 * d * math.pi**2 / eps2**2)
    return max(3, math.ceil(target - 1e-9))


def net_size_for_eps2(eps2: float, d: int) -> int:
    return granularity_for_eps2(eps2, d) ** (2 * d - 2)


def min_max_overlap(points: np.ndarray, probes: np.ndarray, chunk: int = 512) -> np.ndarray:
    """For each probe, the largest ``|<probe|point>|`` over the point set."""
    out = np.empty(probes.shape[0])
    pt = points.T
    for i in range(0, probes.shape[0], chunk):
        block = probes[i:i + chunk].conj() @ pt
        out[i:i + chunk] = np.max(np.abs(block), axis=1)
    return out


def estimate_eps2(net: ComplexNet, samples: int, seed: int = 0,
                  probes: Optional[np.ndarray] = None) -> float:
    """Sampled lower estimate of the covering quantity ``eps2`` of ``net``.

    Draws ``samples`` Haar vectors (or uses ``probes``) and returns the largest
    ``2 sqrt(1 - max_c |<psi|psi_c>|^2)``.
    """
    if probes is None:
        if samples < 1:
            raise ParameterError("samples must be >= 1")
        probes = haar_vectors(net.d, samples, np.random.default_rng(seed))
    best = min_max_overlap(net.points, np.asarray(probes, dtype=complex))
    worst = float(np.min(best))
    return 2.0 * math.sqrt(max(0.0, 1.0 - worst**2))
