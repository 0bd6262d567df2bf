"""Chart-based differential geometry: points, tangents, tensors, connection
and metric fields, torsion, curvature, and covariant derivatives along
parametrized curves.

Everything lives in a single global chart of dimension ``d``; components are
plain numpy arrays.

Index convention, fixed for the whole package::

    (D_k Y)^i = d_k Y^i + Gamma^i_{jk} Y^j

i.e. for connection coefficients ``Gamma[i, j, k]`` the middle index ``j``
contracts the vector and the last index ``k`` is the differentiation
direction.  Derived slot conventions (validated symbolically against the
deviation-equation set before this module was written):

* torsion          ``T[i, j, k] = Gamma[i, j, k] - Gamma[i, k, j]``,
  applied as       ``T(X, Y)^i = T[i, j, k] Y^j X^k``
* curvature        ``R[i, j, k, l] = d_k G[i,j,l] - d_l G[i,j,k] + GG - GG``,
  applied as       ``R(X, Y)Z^i = R[i, j, k, l] Z^j X^k Y^l``
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import DomainError, EvaluationError, NullVectorError

__all__ = [
    "ChartPoint",
    "Tangent",
    "Tensor",
    "ConnectionField",
    "MetricField",
    "PathCurve",
    "torsion_at",
    "curvature_at",
    "cov_derivative_along",
    "cov_derivative_tensor_along",
    "metric_dot",
    "sign_of_square",
    "torsion_apply",
    "curvature_apply",
]

DEFAULT_FD_STEP = 1e-5
METRIC_SYMMETRY_TOL = 1e-12
METRIC_DET_TOL = 1e-12


def _as_float_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise EvaluationError(f"non-finite entries in {name}: {arr!r}")
    return arr


@dataclass(frozen=True, eq=False)
class ChartPoint:
    """A point of the manifold, given by its chart coordinates."""

    coords: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coords", _as_float_array(self.coords, "coords"))
        if self.coords.ndim != 1:
            raise EvaluationError("chart coordinates must be a flat sequence")

    @property
    def dimension(self) -> int:
        return self.coords.shape[0]

    def close_to(self, other: "ChartPoint", tol: float = 1e-9) -> bool:
        return (self.dimension == other.dimension
                and bool(np.all(np.abs(self.coords - other.coords) <= tol)))

    def __repr__(self):
        return f"ChartPoint({np.array2string(self.coords, precision=6)})"


@dataclass(frozen=True, eq=False)
class Tangent:
    """A tangent vector attached to a chart point."""

    base: ChartPoint
    components: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "components", _as_float_array(self.components, "components"))
        if self.components.shape != (self.base.dimension,):
            raise EvaluationError(
                f"tangent has {self.components.shape} components at a "
                f"{self.base.dimension}-dimensional point")

    @property
    def dimension(self) -> int:
        return self.base.dimension

    def __repr__(self):
        return f"Tangent({np.array2string(self.components, precision=6)})"


@dataclass(frozen=True, eq=False)
class Tensor:
    """A small dense tensor of valence ``(p, q)`` at a chart point.

    Entries are indexed upper indices first: a (1,2) tensor ``W`` has
    ``entries[i, j, k]`` with ``i`` contravariant.
    """

    base: ChartPoint
    valence: Tuple[int, int]
    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", _as_float_array(self.entries, "entries"))
        p, q = self.valence
        d = self.base.dimension
        if p < 0 or q < 0:
            raise EvaluationError("tensor valence must be non-negative")
        if self.entries.shape != (d,) * (p + q):
            raise EvaluationError(
                f"tensor entries shape {self.entries.shape} does not match "
                f"valence {self.valence} in dimension {d}")

    @property
    def rank(self) -> int:
        return self.valence[0] + self.valence[1]


@dataclass(frozen=True)
class ConnectionField:
    """Affine connection given by its coefficient field ``Gamma^i_{jk}(x)``.

    ``gamma_at`` maps a ChartPoint to a ``(d, d, d)`` array laid out per the
    module index convention.  ``partials_at``, when given, returns the
    ``(d, d, d, d)`` array of coordinate partials with the derivative index
    last (``partials[i, j, k, l] = d_l Gamma^i_{jk}``); otherwise partials
    are approximated by central differences with step ``h_fd``.
    """

    gamma_at: Callable[[ChartPoint], np.ndarray]
    partials_at: Optional[Callable[[ChartPoint], np.ndarray]] = None
    h_fd: float = DEFAULT_FD_STEP

    def coefficients(self, point: ChartPoint) -> np.ndarray:
        gamma = np.asarray(self.gamma_at(point), dtype=float)
        d = point.dimension
        if gamma.shape != (d, d, d):
            raise EvaluationError(
                f"connection coefficients have shape {gamma.shape}, "
                f"expected {(d, d, d)}", point=point)
        if not np.all(np.isfinite(gamma)):
            raise EvaluationError("non-finite connection coefficients", point=point)
        return gamma

    def partials(self, point: ChartPoint) -> np.ndarray:
        if self.partials_at is not None:
            out = np.asarray(self.partials_at(point), dtype=float)
        else:
            d = point.dimension
            out = np.empty((d, d, d, d))
            for axis in range(d):
                step = np.zeros(d)
                step[axis] = self.h_fd
                plus = self.coefficients(ChartPoint(point.coords + step))
                minus = self.coefficients(ChartPoint(point.coords - step))
                out[..., axis] = (plus - minus) / (2.0 * self.h_fd)
        if not np.all(np.isfinite(out)):
            raise EvaluationError("non-finite connection partials", point=point)
        return out


@dataclass(frozen=True)
class MetricField:
    """Bundle metric ``g_{ij}(x)``: bilinear, symmetric, nondegenerate.

    Not assumed positive definite, and not assumed compatible with any
    connection (nonmetricity is allowed and measured elsewhere).
    """

    g_at: Callable[[ChartPoint], np.ndarray]
    partials_at: Optional[Callable[[ChartPoint], np.ndarray]] = None
    h_fd: float = DEFAULT_FD_STEP

    def matrix(self, point: ChartPoint) -> np.ndarray:
        g = np.asarray(self.g_at(point), dtype=float)
        d = point.dimension
        if g.shape != (d, d):
            raise EvaluationError(f"metric has shape {g.shape}, expected {(d, d)}",
                                  point=point)
        if not np.all(np.isfinite(g)):
            raise EvaluationError("non-finite metric", point=point)
        if np.max(np.abs(g - g.T)) > METRIC_SYMMETRY_TOL:
            raise EvaluationError("metric is not symmetric", point=point)
        if abs(np.linalg.det(g)) <= METRIC_DET_TOL:
            raise EvaluationError("metric is degenerate", point=point)
        return g

    def partials(self, point: ChartPoint) -> np.ndarray:
        """``partials[i, j, l] = d_l g_{ij}``."""
        if self.partials_at is not None:
            return np.asarray(self.partials_at(point), dtype=float)
        d = point.dimension
        out = np.empty((d, d, d))
        for axis in range(d):
            step = np.zeros(d)
            step[axis] = self.h_fd
            plus = self.matrix(ChartPoint(point.coords + step))
            minus = self.matrix(ChartPoint(point.coords - step))
            out[..., axis] = (plus - minus) / (2.0 * self.h_fd)
        return out


@dataclass(frozen=True)
class PathCurve:
    """A C^1 path in the chart, parametrized over ``domain``.

    ``second_derivative`` (components of the second parameter derivative of
    the chart map) may be omitted, in which case it is approximated by a
    central difference of the tangent components with step ``h_fd``.
    """

    map: Callable[[float], ChartPoint]
    tangent: Callable[[float], Tangent]
    domain: Tuple[float, float]
    second_derivative: Optional[Callable[[float], np.ndarray]] = None
    h_fd: float = DEFAULT_FD_STEP

    def require(self, s: float) -> None:
        lo, hi = self.domain
        if not (lo - 1e-12 <= s <= hi + 1e-12):
            raise DomainError(f"parameter {s} outside path domain [{lo}, {hi}]")

    def second(self, s: float) -> np.ndarray:
        if self.second_derivative is not None:
            return np.asarray(self.second_derivative(s), dtype=float)
        h = self.h_fd
        plus = self.tangent(s + h).components
        minus = self.tangent(s - h).components
        return (plus - minus) / (2.0 * h)


# ---------------------------------------------------------------------------
# contraction helpers (raw arrays; the slot order encodes the conventions
# stated in the module docstring)

def torsion_apply(torsion: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``T(X, Y)^i = T[i, j, k] Y^j X^k`` (first argument in the direction
    slot), matching ``T(X,Y) = D_X Y - D_Y X`` on commuting fields."""
    return np.einsum("ijk,j,k->i", torsion, y, x)


def curvature_apply(curv: np.ndarray, x: np.ndarray, y: np.ndarray,
                    z: np.ndarray) -> np.ndarray:
    """``R(X, Y)Z^i = R[i, j, k, l] Z^j X^k Y^l``."""
    return np.einsum("ijkl,j,k,l->i", curv, z, x, y)


# ---------------------------------------------------------------------------
# operations

def torsion_at(conn: ConnectionField, x: ChartPoint) -> Tensor:
    """Torsion tensor ``T^i_{jk} = Gamma^i_{jk} - Gamma^i_{kj}`` at ``x``.

    This is the commutator definition evaluated on coordinate vector fields,
    whose Lie bracket vanishes; the result is exactly antisymmetric in its
    two lower indices.
    """
    gamma = conn.coefficients(x)
    return Tensor(x, (1, 2), gamma - np.swapaxes(gamma, 1, 2))


def curvature_at(conn: ConnectionField, x: ChartPoint) -> Tensor:
    """Curvature tensor of the connection at ``x``, valence (1,3).

    ``R^i_{jkl} = d_k G^i_{jl} - d_l G^i_{jk} + G^i_{mk} G^m_{jl}
    - G^i_{ml} G^m_{jk}``; antisymmetric in (k, l).
    """
    gamma = conn.coefficients(x)
    dgamma = conn.partials(x)  # dgamma[i, j, k, l] = d_l G^i_{jk}
    term_dk = np.transpose(dgamma, (0, 1, 3, 2))  # [i,j,k,l] -> d_k G^i_{jl}
    quad = np.einsum("imk,mjl->ijkl", gamma, gamma)
    entries = term_dk - dgamma + quad - np.swapaxes(quad, 2, 3)
    return Tensor(x, (1, 3), entries)


def cov_derivative_along(path: PathCurve, field: Callable[[float], Tangent],
                         s: float, conn: ConnectionField,
                         d_components: Optional[Callable[[float], np.ndarray]] = None,
                         ) -> Tangent:
    """Covariant derivative ``(DB/ds)^i = dB^i/ds + G^i_{jk} B^j xdot^k`` of a
    tangent field along the path at parameter ``s``.

    The plain component derivative is taken from ``d_components`` when the
    field supplies it, else by a central difference with the path's
    ``h_fd``.
    """
    path.require(s)
    value = field(s)
    base = path.map(s)
    if not value.base.close_to(base):
        raise EvaluationError("field base point does not lie on the path",
                              point=value.base)
    if d_components is not None:
        db = np.asarray(d_components(s), dtype=float)
    else:
        h = path.h_fd
        db = (field(s + h).components - field(s - h).components) / (2.0 * h)
    gamma = conn.coefficients(base)
    xdot = path.tangent(s).components
    comps = db + np.einsum("ijk,j,k->i", gamma, value.components, xdot)
    return Tangent(base, comps)


def cov_derivative_tensor_along(path: PathCurve,
                                tfield: Callable[[float], Tensor],
                                s: float, conn: ConnectionField,
                                d_entries: Optional[Callable[[float], np.ndarray]] = None,
                                ) -> Tensor:
    """Covariant derivative along the path of a tensor field of constant
    valence: component derivative plus one ``+Gamma`` correction per upper
    index and one ``-Gamma`` correction per lower index, each contracted
    with the path tangent."""
    path.require(s)
    value = tfield(s)
    base = path.map(s)
    if not value.base.close_to(base):
        raise EvaluationError("tensor field base point does not lie on the path",
                              point=value.base)
    if d_entries is not None:
        dw = np.asarray(d_entries(s), dtype=float)
    else:
        h = path.h_fd
        dw = (tfield(s + h).entries - tfield(s - h).entries) / (2.0 * h)
    gamma = conn.coefficients(base)
    xdot = path.tangent(s).components
    gdot = np.einsum("ijk,k->ij", gamma, xdot)  # gdot[i, m] = G^i_{mk} xdot^k
    p, q = value.valence
    out = dw.copy()
    w = value.entries
    for axis in range(p):
        corr = np.tensordot(gdot, w, axes=([1], [axis]))
        out += np.moveaxis(corr, 0, axis)
    for axis in range(p, p + q):
        corr = np.tensordot(w, gdot, axes=([axis], [0]))
        out -= np.moveaxis(corr, -1, axis)
    return Tensor(base, value.valence, out)


def metric_dot(metric: MetricField, x: ChartPoint, u: Tangent, v: Tangent) -> float:
    """Scalar product ``g_{ij}(x) U^i V^j``."""
    if not (u.base.close_to(x) and v.base.close_to(x)):
        raise EvaluationError("metric_dot arguments attached to different points",
                              point=x)
    g = metric.matrix(x)
    # evaluated symmetrically so dot(U, V) == dot(V, U) holds exactly
    return 0.5 * (float(u.components @ (g @ v.components))
                  + float(v.components @ (g @ u.components)))


def sign_of_square(metric: MetricField, x: ChartPoint, u: Tangent,
                   null_tol: float = 1e-10) -> int:
    """Causal sign of ``(U)^2``: +1 or -1; raises NullVectorError when the
    scalar square is within ``null_tol`` of zero."""
    square = metric_dot(metric, x, u, u)
    if abs(square) <= null_tol:
        raise NullVectorError(
            f"scalar square {square} within null tolerance {null_tol}")
    return 1 if square > 0 else -1
