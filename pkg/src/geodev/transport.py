"""Linear transports along paths.

A transport is *defined* by its coefficient field ``H^i_{jk}(s; path)``: the
transport matrices are generated by integrating the linear ODE

    dH(u, s)/du = M(u) H(u, s),     H(s, s) = I,
    M(u)^i_j = H^i_{jk}(u; path) * xdot^k(u),

with an adaptive embedded Runge-Kutta 5(4) pair.  Parallel transport of an
affine connection is the special case ``H^i_{jk} = -Gamma^i_{jk}``; the
S-tensor ``S = -H - Gamma`` measures the mismatch between a transport and
the connection (zero iff the transport is the connection's parallel
transport).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import EvaluationError, TransportError
from .geometry import ChartPoint, ConnectionField, PathCurve, Tangent, Tensor

__all__ = [
    "OdeConfig",
    "TransportLaw",
    "TransportMatrix",
    "DEFAULT_ODE_CONFIG",
    "transport_matrix",
    "transport_vector",
    "transport_components",
    "law_from_connection",
    "law_with_offset",
    "extract_first_coeff",
    "approx_transport",
    "s_tensor",
    "coordinate_probes",
]


@dataclass(frozen=True)
class OdeConfig:
    """Tolerances for the transport-generating ODE solves."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_steps: int = 10**6

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("ODE tolerances must be positive")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")


DEFAULT_ODE_CONFIG = OdeConfig()


@dataclass(frozen=True)
class TransportLaw:
    """Coefficient field ``H^i_{jk}(s; path)`` defining a linear transport."""

    coeff_at: Callable[[float, PathCurve], np.ndarray]
    label: str = ""

    def coefficients(self, s: float, path: PathCurve) -> np.ndarray:
        h = np.asarray(self.coeff_at(s, path), dtype=float)
        d = path.map(s).dimension if h.ndim != 3 else h.shape[0]
        if h.ndim != 3 or h.shape != (d, d, d):
            raise EvaluationError(
                f"transport coefficients have shape {h.shape}, expected a cube")
        if not np.all(np.isfinite(h)):
            raise EvaluationError("non-finite transport coefficients",
                                  point=path.map(s))
        return h


@dataclass(frozen=True)
class TransportMatrix:
    """Matrix of ``L_{s->t}`` along a path, mapping components at
    ``from_param`` to components at ``to_param``."""

    from_param: float
    to_param: float
    path: PathCurve
    entries: np.ndarray

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]


def _generator(law: TransportLaw, path: PathCurve) -> Callable[[float], np.ndarray]:
    def m_at(u: float) -> np.ndarray:
        coeff = law.coefficients(u, path)
        return np.einsum("ijk,k->ij", coeff, path.tangent(u).components)
    return m_at


def _solve_linear(m_at, y0: np.ndarray, s: float, t: float,
                  cfg: OdeConfig, mat_dim: int) -> np.ndarray:
    """Integrate dy/du = M(u) @ y_matrix from s to t (RK45)."""
    evals = 0
    # RK45 uses at most 7 rhs evaluations per step (6 stages + FSAL reuse)
    eval_budget = 8 * cfg.max_steps

    def rhs(u, y):
        nonlocal evals
        evals += 1
        if evals > eval_budget:
            raise TransportError(
                f"transport ODE exceeded {cfg.max_steps} steps")
        m = m_at(u)
        return (m @ y.reshape(mat_dim, -1)).reshape(-1)

    sol = solve_ivp(rhs, (s, t), y0.reshape(-1), method="RK45",
                    rtol=cfg.rel_tol, atol=cfg.abs_tol)
    if not sol.success:
        raise TransportError(f"transport ODE failed: {sol.message}")
    return sol.y[:, -1].reshape(y0.shape)


def transport_matrix(law: TransportLaw, path: PathCurve, s: float, t: float,
                     cfg: OdeConfig = DEFAULT_ODE_CONFIG) -> TransportMatrix:
    """Transport matrix ``H(t, s; path)`` from parameter ``s`` to ``t``.

    ``H(s, s)`` is the exact identity (no integration is performed); the
    flow property ``H(t, r) H(r, s) = H(t, s)`` holds within ODE tolerance.
    """
    path.require(s)
    path.require(t)
    d = path.map(s).dimension
    if t == s:
        return TransportMatrix(s, t, path, np.eye(d))
    entries = _solve_linear(_generator(law, path), np.eye(d), s, t, cfg, d)
    return TransportMatrix(s, t, path, entries)


def transport_vector(law: TransportLaw, path: PathCurve, s: float, t: float,
                     u: Tangent, cfg: OdeConfig = DEFAULT_ODE_CONFIG) -> Tangent:
    """Transport the tangent ``u`` at ``path(s)`` to ``path(t)``: the
    transport-matrix entries applied to the components (hence exactly linear
    in ``u``)."""
    if not u.base.close_to(path.map(s)):
        raise EvaluationError("vector to transport is not attached to path(s)",
                              point=u.base)
    mat = transport_matrix(law, path, s, t, cfg)
    return Tangent(path.map(t), mat.entries @ u.components)


def transport_components(law: TransportLaw, path: PathCurve, s: float, t: float,
                         components: np.ndarray,
                         cfg: OdeConfig = DEFAULT_ODE_CONFIG) -> np.ndarray:
    """Same map as transport_vector but solving the d-dimensional vector ODE
    directly; used in inner loops (quadrature nodes, delta fields)."""
    if t == s:
        return np.array(components, dtype=float)
    path.require(s)
    path.require(t)
    y0 = np.asarray(components, dtype=float)
    return _solve_linear(_generator(law, path), y0, s, t, cfg, y0.shape[0])


def law_from_connection(conn: ConnectionField) -> TransportLaw:
    """Parallel-transport law of the connection: ``H^i_{jk} = -Gamma^i_{jk}``
    evaluated at the path point."""
    def coeff(s: float, path: PathCurve) -> np.ndarray:
        return -conn.coefficients(path.map(s))
    return TransportLaw(coeff, label="parallel")


def law_with_offset(conn: ConnectionField,
                    sigma: Callable[[ChartPoint], np.ndarray]) -> TransportLaw:
    """Transport law ``H = -Gamma - sigma``, so that the S-tensor recovers
    ``sigma`` exactly."""
    def coeff(s: float, path: PathCurve) -> np.ndarray:
        point = path.map(s)
        return -conn.coefficients(point) - np.asarray(sigma(point), dtype=float)
    return TransportLaw(coeff, label="parallel+offset")


def s_tensor(law: TransportLaw, conn: ConnectionField, path: PathCurve,
             r: float) -> Tensor:
    """S-tensor ``S^i_{jk} = -H^i_{jk}(r; path) - Gamma^i_{jk}(path(r))``,
    valence (1,2) at ``path(r)``."""
    point = path.map(r)
    entries = -law.coefficients(r, path) - conn.coefficients(point)
    return Tensor(point, (1, 2), entries)


def coordinate_probes(x: ChartPoint, extent: float = 1e-3) -> list:
    """Straight coordinate-line probe paths through ``x`` at parameter 0,
    one per chart axis; suitable input for extract_first_coeff."""
    d = x.dimension
    probes = []
    for axis in range(d):
        e = np.zeros(d)
        e[axis] = 1.0
        def mk(ei):
            def pmap(t: float) -> ChartPoint:
                return ChartPoint(x.coords + t * ei)
            def ptan(t: float) -> Tangent:
                return Tangent(pmap(t), ei)
            def psec(t: float) -> np.ndarray:
                return np.zeros(d)
            return PathCurve(map=pmap, tangent=ptan, domain=(-extent, extent),
                             second_derivative=psec)
        probes.append(mk(e))
    return probes


def extract_first_coeff(law: TransportLaw, x: ChartPoint,
                        probe_paths: Sequence[PathCurve],
                        cfg: OdeConfig = DEFAULT_ODE_CONFIG,
                        step: float = 1e-5) -> np.ndarray:
    """Recover the first-order transport coefficients ``H^i_{jk}`` at ``x``
    from the transport matrices themselves.

    Differentiates ``H(t, 0)`` in ``t`` at 0 along each probe path (central
    difference with one Richardson level), giving ``M_m = H_k tdot_m^k`` per
    probe, then solves the linear system for the ``d`` matrices ``H_k``.
    Probe paths must pass through ``x`` at parameter 0 with tangents that
    span the tangent space.
    """
    d = x.dimension
    if len(probe_paths) != d:
        raise EvaluationError(f"need exactly {d} probe paths, got {len(probe_paths)}")
    tangents = np.empty((d, d))
    derivs = np.empty((d, d, d))
    for m, probe in enumerate(probe_paths):
        if not probe.map(0.0).close_to(x):
            raise EvaluationError("probe path does not pass through x at 0",
                                  point=probe.map(0.0))
        tangents[m] = probe.tangent(0.0).components

        def first_deriv(h: float) -> np.ndarray:
            plus = transport_matrix(law, probe, 0.0, h, cfg).entries
            minus = transport_matrix(law, probe, 0.0, -h, cfg).entries
            return (plus - minus) / (2.0 * h)

        coarse = first_deriv(step)
        fine = first_deriv(step / 2.0)
        derivs[m] = (4.0 * fine - coarse) / 3.0
    if np.linalg.cond(tangents) >= 1e6:
        raise EvaluationError("probe tangents are rank deficient", point=x)
    # solve tangents @ U = derivs for U[k] = H_k, componentwise over (i, j)
    stacked = np.linalg.solve(tangents, derivs.reshape(d, d * d))
    coeff = np.empty((d, d, d))
    for k in range(d):
        coeff[:, :, k] = stacked[k].reshape(d, d)
    return coeff


def approx_transport(law: TransportLaw, path: PathCurve, s: float, t: float,
                     order: int,
                     cfg: OdeConfig = DEFAULT_ODE_CONFIG) -> TransportMatrix:
    """N-th order approximant of the transport matrix in powers of the
    endpoint separation, N in {0, 1}.

    N=0 is the identity; N=1 is ``I + H_k(s)(x^k(t) - x^k(s))`` with the
    coefficients taken from the law's own field (the laws in this package
    are all coefficient-generated).
    """
    if order not in (0, 1):
        raise ValueError("approximation order must be 0 or 1")
    path.require(s)
    path.require(t)
    d = path.map(s).dimension
    if order == 0:
        return TransportMatrix(s, t, path, np.eye(d))
    coeff = law.coefficients(s, path)
    gap = path.map(t).coords - path.map(s).coords
    entries = np.eye(d) + np.einsum("ijk,k->ij", coeff, gap)
    return TransportMatrix(s, t, path, entries)
