"""Two-particle kinematics on a connecting surface.

The two worldlines are the ``r = r_base`` and ``r = r_base + eps`` parameter
lines of a two-parameter surface ``gamma(s, r)``; the connecting paths
``gamma_s`` are its ``s = const`` lines.  All relative quantities transport
particle 2's data backward along ``gamma_s`` to particle 1 and subtract:

    Delta B_21 = L_{r'' -> r'} B(x_2) - B(x_1).

The separation ``eps = r'' - r'`` is the experiment knob: the surface is held
fixed and ``eps`` shrinks along a ladder, which is what turns the
"up to second order" claims into measurable convergence slopes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.integrate import quad_vec

from .errors import DomainError, EvaluationError, QuadratureError
from .geometry import (ChartPoint, ConnectionField, MetricField, PathCurve,
                       Tangent, metric_dot, sign_of_square)
from .transport import (DEFAULT_ODE_CONFIG, OdeConfig, TransportLaw,
                        transport_components)

__all__ = [
    "WorldSurface",
    "MassSurface",
    "SurfaceField",
    "Scenario",
    "connecting_path",
    "worldline",
    "force_field",
    "infinitesimal_deviation",
    "deviation_vector",
    "delta_field",
    "relative_velocity",
    "relative_acceleration",
    "momentum",
    "relative_momentum",
    "relative_force",
    "relative_energy",
]

DEVIATION_QUAD_TOL = 1e-11


@dataclass(frozen=True)
class WorldSurface:
    """Two-parameter worldline surface with analytic partials.

    ``map(s, r)`` returns the chart coordinates; ``d_s``/``d_r`` the first
    partials and ``d_ss``/``d_sr``/``d_rr`` the second partials, all as
    component arrays.  ``r_base`` is the r-parameter of the first worldline.
    """

    map: Callable[[float, float], np.ndarray]
    d_s: Callable[[float, float], np.ndarray]
    d_r: Callable[[float, float], np.ndarray]
    d_ss: Callable[[float, float], np.ndarray]
    d_sr: Callable[[float, float], np.ndarray]
    d_rr: Callable[[float, float], np.ndarray]
    s_domain: Tuple[float, float]
    r_domain: Tuple[float, float]
    r_base: float = 0.0

    def point(self, s: float, r: float) -> ChartPoint:
        return ChartPoint(self.map(s, r))

    def require_r(self, r: float) -> None:
        lo, hi = self.r_domain
        if not (lo - 1e-12 <= r <= hi + 1e-12):
            raise DomainError(f"r = {r} outside surface r-domain [{lo}, {hi}]")

    def require_s(self, s: float) -> None:
        lo, hi = self.s_domain
        if not (lo - 1e-12 <= s <= hi + 1e-12):
            raise DomainError(f"s = {s} outside surface s-domain [{lo}, {hi}]")


@dataclass(frozen=True)
class MassSurface:
    """Nonvanishing C^1 mass function over the surface parameters."""

    mu: Callable[[float, float], float]
    d_s_mu: Callable[[float, float], float]
    d_r_mu: Callable[[float, float], float]

    def value(self, s: float, r: float) -> float:
        m = float(self.mu(s, r))
        if m == 0.0 or not np.isfinite(m):
            raise EvaluationError(f"mass function vanished at (s={s}, r={r})")
        return m


@dataclass(frozen=True)
class SurfaceField:
    """A vector field over the surface parameters with an analytic
    r-partial, used as the probe field B of the generic first-order
    expansion check."""

    value: Callable[[float, float], np.ndarray]
    d_r: Callable[[float, float], np.ndarray]


@dataclass(frozen=True)
class Scenario:
    """Immutable bundle of everything needed to evaluate any equation:
    chart dimension, connection, optional metric, transport law, worldline
    surface, mass function, probe field, and a default evaluation
    parameter."""

    dimension: int
    conn: ConnectionField
    metric: Optional[MetricField]
    law: TransportLaw
    surface: WorldSurface
    mass: MassSurface
    label: str
    probe_field: Optional[SurfaceField] = None
    s_eval: float = 0.0

    def separation_endpoints(self, eps: float) -> Tuple[float, float]:
        r1 = self.surface.r_base
        r2 = r1 + eps
        self.surface.require_r(r1)
        self.surface.require_r(r2)
        return r1, r2


def connecting_path(scenario: Scenario, s: float) -> PathCurve:
    """The path ``gamma_s: r -> gamma(s, r)`` joining the two particles."""
    surf = scenario.surface
    surf.require_s(s)

    def pmap(r: float) -> ChartPoint:
        return surf.point(s, r)

    def ptan(r: float) -> Tangent:
        return Tangent(pmap(r), surf.d_r(s, r))

    return PathCurve(map=pmap, tangent=ptan, domain=surf.r_domain,
                     second_derivative=lambda r: np.asarray(surf.d_rr(s, r), float))


def worldline(scenario: Scenario, which: int, eps: float = 0.0) -> PathCurve:
    """Worldline of particle 1 (r = r') or 2 (r = r' + eps) as a path in s;
    its tangent is the particle velocity."""
    if which not in (1, 2):
        raise ValueError("particle index must be 1 or 2")
    r1, r2 = scenario.separation_endpoints(eps)
    r = r1 if which == 1 else r2
    surf = scenario.surface

    def pmap(s: float) -> ChartPoint:
        return surf.point(s, r)

    def ptan(s: float) -> Tangent:
        return Tangent(pmap(s), surf.d_s(s, r))

    return PathCurve(map=pmap, tangent=ptan, domain=surf.s_domain,
                     second_derivative=lambda s: np.asarray(surf.d_ss(s, r), float))


def force_field(scenario: Scenario, s: float, r: float) -> Tangent:
    """Force field F_s(r): covariant s-acceleration of the surface,
    ``F^i = d_ss^i + Gamma^i_{jk} d_s^j d_s^k`` at ``gamma(s, r)``.

    Coincides with the particle accelerations at the worldline parameters.
    """
    surf = scenario.surface
    surf.require_s(s)
    surf.require_r(r)
    point = surf.point(s, r)
    gamma = scenario.conn.coefficients(point)
    ds = np.asarray(surf.d_s(s, r), float)
    comps = np.asarray(surf.d_ss(s, r), float) + np.einsum("ijk,j,k->i", gamma, ds, ds)
    return Tangent(point, comps)


def infinitesimal_deviation(scenario: Scenario, s: float, eps: float) -> Tangent:
    """Infinitesimal deviation vector: the connecting-path tangent at r'
    scaled by eps, attached at x_1(s).  Exactly linear in eps."""
    surf = scenario.surface
    surf.require_s(s)
    r1, _ = scenario.separation_endpoints(eps)
    return Tangent(surf.point(s, r1), eps * np.asarray(surf.d_r(s, r1), float))


def deviation_vector(scenario: Scenario, s: float, eps: float,
                     cfg: OdeConfig = DEFAULT_ODE_CONFIG,
                     quad_tol: float = DEVIATION_QUAD_TOL) -> Tangent:
    """Deviation vector of particle 2 with respect to particle 1 at x_1(s):
    the integral over [r', r' + eps] of the connecting-path tangents
    transported back to r', evaluated by adaptive 15-point Gauss-Kronrod
    quadrature."""
    surf = scenario.surface
    surf.require_s(s)
    r1, r2 = scenario.separation_endpoints(eps)
    base = surf.point(s, r1)
    if eps == 0.0:
        return Tangent(base, np.zeros(scenario.dimension))
    cpath = connecting_path(scenario, s)

    def integrand(u: float) -> np.ndarray:
        rdot = np.asarray(surf.d_r(s, u), float)
        return transport_components(scenario.law, cpath, u, r1, rdot, cfg)

    value, err = quad_vec(integrand, r1, r2, epsabs=quad_tol, epsrel=1e-14,
                          quadrature="gk15")
    if err > max(quad_tol, 1e-13 * float(np.max(np.abs(value)))) * 50:
        raise QuadratureError(
            f"deviation-vector quadrature error {err} above tolerance {quad_tol}")
    return Tangent(base, value)


def delta_field(scenario: Scenario, s: float, eps: float,
                field: Callable[[float, float], Tangent],
                cfg: OdeConfig = DEFAULT_ODE_CONFIG) -> Tangent:
    """Covariant difference of a surface field between the particles:
    transport ``field(s, r'')`` backward along gamma_s to r' and subtract
    ``field(s, r')``."""
    surf = scenario.surface
    surf.require_s(s)
    r1, r2 = scenario.separation_endpoints(eps)
    b2 = field(s, r2)
    b1 = field(s, r1)
    if not b2.base.close_to(surf.point(s, r2)):
        raise EvaluationError("field value at r'' not attached to gamma(s, r'')",
                              point=b2.base)
    if not b1.base.close_to(surf.point(s, r1)):
        raise EvaluationError("field value at r' not attached to gamma(s, r')",
                              point=b1.base)
    cpath = connecting_path(scenario, s)
    pulled = transport_components(scenario.law, cpath, r2, r1, b2.components, cfg)
    return Tangent(b1.base, pulled - b1.components)


def _velocity_field(scenario: Scenario) -> Callable[[float, float], Tangent]:
    surf = scenario.surface
    return lambda s, r: Tangent(surf.point(s, r), surf.d_s(s, r))


def _momentum_field(scenario: Scenario) -> Callable[[float, float], Tangent]:
    surf = scenario.surface
    mass = scenario.mass
    return lambda s, r: Tangent(surf.point(s, r),
                                mass.value(s, r) * np.asarray(surf.d_s(s, r), float))


def _force_density_field(scenario: Scenario) -> Callable[[float, float], Tangent]:
    mass = scenario.mass
    def kfield(s: float, r: float) -> Tangent:
        f = force_field(scenario, s, r)
        return Tangent(f.base, mass.value(s, r) * f.components)
    return kfield


def relative_velocity(scenario: Scenario, s: float, eps: float,
                      cfg: OdeConfig = DEFAULT_ODE_CONFIG) -> Tangent:
    """Relative velocity: back-transported V_2 minus V_1 at x_1(s)."""
    return delta_field(scenario, s, eps, _velocity_field(scenario), cfg)


def relative_acceleration(scenario: Scenario, s: float, eps: float,
                          cfg: OdeConfig = DEFAULT_ODE_CONFIG) -> Tangent:
    """Relative acceleration: back-transported F_s(r'') minus F_s(r'),
    using that the particle accelerations are values of the force field."""
    return delta_field(scenario, s, eps,
                       lambda u, r: force_field(scenario, u, r), cfg)


def momentum(scenario: Scenario, which: int, s: float, eps: float = 0.0) -> Tangent:
    """Particle momentum ``p_a = mu_a V_a`` at x_a(s)."""
    line = worldline(scenario, which, eps)
    r1, r2 = scenario.separation_endpoints(eps)
    r = r1 if which == 1 else r2
    mu = scenario.mass.value(s, r)
    tan = line.tangent(s)
    return Tangent(tan.base, mu * tan.components)


def relative_momentum(scenario: Scenario, s: float, eps: float,
                      cfg: OdeConfig = DEFAULT_ODE_CONFIG) -> Tangent:
    """Relative momentum: back-transported p_2 minus p_1 at x_1(s)."""
    return delta_field(scenario, s, eps, _momentum_field(scenario), cfg)


def relative_force(scenario: Scenario, s: float, eps: float,
                   cfg: OdeConfig = DEFAULT_ODE_CONFIG) -> Tangent:
    """Covariant difference of the forces ``K(s, r) = mu F_s(r)`` acting on
    the two particles."""
    return delta_field(scenario, s, eps, _force_density_field(scenario), cfg)


def relative_energy(scenario: Scenario, s: float, eps: float,
                    cfg: OdeConfig = DEFAULT_ODE_CONFIG,
                    null_tol: float = 1e-10) -> float:
    """Relative energy of particle 2 with respect to particle 1:
    the metric pairing of the back-transported p_2 with V_1, signed by the
    causal character of V_1.

    Requires the scenario metric; raises NullVectorError when V_1 is null.
    """
    if scenario.metric is None:
        raise EvaluationError("relative_energy requires a scenario metric")
    surf = scenario.surface
    r1, r2 = scenario.separation_endpoints(eps)
    x1 = surf.point(s, r1)
    v1 = Tangent(x1, surf.d_s(s, r1))
    sign = sign_of_square(scenario.metric, x1, v1, null_tol=null_tol)
    p2 = momentum(scenario, 2, s, eps)
    cpath = connecting_path(scenario, s)
    pulled = transport_components(scenario.law, cpath, r2, r1, p2.components, cfg)
    return sign * metric_dot(scenario.metric, x1, Tangent(x1, pulled), v1)
