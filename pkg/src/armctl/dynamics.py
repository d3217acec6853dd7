"""Mass model, energies, and Euler-Lagrange forward dynamics.

The kinetic-energy model is deliberately decoupled: joint k contributes
(1/2) * I_k(theta) * rate_k^2, where I_k is the rotational inertia of
everything distal to that joint's pivot, evaluated in the current planar
configuration (I1 is taken about the vertical yaw axis).  There are no
velocity cross terms between different joints; the linearization and gain
tables are built on exactly this model.

Links are uniform thin rods ("segments") between consecutive joints, plus
point masses at P2..P4.  All planar quantities are independent of the yaw
angle theta1.

The partial derivatives of the potential energy and of the joint inertias
are exact (chain rule on the planar coordinates), so the accelerations are
smooth to machine precision and outer differentiation (linearization) is
well conditioned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInertia
from .kinematics import ArmGeometry

# below this (kg m^2) a joint is considered unactuatable and dynamics error out
EPS_INERTIA = 1e-12


@dataclass(frozen=True)
class MassModel:
    """Point masses at joints P2..P4 (m2..m4), distributed link masses
    (M1..M3, uniform along each link), and gravitational acceleration."""

    m2: float
    m3: float
    m4: float
    M1: float
    M2: float
    M3: float
    g: float = 9.81

    def __post_init__(self):
        for name in ("m2", "m3", "m4", "M1", "M2", "M3", "g"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")
            object.__setattr__(self, name, v)


def segment_inertia(pa, pb, m: float) -> float:
    """Rotational inertia of a uniform segment from pa to pb about the origin."""
    x1, y1 = float(pa[0]), float(pa[1])
    x2, y2 = float(pb[0]), float(pb[1])
    return (m / 3.0) * (x1 * x1 + x1 * x2 + x2 * x2 + y1 * y1 + y1 * y2 + y2 * y2)


def point_inertia(p, m: float) -> float:
    """Rotational inertia of a point mass about the origin: m * (x^2 + y^2)."""
    x, y = float(p[0]), float(p[1])
    return m * (x * x + y * y)


def _four(values) -> tuple[float, float, float, float]:
    a, b, c, d = (float(v) for v in values)
    return a, b, c, d


def _planar_xy(geom: ArmGeometry, t2: float, t3: float, t4: float):
    """Planar coordinates of P2..P4 (P1 is the origin)."""
    a2 = t2
    a3 = a2 + t3
    a4 = a3 + t4
    x2 = geom.L1 * math.sin(a2)
    y2 = geom.L1 * math.cos(a2)
    x3 = x2 + geom.L2 * math.sin(a3)
    y3 = y2 + geom.L2 * math.cos(a3)
    x4 = x3 + geom.L3 * math.sin(a4)
    y4 = y3 + geom.L3 * math.cos(a4)
    return x2, y2, x3, y3, x4, y4


def _seg(x1, y1, x2, y2, m):
    return (m / 3.0) * (x1 * x1 + x1 * x2 + x2 * x2 + y1 * y1 + y1 * y2 + y2 * y2)


def _inertias(geom: ArmGeometry, mm: MassModel, t2: float, t3: float, t4: float):
    """(I1, I2, I3, I4): I1 about the vertical axis, I2 about P1, I3 about P2,
    I4 about P3, each covering the mass distal to that pivot."""
    x2, y2, x3, y3, x4, y4 = _planar_xy(geom, t2, t3, t4)

    # vertical-axis moment: only the radial coordinate matters
    i1 = (
        mm.m2 * x2 * x2
        + mm.m3 * x3 * x3
        + mm.m4 * x4 * x4
        + (mm.M1 / 3.0) * (x2 * x2)
        + (mm.M2 / 3.0) * (x2 * x2 + x2 * x3 + x3 * x3)
        + (mm.M3 / 3.0) * (x3 * x3 + x3 * x4 + x4 * x4)
    )

    # about P1 (origin): the whole planar chain
    i2 = (
        _seg(0.0, 0.0, x2, y2, mm.M1)
        + _seg(x2, y2, x3, y3, mm.M2)
        + _seg(x3, y3, x4, y4, mm.M3)
        + mm.m2 * (x2 * x2 + y2 * y2)
        + mm.m3 * (x3 * x3 + y3 * y3)
        + mm.m4 * (x4 * x4 + y4 * y4)
    )

    # about P2: links 2..3 and the masses they carry, relative to P2
    dx3 = x3 - x2
    dy3 = y3 - y2
    dx4 = x4 - x2
    dy4 = y4 - y2
    i3 = (
        _seg(0.0, 0.0, dx3, dy3, mm.M2)
        + _seg(dx3, dy3, dx4, dy4, mm.M3)
        + mm.m3 * (dx3 * dx3 + dy3 * dy3)
        + mm.m4 * (dx4 * dx4 + dy4 * dy4)
    )

    # about P3: the tool link only; its endpoints sit at distance L3 exactly,
    # so the segment+point sum reduces to this constant closed form
    i4 = mm.m4 * geom.L3**2 + mm.M3 * geom.L3**2 / 3.0

    return i1, i2, i3, i4


def _potential(geom: ArmGeometry, mm: MassModel, t2: float, t3: float, t4: float):
    """Gravitational PE: point masses at their heights plus each uniform
    segment at the mean of its endpoint heights; P1 is the zero reference."""
    x2, y2, x3, y3, x4, y4 = _planar_xy(geom, t2, t3, t4)
    pe_points = mm.m2 * y2 + mm.m3 * y3 + mm.m4 * y4
    pe_segments = (
        mm.M1 * (0.0 + y2) / 2.0
        + mm.M2 * (y2 + y3) / 2.0
        + mm.M3 * (y3 + y4) / 2.0
    )
    return mm.g * (pe_points + pe_segments)


def _derivatives(geom: ArmGeometry, mm: MassModel, t2: float, t3: float, t4: float):
    """Exact dPE/dtheta and dI_k/dtheta at a planar configuration.

    Returns (dpe, jac) with dpe a 4-list and jac a 4x4 nested list indexed
    jac[k][j] = dI_{k+1}/dtheta_{j+1}.  Everything is differentiated through
    the planar joint coordinates; the theta1 column is structurally zero.
    """
    a2 = t2
    a3 = a2 + t3
    a4 = a3 + t4
    u2, v2 = math.sin(a2), math.cos(a2)
    u3, v3 = math.sin(a3), math.cos(a3)
    u4, v4 = math.sin(a4), math.cos(a4)
    L1, L2, L3 = geom.L1, geom.L2, geom.L3

    x2, y2 = L1 * u2, L1 * v2
    x3, y3 = x2 + L2 * u3, y2 + L2 * v3
    x4, y4 = x3 + L3 * u4, y3 + L3 * v4

    # effective weights multiplying each joint height in the PE
    co2 = mm.m2 + 0.5 * (mm.M1 + mm.M2)
    co3 = mm.m3 + 0.5 * (mm.M2 + mm.M3)
    co4 = mm.m4 + 0.5 * mm.M3

    # coordinates of P3, P4 relative to P2 (for the inertia about P2)
    d3x, d3y = x3 - x2, y3 - y2
    d4x, d4y = x4 - x2, y4 - y2

    dpe = [0.0, 0.0, 0.0, 0.0]
    jac = [[0.0, 0.0, 0.0, 0.0] for _ in range(4)]

    # cumulative-angle dependency: a2 sees theta2; a3 sees theta2..3; a4 all
    for j, (w2a, w3a, w4a) in enumerate(
        ((1.0, 1.0, 1.0), (0.0, 1.0, 1.0), (0.0, 0.0, 1.0)), start=1
    ):
        dx2, dy2 = w2a * L1 * v2, -w2a * L1 * u2
        dx3, dy3 = dx2 + w3a * L2 * v3, dy2 - w3a * L2 * u3
        dx4, dy4 = dx3 + w4a * L3 * v4, dy3 - w4a * L3 * u4

        dpe[j] = mm.g * (co2 * dy2 + co3 * dy3 + co4 * dy4)

        jac[0][j] = (
            2.0 * (mm.m2 * x2 * dx2 + mm.m3 * x3 * dx3 + mm.m4 * x4 * dx4)
            + (mm.M1 / 3.0) * (2.0 * x2 * dx2)
            + (mm.M2 / 3.0) * (2.0 * x2 * dx2 + dx2 * x3 + x2 * dx3 + 2.0 * x3 * dx3)
            + (mm.M3 / 3.0) * (2.0 * x3 * dx3 + dx3 * x4 + x3 * dx4 + 2.0 * x4 * dx4)
        )
        jac[1][j] = (
            (mm.M1 / 3.0) * 2.0 * (x2 * dx2 + y2 * dy2)
            + (mm.M2 / 3.0)
            * (
                2.0 * (x2 * dx2 + y2 * dy2)
                + dx2 * x3 + x2 * dx3 + dy2 * y3 + y2 * dy3
                + 2.0 * (x3 * dx3 + y3 * dy3)
            )
            + (mm.M3 / 3.0)
            * (
                2.0 * (x3 * dx3 + y3 * dy3)
                + dx3 * x4 + x3 * dx4 + dy3 * y4 + y3 * dy4
                + 2.0 * (x4 * dx4 + y4 * dy4)
            )
            + 2.0 * mm.m2 * (x2 * dx2 + y2 * dy2)
            + 2.0 * mm.m3 * (x3 * dx3 + y3 * dy3)
            + 2.0 * mm.m4 * (x4 * dx4 + y4 * dy4)
        )
        dd3x, dd3y = dx3 - dx2, dy3 - dy2
        dd4x, dd4y = dx4 - dx2, dy4 - dy2
        jac[2][j] = (
            (mm.M2 / 3.0 + mm.M3 / 3.0 + mm.m3) * 2.0 * (d3x * dd3x + d3y * dd3y)
            + (mm.M3 / 3.0 + mm.m4) * 2.0 * (d4x * dd4x + d4y * dd4y)
            + (mm.M3 / 3.0)
            * (dd3x * d4x + d3x * dd4x + dd3y * d4y + d3y * dd4y)
        )
        # jac[3][j] = 0: the tool-link inertia about P3 is constant

    return dpe, jac


def _pe_grad(geom, mm, t2, t3, t4):
    return _derivatives(geom, mm, t2, t3, t4)[0]


def joint_inertias(geom: ArmGeometry, masses: MassModel, theta) -> np.ndarray:
    """Effective rotational inertia seen by each joint at configuration theta."""
    _, t2, t3, t4 = _four(theta)
    return np.array(_inertias(geom, masses, t2, t3, t4))


def potential_energy(geom: ArmGeometry, masses: MassModel, theta) -> float:
    """Gravitational potential energy of the arm (joules, P1 height = 0)."""
    _, t2, t3, t4 = _four(theta)
    return _potential(geom, masses, t2, t3, t4)


def kinetic_energy(geom: ArmGeometry, masses: MassModel, theta, rates) -> float:
    """Decoupled rotational kinetic energy: (1/2) sum_k I_k(theta) rate_k^2."""
    _, t2, t3, t4 = _four(theta)
    w1, w2, w3, w4 = _four(rates)
    i1, i2, i3, i4 = _inertias(geom, masses, t2, t3, t4)
    return 0.5 * (i1 * w1 * w1 + i2 * w2 * w2 + i3 * w3 * w3 + i4 * w4 * w4)


def total_energy(geom: ArmGeometry, masses: MassModel, theta, rates) -> float:
    """KE + PE."""
    return kinetic_energy(geom, masses, theta, rates) + potential_energy(
        geom, masses, theta
    )


def equilibrium_torque(geom: ArmGeometry, masses: MassModel, theta) -> np.ndarray:
    """Torque holding the arm motionless against gravity: dPE/dtheta.

    forward_dynamics(theta, 0, equilibrium_torque(theta)) is zero to machine
    precision because both share the same gradient code.
    """
    _, t2, t3, t4 = _four(theta)
    return np.array(_pe_grad(geom, masses, t2, t3, t4))


def forward_dynamics(
    geom: ArmGeometry, masses: MassModel, theta, rates, torque
) -> np.ndarray:
    """Joint accelerations from the Euler-Lagrange equations of KE - PE.

    With the decoupled kinetic energy the system is diagonal in the
    accelerations:

        acc_i = ( 0.5 * sum_k dI_k/dq_i * w_k^2
                  - dPE/dq_i
                  - w_i * sum_j dI_i/dq_j * w_j
                  + tau_i ) / I_i

    Raises DegenerateInertia when any I_k(theta) <= EPS_INERTIA.
    """
    _, t2, t3, t4 = _four(theta)
    w = _four(rates)
    tau = _four(torque)

    inertia = _inertias(geom, masses, t2, t3, t4)
    for k in range(4):
        if inertia[k] <= EPS_INERTIA:
            raise DegenerateInertia(
                f"joint {k + 1} inertia {inertia[k]!r} <= {EPS_INERTIA} at "
                f"theta={(t2, t3, t4)!r}"
            )

    dpe, jac = _derivatives(geom, masses, t2, t3, t4)

    acc = np.empty(4)
    for i in range(4):
        quad = 0.5 * (
            jac[0][i] * w[0] * w[0]
            + jac[1][i] * w[1] * w[1]
            + jac[2][i] * w[2] * w[2]
            + jac[3][i] * w[3] * w[3]
        )
        convective = w[i] * (
            jac[i][0] * w[0] + jac[i][1] * w[1] + jac[i][2] * w[2] + jac[i][3] * w[3]
        )
        acc[i] = (quad - dpe[i] - convective + tau[i]) / inertia[i]
    return acc
