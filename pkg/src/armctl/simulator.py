"""Fixed-step RK4 simulation of the arm, passive or closed loop.

Closed-loop control is u = tau_eq(theta_ref) - K (x - x_ref), updated every
control period and held constant between updates (zero-order hold).  The
gain K comes either from a fresh linearize-plus-Riccati solve each update
(online mode, linearizing at the previously commanded torque) or from a
precomputed gain table (table mode).
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    MassModel,
    equilibrium_torque,
    forward_dynamics,
    total_energy,
)
from .errors import DegenerateInertia, EmptyBenchmark, NotStabilizable, OutOfBounds
from .gain_table import GainTable, RefinedTable, check_digest, lookup
from .kinematics import ArmGeometry
from .linearization import OperatingPoint, linearize
from .riccati import CostWeights, lqr_gain

CSV_HEADER = "t,th1,th2,th3,th4,w1,w2,w3,w4,tau1,tau2,tau3,tau4,E"


@dataclass(frozen=True)
class SimConfig:
    """Integration step, controller update interval, and run length (s).

    control_period must be a whole multiple of dt; the duration is rounded
    to a whole number of control periods (at least one).
    """

    dt: float = 1e-3
    control_period: float = 0.02
    duration: float = 5.0

    def __post_init__(self):
        if not 0.0 < self.dt <= self.control_period:
            raise ValueError(f"need 0 < dt <= control_period, got {self.dt}, {self.control_period}")
        if self.duration <= 0.0:
            raise ValueError(f"duration must be > 0, got {self.duration}")
        steps = self.control_period / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ValueError(
                f"control_period {self.control_period} is not a multiple of dt {self.dt}"
            )

    @property
    def steps_per_update(self) -> int:
        return int(round(self.control_period / self.dt))

    @property
    def n_updates(self) -> int:
        return max(1, int(round(self.duration / self.control_period)))


class ControllerMode(enum.Enum):
    PASSIVE = "passive"
    ONLINE_LQR = "online"
    TABLE_LQR = "table"


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled run: one sample per control period, including t=0.

    inputs[i] is the torque commanded at times[i] (held until the next
    sample); the final row carries the command the controller would issue
    at the end state.  energy is KE + PE of the model.
    """

    times: np.ndarray
    states: np.ndarray  # (n, 8)
    inputs: np.ndarray  # (n, 4)
    energy: np.ndarray

    def to_csv(self, f):
        """Write the CSV layout (header above) with 17-significant-digit values."""
        f.write(CSV_HEADER + "\n")
        for i in range(self.times.size):
            row = [self.times[i], *self.states[i], *self.inputs[i], self.energy[i]]
            f.write(",".join(format(v, ".17g") for v in row) + "\n")


def step_rk4(geom: ArmGeometry, masses: MassModel, x, torque, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step of x' = [rates, forward_dynamics(...)]
    with the torque held constant over the step."""
    x = np.asarray(x, dtype=float)
    tau = np.asarray(torque, dtype=float)

    def f(state):
        return np.concatenate(
            [state[4:], forward_dynamics(geom, masses, state[:4], state[4:], tau)]
        )

    k1 = f(x)
    k2 = f(x + 0.5 * dt * k1)
    k3 = f(x + 0.5 * dt * k2)
    k4 = f(x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _as_state(x, name) -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(-1)
    if v.size != 8:
        raise ValueError(f"{name} must be an 8-vector [theta, rates], got size {v.size}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be finite")
    return v


def simulate(
    geom: ArmGeometry,
    masses: MassModel,
    config: SimConfig,
    mode: ControllerMode,
    x0,
    x_ref=None,
    *,
    weights: CostWeights | None = None,
    table: GainTable | RefinedTable | None = None,
) -> Trajectory:
    """Run the closed- or open-loop simulation and sample every control period.

    Online mode needs `weights`; table mode needs `table` (its digest is
    checked against geom/masses, and against `weights` when given).  On a
    mid-run failure (OutOfBounds, NotStabilizable, DegenerateInertia) the
    exception is re-raised with the samples so far attached as `.partial`.
    """
    x = _as_state(x0, "x0")
    if mode is not ControllerMode.PASSIVE:
        if x_ref is None:
            raise ValueError(f"{mode.value} mode requires x_ref")
        x_ref = _as_state(x_ref, "x_ref")
        tau_ff = equilibrium_torque(geom, masses, x_ref[:4])
    if mode is ControllerMode.ONLINE_LQR and weights is None:
        raise ValueError("online mode requires cost weights")
    if mode is ControllerMode.TABLE_LQR:
        if table is None:
            raise ValueError("table mode requires a gain table")
        check_digest(table, geom=geom, masses=masses, weights=weights)

    tau_cached = None
    if mode is ControllerMode.ONLINE_LQR:
        tau_cached = equilibrium_torque(geom, masses, x[:4])

    def control(state):
        nonlocal tau_cached
        if mode is ControllerMode.PASSIVE:
            return np.zeros(4)
        if mode is ControllerMode.ONLINE_LQR:
            op = OperatingPoint(state[:4], state[4:], tau_cached)
            model = linearize(geom, masses, op)
            gain = lqr_gain(model.A, model.B, weights)
            u = tau_ff - gain @ (state - x_ref)
            tau_cached = u
            return u
        gain = lookup(table, state[:4])
        return tau_ff - gain @ (state - x_ref)

    times, states, inputs, energy = [], [], [], []

    def record(t, state, u):
        times.append(t)
        states.append(state.copy())
        inputs.append(np.asarray(u, dtype=float).copy())
        energy.append(total_energy(geom, masses, state[:4], state[4:]))

    def partial() -> Trajectory:
        return Trajectory(
            np.array(times), np.array(states).reshape(len(times), 8),
            np.array(inputs).reshape(len(times), 4), np.array(energy),
        )

    try:
        for p in range(config.n_updates):
            u = control(x)
            record(p * config.control_period, x, u)
            for _ in range(config.steps_per_update):
                x = step_rk4(geom, masses, x, u, config.dt)
        record(config.n_updates * config.control_period, x, control(x))
    except (OutOfBounds, NotStabilizable, DegenerateInertia) as exc:
        exc.partial = partial()
        raise
    return partial()


@dataclass(frozen=True)
class LatencyReport:
    """Wall-clock cost of one control step, online versus table lookup."""

    online_median_us: float
    online_p95_us: float
    lookup_median_us: float
    lookup_p95_us: float
    speedup: float
    n_iters: int


def bench_controller(
    geom: ArmGeometry,
    masses: MassModel,
    table: GainTable | RefinedTable,
    n_iters: int,
    *,
    weights: CostWeights,
    seed: int = 0,
) -> LatencyReport:
    """Compare one online control step (linearize + Riccati solve + gain,
    then applying the gain) against one table lookup + gain application,
    at n_iters random in-bounds states.

    Everything runs on the calling thread so the timings are stable.
    Raises EmptyBenchmark when n_iters <= 0.
    """
    if n_iters <= 0:
        raise EmptyBenchmark(f"n_iters must be positive, got {n_iters}")
    check_digest(table, geom=geom, masses=masses, weights=weights)

    if isinstance(table, RefinedTable):
        lo = np.asarray(table.lo)
        hi = np.asarray(table.hi)
    else:
        lo = np.asarray(table.grid.lo)
        hi = np.asarray(table.grid.hi)

    rng = np.random.default_rng(seed)
    thetas = rng.uniform(lo, hi, size=(n_iters, 4))
    refs = rng.uniform(lo, hi, size=(n_iters, 4))

    online_ns = np.empty(n_iters)
    lookup_ns = np.empty(n_iters)
    for i in range(n_iters):
        theta = thetas[i]
        dx = np.concatenate([theta - refs[i], np.zeros(4)])
        op = OperatingPoint(theta, np.zeros(4), equilibrium_torque(geom, masses, theta))

        start = time.perf_counter_ns()
        model = linearize(geom, masses, op)
        gain = lqr_gain(model.A, model.B, weights)
        _ = gain @ dx
        online_ns[i] = time.perf_counter_ns() - start

        start = time.perf_counter_ns()
        gain = lookup(table, theta)
        _ = gain @ dx
        lookup_ns[i] = time.perf_counter_ns() - start

    online_us = online_ns / 1e3
    lookup_us = lookup_ns / 1e3
    online_median = float(np.median(online_us))
    lookup_median = float(np.median(lookup_us))
    return LatencyReport(
        online_median_us=online_median,
        online_p95_us=float(np.percentile(online_us, 95)),
        lookup_median_us=lookup_median,
        lookup_p95_us=float(np.percentile(lookup_us, 95)),
        speedup=online_median / lookup_median,
        n_iters=n_iters,
    )
