"""Driven Josephson circuit dynamics: equation of motion, integration, and
the anharmonic potential landscape.

The phase difference across the junction obeys

    d2(phi)/dt2 + omega_c^2 * phi + nonlinear_coeff * sin(phi)
        + drive_coeff * V0 * envelope(t) * cos(omega*t + phase0) = 0

with omega_c = 1/sqrt(L*C'), nonlinear_coeff = (2e/hbar)^2 * E_J / C_sigma
and drive_coeff = (2e/hbar) * C_g * omega / C_sigma (s^-2 per volt; a single
power of 2e/hbar makes the term dimensionally consistent).  The undriven
system conserves the specific energy

    E = phi_dot^2/2 + omega_c^2 * phi^2/2 + nonlinear_coeff * (1 - cos(phi)).

Integration uses adaptive embedded Runge-Kutta pairs (DOP853 by default,
RK45 selectable) with dense output; a fixed-step classic RK4 is kept for
bit-reproducibility studies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .core import E_CHARGE, HBAR, CircuitParams, DriveWaveform, Trajectory, _readonly, _require

__all__ = [
    "EomParams",
    "DriveEnvelope",
    "StepControl",
    "PotentialLandscape",
    "IntegrationError",
    "build_eom",
    "integrate_trajectory",
    "specific_energy",
    "potential_landscape",
    "flux_quantum_count",
    "harmonic_level_spacing",
]


class IntegrationError(RuntimeError):
    """Raised when the ODE integrator fails (stiffness, step underflow, NaN)."""


@dataclass(frozen=True)
class EomParams:
    """Coefficients of the junction equation of motion, plus the drive terms
    needed to evaluate the forcing."""

    omega_c: float          # rad/s, linear resonance 1/sqrt(L*C')
    nonlinear_coeff: float  # s^-2, (2e/hbar)^2 * E_J / C_sigma
    drive_coeff: float      # s^-2 per volt, (2e/hbar) * C_g * omega / C_sigma
    drive_amplitude: float = 0.0  # V
    drive_omega: float = 0.0      # rad/s
    drive_phase0: float = 0.0     # rad

    def __post_init__(self) -> None:
        for name in ("omega_c", "nonlinear_coeff", "drive_coeff", "drive_amplitude",
                     "drive_omega"):
            value = getattr(self, name)
            _require(math.isfinite(value) and value >= 0.0,
                     f"EomParams.{name} must be finite and non-negative")

    @property
    def small_oscillation_frequency(self) -> float:
        """Linearized resonance sqrt(omega_c^2 + nonlinear_coeff) in rad/s."""
        return math.sqrt(self.omega_c ** 2 + self.nonlinear_coeff)

    def to_dict(self) -> dict[str, float]:
        return {
            "omega_c": self.omega_c,
            "nonlinear_coeff": self.nonlinear_coeff,
            "drive_coeff": self.drive_coeff,
            "drive_amplitude": self.drive_amplitude,
            "drive_omega": self.drive_omega,
            "drive_phase0": self.drive_phase0,
        }


@dataclass(frozen=True)
class DriveEnvelope:
    """On/off window multiplying the drive term.

    The switch-off at ``t_off`` uses a raised-cosine ramp of
    ``ramp_duration`` seconds ending at t_off (``ramp_duration=None`` means
    5 drive periods, resolved at integration time; 0.0 means an
    instantaneous switch).  ``t_on`` turns the drive on the same way.
    """

    t_on: float = 0.0
    t_off: float | None = None
    ramp_duration: float | None = None

    def resolve_ramp(self, drive_period: float) -> float:
        if self.ramp_duration is not None:
            return self.ramp_duration
        return 5.0 * drive_period

    def value(self, t: "float | np.ndarray", ramp: float) -> "float | np.ndarray":
        tt = np.asarray(t, dtype=float)
        out = np.ones_like(tt)
        if ramp > 0.0:
            rising = (tt > self.t_on) & (tt < self.t_on + ramp)
            out = np.where(tt <= self.t_on, 0.0, out)
            out = np.where(rising, 0.5 * (1.0 - np.cos(np.pi * (tt - self.t_on) / ramp)), out)
        else:
            out = np.where(tt < self.t_on, 0.0, out)
        if self.t_off is not None:
            if ramp > 0.0:
                falling = (tt > self.t_off - ramp) & (tt < self.t_off)
                out = np.where(falling,
                               out * 0.5 * (1.0 + np.cos(np.pi * (tt - (self.t_off - ramp)) / ramp)),
                               out)
                out = np.where(tt >= self.t_off, 0.0, out)
            else:
                out = np.where(tt >= self.t_off, 0.0, out)
        return out if np.ndim(t) else float(out)


@dataclass(frozen=True)
class StepControl:
    """Integrator selection and local-error tolerances.

    ``abs_tol`` applies to the phase; the rate component gets abs_tol scaled
    by the fastest system frequency so both components are controlled at the
    same effective resolution.  ``method`` is one of "dop853", "rk45"
    (adaptive, dense output) or "rk4" (fixed step, requires ``fixed_step``).
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    method: str = "dop853"
    max_step: float = math.inf
    fixed_step: float | None = None

    def __post_init__(self) -> None:
        _require(self.rel_tol > 0.0 and self.abs_tol > 0.0,
                 "StepControl tolerances must be positive")
        _require(self.method in ("dop853", "rk45", "rk4"),
                 "StepControl.method must be 'dop853', 'rk45' or 'rk4'")
        if self.method == "rk4":
            _require(self.fixed_step is not None and self.fixed_step > 0.0,
                     "StepControl.fixed_step must be positive for method 'rk4'")


def build_eom(params: CircuitParams, drive: DriveWaveform | None) -> EomParams:
    """Assemble equation-of-motion coefficients from circuit parameters.

    Only sinusoidal drives enter the closed-form drive term (the forcing is
    proportional to the drive rate); for an arbitrary waveform, integrate the
    bulk phase machinery instead or supply its rate as a sinusoid series.
    """
    if drive is not None and not drive.is_sinusoid:
        raise ValueError(
            "build_eom supports sinusoid drives only: the forcing term is the "
            "time derivative of the gate voltage.  Decompose a sampled drive "
            "into sinusoids (see floquet_decompose) or integrate each harmonic.")
    two_e_over_hbar = 2.0 * E_CHARGE / HBAR
    omega_c = 1.0 / math.sqrt(params.inductance * params.c_prime)
    nonlinear = two_e_over_hbar ** 2 * params.e_josephson / params.c_sigma
    if drive is None or drive.amplitude == 0.0:
        return EomParams(omega_c=omega_c, nonlinear_coeff=nonlinear, drive_coeff=0.0)
    drive_coeff = two_e_over_hbar * params.c_gate * drive.omega / params.c_sigma
    return EomParams(omega_c=omega_c, nonlinear_coeff=nonlinear,
                     drive_coeff=drive_coeff,
                     drive_amplitude=abs(drive.amplitude),
                     drive_omega=drive.omega,
                     drive_phase0=drive.phase0)


def specific_energy(eom: EomParams, phi: "float | np.ndarray",
                    phi_dot: "float | np.ndarray") -> "float | np.ndarray":
    """Conserved energy of the undriven system (per effective mass, s^-2)."""
    out = (0.5 * np.asarray(phi_dot) ** 2
           + 0.5 * eom.omega_c ** 2 * np.asarray(phi) ** 2
           + eom.nonlinear_coeff * (1.0 - np.cos(phi)))
    return out if np.ndim(phi) or np.ndim(phi_dot) else float(out)


def _envelope_scalar(env: DriveEnvelope, ramp: float):
    """Python-scalar envelope evaluator (the RHS hot path)."""
    t_on, t_off = env.t_on, env.t_off
    if ramp <= 0.0:
        def value(t: float) -> float:
            if t < t_on or (t_off is not None and t >= t_off):
                return 0.0
            return 1.0
        return value

    def value(t: float) -> float:
        if t <= t_on or (t_off is not None and t >= t_off):
            return 0.0
        out = 1.0
        if t < t_on + ramp:
            out = 0.5 * (1.0 - math.cos(math.pi * (t - t_on) / ramp))
        if t_off is not None and t > t_off - ramp:
            out *= 0.5 * (1.0 + math.cos(math.pi * (t - (t_off - ramp)) / ramp))
        return out
    return value


def _rhs_factory(eom: EomParams, envelope: DriveEnvelope | None, ramp: float):
    wc2 = eom.omega_c ** 2
    nl = eom.nonlinear_coeff
    force = eom.drive_coeff * eom.drive_amplitude
    w = eom.drive_omega
    ph0 = eom.drive_phase0
    if force == 0.0:
        def rhs(t: float, y):
            return [y[1], -wc2 * y[0] - nl * math.sin(y[0])]
        return rhs
    if envelope is None:
        def rhs(t: float, y):
            return [y[1], -wc2 * y[0] - nl * math.sin(y[0])
                    - force * math.cos(w * t + ph0)]
        return rhs
    env_value = _envelope_scalar(envelope, ramp)

    def rhs(t: float, y):
        return [y[1], -wc2 * y[0] - nl * math.sin(y[0])
                - force * env_value(t) * math.cos(w * t + ph0)]
    return rhs


def _rk4_fixed(rhs, t_grid: np.ndarray, y0: np.ndarray, step: float) -> np.ndarray:
    """Classic RK4 marched between output samples with equal substeps."""
    out = np.empty((2, len(t_grid)))
    y = np.array(y0, dtype=float)
    out[:, 0] = y
    for i in range(len(t_grid) - 1):
        t0, t1 = t_grid[i], t_grid[i + 1]
        n_sub = max(1, int(math.ceil(abs(t1 - t0) / step)))
        h = (t1 - t0) / n_sub
        t = t0
        for _ in range(n_sub):
            k1 = np.asarray(rhs(t, y))
            k2 = np.asarray(rhs(t + 0.5 * h, y + 0.5 * h * k1))
            k3 = np.asarray(rhs(t + 0.5 * h, y + 0.5 * h * k2))
            k4 = np.asarray(rhs(t + h, y + h * k3))
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t += h
        out[:, i + 1] = y
    return out


def integrate_trajectory(eom: EomParams, phi0: float, phidot0: float,
                         t_span: tuple[float, float],
                         step_control: StepControl = StepControl(), *,
                         envelope: DriveEnvelope | None = None,
                         n_samples: int = 1001) -> Trajectory:
    """Integrate the equation of motion over ``t_span``.

    Output is sampled on ``n_samples`` uniformly spaced times (dense output
    between adaptive steps).  A decreasing ``t_span`` integrates backwards,
    which is how the time-reversal checks are run.  Integrator failures
    (step-size underflow from stiffness, non-finite state) raise
    :class:`IntegrationError`.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    _require(t0 != t1, "integrate_trajectory t_span must be non-degenerate")
    _require(n_samples >= 2, "integrate_trajectory needs n_samples >= 2")
    drive_period = (2.0 * math.pi / eom.drive_omega) if eom.drive_omega > 0.0 else 0.0
    ramp = envelope.resolve_ramp(drive_period) if envelope is not None else 0.0
    rhs = _rhs_factory(eom, envelope, ramp)
    t_grid = np.linspace(t0, t1, n_samples)

    meta = {
        "eom": eom.to_dict(),
        "phi0": phi0,
        "phidot0": phidot0,
        "method": step_control.method,
        "rel_tol": step_control.rel_tol,
        "abs_tol": step_control.abs_tol,
        "envelope": None if envelope is None else {
            "t_on": envelope.t_on, "t_off": envelope.t_off, "ramp": ramp},
    }

    if step_control.method == "rk4":
        try:
            y = _rk4_fixed(rhs, t_grid, np.array([phi0, phidot0]),
                           step_control.fixed_step)
        except (ValueError, OverflowError, FloatingPointError) as exc:
            raise IntegrationError(f"rk4 aborted: {exc}") from exc
        if not np.all(np.isfinite(y)):
            raise IntegrationError("rk4 produced non-finite state (reduce fixed_step)")
        return _as_trajectory(t_grid, y, meta)

    # Rate scale for the absolute tolerance on the phi_dot component.
    omega_scale = max(eom.small_oscillation_frequency, eom.drive_omega,
                      1.0 / abs(t1 - t0))
    atol = [step_control.abs_tol, step_control.abs_tol * omega_scale]
    method = "DOP853" if step_control.method == "dop853" else "RK45"
    try:
        sol = solve_ivp(rhs, (t0, t1), [float(phi0), float(phidot0)], method=method,
                        rtol=step_control.rel_tol, atol=atol, t_eval=t_grid,
                        max_step=step_control.max_step, dense_output=False)
    except (ValueError, OverflowError, FloatingPointError) as exc:
        # Overflowing states feed non-finite values into the RHS; surface
        # every such failure as an integration abort, not a usage error.
        raise IntegrationError(f"integration aborted: {exc}") from exc
    if not sol.success:
        raise IntegrationError(f"integration aborted: {sol.message}")
    if not np.all(np.isfinite(sol.y)):
        raise IntegrationError("integration produced non-finite state (NaN guard)")
    return _as_trajectory(sol.t, sol.y, meta)


def _as_trajectory(t_grid: np.ndarray, y: np.ndarray, meta: dict) -> Trajectory:
    if t_grid[0] > t_grid[-1]:  # backward run: store in increasing time order
        t_grid = t_grid[::-1]
        y = y[:, ::-1]
    return Trajectory(times=t_grid, delta_phi=y[0], delta_phi_dot=y[1], meta=meta)


@dataclass(frozen=True)
class PotentialLandscape:
    """Sampled anharmonic potential with refined minima and barriers.

    ``minima`` holds (phi*, U(phi*)) sorted by phi*; ``barrier_heights[i]``
    is the energy from the shallower of minima i, i+1 up to the intervening
    local maximum.
    """

    phi_grid: np.ndarray                       # rad
    u_values: np.ndarray                       # J
    minima: tuple[tuple[float, float], ...]    # (phi*, U(phi*))
    barrier_heights: tuple[float, ...]         # J

    def __post_init__(self) -> None:
        object.__setattr__(self, "phi_grid", _readonly(self.phi_grid))
        object.__setattr__(self, "u_values", _readonly(self.u_values))
        object.__setattr__(self, "minima", tuple((float(p), float(u)) for p, u in self.minima))
        object.__setattr__(self, "barrier_heights", tuple(float(b) for b in self.barrier_heights))
        _require(len(self.phi_grid) == len(self.u_values),
                 "PotentialLandscape grid and values must have equal length")
        _require(bool(np.all(np.diff(self.phi_grid) > 0.0)),
                 "PotentialLandscape.phi_grid must be strictly increasing")
        _require(all(self.minima[i][0] < self.minima[i + 1][0]
                     for i in range(len(self.minima) - 1)),
                 "PotentialLandscape.minima must be sorted by phi")
        _require(len(self.barrier_heights) == max(0, len(self.minima) - 1),
                 "PotentialLandscape needs one barrier per adjacent minima pair")

    def to_dict(self) -> dict:
        return {
            "phi_grid": self.phi_grid.tolist(),
            "u_values": self.u_values.tolist(),
            "minima": [[p, u] for p, u in self.minima],
            "barrier_heights": list(self.barrier_heights),
        }


def _potential_factory(params: CircuitParams):
    quad = (HBAR / (2.0 * E_CHARGE)) ** 2 / (2.0 * params.inductance)  # J per rad^2
    ej = params.e_josephson

    def u(phi):
        return quad * np.asarray(phi) ** 2 - ej * np.cos(phi)

    def du(phi):
        return 2.0 * quad * np.asarray(phi) + ej * np.sin(phi)

    def d2u(phi):
        return 2.0 * quad + ej * np.cos(phi)

    return u, du, d2u


def potential_landscape(params: CircuitParams, phi_range: tuple[float, float],
                        n_points: int) -> PotentialLandscape:
    """Map U(phi) = (hbar/2e)^2 phi^2/(2L) - E_J cos(phi) over ``phi_range``.

    Grid minima are refined by root-finding on dU/dphi; the local maximum
    between each adjacent pair of refined minima defines the barrier.
    """
    lo, hi = float(phi_range[0]), float(phi_range[1])
    _require(lo < hi, "potential_landscape phi_range must be increasing")
    _require(n_points >= 3, "potential_landscape needs n_points >= 3")
    u, du, _ = _potential_factory(params)
    grid = np.linspace(lo, hi, int(n_points))
    values = u(grid)

    minima: list[tuple[float, float]] = []
    interior = np.where((values[1:-1] < values[:-2]) & (values[1:-1] <= values[2:]))[0] + 1
    for idx in interior:
        a, b = grid[idx - 1], grid[idx + 1]
        if du(a) < 0.0 < du(b):
            phi_star = brentq(du, a, b, xtol=1e-14, rtol=8.9e-16)
        else:
            phi_star = float(grid[idx])  # flat-to-grid resolution; keep grid point
        minima.append((float(phi_star), float(u(phi_star))))
    minima.sort()

    barriers: list[float] = []
    for (p_left, u_left), (p_right, u_right) in zip(minima, minima[1:]):
        sel = (grid > p_left) & (grid < p_right)
        candidates = grid[sel]
        idx = int(np.argmax(u(candidates))) if len(candidates) else 0
        a = candidates[idx - 1] if idx > 0 else p_left
        b = candidates[idx + 1] if len(candidates) and idx < len(candidates) - 1 else p_right
        if du(a) > 0.0 > du(b):
            top = brentq(du, a, b, xtol=1e-14, rtol=8.9e-16)
        else:
            top = float(candidates[idx]) if len(candidates) else 0.5 * (p_left + p_right)
        barriers.append(float(u(top)) - max(u_left, u_right))

    return PotentialLandscape(phi_grid=grid, u_values=values,
                              minima=tuple(minima), barrier_heights=tuple(barriers))


def flux_quantum_count(delta_phi: "float | np.ndarray") -> "int | np.ndarray":
    """Trapped flux quanta: nearest integer to delta_phi / 2*pi.

    Zero for |delta_phi| < pi; exact half-integer multiples of 2*pi resolve
    by round-to-even.
    """
    counts = np.rint(np.asarray(delta_phi, dtype=float) / (2.0 * math.pi)).astype(int)
    return counts if np.ndim(delta_phi) else int(counts)


def harmonic_level_spacing(landscape: PotentialLandscape, params: CircuitParams,
                           which_minimum: int) -> float:
    """Harmonic estimate hbar*sqrt(U''(phi*)/m_eff) of the level spacing in
    the selected well, with m_eff = (hbar/2e)^2 * C_sigma.

    This is an estimate only: it ignores anharmonic corrections and any
    tunneling between wells.
    """
    _require(0 <= which_minimum < len(landscape.minima),
             f"harmonic_level_spacing which_minimum out of range "
             f"[0, {len(landscape.minima)})")
    phi_star = landscape.minima[which_minimum][0]
    _, _, d2u = _potential_factory(params)
    curvature = float(d2u(phi_star))
    if curvature <= 0.0:
        raise ValueError(
            f"harmonic_level_spacing: U''({phi_star:g}) = {curvature:.3g} <= 0; "
            "the selected point is not a potential minimum for these parameters")
    m_eff = (HBAR / (2.0 * E_CHARGE)) ** 2 * params.c_sigma
    return HBAR * math.sqrt(curvature / m_eff)
