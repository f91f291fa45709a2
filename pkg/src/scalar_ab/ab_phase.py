"""Scalar Aharonov-Bohm phase accumulation by numerical quadrature.

The phase picked up by a charge q in a spatially uniform potential V(t) is
(q/hbar) * integral V dt; the gravitational analogue integrates m(t)*Phi(t).
Quadrature is composite trapezoid on the supplied output grid, with each
interval subdivided until a Richardson error estimate meets the requested
relative tolerance (sampled inputs are piecewise linear, so trapezoid on
their breakpoints is already exact for the declared interpolant).

All functions are pure and re-entrant; inputs and outputs are immutable.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Sequence

import numpy as np

from .core import E_CHARGE, HBAR, DriveWaveform, _readonly, _require

__all__ = [
    "PhaseHistory",
    "Species",
    "SpeciesCount",
    "accumulate_electric_phase",
    "accumulate_grav_phase",
    "net_bulk_phase",
    "write_phase_csv",
]

DEFAULT_QUADRATURE_REL_TOL = 1e-9
_MAX_REFINE = 4096


@dataclass(frozen=True)
class PhaseHistory:
    """Accumulated phase phi(t) on a time grid, with phi at the first grid
    point defined to be exactly zero (integral from the start of the grid)."""

    times: np.ndarray  # s
    phase: np.ndarray  # rad

    def __post_init__(self) -> None:
        object.__setattr__(self, "times", _readonly(self.times))
        object.__setattr__(self, "phase", _readonly(self.phase))
        _require(len(self.times) == len(self.phase),
                 "PhaseHistory.times and phase must have equal length")
        _require(len(self.times) >= 1, "PhaseHistory must contain at least one point")
        _require(bool(np.all(np.diff(self.times) > 0.0)),
                 "PhaseHistory.times must be strictly increasing")
        _require(self.phase[0] == 0.0, "PhaseHistory.phase[0] must be exactly 0")

    def to_dict(self) -> dict:
        return {"times": self.times.tolist(), "phase": self.phase.tolist()}

    @classmethod
    def from_dict(cls, data: Mapping) -> "PhaseHistory":
        return cls(times=np.asarray(data["times"], dtype=float),
                   phase=np.asarray(data["phase"], dtype=float))


class Species(str, Enum):
    COOPER_PAIR = "cooper_pair"
    ELECTRON = "electron"
    ION = "ion"


# Sign conventions for the per-unit charge entering the bulk phase sums.
# The ion entry is a bookkeeping convention (-e per ion), not a physical
# ion charge; it makes a charge-neutral bulk accumulate zero net phase.
_SPECIES_CHARGE = {
    Species.COOPER_PAIR: +2.0 * E_CHARGE,
    Species.ELECTRON: +1.0 * E_CHARGE,
    Species.ION: -1.0 * E_CHARGE,
}


@dataclass(frozen=True)
class SpeciesCount:
    """Time-dependent population N(t) of one charge-carrying species."""

    species: Species
    counts: tuple[tuple[float, float], ...]  # (t [s], N) pairs
    charge_per_unit: float = 0.0             # C; 0 -> derived from species

    def __post_init__(self) -> None:
        species = Species(self.species)
        object.__setattr__(self, "species", species)
        if self.charge_per_unit == 0.0:
            object.__setattr__(self, "charge_per_unit", _SPECIES_CHARGE[species])
        counts = tuple((float(t), float(n)) for t, n in self.counts)
        object.__setattr__(self, "counts", counts)
        ts = np.array([t for t, _ in counts])
        ns = np.array([n for _, n in counts])
        _require(len(counts) >= 1, "SpeciesCount.counts must be non-empty")
        _require(bool(np.all(np.diff(ts) > 0.0)),
                 "SpeciesCount.counts timestamps must be strictly increasing")
        _require(bool(np.all(ns >= 0.0)), "SpeciesCount.counts must be non-negative")

    @classmethod
    def constant(cls, species: Species, n: float,
                 t_span: tuple[float, float]) -> "SpeciesCount":
        return cls(species=species, counts=((t_span[0], n), (t_span[1], n)))


def _validate_grid(t_grid: Sequence[float]) -> np.ndarray:
    grid = np.asarray(t_grid, dtype=float)
    _require(grid.ndim == 1 and len(grid) >= 2, "t_grid must contain >= 2 points")
    if not np.all(np.diff(grid) > 0.0):
        raise ValueError("t_grid must be strictly increasing (non-monotonic grid rejected)")
    return grid


def _history_interpolator(history: Sequence[tuple[float, float]],
                          t_grid: np.ndarray, what: str) -> Callable[[np.ndarray], np.ndarray]:
    ts = np.asarray([p[0] for p in history], dtype=float)
    vs = np.asarray([p[1] for p in history], dtype=float)
    _require(len(ts) >= 1, f"{what} history must be non-empty")
    _require(bool(np.all(np.diff(ts) > 0.0)),
             f"{what} history timestamps must be strictly increasing")
    if ts[0] > t_grid[0] or ts[-1] < t_grid[-1]:
        raise ValueError(
            f"{what} history covers [{ts[0]:g}, {ts[-1]:g}] s but the requested grid "
            f"spans [{t_grid[0]:g}, {t_grid[-1]:g}] s (coverage gap rejected)")
    return lambda t: np.interp(t, ts, vs)


def _refined_nodes(grid: np.ndarray, level: int) -> np.ndarray:
    """Each grid interval split into 2**level equal pieces, endpoints shared."""
    m = 2 ** level
    if m == 1:
        return grid
    frac = np.arange(m) / m
    inner = grid[:-1, None] + np.diff(grid)[:, None] * frac[None, :]
    return np.concatenate([inner.ravel(), grid[-1:]])


def _cumtrapz(values: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    out = np.empty(len(nodes))
    out[0] = 0.0
    np.cumsum(0.5 * (values[1:] + values[:-1]) * np.diff(nodes), out=out[1:])
    return out


def cumulative_trapezoid_phase(integrand: Callable[[np.ndarray], np.ndarray],
                               t_grid: np.ndarray,
                               rel_tol: float | None) -> np.ndarray:
    """Cumulative trapezoid of ``integrand`` on ``t_grid``.

    With ``rel_tol`` set, each interval is subdivided (doubling) until the
    Richardson estimate |phi_fine - phi_coarse| meets the tolerance relative
    to the phase scale.  ``rel_tol=None`` integrates on the supplied grid
    as-is.
    """
    level = _refinement_level(integrand, t_grid, rel_tol)
    nodes = _refined_nodes(t_grid, level)
    phase = _cumtrapz(integrand(nodes), nodes)
    return phase[:: 2 ** level].copy() if level else phase


def _refinement_level(integrand: Callable[[np.ndarray], np.ndarray],
                      t_grid: np.ndarray, rel_tol: float | None,
                      magnitude: Callable[[np.ndarray], np.ndarray] | None = None,
                      ) -> int:
    """Pick the subdivision level meeting ``rel_tol`` by Richardson estimate.

    ``magnitude`` gives the intrinsic pointwise scale of the integrand (its
    absolute value by default); when the signed integrand cancels to rounding
    noise, the convergence target is floored at eps times the integral of
    that magnitude instead of chasing an unreachable relative error.
    """
    if rel_tol is None:
        return 0
    _require(rel_tol > 0.0, "quadrature rel_tol must be positive")
    if magnitude is None:
        magnitude = lambda t: np.abs(integrand(t))
    level = 0
    coarse = _cumtrapz(integrand(t_grid), t_grid)
    while True:
        fine_nodes = _refined_nodes(t_grid, level + 1)
        fine = _cumtrapz(integrand(fine_nodes), fine_nodes)[:: 2 ** (level + 1)]
        scale = float(np.max(np.abs(fine)))
        noise_floor = (8.0 * np.finfo(float).eps
                       * float(_cumtrapz(magnitude(fine_nodes), fine_nodes)[-1]))
        err = float(np.max(np.abs(fine - coarse)))
        if err <= max(rel_tol * scale, noise_floor):
            return level + 1  # keep the finer result; its error is ~err/4
        level += 1
        if 2 ** level > _MAX_REFINE:
            raise ValueError(
                f"quadrature failed to reach rel_tol={rel_tol:g} after "
                f"{_MAX_REFINE}x subdivision (estimated error {err:.3g}, scale "
                f"{scale:.3g}); supply a denser grid")
        coarse = fine


def accumulate_electric_phase(charge: float, voltage: DriveWaveform,
                              t_grid: Sequence[float],
                              rel_tol: float | None = DEFAULT_QUADRATURE_REL_TOL,
                              ) -> PhaseHistory:
    """Phase (charge/hbar) * integral of V(t) from the start of the grid.

    For a zero-mean sinusoidal drive V0*cos(omega*t) starting at t=0 the
    result is alpha*sin(omega*t) with FM modulation depth
    alpha = charge*V0/(hbar*omega).
    """
    grid = _validate_grid(t_grid)
    if charge == 0.0:
        return PhaseHistory(times=grid, phase=np.zeros_like(grid))
    phase = cumulative_trapezoid_phase(voltage.value, grid, rel_tol)
    return PhaseHistory(times=grid, phase=(charge / HBAR) * phase)


def accumulate_grav_phase(mass_history: Sequence[tuple[float, float]],
                          potential_history: Sequence[tuple[float, float]],
                          t_grid: Sequence[float],
                          rel_tol: float | None = DEFAULT_QUADRATURE_REL_TOL,
                          ) -> PhaseHistory:
    """Phase (1/hbar) * integral of m(t)*Phi(t) dt over the grid.

    Both histories are linearly interpolated and must cover the grid span.
    """
    grid = _validate_grid(t_grid)
    mass = _history_interpolator(mass_history, grid, "mass")
    _require(bool(np.all(np.asarray([p[1] for p in mass_history]) >= 0.0)),
             "mass history values must be non-negative")
    pot = _history_interpolator(potential_history, grid, "potential")
    phase = cumulative_trapezoid_phase(lambda t: mass(t) * pot(t), grid, rel_tol)
    return PhaseHistory(times=grid, phase=phase / HBAR)


def net_bulk_phase(species: Sequence[SpeciesCount], voltage: DriveWaveform,
                   t_grid: Sequence[float],
                   rel_tol: float | None = DEFAULT_QUADRATURE_REL_TOL,
                   ) -> PhaseHistory:
    """Signed sum of per-species phases (q_s/hbar) * integral N_s(t) V(t) dt.

    Per-unit charges follow the bulk sign convention (+2e Cooper pair,
    +e electron, -e ion), so a charge-neutral bulk accumulates zero net
    phase.  All species share one refined quadrature grid, which keeps the
    sum exactly linear in the per-species integrands.
    """
    _require(len(species) >= 1, "net_bulk_phase needs at least one species")
    grid = _validate_grid(t_grid)
    interps = [_history_interpolator(s.counts, grid, f"{s.species.value} counts")
               for s in species]

    def total_integrand(t: np.ndarray) -> np.ndarray:
        v = voltage.value(t)
        out = np.zeros_like(np.asarray(t, dtype=float))
        for s, n_of_t in zip(species, interps):
            out = out + s.charge_per_unit * n_of_t(t) * v
        return out

    def species_magnitude(t: np.ndarray) -> np.ndarray:
        # Intrinsic scale before any charge cancellation between species.
        v = np.abs(voltage.value(t))
        out = np.zeros_like(np.asarray(t, dtype=float))
        for s, n_of_t in zip(species, interps):
            out = out + abs(s.charge_per_unit) * n_of_t(t) * v
        return out

    level = _refinement_level(total_integrand, grid, rel_tol, species_magnitude)
    nodes = _refined_nodes(grid, level)
    v = voltage.value(nodes)
    stride = 2 ** level
    total = np.zeros(len(grid))
    for s, n_of_t in zip(species, interps):
        phase_s = _cumtrapz(s.charge_per_unit * n_of_t(nodes) * v, nodes)[::stride]
        total = total + phase_s
    return PhaseHistory(times=grid, phase=total / HBAR)


def write_phase_csv(history: PhaseHistory, path: str) -> None:
    """CSV export: header row, columns t_seconds, phase_rad, 17 digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_seconds", "phase_rad"])
        for t, p in zip(history.times, history.phase):
            writer.writerow([f"{t:.17g}", f"{p:.17g}"])
