"""Below-threshold OPO noise spectra, one independent single-mode OPO per supermode.

Each supermode obeys dS/dt = -gamma S + sqrt(2 gamma) S_in + gamma g Lambda S^dag.
With X = S + S^dag this gives dX/dt = -gamma (1 - g Lambda) X, so a positive
eigenvalue amplifies X and squeezes P. The pump is given as a fraction of the
threshold value g_th = 1/|Lambda_1|; shot noise is 1 and escape efficiency is
ideal.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .numerics import InvalidArgument
from .supermodes import SupermodeSet


class AboveThreshold(ValueError):
    """The requested pump is at or above the oscillation threshold."""


def _eigenvalues(s) -> np.ndarray:
    vals = s.eigenvalues if isinstance(s, SupermodeSet) else np.asarray(s, dtype=float)
    if vals.size == 0:
        raise InvalidArgument("empty supermode set")
    return vals


def threshold_pump(s) -> float:
    """Pump parameter at which the leading supermode reaches threshold, 1/|Lambda_1|."""
    return float(1.0 / np.max(np.abs(_eigenvalues(s))))


def squeezed_noise(r, omega_over_gamma=0.0):
    """Noise of the squeezed quadrature, 1 - 4r / ((1+r)^2 + (Omega/gamma)^2)."""
    r = np.asarray(r, dtype=float)
    return 1.0 - 4.0 * r / ((1.0 + r) ** 2 + np.asarray(omega_over_gamma) ** 2)


def antisqueezed_noise(r, omega_over_gamma=0.0):
    """Noise of the amplified quadrature, 1 + 4r / ((1-r)^2 + (Omega/gamma)^2)."""
    r = np.asarray(r, dtype=float)
    return 1.0 + 4.0 * r / ((1.0 - r) ** 2 + np.asarray(omega_over_gamma) ** 2)


def threshold_noise(lambda_n, lambda_1) -> float:
    """Zero-frequency squeezed noise of mode n with the OPO at threshold."""
    a1, an = abs(lambda_1), abs(lambda_n)
    return (a1 - an) ** 2 / (a1 + an) ** 2


def squeezing_db(v) -> float:
    """Noise level expressed as dB below shot noise."""
    if not v > 0:
        raise InvalidArgument("noise level must be positive")
    return float(-10.0 * np.log10(v))


@dataclass(frozen=True)
class ModeSqueezing:
    index: int
    eigenvalue: float
    r: float
    v_minus_0: float
    v_plus_0: float
    direction: float  # angle of the squeezed quadrature; 0 is X, pi/2 is P
    v_minus: tuple[float, ...] = ()
    v_plus: tuple[float, ...] = ()


@dataclass(frozen=True)
class SqueezingReport:
    pump_fraction: float
    omega_grid: tuple[float, ...]
    modes: tuple[ModeSqueezing, ...]

    def to_dict(self) -> dict:
        return {
            "pump_fraction": self.pump_fraction,
            "omega_over_gamma": list(self.omega_grid),
            "modes": [
                {
                    "index": m.index,
                    "eigenvalue": m.eigenvalue,
                    "r": m.r,
                    "v_minus_0": m.v_minus_0,
                    "v_plus_0": m.v_plus_0,
                    "squeezing_db": squeezing_db(m.v_minus_0) if m.v_minus_0 > 0 else None,
                    "direction": m.direction,
                    "v_minus": list(m.v_minus),
                    "v_plus": list(m.v_plus),
                }
                for m in self.modes
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    def to_csv(self, fmt: str = "%.10e") -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["index", "eigenvalue", "r", "v_minus_0", "v_plus_0", "direction"])
        for m in self.modes:
            writer.writerow([m.index] + [fmt % v for v in (m.eigenvalue, m.r, m.v_minus_0, m.v_plus_0, m.direction)])
        return buf.getvalue()


def squeezing_direction(eigenvalue: float) -> float:
    """Squeezed-quadrature angle in [0, pi): pi/2 for Lambda > 0, 0 for Lambda < 0."""
    psi = 0.0 if eigenvalue >= 0 else np.pi
    return float(((np.pi + psi) / 2.0) % np.pi)


def squeezing_report(s, pump_fraction: float, omega_grid=()) -> SqueezingReport:
    """Per-supermode squeezing at ``pump_fraction`` of threshold.

    The effective parameter of mode n is r_n = pump_fraction |Lambda_n| / |Lambda_1|.
    """
    if pump_fraction >= 1.0:
        raise AboveThreshold("pump_fraction must be below 1; above-threshold operation is out of scope")
    if pump_fraction < 0:
        raise InvalidArgument("pump_fraction must be non-negative")
    vals = _eigenvalues(s)
    lead = np.max(np.abs(vals))
    grid = np.asarray(omega_grid, dtype=float)
    modes = []
    for n, lam in enumerate(vals):
        r = pump_fraction * abs(lam) / lead
        modes.append(
            ModeSqueezing(
                index=n,
                eigenvalue=float(lam),
                r=float(r),
                v_minus_0=float(squeezed_noise(r)),
                v_plus_0=float(antisqueezed_noise(r)),
                direction=squeezing_direction(lam),
                v_minus=tuple(float(v) for v in squeezed_noise(r, grid)),
                v_plus=tuple(float(v) for v in antisqueezed_noise(r, grid)),
            )
        )
    return SqueezingReport(float(pump_fraction), tuple(float(w) for w in grid), tuple(modes))
