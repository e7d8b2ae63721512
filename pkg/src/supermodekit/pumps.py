"""Pump spectral amplitudes and pulse-shaper models.

Spectra are dimensionless, even, real shape functions of the frequency
offset; the overall pump power lives in the pump fraction used by
:mod:`supermodekit.opodyn`. Times are in units of the crystal scale tau1
unless a caller rescales with :func:`rescale_time`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import integrate

from .numerics import InvalidArgument, sinc


@dataclass(frozen=True)
class Gaussian:
    """exp(-tau_p^2 omega^2 / 2); ``tau_p = 0`` is a flat spectrum."""

    tau_p: float

    def __post_init__(self):
        if self.tau_p < 0:
            raise InvalidArgument("tau_p must be non-negative")


@dataclass(frozen=True)
class Rectangular:
    """Train of rectangular pulses: sinc(tau_p omega)."""

    tau_p: float

    def __post_init__(self):
        if self.tau_p < 0:
            raise InvalidArgument("tau_p must be non-negative")


@dataclass(frozen=True)
class Shaped:
    """Base spectrum times a harmonic mask sum_n b_n cos(beta_n omega)."""

    base: "PumpSpectrum"
    coeffs: tuple[tuple[float, float], ...]

    def __post_init__(self):
        coeffs = tuple((float(b), float(beta)) for b, beta in self.coeffs)
        if not coeffs or coeffs[0][1] != 0.0:
            raise InvalidArgument("first mask coefficient must have beta = 0")
        betas = [beta for _, beta in coeffs]
        if min(betas) < 0 or len(set(betas)) != len(betas):
            raise InvalidArgument("mask frequencies must be distinct and non-negative")
        object.__setattr__(self, "coeffs", coeffs)


@dataclass(frozen=True)
class DelayComb:
    """Superposition of delayed/advanced copies of a pulse train.

    In the spectral domain this is base(omega) [b0 + sum_n b_n cos(t_n omega)].
    """

    base: "PumpSpectrum"
    b0: float
    terms: tuple[tuple[float, float], ...] = field(default_factory=tuple)

    def __post_init__(self):
        terms = tuple((float(b), float(t)) for b, t in self.terms)
        delays = [t for _, t in terms]
        if any(t <= 0 for t in delays) or len(set(delays)) != len(delays):
            raise InvalidArgument("delays must be distinct and positive")
        object.__setattr__(self, "terms", terms)


PumpSpectrum = Union[Gaussian, Rectangular, Shaped, DelayComb]


def eval_spectrum(p: PumpSpectrum, omega):
    """Evaluate the pump spectral amplitude at ``omega`` (scalar or array)."""
    omega = np.asarray(omega, dtype=float)
    if isinstance(p, Gaussian):
        return np.exp(-0.5 * p.tau_p**2 * omega**2)
    if isinstance(p, Rectangular):
        return sinc(p.tau_p * omega)
    if isinstance(p, Shaped):
        mask = sum(b * np.cos(beta * omega) for b, beta in p.coeffs)
        return eval_spectrum(p.base, omega) * mask
    if isinstance(p, DelayComb):
        mask = p.b0 + sum((b * np.cos(t * omega) for b, t in p.terms), np.zeros_like(omega))
        return eval_spectrum(p.base, omega) * mask
    raise InvalidArgument(f"not a pump spectrum: {p!r}")


def rescale_time(p: PumpSpectrum, factor: float) -> PumpSpectrum:
    """Express every time scale of ``p`` in units ``factor`` times larger.

    ``rescale_time(p, 1/tau1)`` turns a pump given in fs into one given in
    units of tau1.
    """
    if isinstance(p, Gaussian):
        return Gaussian(p.tau_p * factor)
    if isinstance(p, Rectangular):
        return Rectangular(p.tau_p * factor)
    if isinstance(p, Shaped):
        return Shaped(rescale_time(p.base, factor), tuple((b, beta * factor) for b, beta in p.coeffs))
    if isinstance(p, DelayComb):
        return DelayComb(rescale_time(p.base, factor), p.b0, tuple((b, t * factor) for b, t in p.terms))
    raise InvalidArgument(f"not a pump spectrum: {p!r}")


def spectral_width(p: PumpSpectrum) -> float:
    """Inverse of the longest time scale in ``p`` (inf for a flat spectrum)."""
    if isinstance(p, (Gaussian, Rectangular)):
        return np.inf if p.tau_p == 0 else 1.0 / p.tau_p
    return spectral_width(p.base)


@dataclass(frozen=True)
class FourierFit:
    """Cosine-series approximation of a rectangular-pulse spectrum."""

    coeffs: tuple[tuple[float, float], ...]
    rms_error: float
    meets_tolerance: bool
    tolerance: float = 0.01

    def as_pump(self) -> Shaped:
        """The fit as a harmonic mask on a flat base spectrum."""
        return Shaped(Gaussian(0.0), self.coeffs)


def rect_fourier_coeffs(tau_p: float, period_l: float, n_max: int, tolerance: float = 0.01) -> FourierFit:
    """Cosine-series coefficients of sinc(tau_p omega) on [-L/2, L/2].

    The n-th term has frequency beta_n = 2 pi n / L. Since the Fourier
    transform of the sinc is a rectangle, the coefficients are nearly equal
    up to n ~ L tau_p / (2 pi) and drop to ~0 beyond it. The RMS
    reconstruction error over the window is reported, and compared against
    ``tolerance``; a fit missing the tolerance is returned, not raised.
    """
    if tau_p < 0 or not period_l > 0:
        raise InvalidArgument("tau_p must be >= 0 and period_l > 0")
    if int(n_max) != n_max or n_max < 1:
        raise InvalidArgument("n_max must be a positive integer")
    half = 0.5 * period_l
    coeffs = []
    for n in range(int(n_max) + 1):
        beta = 2.0 * np.pi * n / period_l

        def integrand(w, beta=beta):
            return sinc(tau_p * w) * np.cos(beta * w)

        # the integrand is even; integrate the half window
        val, _ = integrate.quad(integrand, 0.0, half, limit=2000, epsabs=1e-13, epsrel=1e-12)
        norm = 2.0 / period_l if n == 0 else 4.0 / period_l
        coeffs.append((norm * val, beta))

    grid = np.linspace(-half, half, 4001)
    recon = sum(b * np.cos(beta * grid) for b, beta in coeffs)
    rms = float(np.sqrt(np.mean((recon - sinc(tau_p * grid)) ** 2)))
    return FourierFit(tuple(coeffs), rms, rms <= tolerance, tolerance)


def to_dict(p: PumpSpectrum) -> dict:
    """Plain-data form of a pump, as used by config files and JSON output."""
    if isinstance(p, Gaussian):
        return {"kind": "gaussian", "tau_p": p.tau_p}
    if isinstance(p, Rectangular):
        return {"kind": "rectangular", "tau_p": p.tau_p}
    if isinstance(p, Shaped):
        return {"kind": "shaped", "base": to_dict(p.base), "coeffs": [list(c) for c in p.coeffs]}
    if isinstance(p, DelayComb):
        return {"kind": "delay_comb", "base": to_dict(p.base), "b0": p.b0, "terms": [list(t) for t in p.terms]}
    raise InvalidArgument(f"not a pump spectrum: {p!r}")


def from_dict(d: dict) -> PumpSpectrum:
    kind = d.get("kind")
    allowed = {
        "gaussian": {"kind", "tau_p"},
        "rectangular": {"kind", "tau_p"},
        "shaped": {"kind", "base", "coeffs"},
        "delay_comb": {"kind", "base", "b0", "terms"},
    }
    if kind not in allowed:
        raise InvalidArgument(f"unknown pump kind {kind!r}")
    extra = set(d) - allowed[kind]
    if extra:
        raise InvalidArgument(f"unknown keys for {kind} pump: {sorted(extra)}")
    if kind == "gaussian":
        return Gaussian(float(d.get("tau_p", 0.0)))
    if kind == "rectangular":
        return Rectangular(float(d["tau_p"]))
    if kind == "shaped":
        return Shaped(from_dict(d["base"]), tuple(tuple(c) for c in d["coeffs"]))
    return DelayComb(from_dict(d["base"]), float(d.get("b0", 0.0)), tuple(tuple(t) for t in d.get("terms", ())))
