"""Construction of parametric coupling kernels K(x, x') on a quadrature axis.

Four families are provided:

* modulated Gaussians K+(x+x') K-(x-x') with cosine modulations,
* temporal phase-matching kernels alpha_p(w+w') D(w, w'),
* one-dimensional cuts of the spatial (diffraction) kernel,
* a convenience constructor for a synchronously pumped OPO.

Every constructor returns a :class:`KernelMatrix` whose values are exactly
symmetric.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import pumps
from .numerics import Axis, InvalidArgument, as_symmetric, make_uniform_axis, sinc, sine_integral

VALIDITY_MARGIN = 10.0


def _terms(terms) -> tuple[tuple[float, float], ...]:
    out = tuple((float(b), float(beta)) for b, beta in terms)
    if not out:
        raise InvalidArgument("each modulation list needs at least one term")
    betas = [beta for _, beta in out]
    if betas[0] != 0.0:
        raise InvalidArgument("first modulation term must have beta = 0")
    if any(b2 <= b1 for b1, b2 in zip(betas, betas[1:])):
        raise InvalidArgument("modulation frequencies must be distinct and ascending")
    return out


@dataclass(frozen=True)
class ModulatedKernelSpec:
    """Parameters of K(x,x') = K+(x+x') K-(x-x').

    ``K±(u) = exp(-sigma±^2 u^2 / 2) * sum_n b_n cos(beta_n u)``; each term
    list is ``((b_0, 0.0), (b_1, beta_1), ...)``.
    """

    sigma_plus: float
    sigma_minus: float
    plus_terms: tuple[tuple[float, float], ...] = ((1.0, 0.0),)
    minus_terms: tuple[tuple[float, float], ...] = ((1.0, 0.0),)

    def __post_init__(self):
        if not (self.sigma_plus > 0 and self.sigma_minus > 0):
            raise InvalidArgument("Gaussian widths must be positive")
        object.__setattr__(self, "plus_terms", _terms(self.plus_terms))
        object.__setattr__(self, "minus_terms", _terms(self.minus_terms))

    @classmethod
    def symmetric(cls, sigma, plus_terms=((1.0, 0.0),), minus_terms=((1.0, 0.0),)):
        return cls(sigma, sigma, plus_terms, minus_terms)

    @property
    def tau(self) -> float:
        """Width parameter sqrt(sigma+ sigma-) of the eigenfunction envelope."""
        return float(np.sqrt(self.sigma_plus * self.sigma_minus))

    def is_valid(self, margin: float = VALIDITY_MARGIN) -> bool:
        """Whether the modulations are well separated on the envelope scale.

        Every nonzero modulation frequency, and every difference between two
        frequencies of the same list, must satisfy beta^2 >= margin * 8 tau^2.
        The combined frequencies |beta+_i +- beta-_j| of two different
        eigenfunction labels must be separated by the same amount, otherwise
        the two products of cosines share a Fourier component and mix.
        Advisory only: the analytic spectrum is approximate otherwise.
        """
        bound = margin * 8.0 * self.tau**2
        for terms in (self.plus_terms, self.minus_terms):
            betas = [beta for _, beta in terms]
            gaps = betas[1:] + [b2 - b1 for i, b1 in enumerate(betas) for b2 in betas[i + 1:] if b1 > 0]
            if any(g * g < bound for g in gaps):
                return False
        combined = [
            {abs(bp + bm), abs(bp - bm)} for _, bp in self.plus_terms for _, bm in self.minus_terms
        ]
        for i, fi in enumerate(combined):
            for fj in combined[i + 1:]:
                if any((f - g) ** 2 < bound for f in fi for g in fj):
                    return False
        return True

    def to_dict(self) -> dict:
        return {
            "sigma_plus": self.sigma_plus,
            "sigma_minus": self.sigma_minus,
            "plus_terms": [list(t) for t in self.plus_terms],
            "minus_terms": [list(t) for t in self.minus_terms],
        }


@dataclass(frozen=True)
class TemporalCrystal:
    """Crystal response along w+w'.

    ``tau1`` is the group-delay mismatch scale; the phase mismatch is
    Phi = tau1 s + phi_quadratic s^2 with s = w + w'. Several identical
    crystals are described either by midplane offsets (units of the crystal
    length, arranged symmetrically about 0) or by distances between the
    midplanes of symmetric couples.
    """

    tau1: float = 1.0
    phi_quadratic: float = 0.0
    crystal_offsets: tuple[float, ...] = ()
    symmetric_pair_distances: tuple[float, ...] = ()
    include_center: bool = False

    def __post_init__(self):
        if not self.tau1 > 0:
            raise InvalidArgument("tau1 must be positive")
        offsets = tuple(float(z) for z in self.crystal_offsets)
        dists = tuple(float(d) for d in self.symmetric_pair_distances)
        if offsets and dists:
            raise InvalidArgument("give either crystal_offsets or symmetric_pair_distances, not both")
        if not all(np.isfinite(offsets + dists)):
            raise InvalidArgument("crystal positions must be finite")
        if offsets and not np.allclose(sorted(offsets), sorted(-z for z in offsets), atol=1e-12):
            # an asymmetric stack gives a complex phase-matching function
            raise InvalidArgument("crystal offsets must be symmetric about z = 0 for a real kernel")
        object.__setattr__(self, "crystal_offsets", offsets)
        object.__setattr__(self, "symmetric_pair_distances", dists)

    def mismatch(self, s):
        return self.tau1 * s + self.phi_quadratic * s**2

    def phase_matching(self, s):
        """D as a function of s = w + w'."""
        phi = self.mismatch(np.asarray(s, dtype=float))
        if self.crystal_offsets:
            factor = sum(np.cos(2.0 * z * phi) for z in self.crystal_offsets)
        elif self.symmetric_pair_distances:
            factor = 2.0 * sum(np.cos(d * phi) for d in self.symmetric_pair_distances)
            if self.include_center:
                factor = factor + 1.0
        else:
            factor = 1.0
        return factor * sinc(phi)


@dataclass(frozen=True)
class SpatialCrystal:
    coherence_length: float = 1.0

    def __post_init__(self):
        if not self.coherence_length > 0:
            raise InvalidArgument("coherence length must be positive")

    def diffraction(self, r):
        """Delta(r) = [pi/2 - Si(|r / l_coh|^2)] / (pi l_coh^2)."""
        lc = self.coherence_length
        return (0.5 * np.pi - sine_integral((np.asarray(r, dtype=float) / lc) ** 2)) / (np.pi * lc**2)


@dataclass(frozen=True)
class KernelMatrix:
    axis: Axis
    values: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = as_symmetric(self.values)
        if vals.shape != (len(self.axis), len(self.axis)):
            raise InvalidArgument("kernel shape does not match its axis")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def to_csv(self, fmt: str = "%.10e") -> str:
        """Row-major CSV; the header row and first column carry the axis."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        pts = self.axis.points
        writer.writerow([self.axis.label] + [fmt % x for x in pts])
        for x, row in zip(pts, self.values):
            writer.writerow([fmt % x] + [fmt % v for v in row])
        return buf.getvalue()


def _grids(axis: Axis):
    x = axis.points
    return x[:, None], x[None, :]


def modulation(terms, sigma, u):
    """exp(-sigma^2 u^2 / 2) * sum b cos(beta u)."""
    u = np.asarray(u, dtype=float)
    return np.exp(-0.5 * sigma**2 * u**2) * sum(b * np.cos(beta * u) for b, beta in terms)


def build_modulated(spec: ModulatedKernelSpec, axis: Axis) -> KernelMatrix:
    """Sample the modulated-Gaussian kernel on ``axis``."""
    required = 4.0 / min(spec.sigma_plus, spec.sigma_minus)
    lo, hi = axis.span
    if lo > -required or hi < required:
        raise InvalidArgument(f"axis must span at least +/-{required:g}, got [{lo:g}, {hi:g}]")
    x, xp = _grids(axis)
    values = modulation(spec.plus_terms, spec.sigma_plus, x + xp) * modulation(
        spec.minus_terms, spec.sigma_minus, x - xp
    )
    return KernelMatrix(axis, values, {"kind": "modulated", "spec": spec.to_dict()})


def build_temporal(crystal: TemporalCrystal, pump: pumps.PumpSpectrum, axis: Axis) -> KernelMatrix:
    """K(w, w') = alpha_p(w + w') D(w, w'). Frequencies in units of 1/time of ``crystal``."""
    x, xp = _grids(axis)
    s = x + xp
    values = pumps.eval_spectrum(pump, s) * crystal.phase_matching(s)
    values = np.broadcast_to(values, (len(axis), len(axis)))
    return KernelMatrix(
        axis,
        values,
        {
            "kind": "temporal",
            "tau1": crystal.tau1,
            "phi_quadratic": crystal.phi_quadratic,
            "crystal_offsets": list(crystal.crystal_offsets),
            "symmetric_pair_distances": list(crystal.symmetric_pair_distances),
            "pump": pumps.to_dict(pump),
        },
    )


def build_spatial_cut(
    crystal: SpatialCrystal, pump_profile: Callable[[np.ndarray], np.ndarray], axis: Axis
) -> KernelMatrix:
    """1-d transverse cut K(x,x') = alpha_p((x+x')/2) Delta(x - x')."""
    x, xp = _grids(axis)
    values = np.asarray(pump_profile(0.5 * (x + xp)), dtype=float) * crystal.diffraction(x - xp)
    values = np.broadcast_to(values, (len(axis), len(axis)))
    return KernelMatrix(axis, values, {"kind": "spatial", "coherence_length": crystal.coherence_length})


def spopo_axis(pump: pumps.PumpSpectrum, n_points: int, tau1: float = 1.0) -> Axis:
    """Frequency axis covering the crystal acceptance and the pump support."""
    extent = 6.0 / tau1
    width = pumps.spectral_width(pump)
    if np.isfinite(width):
        extent = max(extent, 6.0 * width)
    return make_uniform_axis(extent, n_points, "omega*tau1")


def realistic_spopo_kernel(
    pump: pumps.PumpSpectrum, tau1: float = 20.0, n_points: int = 1024, phi_quadratic: float = 0.0
) -> KernelMatrix:
    """Kernel of a synchronously pumped OPO with a single thin crystal.

    ``tau1`` and the pump's time scales share one unit (fs by default, with
    tau1 = 20 fs). The kernel is built in units where
    tau1 = 1, so the axis is the dimensionless frequency omega*tau1.
    """
    if not tau1 > 0:
        raise InvalidArgument("tau1 must be positive")
    scaled = pumps.rescale_time(pump, 1.0 / tau1)
    axis = spopo_axis(scaled, n_points)
    kernel = build_temporal(TemporalCrystal(1.0, phi_quadratic), scaled, axis)
    prov = dict(kernel.provenance, kind="spopo", tau1_physical=tau1, pump_physical=pumps.to_dict(pump))
    return KernelMatrix(kernel.axis, kernel.values, prov)


def gaussian_sigma_plus(tau1: float, tau_p: float, calibrated: bool = True) -> float:
    """Width along w+w' of the Gaussian approximation of pump times sinc.

    The uncalibrated rule adds squared durations. The calibrated one matches
    the curvature of sinc at the origin, sinc(x) ~ exp(-x^2/6).
    """
    crystal = tau1**2 / 3.0 if calibrated else tau1**2
    return float(np.sqrt(crystal + tau_p**2))


def superpose(kernels: Sequence[KernelMatrix]) -> KernelMatrix:
    if not kernels:
        raise InvalidArgument("nothing to superpose")
    axis = kernels[0].axis
    return KernelMatrix(axis, sum(k.values for k in kernels), {"kind": "superposition"})
