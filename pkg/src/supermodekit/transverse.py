"""Discrete transverse-mode OPO tuned to one Laguerre-Gauss family.

Lengths are in units of the signal spot size w_s. A family f holds the
modes with OAM +-l, l = l0, l0+2, ..., f (l0 = f mod 2), radial index
p = (f - l)/2. For a cylindrically symmetric pump the supermodes are the
hybrid modes C_l ~ cos(l phi) and S_l ~ sin(l phi), both with eigenvalue
chi_l, the overlap of the pump with the squared radial profile.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .numerics import InvalidArgument, laguerre_assoc

RHO_DOUBLY_RESONANT = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class LGFamily:
    f: int
    w_s: float = 1.0

    def __post_init__(self):
        if int(self.f) != self.f or self.f < 0:
            raise InvalidArgument("family index must be a non-negative integer")
        if not self.w_s > 0:
            raise InvalidArgument("spot size must be positive")

    @property
    def l0(self) -> int:
        return self.f % 2

    @property
    def l_values(self) -> tuple[int, ...]:
        return tuple(range(self.l0, self.f + 1, 2))

    @property
    def n_modes(self) -> int:
        return self.f + 1

    def radial_index(self, l: int) -> int:
        if l not in self.l_values:
            raise InvalidArgument(f"l = {l} is not in family f = {self.f} (allowed {self.l_values})")
        return (self.f - l) // 2

    def hybrid_labels(self) -> list[tuple[int, str]]:
        """Hybrid modes in order: C_l0, [S_l0,] C_l0+2, S_l0+2, ..."""
        out = []
        for l in self.l_values:
            out.append((l, "C"))
            if l > 0:
                out.append((l, "S"))
        return out


@dataclass(frozen=True)
class MultiGaussPump:
    """Coaxial superposition of TEM00 pumps sum_k c_k w_s G_{rho_k}(r)."""

    components: tuple[tuple[float, float], ...]

    def __post_init__(self):
        comps = tuple((float(c), float(rho)) for c, rho in self.components)
        if not comps:
            raise InvalidArgument("a pump needs at least one component")
        rhos = [rho for _, rho in comps]
        if min(rhos) <= 0 or len(set(rhos)) != len(rhos):
            raise InvalidArgument("spot-size ratios must be positive and distinct")
        object.__setattr__(self, "components", comps)

    @classmethod
    def single(cls, rho: float, amplitude: float = 1.0) -> "MultiGaussPump":
        return cls(((amplitude, rho),))

    def profile(self, r, w_s: float = 1.0):
        """alpha_p(r) = w_s sum_k c_k G_k(r), G(r) = sqrt(2/pi) exp(-r^2/w_p^2) / w_p."""
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for c, rho in self.components:
            wp = rho * w_s
            out = out + c * w_s * np.sqrt(2 / np.pi) / wp * np.exp(-(r**2) / wp**2)
        return out

    def to_dict(self) -> dict:
        return {"components": [{"amplitude": c, "rho": rho} for c, rho in self.components]}


@dataclass(frozen=True)
class ChiSet:
    family: LGFamily
    chi: dict  # l -> complex

    def magnitudes(self) -> dict:
        return {l: abs(v) for l, v in self.chi.items()}

    def phases(self) -> dict:
        return {l: float(np.angle(v)) for l, v in self.chi.items()}


def lg_radial(p: int, l: int, w: float, r):
    """Normalized radial Laguerre-Gauss profile R_p^l(r), 2 pi int r R^2 dr = 1."""
    if p < 0 or l < 0:
        raise InvalidArgument("indices must be non-negative")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise InvalidArgument("radius must be non-negative")
    norm = np.sqrt(2.0 * factorial(p) / (np.pi * factorial(p + l))) / w
    return norm * (np.sqrt(2.0) * r / w) ** l * laguerre_assoc(p, l, 2.0 * r**2 / w**2) * np.exp(-(r**2) / w**2)


def _single_gauss_chi(fam: LGFamily, l: int, rho: float, n_nodes: int | None = None) -> float:
    """Overlap of one unit-amplitude Gaussian pump with [R_p^l]^2 by Gauss-Laguerre quadrature.

    With w_s = 1 the integrand is 2 pi r sqrt(2/pi)/rho exp(-a r^2) P(r^2),
    a = 2 + 1/rho^2 and P of degree f, so u = a r^2 maps it onto
    exp(-u) x polynomial and f + 1 nodes are already exact.
    """
    p = fam.radial_index(l)
    nodes, weights = np.polynomial.laguerre.laggauss(n_nodes or fam.f + 8)
    a = 2.0 + 1.0 / rho**2
    r2 = nodes / a
    poly = (2.0 * factorial(p) / (np.pi * factorial(p + l))) * (2.0 * r2) ** l * laguerre_assoc(p, l, 2.0 * r2) ** 2
    # 2 pi r dr = pi du / a
    return float(np.pi / a * np.sqrt(2.0 / np.pi) / rho * np.sum(weights * poly))


def chi_overlap(fam: LGFamily, l: int, pump: MultiGaussPump) -> float:
    """Coupling chi_l = 2 pi int r alpha_p(r) [R_p^l(r)]^2 dr (lengths in units of w_s)."""
    fam.radial_index(l)
    return float(sum(c * _single_gauss_chi(fam, l, rho) for c, rho in pump.components))


def chi_set(fam: LGFamily, pump: MultiGaussPump) -> ChiSet:
    return ChiSet(fam, {l: complex(chi_overlap(fam, l, pump)) for l in fam.l_values})


def chi_ratios(fam: LGFamily, pump: MultiGaussPump) -> dict:
    """r_l = chi_l / chi_l0 for every l in the family."""
    chis = {l: chi_overlap(fam, l, pump) for l in fam.l_values}
    ref = chis[fam.l0]
    if abs(ref) <= 1e-13 * max(abs(v) for v in chis.values()) or ref == 0.0:
        raise ZeroDivisionError("chi_l0 vanishes for this pump; use chi_overlap values directly")
    return {l: v / ref for l, v in chis.items()}


def threshold_ratio(fam: LGFamily, rho: float) -> float:
    """Threshold pump power at spot-size ratio rho relative to rho = 1/sqrt(2)."""
    if not rho > 0:
        raise InvalidArgument("rho must be positive")
    ref = _single_gauss_chi(fam, fam.l0, RHO_DOUBLY_RESONANT)
    return (ref / _single_gauss_chi(fam, fam.l0, rho)) ** 2


def _check_pair(rho_a: float, rho_b: float):
    if not (rho_a > 0 and rho_b > 0):
        raise InvalidArgument("spot-size ratios must be positive")
    if rho_a == rho_b:
        raise InvalidArgument("rho_a == rho_b: the two Gaussians cancel and the pump vanishes")


def mixing_angle_opposite(rho_a: float, rho_b: float) -> float:
    """Angle theta making w_s[G_a cos theta - G_b sin theta] give chi_1 = -chi_3 in family 3."""
    _check_pair(rho_a, rho_b)
    t = (rho_a / rho_b) ** 3 * ((1 + 2 * rho_b**2) / (1 + 2 * rho_a**2)) ** 4 * (1 + 4 * rho_a**4) / (1 + 4 * rho_b**4)
    return float(np.arctan(t))


def mixing_angle_null(rho_a: float, rho_b: float) -> float:
    """Angle theta making the same two-Gaussian pump give chi_1 = 0 in family 3."""
    _check_pair(rho_a, rho_b)
    t = (rho_a / rho_b) ** 3 * ((1 + 2 * rho_b**2) / (1 + 2 * rho_a**2)) ** 4 * (1 + 2 * rho_a**4) / (1 + 2 * rho_b**4)
    return float(np.arctan(t))


def two_gauss_pump(rho_a: float, rho_b: float, theta: float) -> MultiGaussPump:
    """w_s [G_a cos(theta) - G_b sin(theta)]."""
    return MultiGaussPump(((np.cos(theta), rho_a), (-np.sin(theta), rho_b)))


class SingularSystem(ValueError):
    pass


def synthesize_chi_targets(fam: LGFamily, targets: dict, rhos) -> MultiGaussPump:
    """Multi-Gaussian pump whose couplings are proportional to ``targets``.

    One Gaussian per coupling is needed (1 + (f - l0)/2 of them); their
    amplitudes solve a square linear system. The result is normalized so
    that the largest |amplitude| is 1.
    """
    rhos = [float(r) for r in rhos]
    ls = fam.l_values
    if set(targets) != set(ls):
        raise InvalidArgument(f"targets must give a value for each l in {ls}")
    if len(rhos) != len(ls):
        raise InvalidArgument(f"need exactly {len(ls)} spot-size ratios, got {len(rhos)}")
    if len(set(rhos)) != len(rhos) or min(rhos) <= 0:
        raise InvalidArgument("spot-size ratios must be positive and distinct")
    a = np.array([[_single_gauss_chi(fam, l, rho) for rho in rhos] for l in ls])
    t = np.array([float(targets[l]) for l in ls])
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularSystem(f"coupling matrix is singular (condition number {cond:.3g}); try other spot sizes")
    amps = np.linalg.solve(a, t)
    amps = amps / np.max(np.abs(amps))
    return MultiGaussPump(tuple(zip(amps.tolist(), rhos)))


def ratio_sweep(fam: LGFamily, rhos) -> list[dict]:
    """Rows {rho, r_l for each l, R_th} for single-Gaussian pumps."""
    rows = []
    for rho in rhos:
        ratios = chi_ratios(fam, MultiGaussPump.single(rho))
        rows.append({"rho": float(rho), **{f"r{l}": ratios[l] for l in fam.l_values}, "R_th": threshold_ratio(fam, rho)})
    return rows


@dataclass(frozen=True)
class Grid2D:
    """Square Cartesian grid centered on the beam axis, lengths in units of w_s."""

    half_width: float = 4.0
    n: int = 129

    @property
    def coords(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n)

    @property
    def cell_area(self) -> float:
        d = 2 * self.half_width / (self.n - 1)
        return d * d

    def polar(self):
        x = self.coords
        xx, yy = np.meshgrid(x, x, indexing="xy")
        return np.hypot(xx, yy), np.arctan2(yy, xx)


def hybrid_mode_profile(fam: LGFamily, l: int, kind: str, grid: Grid2D) -> np.ndarray:
    """Real field of the hybrid mode C_l (cos l phi) or S_l (sin l phi), unit norm on the grid."""
    if kind not in ("C", "S"):
        raise InvalidArgument("kind must be 'C' or 'S'")
    p = fam.radial_index(l)
    if kind == "S" and l == 0:
        raise InvalidArgument("S_0 does not exist")
    r, phi = grid.polar()
    angular = np.cos(l * phi) if kind == "C" else np.sin(l * phi)
    field = lg_radial(p, l, fam.w_s, r) * angular
    return field / np.sqrt(np.sum(field**2) * grid.cell_area)


def hybrid_kernel(fam: LGFamily, pump: MultiGaussPump, grid: Grid2D):
    """Sampled kernel sum_H sum_l chi_l H_l(r) H_l(r') and the mode fields used to build it."""
    chis = {l: chi_overlap(fam, l, pump) for l in fam.l_values}
    fields, values = [], []
    for l, kind in fam.hybrid_labels():
        fields.append(hybrid_mode_profile(fam, l, kind, grid).ravel())
        values.append(chis[l])
    f = np.array(fields)
    return (f.T * np.array(values)) @ f, f, np.array(values)
