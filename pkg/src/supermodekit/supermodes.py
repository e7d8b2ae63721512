"""Supermodes: numerical and analytic solutions of the kernel eigenproblem.

The numeric path discretizes the Fredholm operator as W^1/2 K W^1/2 and
diagonalizes it. The analytic path predicts the spectrum of modulated
Gaussian kernels from closed forms, which hold when the modulation
frequencies are well separated (see ``ModulatedKernelSpec.is_valid``).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .kernellab import KernelMatrix, ModulatedKernelSpec
from .numerics import Axis, InvalidArgument, hermite, symmetric_eig

DEFAULT_FLOOR = 1e-9


@dataclass(frozen=True)
class SupermodeSet:
    """Eigenvalues sorted by |value| descending, with sampled eigenfunctions.

    ``eigenfunctions[n]`` holds s_n on the axis points, normalized so that
    sum_i w_i s_n(x_i)^2 = 1.
    """

    axis: Axis
    eigenvalues: np.ndarray
    eigenfunctions: np.ndarray
    truncation_floor: float = DEFAULT_FLOOR
    empty: bool = False

    def __len__(self):
        return self.eigenvalues.size

    def overlap(self, n: int, f) -> float:
        """|<s_n, f>| / ||f|| in the weighted inner product."""
        f = np.asarray(f, dtype=float)
        w = self.axis.weights
        return float(abs(np.sum(w * self.eigenfunctions[n] * f)) / np.sqrt(np.sum(w * f * f)))

    def to_json(self, max_modes: int | None = None, fmt: str = "%.10e") -> str:
        k = len(self) if max_modes is None else min(max_modes, len(self))
        payload = {
            "axis_label": self.axis.label,
            "axis": [float(fmt % x) for x in self.axis.points],
            "eigenvalues": [float(fmt % v) for v in self.eigenvalues],
            "eigenfunctions": [[float(fmt % v) for v in row] for row in self.eigenfunctions[:k]],
        }
        return json.dumps(payload, indent=1)

    def to_csv(self, max_modes: int | None = None, fmt: str = "%.10e") -> str:
        """One row per axis point: x, s_1(x), s_2(x), ..."""
        k = len(self) if max_modes is None else min(max_modes, len(self))
        header = [self.axis.label] + [f"s{n + 1}" for n in range(k)]
        lines = [",".join(header)]
        for i, x in enumerate(self.axis.points):
            lines.append(",".join([fmt % x] + [fmt % self.eigenfunctions[n, i] for n in range(k)]))
        return "\n".join(lines) + "\n"


def solve_fredholm(k: KernelMatrix, floor: float = DEFAULT_FLOOR, max_modes: int | None = None) -> SupermodeSet:
    """Diagonalize the kernel operator; keep eigenvalues above ``floor * |Lambda_1|``."""
    sqrt_w = np.sqrt(k.axis.weights)
    discrete = sqrt_w[:, None] * k.values * sqrt_w[None, :]
    eig = symmetric_eig(discrete, ordering="abs")
    values = eig.eigenvalues
    lead = abs(values[0]) if values.size else 0.0
    if lead == 0.0 or not np.isfinite(lead):
        warnings.warn("kernel has no eigenvalue above the truncation floor", RuntimeWarning, stacklevel=2)
        return SupermodeSet(k.axis, np.empty(0), np.empty((0, len(k.axis))), floor, empty=True)
    keep = np.abs(values) >= floor * lead
    if max_modes is not None:
        keep &= np.arange(values.size) < max_modes
    functions = (eig.eigenvectors[:, keep] / sqrt_w[:, None]).T
    return SupermodeSet(k.axis, values[keep], functions, floor)


@dataclass(frozen=True)
class SpectrumEntry:
    value: float
    multiplicity: int
    label: tuple  # (n1, n2, m, branch) with branch the trig function on the w+w' modulation


@dataclass(frozen=True)
class AnalyticSpectrum:
    entries: tuple[SpectrumEntry, ...]
    valid: bool = True

    def values(self, drop_zero: bool = True, floor: float = 0.0) -> np.ndarray:
        """Expanded multiset sorted by |value| descending."""
        vals = [e.value for e in self.entries for _ in range(e.multiplicity)]
        vals = np.array(vals, dtype=float)
        if drop_zero and vals.size:
            lead = np.max(np.abs(vals))
            vals = vals[np.abs(vals) > max(floor * lead, 0.0)] if lead > 0 else vals[:0]
        order = np.lexsort((-vals, -np.abs(vals)))
        return vals[order]

    @property
    def total_count(self) -> int:
        return sum(e.multiplicity for e in self.entries)


def ladder_value(sigma_plus: float, sigma_minus: float, m: int) -> float:
    """Hermite-ladder factor lambda_m for doubly modulated eigenfunctions.

    For an eigenfunction modulated along both w+w' and w-w' the eigenvalue is
    lambda_m b+ b-. Each unmodulated direction doubles it (see
    :func:`predict_modulated_spectrum`).
    """
    total = sigma_plus + sigma_minus
    return (-1) ** m * np.sqrt(np.pi / 2) / (2 * total) * ((sigma_plus - sigma_minus) / total) ** m


def predict_modulated_spectrum(
    spec: ModulatedKernelSpec, floor: float = DEFAULT_FLOOR, m_max: int | None = None
) -> AnalyticSpectrum:
    """Approximate spectrum of a modulated Gaussian kernel.

    Eigenfunctions are exp(-tau^2 x^2) t1(beta+ x) t2(beta- x) H_m(sqrt2 tau x)
    with eigenvalue +-c lambda_m b+ b-, the sign set by t1 (cos: +, sin: -)
    and c = 1, 2 or 4 for zero, one or two vanishing modulation frequencies.
    With equal widths only m = 0 survives. Otherwise the ladder is cut once
    |lambda_m / lambda_0| drops below ``floor`` (or at ``m_max``).
    Entries group the two t2 choices, so their multiplicity is 2 when the
    w-w' modulation is present.
    """
    sp, sm = spec.sigma_plus, spec.sigma_minus
    if m_max is None:
        ratio = abs(sp - sm) / (sp + sm)
        if ratio == 0.0:
            m_max = 0
        else:
            m_max = int(np.ceil(np.log(floor) / np.log(ratio))) if ratio < 1 else 0
    entries = []
    for n1, (bp, beta_p) in enumerate(spec.plus_terms):
        branches = ("cos",) if beta_p == 0 else ("cos", "sin")
        for n2, (bm, beta_m) in enumerate(spec.minus_terms):
            mult = 1 if beta_m == 0 else 2
            factor = (2 if beta_p == 0 else 1) * (2 if beta_m == 0 else 1)
            for m in range(m_max + 1):
                lam = factor * ladder_value(sp, sm, m)
                for branch in branches:
                    sign = 1.0 if branch == "cos" else -1.0
                    entries.append(SpectrumEntry(sign * lam * bp * bm, mult, (n1, n2, m, branch)))
    return AnalyticSpectrum(tuple(entries), spec.is_valid())


def analytic_eigenfunction(spec: ModulatedKernelSpec, label, x, t2: str = "cos"):
    """Unnormalized analytic eigenfunction for ``label = (n1, n2, m, branch)``.

    ``branch`` picks the trig function of the w+w' modulation and ``t2`` that
    of the w-w' modulation.
    """
    n1, n2, m, branch = label
    if not (0 <= n1 < len(spec.plus_terms) and 0 <= n2 < len(spec.minus_terms) and m >= 0):
        raise InvalidArgument(f"label {label!r} out of range for this spec")
    if branch not in ("cos", "sin") or t2 not in ("cos", "sin"):
        raise InvalidArgument("trig branches must be 'cos' or 'sin'")
    x = np.asarray(x, dtype=float)
    beta_p = spec.plus_terms[n1][1]
    beta_m = spec.minus_terms[n2][1]
    if (branch == "sin" and beta_p == 0) or (t2 == "sin" and beta_m == 0):
        raise InvalidArgument("sin branch requires a nonzero modulation frequency")
    tau = spec.tau
    trig = {"cos": np.cos, "sin": np.sin}
    return (
        np.exp(-(tau**2) * x**2)
        * trig[branch](beta_p * x)
        * trig[t2](beta_m * x)
        * hermite(m, np.sqrt(2) * tau * x)
    )


def group_degeneracies(values, rel_tol: float = 1e-3, signed: bool = True) -> list[tuple[float, int]]:
    """Cluster eigenvalues whose pairwise relative difference is <= rel_tol.

    ``values`` may be a SupermodeSet or an array. Groups are returned in
    order of decreasing |mean|. With ``signed=False`` the clustering runs
    on absolute values.
    """
    if not 0 < rel_tol <= 0.1:
        raise InvalidArgument("rel_tol must lie in (0, 0.1]")
    if isinstance(values, SupermodeSet):
        values = values.eigenvalues
    vals = np.asarray(values, dtype=float)
    if not signed:
        vals = np.abs(vals)
    groups: list[list[float]] = []
    for v in np.sort(vals):
        if groups:
            first = groups[-1][0]
            # sorted order: first and v are the extremes of the candidate group
            if abs(v - first) <= rel_tol * max(abs(v), abs(first)):
                groups[-1].append(v)
                continue
        groups.append([v])
    out = [(float(np.mean(g)), len(g)) for g in groups]
    out.sort(key=lambda t: (-abs(t[0]), -t[0]))
    return out


def relative_spread(values, count: int) -> float:
    """(max - min) / max of the ``count`` largest |values|."""
    mags = np.sort(np.abs(np.asarray(values, dtype=float)))[::-1][:count]
    if mags.size < count:
        raise InvalidArgument(f"only {mags.size} eigenvalues available, {count} requested")
    return float((mags[0] - mags[-1]) / mags[0])


@dataclass
class SpectrumComparison:
    max_relative_deviation: float
    matches: list = field(default_factory=list)  # (numeric, analytic, rel_error)
    unmatched_numeric: list = field(default_factory=list)
    unmatched_analytic: list = field(default_factory=list)

    @property
    def counts_match(self) -> bool:
        return not self.unmatched_numeric and not self.unmatched_analytic


def compare_spectra(numeric, analytic: AnalyticSpectrum, floor: float = 1e-6) -> SpectrumComparison:
    """Greedy matching of numeric and analytic eigenvalues by sorted signed value.

    Values below ``floor`` times the leading magnitude on either side are
    ignored. Matching pairs the k-th largest positive values with each other
    (and likewise for negative ones); surplus entries are reported unmatched.
    """
    num = numeric.eigenvalues if isinstance(numeric, SupermodeSet) else np.asarray(numeric, dtype=float)
    ana = analytic.values()
    if num.size:
        num = num[np.abs(num) >= floor * np.max(np.abs(num))]
    if ana.size:
        ana = ana[np.abs(ana) >= floor * np.max(np.abs(ana))]
    report = SpectrumComparison(0.0)
    for sign in (1.0, -1.0):
        a = np.sort(sign * ana[sign * ana > 0])[::-1]
        n = np.sort(sign * num[sign * num > 0])[::-1]
        k = min(a.size, n.size)
        for i in range(k):
            err = abs(n[i] - a[i]) / abs(a[i])
            report.matches.append((sign * n[i], sign * a[i], err))
            report.max_relative_deviation = max(report.max_relative_deviation, err)
        report.unmatched_numeric.extend((sign * n[k:]).tolist())
        report.unmatched_analytic.extend((sign * a[k:]).tolist())
    report.matches.sort(key=lambda t: -abs(t[1]))
    return report
