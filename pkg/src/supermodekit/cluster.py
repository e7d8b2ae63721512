"""Cluster and GHZ-like states built from independently squeezed supermodes.

A real symmetric coupling matrix K = U L U^T is diagonalized into supermode
eigenvalues L; conversely, a target spectrum is matched to a modulated
kernel whose analytic supermode spectrum reproduces it up to a positive
scale. Gaussian states use quadrature ordering (X_1..X_n, P_1..P_n) with
X = B + B^dag, P = i(B^dag - B), so the vacuum covariance is the identity.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .kernellab import ModulatedKernelSpec
from .numerics import InvalidArgument, as_symmetric, symmetric_eig
from .supermodes import predict_modulated_spectrum
from .transverse import Grid2D, LGFamily, hybrid_mode_profile

MATCH_TOL = 1e-9
BRUTE_FORCE_LIMIT = 12


# ---------------------------------------------------------------- couplings


def decompose_coupling(k) -> tuple[np.ndarray, np.ndarray]:
    """Spectrum sorted by |value| descending and orthogonal basis U with K = U diag(L) U^T."""
    sym = as_symmetric(k, tol=1e-12)
    eig = symmetric_eig(sym, ordering="abs")
    return eig.eigenvalues, eig.eigenvectors


def reconstruct(spectrum, basis) -> np.ndarray:
    basis = np.asarray(basis, dtype=float)
    return (basis * np.asarray(spectrum, dtype=float)) @ basis.T


def ring4_matrix() -> np.ndarray:
    """Four-mode ring, nearest neighbours coupled, one coupling with opposite sign."""
    c = 1.0 / np.sqrt(2.0)
    return np.array(
        [
            [0.0, c, 0.0, -c],
            [c, 0.0, c, 0.0],
            [0.0, c, 0.0, c],
            [-c, 0.0, c, 0.0],
        ]
    )


def complete_matrix(n: int, weight: float) -> np.ndarray:
    """Complete graph on n modes with equal couplings ``weight``."""
    if n < 2:
        raise InvalidArgument("a complete graph needs at least two modes")
    return weight * (np.ones((n, n)) - np.eye(n))


# ------------------------------------------------------ spectrum matching
#
# For equal widths sigma and unit u = sqrt(pi / 8 sigma^2), a spec with
# constant terms B (plus) and C (minus) and modulations a_i (plus), c_j
# (minus) has, in units of u:
#   single  2 B C                       (B, C != 0)
#   equal   B c_j, twice                (B != 0)
#   opposite +a_i C and -a_i C          (C != 0)
#   quad    +a_i c_j / 2 and -a_i c_j / 2, each twice


@dataclass
class MatchResult:
    feasible: bool
    spec: ModulatedKernelSpec | None
    scale: float  # predicted spectrum = scale * target
    closest: list = field(default_factory=list)
    max_relative_deviation: float = 0.0
    structure: tuple = ()


def _multiset_equal(a, b, tol=MATCH_TOL) -> bool:
    a, b = sorted(a), sorted(b)
    if len(a) != len(b):
        return False
    scale = max([abs(x) for x in a + b] + [1e-300])
    return all(abs(x - y) <= tol * scale for x, y in zip(a, b))


def _spectrum_units(B, C, a, c) -> list[float]:
    out = []
    if B and C:
        out.append(2 * B * C)
    if B:
        for cj in c:
            out += [B * cj] * 2
    if C:
        for ai in a:
            out += [ai * C, -ai * C]
    for ai in a:
        for cj in c:
            q = abs(ai * cj) / 2
            out += [q, q, -q, -q]
    return out


def _remove(pool: list, value: float, tol=MATCH_TOL):
    for i, v in enumerate(pool):
        if abs(v - value) <= tol * max(abs(v), abs(value), 1e-300):
            return pool[:i] + pool[i + 1:]
    return None


def _structures(n: int):
    """(hasB, hasC, N+, N-) with matching eigenvalue count, simplest first."""
    out = []
    for n_plus in range(n + 1):
        for n_minus in range(n + 1):
            for has_b, has_c in ((True, True), (False, True), (True, False), (False, False)):
                if n_plus == 0 and not has_b:
                    continue
                if n_minus == 0 and not has_c:
                    continue
                count = (has_b and has_c) + 2 * n_minus * has_b + 2 * n_plus * has_c + 4 * n_plus * n_minus
                if count == n:
                    out.append((has_b, has_c, n_plus, n_minus))
    # fewest modulations first; among ties prefer pump-side (w+w') modulations only
    out.sort(key=lambda s: (s[2] + s[3], s[3] > 0 and s[2] > 0, s[3], not s[0], not s[1]))
    return out


def _try_structure(target: list[float], has_b, has_c, n_plus, n_minus):
    """Parameters (B, C, a, c) reproducing ``target`` exactly (in units of u), or None."""
    pool = sorted(target)
    # gauge: C = 1 when the minus side carries no modulation, else B = 1
    candidates_single = sorted(set(pool)) if (has_b and has_c) else [None]
    for single in candidates_single:
        rest = list(pool)
        if single is not None:
            rest = _remove(rest, single)
        if n_minus == 0:
            C = 1.0
            B = single / 2 if single is not None else 0.0
        elif has_b:
            B = 1.0
            C = single / 2 if single is not None else 0.0
        else:
            B, C = 0.0, (1.0 if has_c else 0.0)
        if has_b and has_c and B * C == 0:
            continue
        for picks in _pick_blocks(rest, n_plus if has_c else 0, n_minus if has_b else 0):
            opp_vals, eq_vals, remainder = picks
            a = [v / C for v in opp_vals] if has_c else []
            c = [v / B for v in eq_vals] if has_b else []
            params = _complete_quads(remainder, B, C, a, c, n_plus, n_minus)
            if params is not None:
                B2, C2, a2, c2 = params
                if _multiset_equal(_spectrum_units(B2, C2, a2, c2), target):
                    return B2, C2, a2, c2
    return None


def _pick_blocks(pool, n_opp, n_eq):
    """Yield (opposite magnitudes, equal-pair values, remainder) decompositions."""
    def pick_opp(pool, k, start):
        if k == 0:
            yield [], pool
            return
        mags = sorted({abs(v) for v in pool if v > 0})
        for m in mags:
            if m < start:
                continue
            p = _remove(pool, m)
            p = _remove(p, -m) if p is not None else None
            if p is None:
                continue
            for rest_vals, rest_pool in pick_opp(p, k - 1, m):
                yield [m] + rest_vals, rest_pool

    def pick_eq(pool, k, start):
        if k == 0:
            yield [], pool
            return
        for v in sorted(set(pool)):
            if v < start:
                continue
            p = _remove(pool, v)
            p = _remove(p, v) if p is not None else None
            if p is None:
                continue
            for rest_vals, rest_pool in pick_eq(p, k - 1, v):
                yield [v] + rest_vals, rest_pool

    for opp, p1 in pick_opp(pool, n_opp, -np.inf):
        for eq, p2 in pick_eq(p1, n_eq, -np.inf):
            yield opp, eq, p2


def _complete_quads(remainder, B, C, a, c, n_plus, n_minus):
    """Fill in modulation amplitudes not fixed by singles/pairs from the quad blocks."""
    if n_plus == 0 or n_minus == 0:
        return (B, C, a, c) if not remainder else None
    quads = sorted(v for v in remainder if v > 0)
    if len(quads) != 2 * n_plus * n_minus:
        return None
    mags = sorted(set(quads))
    if not a and not c:
        # pure quad structure: a_1 = 1, the c_j follow from n_minus quad magnitudes
        for combo in itertools.combinations_with_replacement(mags, n_minus):
            c_try = [2 * m for m in combo]
            for combo_a in itertools.combinations_with_replacement(mags, n_plus - 1):
                a_try = [1.0] + [2 * m / c_try[0] for m in combo_a]
                if _multiset_equal(_spectrum_units(B, C, a_try, c_try), remainder):
                    return B, C, a_try, c_try
        return None
    if not a:
        for combo in itertools.combinations_with_replacement(mags, n_plus):
            a_try = [2 * m / abs(c[0]) for m in combo]
            if _multiset_equal(_spectrum_units(0, 0, a_try, c), remainder):
                return B, C, a_try, c
        return None
    if not c:
        for combo in itertools.combinations_with_replacement(mags, n_minus):
            c_try = [2 * m / abs(a[0]) for m in combo]
            if _multiset_equal(_spectrum_units(0, 0, a, c_try), remainder):
                return B, C, a, c_try
        return None
    return (B, C, a, c) if _multiset_equal(_spectrum_units(0, 0, a, c), remainder) else None


def _modulation_frequencies(sigma: float, n_plus: int, n_minus: int):
    # plus side at multiples of 3 pi sigma; minus side on a coarser lattice so
    # that every beta+ +- beta- combination is distinct
    step = 3 * np.pi * sigma
    plus = [step * k for k in range(1, n_plus + 1)]
    stride = 2 * n_plus + 1 if n_plus else 1
    minus = [step * stride * j for j in range(1, n_minus + 1)]
    return plus, minus


def _closest_pairing(target: list[float]) -> list[float]:
    """Heuristic nearest achievable multiset: a single plus averaged equal pairs."""
    vals = sorted(target, key=lambda v: (-abs(v), -v))
    out = []
    if len(vals) % 2:
        out.append(vals.pop(0))
    srt = sorted(vals)
    for i in range(0, len(srt), 2):
        m = 0.5 * (srt[i] + srt[i + 1])
        out += [m, m]
    return out


def match_spectrum_to_kernel(target, sigma: float) -> MatchResult:
    """Find a symmetric modulated-Gaussian spec whose analytic spectrum is ``scale * target``."""
    target = [float(v) for v in target]
    if not target:
        raise InvalidArgument("target spectrum is empty")
    if not all(np.isfinite(target)) or any(v == 0 for v in target):
        raise InvalidArgument("target values must be finite and nonzero")
    if not sigma > 0:
        raise InvalidArgument("sigma must be positive")
    unit = np.sqrt(np.pi / (8 * sigma**2))
    if len(target) <= BRUTE_FORCE_LIMIT:
        for structure in _structures(len(target)):
            params = _try_structure(target, *structure)
            if params is None:
                continue
            B, C, a, c = params
            plus_beta, minus_beta = _modulation_frequencies(sigma, len(a), len(c))
            spec = ModulatedKernelSpec(
                sigma,
                sigma,
                ((B, 0.0),) + tuple(zip(a, plus_beta)),
                ((C, 0.0),) + tuple(zip(c, minus_beta)),
            )
            return MatchResult(True, spec, unit, list(target), 0.0, structure)
    closest = _closest_pairing(target)
    dev = max(abs(x - y) / abs(y) for x, y in zip(sorted(closest), sorted(target)))
    return MatchResult(False, None, unit, closest, float(dev))


def spectrum_round_trip(result: MatchResult, target) -> bool:
    """Whether the analytic spectrum of the matched spec equals scale * target."""
    if not result.feasible:
        return False
    predicted = predict_modulated_spectrum(result.spec).values()
    return _multiset_equal(list(predicted), [result.scale * v for v in target], tol=1e-12)


# ------------------------------------------------------------ GHZ states


def braunstein_rotation(n: int) -> np.ndarray:
    """Orthogonal n x n matrix with uniform first row 1/sqrt(n).

    Rows 2..n come from Gram-Schmidt on e_k - e_{k+1}; this is one fixed
    completion, and the joint GHZ variances do not depend on the choice.
    """
    if n < 2:
        raise InvalidArgument("need at least two modes")
    rows = [np.full(n, 1.0 / np.sqrt(n))]
    for k in range(n - 1):
        v = np.zeros(n)
        v[k], v[k + 1] = 1.0, -1.0
        for r in rows:
            v = v - (r @ v) * r
        rows.append(v / np.linalg.norm(v))
    return np.array(rows)


def symplectic_form(n: int) -> np.ndarray:
    z, i = np.zeros((n, n)), np.eye(n)
    return np.block([[z, i], [-i, z]])


def squeezed_inputs(n: int, r_squeeze: float) -> np.ndarray:
    """Mode 1 squeezed in X, modes 2..n squeezed in P."""
    x = np.full(n, np.exp(2 * r_squeeze))
    p = np.full(n, np.exp(-2 * r_squeeze))
    x[0], p[0] = np.exp(-2 * r_squeeze), np.exp(2 * r_squeeze)
    return np.diag(np.concatenate([x, p]))


def passive_transform(v: np.ndarray, mixing: np.ndarray) -> np.ndarray:
    """Covariance after output mode j = sum_k mixing[k, j] input mode k."""
    m = np.asarray(mixing, dtype=float).T
    z = np.zeros_like(m)
    s = np.block([[m, z], [z, m]])
    return as_symmetric(s @ v @ s.T)


def ghz_covariance(n: int, r_squeeze: float, rotation: np.ndarray | None = None) -> np.ndarray:
    """Covariance of the GHZ-like state from one X- and n-1 P-squeezed modes."""
    if n < 2:
        raise InvalidArgument("need at least two modes")
    if r_squeeze < 0:
        raise InvalidArgument("squeezing parameter must be non-negative")
    rot = braunstein_rotation(n) if rotation is None else np.asarray(rotation, dtype=float)
    return passive_transform(squeezed_inputs(n, r_squeeze), rot)


def joint_variances(v) -> tuple[float, float]:
    """Var(sum_j X_j) and the worst Var(P_j - P_j+1 mod n)."""
    v = np.asarray(v, dtype=float)
    n = v.shape[0] // 2
    u = np.concatenate([np.ones(n), np.zeros(n)])
    var_x = float(u @ v @ u)
    worst = 0.0
    for j in range(n):
        d = np.zeros(2 * n)
        d[n + j] += 1.0
        d[n + (j + 1) % n] -= 1.0
        worst = max(worst, float(d @ v @ d))
    return var_x, worst


def uncertainty_min_eig(v) -> float:
    """Smallest eigenvalue of V + i Omega; >= 0 for a physical state."""
    v = np.asarray(v, dtype=float)
    return float(np.min(np.linalg.eigvalsh(v + 1j * symplectic_form(v.shape[0] // 2))))


def reduce_modes(v, keep) -> np.ndarray:
    """Covariance of the modes in ``keep`` after tracing out the rest."""
    v = np.asarray(v, dtype=float)
    n = v.shape[0] // 2
    idx = list(keep) + [n + k for k in keep]
    return v[np.ix_(idx, idx)]


def symplectic_eigenvalues(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = v.shape[0] // 2
    ev = np.linalg.eigvals(1j * symplectic_form(n) @ v)
    return np.sort(np.abs(ev.real))[::2]


def is_ppt(v_pair, tol: float = 1e-9) -> bool:
    """Two-mode PPT test: partial transposition flips P of the second mode."""
    v = np.array(v_pair, dtype=float)
    if v.shape != (4, 4):
        raise InvalidArgument("expected a two-mode covariance")
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    return bool(np.min(symplectic_eigenvalues(flip @ v @ flip)) >= 1.0 - tol)


# ------------------------------------------------------------ mode profiles


def entangled_mode_profiles(fam: LGFamily, rotation, grid: Grid2D) -> list[np.ndarray]:
    """Intensity maps of the modes obtained by rotating the hybrid supermodes.

    Supermodes are ordered C_l0, [S_l0,] C_l0+2, S_l0+2, ...; C_l0 carries
    the pi/2 phase shift. Output mode j is sum_k rotation[k, j] H_k, the
    same convention as :func:`ghz_covariance`. Each map has unit total power
    on the grid.
    """
    rot = np.asarray(rotation, dtype=float)
    if rot.shape != (fam.n_modes, fam.n_modes):
        raise InvalidArgument(f"rotation must be {fam.n_modes}x{fam.n_modes} for family {fam.f}")
    fields = [hybrid_mode_profile(fam, l, kind, grid).astype(complex) for l, kind in fam.hybrid_labels()]
    fields[0] = 1j * fields[0]
    maps = []
    for j in range(fam.n_modes):
        out = sum(rot[k, j] * fields[k] for k in range(fam.n_modes))
        intensity = np.abs(out) ** 2
        maps.append(intensity / (np.sum(intensity) * grid.cell_area))
    return maps
