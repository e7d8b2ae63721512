"""Config-driven experiments behind the ``kernel``, ``transverse`` and ``cluster`` commands.

Each ``run_*`` function takes a validated :class:`RunConfig` and an output
directory, writes its files and returns the list of paths written. Output is
deterministic: floats are written with a fixed number of significant digits
and containers in a fixed order.
"""

from __future__ import annotations

import json
import logging
import math
from pathlib import Path

import numpy as np

from . import cluster, kernellab, pumps, supermodes, transverse
from .config import ConfigError, RunConfig
from .numerics import InvalidArgument, make_uniform_axis

log = logging.getLogger(__name__)

FLOAT_FMT = "%.10e"


class NumericalError(RuntimeError):
    """A computation finished without a usable result."""


def _num(x):
    """Round a float to the fixed output precision."""
    return float(FLOAT_FMT % x)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            return None
        return _num(obj)
    return obj


def write_json(path: Path, payload) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(payload), indent=1) + "\n")
    return path


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return path


def write_grid_csv(path: Path, coords, values) -> Path:
    """2-d map as CSV: header row and first column carry the coordinates."""
    lines = [",".join(["y\\x"] + [FLOAT_FMT % c for c in coords])]
    for y, row in zip(coords, values):
        lines.append(",".join([FLOAT_FMT % y] + [FLOAT_FMT % v for v in row]))
    return write_text(path, "\n".join(lines) + "\n")


def _decimated(kernel: kernellab.KernelMatrix, max_points: int) -> kernellab.KernelMatrix:
    n = len(kernel.axis)
    if n <= max_points:
        return kernel
    stride = int(math.ceil(n / max_points))
    idx = np.arange(0, n, stride)
    axis = kernel.axis
    sub = type(axis)(axis.points[idx], axis.weights[idx] * stride, axis.label)
    return kernellab.KernelMatrix(sub, kernel.values[np.ix_(idx, idx)], kernel.provenance)


# ------------------------------------------------------------------ kernel


def spec_from_config(section) -> kernellab.ModulatedKernelSpec:
    sp = section.sigma_plus
    sm = section.sigma_minus if section.sigma_minus is not None else sp
    if section.beta_unit == "pi_sigma":
        plus = [(b, beta * math.pi * sp) for b, beta in section.plus_terms]
        minus = [(b, beta * math.pi * sm) for b, beta in section.minus_terms]
    else:
        plus, minus = section.plus_terms, section.minus_terms
    return kernellab.ModulatedKernelSpec(sp, sm, tuple(plus), tuple(minus))


def _spectrum_block(sms: supermodes.SupermodeSet, k: int) -> dict:
    vals = sms.eigenvalues
    lead = abs(vals[0])
    return {
        "n_modes": int(vals.size),
        "eigenvalues": vals[:k],
        "ratios": vals[:k] / lead,
        "threshold_pump": 1.0 / lead,
    }


def run_kernel(cfg: RunConfig, out: Path) -> list[Path]:
    out = Path(out)
    tol = cfg.tolerances
    k = cfg.max_modes_written
    written = []
    if cfg.experiment == "modulated-kernel":
        spec = spec_from_config(cfg.kernel)
        n = cfg.grid.n or 1024
        x_max = cfg.grid.x_max or 6.0 / min(spec.sigma_plus, spec.sigma_minus)
        axis = make_uniform_axis(x_max, n, "x")
        kernel = kernellab.build_modulated(spec, axis)
        sms = supermodes.solve_fredholm(kernel, floor=tol.floor)
        if sms.empty:
            raise NumericalError("kernel has no eigenvalue above the floor")
        analytic = supermodes.predict_modulated_spectrum(spec, floor=tol.floor)
        expected = analytic.values(floor=1e-6)
        comparison = supermodes.compare_spectra(sms, analytic)
        unit = math.sqrt(math.pi / 8) / spec.tau
        leading = sms.eigenvalues[: max(expected.size, 1)]
        report = {
            "experiment": cfg.experiment,
            "name": cfg.name,
            "spec": spec.to_dict(),
            "grid": {"n": n, "x_max": x_max},
            **_spectrum_block(sms, k),
            "leading_pattern": leading / abs(leading[-1]) if expected.size > 1 else leading / abs(leading[0]),
            "leading_in_units_sqrt_pi_over_8sigma2": leading / unit,
            "degeneracy_groups": supermodes.group_degeneracies(sms.eigenvalues[:k], tol.degeneracy),
            "analytic": {
                "valid": analytic.valid,
                "values": expected,
                "max_relative_deviation": comparison.max_relative_deviation,
                "within_tolerance": comparison.max_relative_deviation <= tol.compare and comparison.counts_match,
                "unmatched_numeric": comparison.unmatched_numeric,
                "unmatched_analytic": comparison.unmatched_analytic,
            },
        }
        csv_kernel = _decimated(kernel, 512)
    else:
        section = cfg.spopo
        pump = pumps.from_dict(section.pump.as_dict())
        n = cfg.grid.n or 4096
        kernel = kernellab.realistic_spopo_kernel(pump, section.tau1, n, section.phi_quadratic)
        sms = supermodes.solve_fredholm(kernel, floor=tol.floor)
        if sms.empty:
            raise NumericalError("kernel has no eigenvalue above the floor")
        count = section.degeneracy_count
        truncated = len(sms) < count
        # modes dropped below the floor count as zero, so the spread is then ~1
        padded = np.concatenate([sms.eigenvalues, np.zeros(max(count - len(sms), 0))])
        spread = supermodes.relative_spread(padded, count)
        groups = supermodes.group_degeneracies(sms.eigenvalues[: 2 * count], max(tol.degeneracy, 1e-2), signed=False)
        report = {
            "experiment": cfg.experiment,
            "name": cfg.name,
            "tau1": section.tau1,
            "pump": pumps.to_dict(pump),
            "grid": {"n": n, "x_max": float(kernel.axis.points[-1])},
            **_spectrum_block(sms, k),
            "degeneracy": {
                "count": count,
                "modes_above_floor": len(sms),
                "truncated_at_floor": truncated,
                "relative_spread": spread,
                "leading_group_size": groups[0][1],
                "groups": groups[:10],
            },
        }
        csv_kernel = _decimated(kernel, section.kernel_csv_max_points)
    written.append(write_text(out / "kernel.csv", csv_kernel.to_csv(FLOAT_FMT)))
    written.append(write_json(out / "spectrum.json", report))
    written.append(write_text(out / "supermodes.csv", sms.to_csv(k, FLOAT_FMT)))
    return written


# -------------------------------------------------------------- transverse


def _rho_grid(section) -> np.ndarray:
    if section.rho_max <= section.rho_min:
        raise ConfigError("transverse.rho_max must exceed transverse.rho_min")
    if section.spacing == "log":
        return np.geomspace(section.rho_min, section.rho_max, section.n_rho)
    return np.linspace(section.rho_min, section.rho_max, section.n_rho)


def run_transverse(cfg: RunConfig, out: Path) -> list[Path]:
    out = Path(out)
    section = cfg.transverse
    rhos = _rho_grid(section)
    fams = [transverse.LGFamily(f) for f in section.families]
    header = ["rho"]
    for fam in fams:
        header += [f"f{fam.f}_r{l}" for l in fam.l_values]
        header += [f"f{fam.f}_chi{l}" for l in fam.l_values]
    sweep_lines = [",".join(header)]
    rth_lines = [",".join(["rho"] + [f"R_th_f{fam.f}" for fam in fams])]
    for rho in rhos:
        row, rth = [FLOAT_FMT % rho], [FLOAT_FMT % rho]
        for fam in fams:
            pump = transverse.MultiGaussPump.single(rho)
            ratios = transverse.chi_ratios(fam, pump)
            row += [FLOAT_FMT % ratios[l] for l in fam.l_values]
            row += [FLOAT_FMT % transverse.chi_overlap(fam, l, pump) for l in fam.l_values]
            rth.append(FLOAT_FMT % transverse.threshold_ratio(fam, rho))
        sweep_lines.append(",".join(row))
        rth_lines.append(",".join(rth))
    written = [
        write_text(out / "chi_sweep.csv", "\n".join(sweep_lines) + "\n"),
        write_text(out / "rth.csv", "\n".join(rth_lines) + "\n"),
    ]
    if section.null_check is not None:
        a, b = section.null_check.rho_a, section.null_check.rho_b
        fam3 = transverse.LGFamily(3)
        lines = ["check,rho_a,rho_b,theta,chi1,chi3,residual"]
        for name, fn in (("opposite", transverse.mixing_angle_opposite), ("null", transverse.mixing_angle_null)):
            theta = fn(a, b)
            pump = transverse.two_gauss_pump(a, b, theta)
            chi1 = transverse.chi_overlap(fam3, 1, pump)
            chi3 = transverse.chi_overlap(fam3, 3, pump)
            resid = abs(chi1 + chi3) / abs(chi3) if name == "opposite" else abs(chi1) / abs(chi3)
            lines.append(",".join([name] + [FLOAT_FMT % v for v in (a, b, theta, chi1, chi3, resid)]))
        written.append(write_text(out / "mixing_check.csv", "\n".join(lines) + "\n"))
    return written


# ----------------------------------------------------------------- cluster


def coupling_from_config(section) -> np.ndarray:
    if section.coupling == "ring4":
        return cluster.ring4_matrix()
    if section.coupling == "complete":
        return cluster.complete_matrix(section.n, section.weight)
    return np.array(section.matrix, dtype=float)


def transverse_targets(spectrum, fam: transverse.LGFamily) -> dict:
    """Assign a supermode spectrum to the couplings chi_l of one LG family.

    l = 0 carries one supermode, every l > 0 two degenerate ones (C_l, S_l).
    Pairs are assigned to l in order of decreasing |value|.
    """
    vals = sorted((float(v) for v in spectrum), key=lambda v: (-abs(v), -v))
    if len(vals) != fam.n_modes:
        raise InvalidArgument(f"family {fam.f} holds {fam.n_modes} modes, spectrum has {len(vals)}")
    targets = {}
    pool = list(vals)
    if fam.l0 == 0:
        # the singleton is the value appearing an odd number of times
        for v in pool:
            same = [u for u in pool if abs(u - v) <= 1e-9 * max(abs(u), abs(v))]
            if len(same) % 2 == 1:
                targets[0] = v
                pool.remove(same[0])
                break
        else:
            raise InvalidArgument("no unpaired eigenvalue for the l = 0 mode")
    ls = [l for l in fam.l_values if l > 0]
    for l in ls:
        v = pool.pop(0)
        partner = next((u for u in pool if abs(u - v) <= 1e-9 * max(abs(u), abs(v))), None)
        if partner is None:
            raise InvalidArgument("spectrum is not pairwise degenerate as the hybrid modes require")
        pool.remove(partner)
        targets[l] = v
    return targets


def run_cluster(cfg: RunConfig, out: Path) -> list[Path]:
    out = Path(out)
    written = []
    if cfg.cluster is not None:
        section = cfg.cluster
        k = coupling_from_config(section)
        spectrum, basis = cluster.decompose_coupling(k)
        written.append(
            write_json(
                out / "spectrum.json",
                {
                    "coupling": k,
                    "spectrum": spectrum,
                    "basis": basis,
                    "reconstruction_error": float(np.linalg.norm(cluster.reconstruct(spectrum, basis) - k)),
                },
            )
        )
        match = cluster.match_spectrum_to_kernel(spectrum, section.sigma)
        payload = {
            "target": spectrum,
            "feasible": match.feasible,
            "scale": match.scale,
        }
        if match.feasible:
            analytic = supermodes.predict_modulated_spectrum(match.spec)
            payload.update(
                {
                    "spec": match.spec.to_dict(),
                    "structure": dict(zip(("has_b0_plus", "has_b0_minus", "n_plus", "n_minus"), match.structure)),
                    "analytic_spectrum": analytic.values(),
                    "valid": analytic.valid,
                    "round_trip_exact": cluster.spectrum_round_trip(match, spectrum),
                }
            )
            if section.verify_numeric:
                spec = match.spec
                axis = make_uniform_axis(cfg.grid.x_max or 6.0 / spec.sigma_plus, cfg.grid.n or 1024)
                sms = supermodes.solve_fredholm(kernellab.build_modulated(spec, axis))
                comparison = supermodes.compare_spectra(sms, analytic)
                payload["numeric"] = {
                    "leading": sms.eigenvalues[: len(spectrum)],
                    "max_relative_deviation": comparison.max_relative_deviation,
                }
        else:
            payload.update({"closest": match.closest, "max_relative_deviation": match.max_relative_deviation})
        if section.transverse_family is not None:
            fam = transverse.LGFamily(section.transverse_family)
            targets = transverse_targets(spectrum, fam)
            pump = transverse.synthesize_chi_targets(fam, targets, section.transverse_rhos)
            chis = {l: transverse.chi_overlap(fam, l, pump) for l in fam.l_values}
            payload["transverse"] = {
                "family": fam.f,
                "targets": targets,
                "pump": pump.to_dict(),
                "chi": chis,
            }
        written.append(write_json(out / "pump_spec.json", payload))
    if cfg.ghz is not None:
        g = cfg.ghz
        r = g.r_value
        v = cluster.ghz_covariance(g.n, r)
        var_x, var_p = cluster.joint_variances(v)
        report = {
            "n": g.n,
            "r": r,
            "squeeze_db": 20 * r / math.log(10),
            "var_sum_x": var_x,
            "max_var_p_diff": var_p,
            "vacuum_sum_x": float(g.n),
            "vacuum_p_diff": 2.0,
            "relative_to_vacuum": {"sum_x": var_x / g.n, "p_diff": var_p / 2.0},
            "uncertainty_min_eig": cluster.uncertainty_min_eig(v),
            "det": float(np.linalg.det(v)),
            "rotation": cluster.braunstein_rotation(g.n),
        }
        written.append(write_json(out / "ghz_report.json", report))
        grid = transverse.Grid2D(g.grid.half_width, g.grid.n)
        for f in g.profile_families:
            fam = transverse.LGFamily(f)
            if fam.n_modes < 2:
                raise ConfigError("profile families need at least two modes (f >= 1)")
            maps = cluster.entangled_mode_profiles(fam, cluster.braunstein_rotation(fam.n_modes), grid)
            for j, m in enumerate(maps):
                written.append(write_grid_csv(out / "profiles" / f"f{f}_mode{j + 1}.csv", grid.coords, m))
    return written
