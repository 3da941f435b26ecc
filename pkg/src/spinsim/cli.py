"""Command-line entry point.

Exit codes: 0 success, 2 a result did not converge (artifacts still written),
1 invalid input or a failed validation.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings

import numpy as np

from . import __version__, adrf, aht, cluster, hte, kernels, lattice, meanfield, semiinv
from .config import ConfigError, build_config, parse_cluster
from .output import Sink

EXIT_OK, EXIT_ERROR, EXIT_NONCONV = 0, 1, 2
SCENARIOS = ("lattice-sums", "semiinv-validate", "hte", "adrf", "meanfield", "aht",
             "validate-aht", "inp-walkthrough")
SEMIINV_JS = (0.5, 1.0, 1.5, 4.5)
SEMIINV_TOL = 1e-12


def _floats3(text):
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected x,y,z")
    return tuple(parts)


def _common(p):
    p.add_argument("--config", help="INI configuration file")
    p.add_argument("--out", help="output directory (or a .csv/.json file path)")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"))
    p.add_argument("--seed", type=int, help="reserved; nothing is stochastic")


def _lattice_opts(p):
    p.add_argument("--structure", choices=lattice.STRUCTURES)
    p.add_argument("--field", dest="field_dir", type=_floats3)
    p.add_argument("--r-max", dest="r_max", type=float)
    p.add_argument("--tol", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spinsim", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"spinsim {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lattice-sums", help="I2, I3, K3 and sum A^2 with shell diagnostics")
    _common(p)
    _lattice_opts(p)

    p = sub.add_parser("hte", help="thermodynamics from the high-temperature series")
    _common(p)
    _lattice_opts(p)
    p.add_argument("--j", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--order")

    p = sub.add_parser("adrf", help="spin temperature along a constant-entropy sweep")
    _common(p)
    _lattice_opts(p)
    p.add_argument("--j", type=float)
    p.add_argument("--polarization", type=float)
    p.add_argument("--order")
    p.add_argument("--n-delta", dest="n_delta", type=int)

    p = sub.add_parser("meanfield", help="ordering wavevector, T_c and critical polarizations")
    _common(p)
    _lattice_opts(p)
    p.add_argument("--I", dest="I", type=float)
    p.add_argument("--S", dest="S", type=float)
    p.add_argument("--gamma-I", dest="gamma_I", type=float)
    p.add_argument("--gamma-S", dest="gamma_S", type=float)
    p.add_argument("--pumping", choices=meanfield.PUMPING)
    p.add_argument("--grid", type=int)
    p.add_argument("--dump-bz", action="store_true", help="write the BZ scan as CSV")

    p = sub.add_parser("aht", help="cycle-averaged coupling matrix")
    _common(p)
    p.add_argument("--sequence")
    p.add_argument("--coupling", choices=("ising", "secular", "heisenberg"))
    p.add_argument("--path-steps", type=int, default=0,
                   help="also tabulate the modified-cycle interpolation path")

    p = sub.add_parser("validate", help="oracle comparisons")
    vsub = p.add_subparsers(dest="target", required=True)
    v = vsub.add_parser("semiinv", help="closed forms against the trace oracle")
    _common(v)
    v = vsub.add_parser("aht", help="stroboscopic vs averaged propagation on a cluster")
    _common(v)
    v.add_argument("--cluster", help="NxM: N I-spins and M S-spins")
    v.add_argument("--I", dest="I", type=float, help="spin of the I species")
    v.add_argument("--S", dest="S", type=float, help="spin of the S species")
    v.add_argument("--sequence")
    v.add_argument("--n-halvings", dest="n_halvings", type=int)

    p = sub.add_parser("inp-walkthrough", help="sums, T_c, critical polarization, ADRF, AHT")
    _common(p)

    p = sub.add_parser("run", help="run a named scenario from a config file")
    _common(p)
    p.add_argument("scenario")
    return ap


def _overrides(args) -> dict:
    keys = ("structure", "field_dir", "r_max", "tol", "I", "S", "gamma_I", "gamma_S", "j",
            "polarization", "order", "n_delta", "pumping", "grid", "sequence", "coupling",
            "cluster", "n_halvings", "eta", "beta", "out", "fmt", "seed")
    return {k: getattr(args, k) for k in keys if hasattr(args, k)}


def _provenance(cfg, command):
    return {
        "command": command,
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "config": cfg.as_dict(),
        "units": "energies in eps = (mu0/4pi) hbar^2 gamma gamma' / a^3, lengths in a",
    }


def _sink(cfg, command):
    out = cfg.out
    if out and out.endswith((".csv", ".json")):
        d = os.path.dirname(out) or "."
        s = Sink(d, _provenance(cfg, command))
        s.filename = os.path.basename(out)
        return s
    s = Sink(out, _provenance(cfg, command))
    s.filename = None
    return s


def _lattice_spec(cfg, structure=None):
    return lattice.LatticeSpec(structure or cfg.structure, field_dir=cfg.field_dir,
                               r_max=cfg.r_max, tol=cfg.tol)


def _homonuclear_sums(cfg):
    spec = _lattice_spec(cfg, "fcc")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", lattice.ConvergenceWarning)
        return lattice.compute_lattice_sums(spec)


# --- scenarios ---------------------------------------------------------------

def cmd_lattice_sums(cfg, sink) -> int:
    spec = _lattice_spec(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", lattice.ConvergenceWarning)
        sums = lattice.compute_lattice_sums(spec)
    summary = {}
    for res in sums.results() + ([sums.plain] if sums.plain else []):
        summary[res.name] = res.summary()
        sink.csv(f"shells_{res.name}.csv", ("shell_index", "radius", "count", "partial_sum"),
                 res.shell_rows(), {"sum": res.name, "units": res.units})
    summary["structure"] = spec.structure
    summary["field_dir"] = list(spec.field)
    sink.json(sink.filename or "lattice_sums.json", summary)
    return EXIT_OK if sums.converged else EXIT_NONCONV


def semiinv_table(js=SEMIINV_JS, etas=None):
    etas = np.linspace(-2, 2, 21) if etas is None else etas
    rows = []
    for j in js:
        for eta in etas:
            si = semiinv.semi_invariants(eta, j).as_dict()
            orc = semiinv.oracle_semi_invariants(eta, j)
            pairs = {
                "M1": "M1", "M2": "M2", "M3": "M3", "M2_pm": "M2_pm", "M2_mp": "M2_mp",
                "M3_zpm": "M3_zpm", "M3_pmz": "M3_zpm", "M3_zmp": "M3_zmp",
                "M3_mpz": "M3_zmp", "M3_pzm_comb": "M3_pzm_comb", "M3_mzp_comb": "M3_mzp_comb",
            }
            for okey, fkey in pairs.items():
                rows.append((j, float(eta), okey, si[fkey], orc[okey], abs(si[fkey] - orc[okey])))
    return rows


def cmd_semiinv_validate(cfg, sink) -> int:
    rows = semiinv_table()
    worst = max(r[5] for r in rows)
    sink.csv(sink.filename or "semiinv_validation.csv",
             ("j", "eta", "quantity", "closed_form", "oracle", "abs_error"), rows,
             {"max_abs_error": worst, "tolerance": SEMIINV_TOL}, echo=cfg.fmt == "csv")
    if cfg.fmt != "csv":
        sink.json("semiinv_summary.json", {"max_abs_error": worst, "tolerance": SEMIINV_TOL,
                                           "rows": len(rows), "passed": worst < SEMIINV_TOL},
                  echo=True)
    return EXIT_OK if worst < SEMIINV_TOL else EXIT_ERROR


def cmd_hte(cfg, sink) -> int:
    sums = _homonuclear_sums(cfg)
    # eta is given directly; beta0 = beta carries it unless beta = 0
    beta0 = cfg.beta if cfg.beta > 0 else 1.0
    delta = -cfg.eta / beta0
    state = hte.thermo_state(cfg.j, sums, cfg.beta, beta0, delta, cfg.order)
    state.eta = float(cfg.eta)
    out = state.as_dict()
    out["sums"] = sums.values()
    out["sums_converged"] = sums.converged
    sink.json(sink.filename or "thermo_state.json", out)
    return EXIT_OK


def cmd_adrf(cfg, sink) -> int:
    sums = _homonuclear_sums(cfg)
    grid = np.concatenate([np.logspace(math.log10(cfg.delta_max), math.log10(cfg.delta_min),
                                       cfg.n_delta - 1), [0.0]])
    curve = adrf.sweep(cfg.polarization, cfg.j, sums, grid, cfg.order,
                       metadata={"lattice": "fcc", "field_dir": list(sums.spec.field),
                                 "r_max": sums.spec.r_max})
    meta = {"initial_polarization": cfg.polarization, "j": cfg.j, "order": curve.order,
            "s_target": curve.s_target, "b_local": curve.b_local, "kTc": curve.kTc,
            "all_converged": curve.all_converged}
    sink.csv(sink.filename or "adrf_curve.csv",
             ("delta_over_BL", "T_over_Tc", "beta", "converged"), curve.rows(), meta,
             echo=cfg.fmt == "csv")
    if cfg.fmt != "csv":
        n_bad = sum(not p.converged for p in curve.points)
        first_bad = next((p.delta_over_BL for p in curve.points if not p.converged), None)
        sys.stdout.write(json.dumps(
            dict(meta, non_converged_points=n_bad, first_non_converged_delta_over_BL=first_bad),
            indent=2, sort_keys=True) + "\n")
    return EXIT_OK if curve.all_converged else EXIT_NONCONV


def cmd_meanfield(cfg, sink, dump_bz=False) -> int:
    if cfg.structure != "zincblende":
        raise ConfigError("meanfield needs --structure zincblende")
    spec = _lattice_spec(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", lattice.ConvergenceWarning)
        rep = meanfield.analyse(spec, cfg.I, cfg.S, cfg.gamma_I, cfg.gamma_S, cfg.pumping,
                                cfg.grid)
    out = rep.result.as_dict()
    out["scan"] = rep.scan.summary()
    out["sumA2_converged"] = rep.sumA2_converged
    if dump_bz:
        sink.csv("bz_scan.csv", ("kx", "ky", "kz", "reA", "imA", "absA"), rep.scan.rows(),
                 {"grid": cfg.grid})
    sink.json(sink.filename or "meanfield.json", out)
    ok = rep.scan.converged and rep.sumA2_converged
    return EXIT_OK if ok else EXIT_NONCONV


def _coupling(name):
    return {"ising": aht.CouplingMatrix3.ising, "secular": aht.CouplingMatrix3.secular,
            "heisenberg": aht.CouplingMatrix3.heisenberg}[name](1)


def cmd_aht(cfg, sink, path_steps=0) -> int:
    seq = aht.parse_sequence(cfg.sequence)
    c = _coupling(cfg.coupling)
    pair = "II" if cfg.coupling == "secular" else "IS"
    frames = aht.toggling_frames(seq)
    avg = aht.average_coupling(c, seq, pair)
    out = {
        "sequence": seq.name,
        "coupling": cfg.coupling,
        "pair": pair,
        "n_frames": len(frames),
        "cyclic": frames.cyclic,
        "matrix": avg.matrix.tolist(),
        "exact": avg.exact_strings(),
        "coefficients": avg.coefficients(),
    }
    if path_steps:
        out["interpolation_path"] = [
            {"tau1": p.tau1, "tau2": p.tau2, "ising_diag": list(p.ising_diag),
             "secular_scale": p.secular_scale, "operator_coefficient": p.operator_coefficient}
            for p in aht.interpolation_path(1.0, path_steps)
        ]
    sink.json(sink.filename or "aht.json", out)
    return EXIT_OK


def cmd_validate_aht(cfg, sink) -> int:
    n_i, n_s = parse_cluster(cfg.cluster)
    spec = cluster.heteronuclear_cluster(n_i, n_s, cfg.I, cfg.S)
    seq = aht.parse_sequence(cfg.sequence)
    cmp = cluster.compare_propagators(spec, seq, 1.0, cfg.n_halvings)
    meta = {"cluster": cfg.cluster, "I": cfg.I, "S": cfg.S, "sequence": seq.name, "fitted_order": cmp.order_label}
    sink.csv(sink.filename or "aht_convergence.csv", ("t_c", "n_cycles", "error"), cmp.rows,
             meta, echo=True)
    sys.stdout.write(f"# fitted order: {cmp.order_label}\n")
    return EXIT_OK


def cmd_inp_walkthrough(cfg, sink) -> int:
    status = EXIT_OK
    zb = lattice.LatticeSpec("zincblende", field_dir=cfg.field_dir, r_max=cfg.r_max, tol=cfg.tol)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", lattice.ConvergenceWarning)
        homo = lattice.compute_lattice_sums(lattice.LatticeSpec(
            "fcc", field_dir=cfg.field_dir, r_max=cfg.r_max, tol=cfg.tol))
        rep = meanfield.analyse(zb, cfg.I, cfg.S, cfg.gamma_I, cfg.gamma_S, "optical", cfg.grid)
    twin = meanfield.critical_polarization(0.5, 0.5, rep.sumA2, rep.scan.A0, "common-beta")
    if not (homo.converged and rep.sumA2_converged and rep.scan.converged):
        status = EXIT_NONCONV
    tc = {}
    for j in (0.5, cfg.I):
        bl = lattice.local_field_BL(homo.I2.value, j)
        tc[str(j)] = {"b_local": bl, "kTc": hte.tc_from_susceptibility(j, bl),
                      "kTc_over_bL": hte.tc_from_susceptibility(j, bl) / bl}
    curves = {}
    for j in (0.5, cfg.I):
        for order in ("highT", "G1", "G1+G2"):
            curve = adrf.sweep(cfg.polarization, j, homo, order=order)
            name = f"adrf_j{j:g}_{order.replace('+', '')}.csv"
            sink.csv(name, ("delta_over_BL", "T_over_Tc", "beta", "converged"), curve.rows(),
                     {"j": j, "order": order, "initial_polarization": cfg.polarization})
            bad = [p.delta_over_BL for p in curve.points if not p.converged]
            curves[f"j={j:g} {order}"] = {
                "converged_points": len(curve.points) - len(bad),
                "non_converged_points": len(bad),
                "non_convergence_below_delta_over_BL": max(bad) if bad else None,
            }
    ising = aht.average_coupling(aht.CouplingMatrix3.ising(1), aht.wahuha(), "IS")
    secular = aht.average_coupling(aht.CouplingMatrix3.secular(1), aht.wahuha(), "II")
    strobo = cluster.compare_propagators(cluster.heteronuclear_cluster(1, 1, cfg.I, cfg.S),
                                         aht.wahuha(), 1.0, 4)
    summary = {
        "lattice_sums": {**homo.values(), "sumA2": rep.sumA2},
        "fourier": rep.scan.summary(),
        "susceptibility_tc": tc,
        "meanfield_optical": rep.result.as_dict(),
        "meanfield_twin_spin_half_common_beta": {"p_c": twin.p_c_I},
        "headline": {
            "A0": round(rep.scan.A0, 2),
            "sumA2": round(rep.sumA2, 3),
            "p_c_S_percent": round(100 * rep.result.p_c_S),
            "p_c_I_percent": round(100 * rep.result.p_c_I),
            "p_c_twin_percent": round(100 * twin.p_c_I),
        },
        "adrf": curves,
        "aht": {
            "wahuha_ising": ising.exact_strings(),
            "wahuha_secular_max_abs": float(np.max(np.abs(secular.matrix))),
            "stroboscopic_order": strobo.order_label,
        },
    }
    sink.json(sink.filename or "inp_walkthrough.json", summary)
    return status


def _dispatch(name, cfg, args) -> int:
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    sink = _sink(cfg, name)
    if name == "lattice-sums":
        return cmd_lattice_sums(cfg, sink)
    if name == "semiinv-validate":
        return cmd_semiinv_validate(cfg, sink)
    if name == "hte":
        return cmd_hte(cfg, sink)
    if name == "adrf":
        return cmd_adrf(cfg, sink)
    if name == "meanfield":
        return cmd_meanfield(cfg, sink, getattr(args, "dump_bz", False))
    if name == "aht":
        return cmd_aht(cfg, sink, getattr(args, "path_steps", 0))
    if name == "validate-aht":
        return cmd_validate_aht(cfg, sink)
    return cmd_inp_walkthrough(cfg, sink)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        cfg = build_config(args.config, _overrides(args))
        if args.command == "run":
            name = args.scenario
        elif args.command == "validate":
            name = {"semiinv": "semiinv-validate", "aht": "validate-aht"}[args.target]
        else:
            name = args.command
        return _dispatch(name, cfg, args)
    except (ConfigError, ValueError, OSError) as exc:
        sys.stderr.write(f"spinsim: error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
