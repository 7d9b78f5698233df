"""Command-line entry point: ``periodic-nls <subcommand> ...``.

Exit codes: 0 success, 2 domain / input error, 3 solver failure,
4 flow did not converge.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import branch as br
from . import flow as fl
from . import io
from . import spectral as sp
from . import waves as wv
from .elliptic import EllipticDomainError, complete_E, complete_K, jacobi
from .grid import Grid

EXIT_OK, EXIT_DOMAIN, EXIT_SOLVER, EXIT_NOCONV = 0, 2, 3, 4

# the seven flow experiments; parameters are resolved per k in preset_config
PRESETS = {
    "const-focusing": "focusing, periodic, m = pi^2/(8K) below the dn threshold -> constant",
    "dn": "focusing, periodic, m = E(k) -> dn",
    "dn-no-momentum": "as 'dn' without the momentum step",
    "const-defocusing": "defocusing, periodic, m = 2(K-E)/k^2 -> constant",
    "cn-antiperiodic": "focusing, half-anti-periodic, m = 2(E-(1-k^2)K)/k^2 -> cn",
    "plane-antiperiodic": "defocusing, half-anti-periodic, no momentum step -> plane-wave modulus",
    "sn-momentum": "defocusing, half-anti-periodic, momentum 0 -> sn",
}


def preset_config(name: str, k: float) -> dict:
    """Flow parameters and expected minimizer for a named experiment at modulus ``k``."""
    K, E = complete_K(k), complete_E(k)
    k2 = k * k
    m_sn = 2.0 * (K - E) / k2
    m_cn = 2.0 * (E - (1.0 - k2) * K) / k2
    table = {
        "const-focusing": dict(b=2.0, T=2 * K, m=math.pi**2 / (8 * K), anti=False, mom=True, ref=("constant",)),
        "dn": dict(b=2.0, T=2 * K, m=E, anti=False, mom=True, ref=("dn",)),
        "dn-no-momentum": dict(b=2.0, T=2 * K, m=E, anti=False, mom=False, ref=("dn",)),
        "const-defocusing": dict(b=-2 * k2, T=4 * K, m=m_sn, anti=False, mom=True, ref=("constant",)),
        "cn-antiperiodic": dict(b=2 * k2, T=4 * K, m=m_cn, anti=True, mom=True, ref=("cn",)),
        "plane-antiperiodic": dict(b=-2 * k2, T=4 * K, m=m_sn, anti=True, mom=False, ref=("plane", 1), max_iters=2000),
        "sn-momentum": dict(b=-2 * k2, T=4 * K, m=m_sn, anti=True, mom=True, ref=("sn",)),
    }
    if name not in table:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(table)}")
    return table[name]


def reference_field(ref: tuple, b: float, T: float, m: float, grid: Grid):
    kind = ref[0]
    if kind == "constant":
        return wv.profile_samples(wv.constant_wave(b, T, m), grid)
    if kind == "plane":
        return wv.profile_samples(wv.plane_wave(b, T, m, ref[1]), grid)
    return wv.profile_samples(wv.modulus_from_mass(kind, b, T, m), grid)


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _outdir(args) -> Path:
    p = Path(args.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _params(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


# --- subcommands ------------------------------------------------------------------


def cmd_elliptic(args) -> int:
    k = args.k
    K = complete_K(k) if k < 1 else math.inf
    E = complete_E(k)
    print(f"k = {k:.15g}\nK = {K:.15g}\nE = {E:.15g}")
    xs = _floats(args.x) if args.x else []
    if xs:
        print(f"{'x':>22} {'sn':>22} {'cn':>22} {'dn':>22}")
        for x in xs:
            s, c, d = jacobi(x, k)
            print(f"{x:22.15g} {s:22.15g} {c:22.15g} {d:22.15g}")
    return EXIT_OK


def cmd_minimize(args) -> int:
    out = _outdir(args)
    k = args.k
    if args.preset:
        pc = preset_config(args.preset, k)
    else:
        if None in (args.b, args.T, args.m):
            raise ValueError("without --preset, --b, --T and --m are required")
        pc = dict(b=args.b, T=args.T, m=args.m, anti=args.antiperiodic, mom=args.momentum, ref=None)
    for key, attr in (("b", "b"), ("T", "T"), ("m", "m")):
        if getattr(args, attr) is not None:
            pc[key] = getattr(args, attr)
    anti = pc["anti"] or args.antiperiodic
    mom = (pc["mom"] or args.momentum) and not args.no_momentum
    grid = Grid(args.L, pc["T"])

    if args.init == "file":
        if not args.init_file:
            raise ValueError("--init file needs --init-file")
        path = Path(args.init_file)
        u0 = io.read_field_json(path) if path.suffix == ".json" else io.read_field_csv(path, pc["T"])
        if u0.grid.L != grid.L:
            raise ValueError(f"initial field has L={u0.grid.L}, expected {grid.L}")
        u0 = grid.field(u0.values)
    else:
        u0 = fl.initial_datum(args.init, grid)

    ref = None
    if args.reference == "preset" and pc.get("ref"):
        ref = reference_field(pc["ref"], pc["b"], pc["T"], pc["m"], grid)
    elif args.reference not in ("preset", "none"):
        ref = grid.field(io.read_field_json(args.reference).values)

    cfg = fl.FlowConfig(
        m=pc["m"],
        b=pc["b"],
        dt=args.dt,
        p=args.p,
        max_iters=args.max_iters or pc.get("max_iters", 1000),
        tol=args.tol,
        enforce_momentum=mom,
        enforce_antiperiodic=anti,
        reference=ref,
        stop_rule=args.stop_rule,
        project_stage=args.project_stage,
    )
    stem = args.preset or "minimize"
    try:
        res = fl.run_flow(u0, cfg)
    except fl.SolverFailure as exc:
        print(f"solver failure at iteration {exc.iteration}: {exc}", file=sys.stderr)
        partial = getattr(exc, "partial", None)
        if partial is not None:
            io.write_history_csv(partial, out / f"{stem}_history.csv")
        return EXIT_SOLVER

    files = [out / f"{stem}_history.csv", out / f"{stem}_final.csv", out / f"{stem}_final.json"]
    io.write_history_csv(res, files[0])
    io.write_field_csv(res.final, files[1])
    io.write_field_json(res.final, files[2])
    flats = fl.plateaus(res)
    summary = {
        "iterations": res.iterations,
        "converged": res.converged,
        "stop_reason": res.stop_reason.value,
        "final_mass": res.history[-1].mass,
        "final_momentum": res.history[-1].momentum,
        "final_energy": res.history[-1].energy,
        "final_ref_distance": res.ref_distances[-1] if res.ref_distances else None,
        "plateaus": flats,
    }
    manifest = io.RunManifest(
        "minimize", {**_params(args), "resolved": {k_: v for k_, v in pc.items() if k_ != "ref"}},
        [str(f) for f in files], extra=summary,
    )
    manifest.write(out / f"{stem}.manifest.json")
    print(json.dumps(summary, indent=2))
    return EXIT_OK if res.converged else EXIT_NOCONV


def cmd_spectrum(args) -> int:
    out = _outdir(args)
    rep = sp.stability_report(args.family, args.k, args.n, args.L, args.fd_order, args.tol, args.labels)
    stem = f"spectrum_{args.family}_k{args.k:g}_n{args.n}"
    csv_path = out / f"{stem}.csv"
    sp.spectra_to_csv([rep], csv_path)
    summary = {
        "verdict": "stable" if rep.stable else "unstable",
        "tol": rep.tol,
        "max_real_part": rep.max_real_part,
        "unstable_count": rep.unstable_count,
        "real_pairs": rep.real_pairs,
        "unstable_clusters": [[c.real, c.imag, mult] for c, mult in rep.unstable_clusters],
        "quadrantal_defect": sp.quadrantal_defect(rep.eigenvalues),
    }
    if args.labels:
        pos = np.flatnonzero(rep.eigenvalues.real > rep.tol)
        summary["unstable_labels"] = [rep.subspace_labels[i] for i in pos]
    io.RunManifest("spectrum", _params(args), [str(csv_path)], extra=summary).write(out / f"{stem}.manifest.json")
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_bloch(args) -> int:
    out = _outdir(args)
    T = sp.bloch_period(args.family, args.k)
    thetas = np.arange(args.theta_count) * (2.0 * math.pi / T) / args.theta_count
    reps = sp.bloch_sweep(args.family, args.k, thetas, args.L, args.fd_order, args.tol, args.workers)
    stem = f"bloch_{args.family}_k{args.k:g}"
    csv_path = out / f"{stem}.csv"
    sp.spectra_to_csv(reps, csv_path)
    summary = {
        "T": T,
        "tol": reps[0].tol,
        "max_real_part": max(r.max_real_part for r in reps),
        "unstable_thetas": [r.theta for r in reps if not r.stable],
    }
    io.RunManifest("bloch", _params(args), [str(csv_path)], extra=summary).write(out / f"{stem}.manifest.json")
    print(json.dumps({k: v for k, v in summary.items() if k != "unstable_thetas"} | {"unstable_theta_count": len(summary["unstable_thetas"])}, indent=2))
    return EXIT_OK


def cmd_branch(args) -> int:
    out = _outdir(args)
    if args.k_sweep:
        lo, hi, num = args.k_sweep.split(":")
        ks = list(np.linspace(float(lo), float(hi), int(num)))
    else:
        ks = _floats(args.k)
    items = [br.coeffs(k) for k in ks]
    files = [out / "branch.json"]
    br.write_branch_json(items, files[0])
    summary = {"branch": [c.to_dict() for c in items]}
    if args.epsilons:
        eps = _floats(args.epsilons)
        tang = []
        for k in ks:
            rep = br.tangency_check(k, eps, args.L, args.fd_order)
            path = out / f"tangency_k{k:g}.csv"
            rep.write_csv(path)
            files.append(path)
            tang.append({"k": k, "ratios": [[r.real, r.imag] for r in rep.ratios], "orders": rep.orders(),
                         "mismatches": rep.mismatches})
        summary["tangency"] = tang
    io.RunManifest("branch", _params(args), [str(f) for f in files], extra=summary).write(out / "branch.manifest.json")
    print(json.dumps(summary, indent=2))
    return EXIT_OK


# --- parser -----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="periodic-nls", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("elliptic", help="K, E and Jacobi functions")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--x", default="", help="comma-separated arguments")
    p.set_defaults(func=cmd_elliptic)

    p = sub.add_parser("minimize", help="run the normalized gradient flow")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--k", type=float, default=0.9)
    p.add_argument("--b", type=float)
    p.add_argument("--T", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--p", type=float, default=0.0, help="target momentum")
    p.add_argument("--antiperiodic", action="store_true")
    p.add_argument("--momentum", action="store_true")
    p.add_argument("--no-momentum", action="store_true")
    p.add_argument("--init", choices=["a", "b", "c", "file"], default="c")
    p.add_argument("--init-file")
    p.add_argument("--dt", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--L", type=int, default=1024)
    p.add_argument("--reference", default="preset", help="'preset', 'none' or a field JSON file")
    p.add_argument("--stop-rule", choices=["auto", "successive", "reference", "both"], default="auto")
    p.add_argument("--project-stage", choices=["before", "after"], default="after")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("spectrum", help="spectrum of JL on n fundamental periods")
    p.add_argument("--family", choices=["sn", "cn", "dn"], required=True)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--fd-order", type=int, choices=[2, 4], default=4)
    p.add_argument("--L", type=int, default=512)
    p.add_argument("--tol", type=float)
    p.add_argument("--labels", action="store_true", help="label eigenvalues by symmetry subspace")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("bloch", help="Bloch-Floquet sweep on the period of u^2")
    p.add_argument("--family", choices=["sn", "cn", "dn"], required=True)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--theta-count", type=int, default=64)
    p.add_argument("--L", type=int, default=256)
    p.add_argument("--fd-order", type=int, choices=[2, 4], default=4)
    p.add_argument("--tol", type=float)
    p.add_argument("--workers", type=int, default=os.cpu_count())
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_bloch)

    p = sub.add_parser("branch", help="cn instability branch and tangency check")
    p.add_argument("--k", default="0.9", help="comma-separated moduli")
    p.add_argument("--k-sweep", help="lo:hi:num")
    p.add_argument("--epsilons", default="")
    p.add_argument("--L", type=int, default=512)
    p.add_argument("--fd-order", type=int, choices=[2, 4], default=4)
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_branch)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (EllipticDomainError, wv.BelowThresholdError, wv.ModulusRangeError, br.BranchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (fl.SolverFailure, sp.EigenSolverError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
