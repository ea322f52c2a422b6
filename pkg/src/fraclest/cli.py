"""Command-line front end.

One executable, subcommand style::

    fraclest gen-ic  --n 64 --energy 0.052 --peak-k 4 --seed 7 -o ic.vfld
    fraclest dns     --ic ic.vfld --nu 0.001 --t-end 5 --snap 2.0,3.0 --stats stats.csv
    fraclest filter  --in snap.vfld --ldelta 8 --out-filtered vbar.vfld --out-stress tau.vfld
    fraclest apriori --in snap.vfld --ldelta 8 --alpha 0.05:1.0:0.05 --report r.json
    fraclest smag    --in snap.vfld --ldelta 8 --report r.json
    fraclest kriging --samples s.csv --grid-ld 1:15:1 --grid-re 20:50:1 -o surf.csv

Every subcommand accepts ``--config cfg.json`` (flag values, lowest
precedence) and ``--dump-config cfg.json`` (write the resolved flags and
continue), so any run can be reproduced exactly.  Exit codes: 0 ok, 2 usage
or bad input, 3 solver blowup, 4 degenerate analysis, 5 surrogate failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from . import kriging as kriging_mod
from . import vfld
from .apriori import (evaluate_smagorinsky, pdf_compare, scatter_export,
                      sweep_alpha_against)
from .errors import (BlowupError, DegenerateFieldError, DegenerateTruthError,
                     SurrogateDataError, SurrogateFitError, ToolkitError)
from .filtering import BoxFilterSpec, true_sgs_divergence, true_sgs_stress
from .fractional import FsgsParams, entropy_bound, fsgs_divergence
from .grid import GridSpec, set_num_threads
from .smagorinsky import SmagorinskyParams, smagorinsky_divergence
from .solver import (LowShellForcing, SolverConfig, compute_stats,
                     generate_ic, run_decaying, run_forced)

STATS_COLUMNS = "time,K,eps,re_lambda,eta,kmax_eta,skew,flat,L_int,tau_L"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def parse_range(spec: str) -> list[float]:
    """Parse ``start:stop:step`` (stop inclusive) or a comma list."""
    if ":" in spec:
        start, stop, step = (float(p) for p in spec.split(":"))
        if step <= 0:
            raise ToolkitError(f"range step must be positive in {spec!r}")
        out = []
        v = start
        while v <= stop + 1e-9:
            out.append(round(v, 12))
            v += step
        return out
    return [float(p) for p in spec.split(",") if p]


def _alpha_grid(spec: str) -> list[float]:
    # alpha = 1 makes the closure coefficient vanish identically, so sweeps
    # stay inside the open interval
    return [a for a in parse_range(spec) if 0.0 < a < 1.0]


def _write_csv(path: str, header: str, rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_gen_ic(args) -> int:
    _require(args.out, "--out")
    grid = GridSpec(n=args.n, domain_length=args.lx)
    ic = generate_ic(grid, target_energy=args.energy, peak_k=args.peak_k,
                     seed=args.seed)
    vfld.write_field(args.out, ic, time=0.0, nu=args.nu, seed=args.seed)
    print(f"wrote {args.out} (n={args.n}, K={args.energy}, seed={args.seed})")
    return 0


def cmd_dns(args) -> int:
    _require(args.ic, "--ic")
    ic, header = vfld.read_field(args.ic)
    nu = args.nu if args.nu is not None else header.get("nu")
    if nu is None:
        raise ToolkitError("viscosity missing: pass --nu or use a header with nu")
    forcing = None
    if args.forcing == "shell":
        if args.power is None:
            raise ToolkitError("--forcing shell requires --power")
        forcing = LowShellForcing(power=args.power, k_f=args.kf)
    snap_times = tuple(float(s) for s in args.snap.split(",") if s) if args.snap else ()
    cfg = SolverConfig(grid=ic.grid, nu=nu, dt=args.dt, t_end=args.t_end,
                       forcing=forcing, seed=args.seed,
                       snapshot_times=snap_times, cfl=args.cfl,
                       stats_every=args.stats_every)
    runner = run_forced if forcing is not None else run_decaying
    snapshots, history = runner(cfg, ic)

    if args.stats:
        rows = [(s.time, s.k, s.eps, s.re_lambda, s.eta, s.k_max_eta,
                 s.deriv_skewness, s.deriv_flatness, s.integral_scale,
                 s.eddy_turnover) for s in history]
        _write_csv(args.stats, STATS_COLUMNS, rows)
    for t, snap in snapshots:
        path = f"{args.snap_prefix}_t{t:.6f}.vfld"
        vfld.write_field(path, snap, time=t, nu=nu, seed=args.seed)
        print(f"wrote {path}")
    last = history[-1]
    print(f"done: t={last.time:.6g} K={last.k:.6g} eps={last.eps:.6g} "
          f"Re_lambda={last.re_lambda:.6g} kmax_eta={last.k_max_eta:.3g}")
    return 0


def cmd_filter(args) -> int:
    _require(args.infile, "--in")
    if not args.out_filtered and not args.out_stress:
        raise ToolkitError("nothing to do: pass --out-filtered and/or --out-stress")
    v, header = vfld.read_field(args.infile)
    pair = true_sgs_stress(v, BoxFilterSpec(args.ldelta))
    t, nu = header.get("time"), header.get("nu")
    if args.out_filtered:
        vfld.write_field(args.out_filtered, pair.filtered, time=t, nu=nu)
        print(f"wrote {args.out_filtered}")
    if args.out_stress:
        vfld.write_field(args.out_stress, pair.residual_stress, time=t, nu=nu)
        print(f"wrote {args.out_stress}")
    return 0


def _apriori_common(args, model: str) -> int:
    _require(args.infile, "--in")
    v, header = vfld.read_field(args.infile)
    nu = args.nu if args.nu is not None else header.get("nu")
    if nu is None:
        raise ToolkitError("viscosity missing: pass --nu or use a header with nu")
    stats = compute_stats(v, nu, time=header.get("time", 0.0))
    case = args.case or args.infile

    if args.ldelta == 0:
        raise DegenerateTruthError("filter ratio 0 leaves no residual stress "
                                   "to correlate against")
    pair = true_sgs_stress(v, BoxFilterSpec(args.ldelta))
    vbar, tau_true = pair.filtered, pair.residual_stress
    truth = true_sgs_divergence(pair)

    report = {"case": case, "model": model, "re_lambda": stats.re_lambda,
              "l_delta": args.ldelta, "seed": args.seed}

    if model == "fsgs":
        base = FsgsParams(nu=nu, alpha=0.5, rho=args.rho,
                          agitation_speed_u=args.u_agitation, c_bar=args.c_bar)
        sweep = sweep_alpha_against(truth, tau_true, vbar, _alpha_grid(args.alpha),
                                    base, r_tol=args.r_tol, threads=args.threads or 1)
        opt = sweep.results[sweep.opt_index]
        params_opt = replace(base, alpha=sweep.alpha_opt)
        bound = entropy_bound(vbar, params_opt)
        model_div = fsgs_divergence(vbar, params_opt)
        report.update({
            "alphas": list(sweep.alphas),
            "rho": [list(r.rho) for r in sweep.results],
            "reg": [list(r.reg) for r in sweep.results],
            "rho_ij": opt.rho_ij,
            "alpha_opt": sweep.alpha_opt,
            "selection_note": sweep.selection_note,
            "entropy": {"mu_max": bound.mu_max, "satisfied": bound.satisfied},
        })
        if args.sweep_csv:
            rows = [(a, *r.rho, *r.reg) for a, r in zip(sweep.alphas, sweep.results)]
            _write_csv(args.sweep_csv, "alpha,rho1,rho2,rho3,reg1,reg2,reg3", rows)
    else:
        sp = SmagorinskyParams(cs=args.cs,
                               filter_width_l=BoxFilterSpec(args.ldelta).physical_width(v.grid))
        res = evaluate_smagorinsky(v, args.ldelta, sp)
        model_div = smagorinsky_divergence(vbar, sp)
        report.update({
            "alphas": [], "rho": [list(res.rho)], "reg": [list(res.reg)],
            "rho_ij": res.rho_ij, "alpha_opt": None,
            "selection_note": "not applicable (smagorinsky baseline)",
            "entropy": None,
        })

    if args.report:
        with open(args.report, "w", newline="\n") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {args.report}")
    if args.pdf:
        hist = pdf_compare(truth.components[0], model_div.components[0],
                           n_bins=args.pdf_bins)
        rows = zip(hist.bin_centers, hist.density_truth, hist.density_model)
        _write_csv(args.pdf, "bin_center,density_truth,density_model", rows)
    if args.scatter:
        sample = scatter_export(truth.components[0], model_div.components[0],
                                n_points=args.scatter_n, seed=args.seed)
        if sample.note:
            print(f"scatter: {sample.note}")
        _write_csv(args.scatter, "truth,model", zip(sample.truth, sample.model))
    rho1 = report["rho"][-1][0] if report["rho"] else float("nan")
    print(f"model={model} l_delta={args.ldelta} re_lambda={stats.re_lambda:.4g} "
          f"alpha_opt={report['alpha_opt']} rho1={rho1:.4g}")
    return 0


def cmd_apriori(args) -> int:
    return _apriori_common(args, args.model)


def cmd_smag(args) -> int:
    return _apriori_common(args, "smag")


def cmd_kriging(args) -> int:
    _require(args.samples, "--samples")
    _require(args.out, "--out")
    samples = _read_samples_csv(args.samples)
    theta = [float(t) for t in args.theta.split(",")] if args.theta else None
    model = kriging_mod.fit(samples, theta=theta, sigma2=args.sigma2,
                            nugget=args.nugget)
    rows = kriging_mod.predict_grid(model, parse_range(args.grid_ld),
                                    parse_range(args.grid_re))
    _write_csv(args.out, "l_delta,re_lambda,alpha_hat,variance", rows)
    print(f"wrote {args.out} ({len(rows)} points, theta={list(model.theta)}, "
          f"sigma2={model.sigma2:.4g}, nugget={model.nugget:g})")
    return 0


def _read_samples_csv(path: str) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            try:
                rows.append([float(p) for p in parts[:3]])
            except ValueError:
                continue  # header line
    if not rows:
        raise SurrogateDataError(f"{path}: no numeric sample rows")
    return np.asarray(rows)


def _require(value, flag: str) -> None:
    if value is None:
        raise UsageError(f"missing required option {flag}")


class UsageError(ToolkitError):
    pass


# ---------------------------------------------------------------------------
# parser plumbing
# ---------------------------------------------------------------------------

def _add_common(p) -> None:
    p.add_argument("--config", help="JSON file of flag values (lowest precedence)")
    p.add_argument("--dump-config", help="write resolved flags to a JSON file")
    p.add_argument("--threads", type=int, default=None,
                   help="cap internal FFT parallelism (default: FRACLEST_THREADS or 1)")
    p.add_argument("--log-level", default="info", choices=["debug", "info", "quiet"])


def _add_apriori_flags(p, with_model: bool) -> None:
    p.add_argument("--in", dest="infile", help="input velocity snapshot (VFLD1)")
    p.add_argument("--ldelta", type=float, default=8.0, help="filter-to-grid ratio")
    p.add_argument("--nu", type=float, default=None,
                   help="viscosity (default: snapshot header)")
    p.add_argument("--report", help="JSON report path")
    p.add_argument("--pdf", help="PDF comparison CSV path")
    p.add_argument("--pdf-bins", type=int, default=100)
    p.add_argument("--scatter", help="scatter sample CSV path")
    p.add_argument("--scatter-n", type=int, default=20000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--case", default=None, help="label recorded in the report")
    p.add_argument("--cs", type=float, default=0.17, help="Smagorinsky constant")
    if with_model:
        p.add_argument("--model", choices=["fsgs", "smag"], default="fsgs")
        p.add_argument("--alpha", default="0.05:0.95:0.05",
                       help="exponent grid start:stop:step or comma list")
        p.add_argument("--r-tol", type=float, default=0.25,
                       help="|R_1 - 1| tolerance in the optimum search")
        p.add_argument("--rho", type=float, default=1.0)
        p.add_argument("--u-agitation", type=float, default=502.0)
        p.add_argument("--c-bar", type=float, default=1500.0)
        p.add_argument("--sweep-csv", help="per-alpha sweep CSV path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fraclest",
        description="periodic-box turbulence toolkit with a fractional "
                    "subgrid closure and its a priori evaluation pipeline")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("gen-ic", help="generate a solenoidal random initial condition")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--lx", type=float, default=float(2.0 * np.pi))
    p.add_argument("--energy", type=float, default=0.052,
                   help="target kinetic energy")
    p.add_argument("--peak-k", type=int, default=4)
    p.add_argument("--nu", type=float, default=0.001,
                   help="viscosity recorded in the header")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", help="output VFLD1 path")
    _add_common(p)
    p.set_defaults(func=cmd_gen_ic)

    p = sub.add_parser("dns", help="integrate decaying or forced HIT")
    p.add_argument("--ic", help="initial condition (VFLD1)")
    p.add_argument("--nu", type=float, default=None)
    p.add_argument("--dt", type=float, default=2e-3)
    p.add_argument("--cfl", type=float, default=None,
                   help="cap dt at cfl*dx/max|v| (<= 0.5)")
    p.add_argument("--t-end", type=float, default=5.0)
    p.add_argument("--snap", default="", help="comma list of snapshot times")
    p.add_argument("--snap-prefix", default="snap")
    p.add_argument("--stats", help="statistics history CSV path")
    p.add_argument("--stats-every", type=int, default=5)
    p.add_argument("--forcing", choices=["none", "shell"], default="none")
    p.add_argument("--kf", type=int, default=2, help="forcing shell cutoff")
    p.add_argument("--power", type=float, default=None, help="injected power")
    p.add_argument("--seed", type=int, default=0)
    _add_common(p)
    p.set_defaults(func=cmd_dns)

    p = sub.add_parser("filter", help="box-filter a snapshot, extract residual stress")
    p.add_argument("--in", dest="infile")
    p.add_argument("--ldelta", type=float, default=8.0)
    p.add_argument("--out-filtered", help="filtered velocity VFLD1 path")
    p.add_argument("--out-stress", help="residual stress VFLD1 path (6 components)")
    _add_common(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("apriori", help="correlate closure models against filtered truth")
    _add_apriori_flags(p, with_model=True)
    _add_common(p)
    p.set_defaults(func=cmd_apriori)

    p = sub.add_parser("smag", help="apriori with the Smagorinsky baseline")
    _add_apriori_flags(p, with_model=False)
    _add_common(p)
    p.set_defaults(func=cmd_smag)

    p = sub.add_parser("kriging", help="fit the optimum-exponent surface")
    p.add_argument("--samples", help="CSV of l_delta,re_lambda,alpha_opt rows")
    p.add_argument("--grid-ld", default="1:15:1")
    p.add_argument("--grid-re", default="20:50:1")
    p.add_argument("--theta", default=None, help="length scales t1,t2 (default: auto)")
    p.add_argument("--sigma2", type=float, default=None)
    p.add_argument("--nugget", type=float, default=0.0)
    p.add_argument("-o", "--out", help="surface CSV path")
    _add_common(p)
    p.set_defaults(func=cmd_kriging)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    known, _ = parser.parse_known_args(argv)
    if getattr(known, "command", None) is None:
        parser.print_help()
        return 2
    if getattr(known, "config", None):
        try:
            with open(known.config) as fh:
                base = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return 2
        args = parser.parse_args(argv, namespace=argparse.Namespace(**base))
    else:
        args = parser.parse_args(argv)

    if args.threads:
        set_num_threads(args.threads)
    if args.dump_config:
        payload = {k: v for k, v in vars(args).items()
                   if k not in ("func", "config", "dump_config") and v is not None}
        with open(args.dump_config, "w", newline="\n") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")

    try:
        return args.func(args)
    except BlowupError as exc:
        print(f"error: {exc} (last stable time {exc.last_stable_time:.6g})",
              file=sys.stderr)
        return 3
    except DegenerateFieldError as exc:
        print(f"error: degenerate analysis: {exc}", file=sys.stderr)
        return 4
    except (SurrogateFitError, SurrogateDataError) as exc:
        print(f"error: surrogate: {exc}", file=sys.stderr)
        return 5
    except (ToolkitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
