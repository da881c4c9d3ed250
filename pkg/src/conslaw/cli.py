"""Command-line front end.

Commands: greens, solve, picard, decay, verify-lemmas.  Configuration is a
flat INI file with sections [grid], [model], [solver], [experiment]; any key
can be overridden on the command line with --set section.key=value.  Each run
writes a manifest.json (config echo, versions, timing), a report.json with
the numeric verdicts, and norms.csv where a time series exists.  report.json
is byte-reproducible for a fixed config and seed; volatile data (timings,
versions) lives only in the manifest.

Exit codes: 0 all verdicts pass, 1 any verdict failure or incomplete report,
2 configuration or runtime error.
"""

import argparse
import configparser
import csv
import json
import struct
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .decay import DecayConfig, default_mu, run_decay_experiment
from .greens import envelope_sweep, greens_norms, make_kernel, sweep_stability
from .norms import (
    check_gagliardo_nirenberg,
    check_interpolation,
    check_product_estimate,
    hom_sobolev_norm,
    lp_norm,
    random_band_limited,
    sobolev_norm,
)
from .solver import BlowUpError, SolverConfig, picard_solve, solve
from .spectral import Field, ModelParams, forward, make_grid

SCHEMA = {
    "grid": {"dim": int, "N": int, "L": float},
    "model": {"s1": float, "s2": float, "theta": int, "flux_dir": str},
    "solver": {
        "dt": float,
        "T": float,
        "integrator": str,
        "dealias_rule": float,
        "record_every": int,
        "linear": bool,
        "snapshots": bool,
    },
    "experiment": {
        "id": str,
        "amplitude": float,
        "width": float,
        "t_min": float,
        "s": float,
        "mu": float,
        "l_values": str,
        "slope_tol": float,
        "l1_tol": float,
        "t_sweep": str,
        "s1_sweep": str,
        "delta": float,
        "R": float,
        "n_fields": int,
        "T0": float,
        "max_iter": int,
        "tol": float,
        "n_nodes": int,
    },
}

DEFAULTS = {
    "grid": {"dim": 1, "N": 1024, "L": 100.0},
    "model": {"s1": 0.25, "s2": 0.75, "theta": 2, "flux_dir": "1"},
    "solver": {
        "dt": 0.05,
        "T": 10.0,
        "integrator": "etdrk2",
        "dealias_rule": 2.0 / 3.0,
        "record_every": 10,
        "linear": False,
        "snapshots": False,
    },
    "experiment": {
        "id": "run",
        "amplitude": 0.8,
        "width": 1.0,
        "t_min": 5.0,
        "s": None,
        "mu": None,
        "l_values": "0,1",
        "slope_tol": 0.05,
        "l1_tol": 3.0,
        "t_sweep": "1,2,4,8,16,32,64,128",
        "s1_sweep": "",
        "delta": 0.5,
        "R": 3.0,
        "n_fields": 100,
        "T0": 0.1,
        "max_iter": 25,
        "tol": 1e-8,
        "n_nodes": 64,
    },
}


class ConfigError(Exception):
    pass


def _convert(section, key, raw):
    typ = SCHEMA[section][key]
    try:
        if typ is bool:
            if str(raw).strip().lower() in ("1", "true", "yes", "on"):
                return True
            if str(raw).strip().lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return typ(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"key [{section}] {key}: cannot parse {raw!r} as {typ.__name__}")


def parse_config(path=None, overrides=()):
    """Read the INI config, apply --set overrides, validate against the schema."""
    cfg = {sec: dict(vals) for sec, vals in DEFAULTS.items()}
    if path is not None:
        parser = configparser.ConfigParser()
        parser.optionxform = str  # keys like N and L are case-sensitive
        read = parser.read(path)
        if not read:
            raise ConfigError(f"cannot read config file {path}")
        for section in parser.sections():
            if section not in SCHEMA:
                raise ConfigError(f"unknown config section [{section}]")
            for key, raw in parser.items(section):
                if key not in SCHEMA[section]:
                    raise ConfigError(f"unknown key {key!r} in section [{section}]")
                cfg[section][key] = _convert(section, key, raw)
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        target, raw = item.split("=", 1)
        section, key = target.split(".", 1)
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown override target {target!r}")
        cfg[section][key] = _convert(section, key, raw)
    return cfg


def _floats(raw):
    return tuple(float(tok) for tok in str(raw).split(",") if str(tok).strip())


def build_model(cfg) -> ModelParams:
    m = cfg["model"]
    return ModelParams(s1=m["s1"], s2=m["s2"], theta=m["theta"],
                       flux_dir=_floats(m["flux_dir"]))


def hypothesis_warnings(cfg, command):
    """Human-readable warnings for every violated decay-theory hypothesis."""
    model = build_model(cfg)
    dim = cfg["grid"]["dim"]
    out = []
    if not model.s2 > model.s1:
        out.append(f"warning: s2={model.s2} <= s1={model.s1} violates the s2 > s1 "
                   "well-posedness hypothesis")
    tmax = model.theta_max(dim)
    if model.theta > tmax:
        out.append(f"warning: theta={model.theta} exceeds the admissible power "
                   f"theta_max={tmax:.4g} for n={dim}, s1={model.s1}, s2={model.s2}")
    if command == "decay" and model.s1 >= 1:
        out.append(f"warning: s1={model.s1} >= 1 is the regularity-loss regime; "
                   "no decay verdict applies")
    return out


def write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_norms_csv(path: Path, times, history: dict):
    cols = sorted(history)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t"] + cols)
        for i, t in enumerate(times):
            wr.writerow([f"{t:.12g}"] + [f"{history[c][i]:.12g}" for c in cols])


def write_snapshot(path: Path, field: Field, t: float):
    """Flat binary snapshot: int32 dim, int32 N, float64 L, float64 t (little
    endian), then the row-major float64 sample payload."""
    g = field.grid
    with open(path, "wb") as fh:
        fh.write(struct.pack("<iidd", g.dim, g.N, g.L, t))
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_snapshot(path):
    with open(path, "rb") as fh:
        dim, N, L, t = struct.unpack("<iidd", fh.read(24))
        payload = np.frombuffer(fh.read(), dtype="<f8").reshape((N,) * dim)
    return make_grid(dim, N, L), payload, t


def cmd_greens(cfg, out: Path, seed: int):
    grid = make_grid(**cfg["grid"])
    exp = cfg["experiment"]
    ts = _floats(exp["t_sweep"])
    s1s = _floats(exp["s1_sweep"]) or (cfg["model"]["s1"],)
    rows, verdicts = [], {}
    for s1 in s1s:
        series = {"L1": [], "gradL1": [], "L2": []}
        for t in ts:
            norms = greens_norms(make_kernel(grid, t, s1))
            for key, val in norms.items():
                rows.append((t, f"s1={s1:g}:{key}", val))
            series["L1"].append(norms["L1"])
            series["gradL1"].append(norms["gradL1"] * np.sqrt(t))
            series["L2"].append(norms["L2"] * t ** (grid.dim / 4.0))
        factors = {k: max(v) / min(v) for k, v in series.items()}
        env = {}
        if s1 < 1:
            for part in ("G1", "G3"):
                reps = envelope_sweep(grid, s1, ts, part=part,
                                      delta=exp["delta"], R=exp["R"])
                stab = sweep_stability(reps)
                env[part] = {"ratios": list(stab.ratios),
                             "growth_factor": stab.growth_factor,
                             "spread_factor": stab.spread_factor}
                for t, r in zip(ts, stab.ratios):
                    rows.append((t, f"s1={s1:g}:envelope_{part}", r))
        verdicts[f"s1={s1:g}"] = {
            "mass_factor": factors["L1"],
            "grad_mass_factor": factors["gradL1"],
            "l2_factor": factors["L2"],
            "envelopes": env,
            "pass": bool(
                factors["L1"] < 1.5 and factors["gradL1"] < 2.0 and factors["L2"] < 2.0
                and all(e["growth_factor"] < 2.0 for e in env.values())
            ),
        }
    with open(out / "norms.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["t", "quantity", "value"])
        for t, q, v in rows:
            wr.writerow([f"{t:.12g}", q, f"{v:.12g}"])
    ok = all(v["pass"] for v in verdicts.values())
    write_json(out / "report.json", {"command": "greens", "t_sweep": list(ts),
                                     "verdicts": verdicts, "all_pass": ok})
    return 0 if ok else 1


def cmd_solve(cfg, out: Path, seed: int):
    grid = make_grid(**cfg["grid"])
    model = build_model(cfg)
    sv, exp = cfg["solver"], cfg["experiment"]
    scfg = SolverConfig(model=model, dt=sv["dt"], T=sv["T"], integrator=sv["integrator"],
                        dealias_rule=sv["dealias_rule"], record_every=sv["record_every"],
                        linear=sv["linear"], store_snapshots=sv["snapshots"])
    r2 = sum(x**2 for x in grid.x_mesh)
    u0 = Field(grid, exp["amplitude"] * np.exp(-r2 / exp["width"] ** 2))
    try:
        traj = solve(u0, scfg)
    except BlowUpError as exc:
        write_json(out / "report.json", {"command": "solve", "blow_up": str(exc),
                                         "all_pass": False})
        return 1
    write_norms_csv(out / "norms.csv", traj.times, traj.norm_history)
    if traj.snapshots is not None:
        snapdir = out / "snapshots"
        snapdir.mkdir(exist_ok=True)
        for i, (t, snap) in enumerate(zip(traj.times, traj.snapshots)):
            write_snapshot(snapdir / f"snap_{i:05d}.bin", snap, t)
    mean = traj.norm_history["mean"]
    hs2 = traj.norm_history["Hs2"]
    mean_drift = float(np.max(np.abs(mean - mean[0])) / max(abs(mean[0]), 1e-300))
    mono = bool(np.all(np.diff(hs2) <= 1e-10 * hs2[0]))
    ok = mean_drift < 1e-9 and mono
    write_json(out / "report.json", {
        "command": "solve",
        "mean_drift": mean_drift,
        "hs2_monotone": mono,
        "t_wrap": traj.t_wrap if np.isfinite(traj.t_wrap) else None,
        "resolution_warnings": len(traj.warnings),
        "all_pass": ok,
    })
    return 0 if ok else 1


def cmd_picard(cfg, out: Path, seed: int):
    grid = make_grid(**cfg["grid"])
    model = build_model(cfg)
    exp = cfg["experiment"]
    r2 = sum(x**2 for x in grid.x_mesh)
    u0 = Field(grid, exp["amplitude"] * np.exp(-r2 / exp["width"] ** 2))
    res = picard_solve(u0, exp["T0"], model, max_iter=exp["max_iter"], tol=exp["tol"],
                       n_nodes=exp["n_nodes"])
    contracting = all(k < 1 for k in res.factors[1:])
    ok = res.converged and contracting
    write_json(out / "report.json", {
        "command": "picard",
        "T0": exp["T0"],
        "distances": res.distances,
        "contraction_factors": res.factors,
        "converged": res.converged,
        "contracting": contracting,
        "all_pass": ok,
    })
    return 0 if ok else 1


def cmd_decay(cfg, out: Path, seed: int):
    g, sv, exp = cfg["grid"], cfg["solver"], cfg["experiment"]
    dcfg = DecayConfig(
        dim=g["dim"], N=g["N"], L=g["L"], model=build_model(cfg),
        amplitude=exp["amplitude"], width=exp["width"], dt=sv["dt"], T=sv["T"],
        record_every=sv["record_every"], linear=sv["linear"], t_min=exp["t_min"],
        s=exp["s"], mu=exp["mu"], l_values=_floats(exp["l_values"]),
        slope_tol=exp["slope_tol"], l1_tol=exp["l1_tol"],
        dealias_rule=sv["dealias_rule"], integrator=sv["integrator"],
        experiment_id=exp["id"],
    )
    report, traj = run_decay_experiment(dcfg)
    if traj is not None:
        write_norms_csv(out / "norms.csv", traj.times, traj.norm_history)
    write_json(out / "report.json", report.to_dict())
    return 0 if report.all_pass else 1


def cmd_verify_lemmas(cfg, out: Path, seed: int):
    grid = make_grid(**cfg["grid"])
    exp = cfg["experiment"]
    n_fields = exp["n_fields"]
    s = exp["s"] if exp["s"] is not None else 2.0
    rng = np.random.default_rng(seed)
    interp_viol = equiv_viol = 0
    equiv_ratios, prod_consts, agmon = [], [], []
    lo_bound = min(1.0, 2.0 ** (s - 1.0))
    hi_bound = max(1.0, 2.0 ** (s - 1.0))
    for _ in range(n_fields):
        f = random_band_limited(grid, rng)
        F = forward(f)
        if not check_interpolation(F, 0.5, 2.0).ok:
            interp_viol += 1
        hs2 = float(sobolev_norm(F, s)) ** 2
        split_sum = float(lp_norm(f, 2)) ** 2 + float(hom_sobolev_norm(F, s)) ** 2
        r = hs2 / split_sum
        equiv_ratios.append(r)
        if not lo_bound * (1 - 1e-9) <= r <= hi_bound * (1 + 1e-9):
            equiv_viol += 1
        rep = check_product_estimate(f, f, 1.0, (2, np.inf, 2, 2, np.inf))
        prod_consts.append(rep.ratio)
        if grid.dim == 1:
            agmon.append(check_gagliardo_nirenberg(f, 0, 1, np.inf, 2, 2).ratio)
    pc = [c for c in prod_consts if c > 0]
    prod_spread = max(pc) / min(pc) if pc else float("inf")
    ok = interp_viol == 0 and equiv_viol == 0 and np.isfinite(prod_spread) and prod_spread < 10
    write_json(out / "report.json", {
        "command": "verify-lemmas",
        "n_fields": n_fields,
        "s": s,
        "interpolation_violations": interp_viol,
        "equivalence": {"c0": 1.0 / max(equiv_ratios), "c1": 1.0 / min(equiv_ratios),
                        "ratio_min": min(equiv_ratios), "ratio_max": max(equiv_ratios),
                        "violations": equiv_viol},
        "product_constant": {"min": min(pc), "max": max(pc), "spread": prod_spread},
        "agmon_ratio_max": max(agmon) if agmon else None,
        "all_pass": ok,
    })
    return 0 if ok else 1


COMMANDS = {
    "greens": cmd_greens,
    "solve": cmd_solve,
    "picard": cmd_picard,
    "decay": cmd_decay,
    "verify-lemmas": cmd_verify_lemmas,
}


def dispatch(command, cfg, out: Path, seed: int) -> int:
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()
    code = COMMANDS[command](cfg, out, seed)
    manifest = {
        "command": command,
        "config": cfg,
        "seed": seed,
        "version": __version__,
        "numpy_version": np.__version__,
        "elapsed_seconds": time.time() - t0,
    }
    write_json(out / "manifest.json", manifest)
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="conslaw",
        description="Pseudospectral simulation and verification suite for a "
                    "nonlocal conservation law on a periodic box.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", type=Path, default=None, help="INI config file")
    parser.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1,
                        help="accepted for interface compatibility; compute is single-threaded")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="SECTION.KEY=VALUE", help="override a config key")
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(args.config, args.overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    for line in hypothesis_warnings(cfg, args.command):
        print(line, file=sys.stderr)
    try:
        return dispatch(args.command, cfg, args.out, args.seed)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
