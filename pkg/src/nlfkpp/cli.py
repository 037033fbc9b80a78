"""Command-line front end.

    nlfkpp <command> [--config FILE] [--out DIR] [--key value ...]

Commands: evolve, dispersion, tongues, steady, asymptote, tw, repro.  A
config file holds ``key = value`` lines (``#`` starts a comment); flags
override it.  Every run writes ``manifest.txt`` echoing the resolved config.
Exit status is 0 on success, 2 on a usage error and 1 on a numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import math
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__

COMMANDS = ("evolve", "dispersion", "tongues", "steady", "asymptote", "tw", "repro")
REPRO_TARGETS = ("FIG1", "FIG2", "FIG4", "FIG5", "FIG6", "FIG5_1", "FIG5_5", "FIG5_8",
                 "TABLE_CONSTANTS")


class UsageError(ValueError):
    pass


# --- typed parameters -------------------------------------------------------

def _float(s):
    v = float(s)
    if not math.isfinite(v):
        raise ValueError("not a finite number")
    return v


def _int(s):
    f = float(s)
    if f != int(f):
        raise ValueError("not an integer")
    return int(f)


def _bool(s):
    t = str(s).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError("not a boolean")


def _floats(s):
    return [_float(p) for p in str(s).split(",") if p.strip()]


def _ints(s):
    return [_int(p) for p in str(s).split(",") if p.strip()]


def _choice(*options):
    def conv(s):
        t = str(s).strip()
        if t not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return t
    conv.__name__ = "choice"
    return conv


def _optional(conv):
    def wrapped(s):
        return None if str(s).strip().lower() in ("", "auto", "none") else conv(s)
    wrapped.__name__ = getattr(conv, "__name__", "value")
    return wrapped


@dataclass(frozen=True)
class Param:
    conv: object
    default: object = None
    check: object = None  # predicate on the typed value
    rule: str = ""
    required: bool = False


def _pos(v):
    return v is None or v > 0


def _nonneg(v):
    return v >= 0


def _all_pos(vs):
    return all(v > 0 for v in vs)


SCHEMAS: dict[str, dict[str, Param]] = {
    "evolve": {
        "D": Param(_float, check=_pos, rule="> 0", required=True),
        "scheme": Param(_choice("u", "w"), "u"),
        "L": Param(_float, 10.0, _pos, "> 0"),
        "n": Param(_int, 1000, lambda v: v >= 3, ">= 3"),
        "t_end": Param(_float, 10.0, _nonneg, ">= 0"),
        "init": Param(_choice("bump", "gaussian"), "bump"),
        "A": Param(_float, 0.01, _pos, "> 0"),
        "w": Param(_float, 0.1, _pos, "> 0"),
        "output_interval": Param(_float, 1.0, _pos, "> 0"),
        "max_change": Param(_float, 1e-2, _pos, "> 0"),
        "dt_max": Param(_float, 0.1, _pos, "> 0"),
        "snapshots": Param(_floats, (), lambda v: all(t >= 0 for t in v), "times >= 0"),
    },
    "dispersion": {
        "D": Param(_float, check=_pos, rule="> 0", required=True),
        "k_max": Param(_float, 30.0, _pos, "> 0"),
        "n_k": Param(_int, 300, lambda v: v >= 2, ">= 2"),
    },
    "tongues": {
        "i_max": Param(_int, 4, lambda v: v >= 1, ">= 1"),
        "n_D": Param(_int, 50, lambda v: v >= 2, ">= 2"),
        "D_min_ratio": Param(_float, 1e-6, lambda v: 0 < v < 1, "in (0, 1)"),
    },
    "steady": {
        "lambda": Param(_float, check=_pos, rule="> 0", required=True),
        "D": Param(_float, check=_pos, rule="> 0", required=True),
        "n": Param(_optional(_int), None, lambda v: v is None or v >= 64, ">= 64"),
        "branch": Param(_bool, False),
        "lam_steps": Param(_int, 200, lambda v: v >= 4, ">= 4"),
    },
    "asymptote": {
        "X_L": Param(_float, 8.0, lambda v: v >= 6, ">= 6"),
        "X_R": Param(_float, 6.0, lambda v: v >= 6, ">= 6"),
        "n": Param(_int, 4000, lambda v: v >= 2000, ">= 2000"),
        "lam_bars": Param(_floats, (0.5, 1.0, 2.0, 4.0, 5.8, 8.0, 10.0, 50.0, 100.0), _all_pos, "all > 0"),
        "lambdas": Param(_floats, (0.6, 0.75, 0.9), lambda v: all(0.5 < x < 1 for x in v), "in (1/2, 1)"),
    },
    "tw": {
        "D": Param(_float, check=_pos, rule="> 0", required=True),
        "v": Param(_optional(_float), None, _pos, "> 0"),
        "L_m": Param(_optional(_float), None, lambda v: v is None or v >= 10, ">= 10"),
        "L_p": Param(_optional(_float), None, _pos, "> 0"),
        "n": Param(_optional(_int), None, lambda v: v is None or v >= 10, ">= 10"),
        "roots": Param(_ints, (1, -1, 2, -2, 3, -3), lambda v: 0 not in v, "nonzero"),
        "D_min": Param(_float, 1e-6, _pos, "> 0"),
        "D_max": Param(_float, 1.0, _pos, "> 0"),
        "n_D": Param(_int, 200, lambda v: v >= 2, ">= 2"),
    },
    "repro": {
        "target": Param(_choice(*REPRO_TARGETS), required=True),
    },
}


@dataclass
class RunConfig:
    command: str
    params: dict
    output_dir: Path
    sources: dict = field(default_factory=dict)  # key -> "default" | "file" | "flag"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nlfkpp", description="Nonlocal Fisher-KPP solvers")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for cmd, schema in SCHEMAS.items():
        sp = sub.add_parser(cmd)
        sp.add_argument("--config", default=None)
        sp.add_argument("--out", default=None)
        for key in schema:
            sp.add_argument(f"--{key}", dest=key, default=argparse.SUPPRESS)
    return p


def read_config_file(path) -> dict[str, str]:
    """Flat ``key = value`` lines; ``#`` comments and blank lines ignored."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k] = v
    return out


def _typed(cmd, key, raw):
    prm = SCHEMAS[cmd][key]
    try:
        val = prm.conv(raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"--{key}: cannot parse {raw!r}: {exc}") from None
    if prm.check is not None and not prm.check(val):
        raise UsageError(f"--{key}: value {raw!r} violates constraint {prm.rule}")
    return val


def parse_config(argv, config_file=None) -> RunConfig:
    """Resolve a command line (and optional config file) into a RunConfig."""
    ns = vars(_build_parser().parse_args(list(argv)))
    cmd = ns.pop("command")
    schema = SCHEMAS[cmd]
    cfg_path = ns.pop("config") or config_file
    out = ns.pop("out")
    file_vals = read_config_file(cfg_path) if cfg_path else {}
    if "out" in file_vals:
        out = out or file_vals.pop("out")
    unknown = sorted(set(file_vals) - set(schema))
    if unknown:
        raise UsageError(f"unknown keys for {cmd}: {', '.join(unknown)}")
    params, sources = {}, {}
    for key, prm in schema.items():
        if key in ns:
            params[key], sources[key] = _typed(cmd, key, ns[key]), "flag"
        elif key in file_vals:
            params[key], sources[key] = _typed(cmd, key, file_vals[key]), "file"
        elif prm.required:
            raise UsageError(f"--{key} is required for {cmd}")
        else:
            params[key], sources[key] = prm.default, "default"
    if cmd == "tw" and params["D_min"] >= params["D_max"]:
        raise UsageError("--D_min must be below --D_max")
    if cmd == "tw" and params["v"] is not None and params["v"] < 2 * math.sqrt(params["D"]):
        raise UsageError("--v must be at least 2 sqrt(D)")
    if cmd == "evolve" and params["scheme"] == "w" and params["init"] != "gaussian":
        if sources["init"] == "default":
            params["init"] = "gaussian"
        else:
            raise UsageError("the log-form scheme needs --init gaussian")
    return RunConfig(cmd, params, Path(out or f"nlfkpp_{cmd}"), sources)


# --- output -----------------------------------------------------------------

def fmt(v) -> str:
    """17 significant digits, so values round-trip exactly."""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for r in rows:
            wr.writerow([fmt(v) for v in r])
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _value_text(v):
    if isinstance(v, (list, tuple)):
        return ",".join(_value_text(x) for x in v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))  # shortest text that reads back to the same float
    return "auto" if v is None else fmt(v)


def write_manifest(cfg: RunConfig, files, extra=None) -> Path:
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    lines = [
        f"command = {cfg.command}",
        f"version = {__version__}",
        f"created = {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}",
        f"python = {platform.python_version()}",
        f"numpy = {np.__version__}",
        f"output_dir = {cfg.output_dir}",
    ]
    lines += [f"{k} = {_value_text(v)}  # {cfg.sources.get(k, 'default')}"
              for k, v in cfg.params.items()]
    for k, v in (extra or {}).items():
        lines.append(f"{k} = {_value_text(v)}")
    lines += [f"file = {Path(f).name}" for f in files]
    path = cfg.output_dir / "manifest.txt"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def workers() -> int:
    """Worker cap from ``NLFKPP_THREADS`` (default: CPU count)."""
    raw = os.environ.get("NLFKPP_THREADS", "")
    try:
        n = int(raw) if raw.strip() else (os.cpu_count() or 1)
    except ValueError:
        raise UsageError("NLFKPP_THREADS must be an integer") from None
    return max(1, n)


def parallel_map(fn, items):
    """Order-preserving map over independent points."""
    items = list(items)
    nw = min(workers(), len(items))
    if nw <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=nw) as ex:
        return list(ex.map(fn, items))


# --- commands ---------------------------------------------------------------

def _evolve_cfg(p):
    from .evolve import EvolveConfig, InitialData, InitialKind, Scheme
    init = InitialData(InitialKind.GAUSSIAN if p["init"] == "gaussian" else InitialKind.COMPACT_BUMP,
                       p["A"], p["w"])
    cfg = EvolveConfig(D=p["D"], L=p["L"], n=p["n"], t_end=p["t_end"], dt_max=p["dt_max"],
                       max_change=p["max_change"],
                       scheme=Scheme.W_FORM if p["scheme"] == "w" else Scheme.U_FORM,
                       output_interval=p["output_interval"])
    return init, cfg


def cmd_evolve(cfg: RunConfig):
    from .evolve import run
    p = cfg.params
    init, ecfg = _evolve_cfg(p)
    res = run(init, ecfg, snapshot_times=p["snapshots"])
    d = res.diagnostics.as_arrays()
    files = [write_csv(cfg.output_dir / "diagnostics.csv",
                       ["time", "front", "wavelength", "u_max", "mass"],
                       zip(d["times"], d["front_position"], d["wavelength"], d["u_max"], d["mass"]))]
    log_form = p["scheme"] == "w"
    col = "log10_u" if log_form else "u"
    snaps = dict(res.snapshots)
    snaps.setdefault(ecfg.t_end, res.final)
    for t, f in sorted(snaps.items()):
        vals = f.values / math.log(10) if log_form else f.values
        files.append(write_csv(cfg.output_dir / f"snapshot_t{fmt(t)}.csv", ["x", col],
                               zip(f.grid.x, vals)))
    write_manifest(cfg, files, {"steps": res.steps})
    return files


def cmd_dispersion(cfg: RunConfig):
    from .dispersion import (StableEquilibriumError, k_zero, most_unstable_k, threshold,
                             turning_point, w0, w1)
    p = cfg.params
    k = np.linspace(p["k_max"] / p["n_k"], p["k_max"], p["n_k"])
    files = [write_csv(cfg.output_dir / "dispersion.csv", ["k", "w0", "w1"],
                       zip(k, w0(k, p["D"]), w1(k, p["D"])))]
    rows = [("Delta_1", threshold(1)), ("delta_1", turning_point(1)), ("k0", k_zero())]
    try:
        km, wm = most_unstable_k(p["D"])
        rows += [("k_m", km), ("w1_min", wm), ("lambda_m", 2 * math.pi / km)]
    except StableEquilibriumError:
        rows.append(("k_m", "none (u = 1 stable)"))
    files.append(write_csv(cfg.output_dir / "constants.csv", ["name", "value"], rows))
    write_manifest(cfg, files)
    return files


def cmd_tongues(cfg: RunConfig):
    from .dispersion import build_atlas
    p = cfg.params
    atlas = build_atlas(p["i_max"], p["n_D"], p["D_min_ratio"])
    rows = list(atlas.rows())
    files = [write_csv(cfg.output_dir / "tongues.csv",
                       ["i", "D", "lambda_minus", "lambda_plus", "Delta_i", "delta_2i_minus_1"],
                       rows)]
    write_manifest(cfg, files)
    return files


def cmd_steady(cfg: RunConfig):
    from .dispersion import omega_membership
    from .steady import continue_branch, residual, solve_at
    p = cfg.params
    lam, D = p["lambda"], p["D"]
    st = solve_at(lam, D, n=p["n"])
    x, F = st.full_period()
    files = [write_csv(cfg.output_dir / "profile.csv", ["x", "F"], zip(x, F))]
    summary = [("lambda", lam), ("D", D), ("u_max", st.u_max), ("alpha", st.alpha),
               ("mass", st.mass), ("residual", float(np.max(np.abs(residual(st))))),
               ("newton_iters", st.newton_iters)]
    files.append(write_csv(cfg.output_dir / "summary.csv", ["name", "value"], summary))
    if p["branch"]:
        i = omega_membership(lam, D).tongue_index
        if i is None:
            raise ValueError(f"(lambda, D) = ({lam}, {D}) lies outside every tongue")
        pts = continue_branch(i, D, lam_steps=p["lam_steps"], n=p["n"])
        files.append(write_csv(cfg.output_dir / "branch.csv",
                               ["lambda", "D", "alpha", "u_max", "converged"],
                               [(q.lam, q.D, q.alpha, q.u_max, q.converged) for q in pts]))
    write_manifest(cfg, files)
    return files


def _spike_row(lb):
    from .asymptote import spike_family
    return spike_family([lb])[0]


def cmd_asymptote(cfg: RunConfig):
    from .asymptote import L_STAR_REFERENCE, solve_transition_layer, wkb_phi0
    p = cfg.params
    layer = solve_transition_layer(p["X_L"], p["X_R"], p["n"])
    files = [write_csv(cfg.output_dir / "transition_layer.csv", ["X", "psi"],
                       zip(layer.X, layer.psi))]
    spikes = parallel_map(_spike_row, p["lam_bars"])
    rows = []
    for s in spikes:
        files.append(write_csv(cfg.output_dir / f"spike_lambar{fmt(s.lam_bar)}.csv", ["X", "v"],
                               zip(s.X, s.v)))
        rows.append((s.lam_bar, s.v0, s.lam_bar / 48, math.pi / (2 * s.lam_bar), s.I_tot))
    files.append(write_csv(cfg.output_dir / "spike_peaks.csv",
                           ["lam_bar", "v0", "small_lam_bar_asymptote", "large_lam_bar_asymptote",
                            "I_tot"], rows))
    summary = [("l_star", layer.l), ("l_star_reference", L_STAR_REFERENCE)]
    summary += [(f"Phi0({fmt(lam)})", wkb_phi0(lam)) for lam in p["lambdas"]]
    files.append(write_csv(cfg.output_dir / "summary.csv", ["name", "value"], summary))
    write_manifest(cfg, files)
    return files


def _root_path(args):
    from .travwave import sigma_path
    n, grid = args
    return sigma_path(n, grid)


def cmd_tw(cfg: RunConfig):
    from .travwave import find_oscillation_threshold, solve_tptw
    p = cfg.params
    prof = solve_tptw(p["D"], p["v"], p["L_m"], p["L_p"], p["n"])
    files = [write_csv(cfg.output_dir / "profile.csv", ["z", "u"], zip(prof.z, prof.u))]
    grid = np.geomspace(p["D_min"], p["D_max"], p["n_D"])
    paths = parallel_map(_root_path, [(n, grid) for n in p["roots"]])
    rows = [r for path in paths for r in path.rows()]
    files.append(write_csv(cfg.output_dir / "roots.csv", ["n", "D", "Re_sigma", "Im_sigma"], rows))
    s_plus, D_plus = find_oscillation_threshold()
    report = [("sigma_plus", s_plus), ("D_plus", D_plus), ("D", prof.D), ("v", prof.v),
              ("tail_class", prof.tail_class.value), ("a", prof.a), ("b", prof.b),
              ("fit_ratio", prof.fit_ratio), ("ambiguous", prof.ambiguous),
              ("A_inf", prof.A_inf), ("phi_inf", prof.phi_inf),
              ("front_decay_fit", prof.fitted_front_decay())]
    files.append(write_csv(cfg.output_dir / "threshold.csv", ["name", "value"], report))
    write_manifest(cfg, files)
    return files


def cmd_repro(cfg: RunConfig):
    from .repro import run_repro
    files, checks = run_repro(cfg.params["target"], cfg.output_dir)
    failed = [c for c in checks if not c[4]]
    write_manifest(cfg, files, {"checks_failed": len(failed), "checks": len(checks)})
    return files


HANDLERS = {
    "evolve": cmd_evolve, "dispersion": cmd_dispersion, "tongues": cmd_tongues,
    "steady": cmd_steady, "asymptote": cmd_asymptote, "tw": cmd_tw, "repro": cmd_repro,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
        workers()
    except UsageError as exc:
        print(f"nlfkpp: usage error: {exc}", file=sys.stderr)
        return 2
    try:
        files = HANDLERS[cfg.command](cfg)
    except Exception as exc:  # numerical failure: report and exit 1
        print(f"nlfkpp {cfg.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for f in files:
        print(f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
