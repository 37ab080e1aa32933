"""
Command-line front end.

    rieszlab spectrum     --shift-q 0.2 --N 64
    rieszlab critical     --shift-q 0.2 --N 65536 --tau 256
    rieszlab kfunc-sweep  --shift-q 0.2 --N 65536 --t-grid 4,8,16,32,64 --method integral
    rieszlab a2-sweep     --shift-q 0.2 --N 65536 --s-grid 0.4,0.9
    rieszlab subcouple    --slope 0.5 --theta 0.75
    rieszlab gram         --shift-q 0.2 --N 256
    rieszlab reconcile    --runs a.json b.json

Settings may also come from ``--config file.json`` (keys are the flag names
with dashes replaced by underscores); flags override the file.  Exit codes:
0 success, 1 reconcile FAIL, 2 invalid input, 3 numerical non-convergence.
Errors are reported as one JSON object on stderr.  Output files are written
atomically and only after a run succeeds.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys

import numpy as np

from . import __version__
from .io import csv_document, json_document, to_jsonable, write_atomic

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3


class ValidationError(ValueError):
    pass


def _floats(text):
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).split(",") if x.strip()]


def _ints(text):
    if isinstance(text, (list, tuple)):
        return [int(x) for x in text]
    return [int(x) for x in str(text).split(",") if x.strip()]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


# defaults per command; also the set of keys a config file may contain
_SPECTRUM = {"N": 1024, "shift_q": None, "block_p": None, "block_q": None, "boundaries": None, "sign": None, "spectrum_file": None}
_COMMON = {"out": None, "format": None, "threads": None}
DEFAULTS = {
    "spectrum": {**_SPECTRUM, "t_grid": [1.0, 4.0, 16.0]},
    "critical": {**_SPECTRUM, "tau": 256.0, "method": "delta", "n_max": None, "N_prod": None},
    "kfunc-sweep": {**_SPECTRUM, "t_grid": [4.0, 8.0, 16.0, 32.0, 64.0], "method": "series", "N_prod": None, "X_factor": 64.0},
    "a2-sweep": {**_SPECTRUM, "s_grid": [0.2, 0.4, 0.6, 0.8], "y": None, "j_min": 0, "j_max": 14, "N_prod": None, "s_crit": None},
    "subcouple": {"slope": None, "two_slope": None, "theta": 0.5, "n_max": 2048, "k_max": 64, "sizes": None},
    "gram": {**_SPECTRUM, "mode": "L2", "t": None, "export": None},
    "reconcile": {"runs": None, "slack": 0.05},
}
FORMATS = {"spectrum": "json", "critical": "json", "kfunc-sweep": "csv", "a2-sweep": "csv", "subcouple": "json", "gram": "json", "reconcile": "json"}


def _add_spectrum(p):
    g = p.add_argument_group("spectrum")
    g.add_argument("--N", type=int, help="index half-width")
    g.add_argument("--shift-q", dest="shift_q", type=float, help="constant shift lambda_n = n + sign*(q/2)*sign(n)")
    g.add_argument("--sign", type=int, choices=(-1, 1), help="sign convention for --shift-q (default -1) and blocks (default +1)")
    g.add_argument("--block-p", dest="block_p", type=float)
    g.add_argument("--block-q", dest="block_q", type=float)
    g.add_argument("--boundaries", type=_ints, help="comma-separated block boundaries")
    g.add_argument("--spectrum-file", dest="spectrum_file", help="JSON {n, re, im}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--threads", type=int, help="accepted for compatibility; runs are single-threaded")

    p = _Parser(prog="rieszlab", description="Riesz-basis diagnostics for exponential systems.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    kw = {"parents": [common], "argument_default": argparse.SUPPRESS}

    sp = sub.add_parser("spectrum", help="build a spectrum and summarise it", **kw)
    _add_spectrum(sp)
    sp.add_argument("--t-grid", dest="t_grid", type=_floats)

    sp = sub.add_parser("critical", help="critical indices s0, s1", **kw)
    _add_spectrum(sp)
    sp.add_argument("--tau", type=float)
    sp.add_argument("--method", choices=("delta", "blocks", "weights", "all"))
    sp.add_argument("--n-max", dest="n_max", type=int, help="weight route: largest n in w_n = 1/||psi||_{2^n}")
    sp.add_argument("--N-prod", dest="N_prod", type=int)

    sp = sub.add_parser("kfunc-sweep", help="dual-norm curve t -> ||psi||_t", **kw)
    _add_spectrum(sp)
    sp.add_argument("--t-grid", dest="t_grid", type=_floats)
    sp.add_argument("--method", choices=("series", "integral"))
    sp.add_argument("--N-prod", dest="N_prod", type=int)
    sp.add_argument("--X-factor", dest="X_factor", type=float, help="integral cut-off X = factor * t")

    sp = sub.add_parser("a2-sweep", help="A2 constants of |F(x+iy)|^2/(1+|x|^2s)", **kw)
    _add_spectrum(sp)
    sp.add_argument("--s-grid", dest="s_grid", type=_floats)
    sp.add_argument("--y", type=float)
    sp.add_argument("--j-min", dest="j_min", type=int)
    sp.add_argument("--j-max", dest="j_max", type=int)
    sp.add_argument("--N-prod", dest="N_prod", type=int)
    sp.add_argument("--s-crit", dest="s_crit", type=_floats, help="s0,s1 to compare the failure window against")

    sp = sub.add_parser("subcouple", help="classify T_theta on l_2(w)", **kw)
    sp.add_argument("--slope", type=float, help="w_n = 2^{slope n} for n >= 0")
    sp.add_argument("--two-slope", dest="two_slope", type=_floats, help="alternating dyadic slopes a,b")
    sp.add_argument("--theta", type=float)
    sp.add_argument("--n-max", dest="n_max", type=int)
    sp.add_argument("--k-max", dest="k_max", type=int)
    sp.add_argument("--sizes", type=_ints, help="finite-section sizes")

    sp = sub.add_parser("gram", help="Gram matrix condition number and Riesz bounds", **kw)
    _add_spectrum(sp)
    sp.add_argument("--mode", choices=("L2", "H1"))
    sp.add_argument("--t", type=float)
    sp.add_argument("--export", help="write the matrix (JSON header + complex128 row-major)")

    sp = sub.add_parser("reconcile", help="compare critical-index runs", **kw)
    sp.add_argument("--runs", nargs="+", help="JSON outputs of 'critical'")
    sp.add_argument("--slack", type=float)
    return p


def resolve(argv) -> dict:
    """Parse flags, merge over the config file and command defaults."""
    ns = vars(build_parser().parse_args(argv))
    cmd = ns.pop("command")
    cfg = dict(DEFAULTS[cmd])
    cfg.update({k: None for k in _COMMON})
    path = ns.pop("config", None)
    if path is not None:
        try:
            with open(path) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise ValidationError("config file must hold a JSON object")
        if file_cfg.pop("command", cmd) != cmd:
            raise ValidationError("config file is for a different command")
        unknown = sorted(set(file_cfg) - set(cfg))
        if unknown:
            raise ValidationError(f"unknown config keys: {unknown}")
        cfg.update(file_cfg)
    cfg.update(ns)
    cfg["command"] = cmd
    if cfg["format"] is None:
        cfg["format"] = FORMATS[cmd]
    return cfg


# ---------------------------------------------------------------- commands


def _spectrum(cfg):
    from .spectra import Spectrum, make_block, make_constant_shift, make_integers

    if cfg.get("spectrum_file"):
        with open(cfg["spectrum_file"]) as fh:
            return Spectrum.from_json(fh.read())
    N = int(cfg["N"])
    if cfg.get("block_p") is not None or cfg.get("block_q") is not None or cfg.get("boundaries"):
        if cfg.get("block_p") is None or cfg.get("block_q") is None or not cfg.get("boundaries"):
            raise ValidationError("block spectra need --block-p, --block-q and --boundaries")
        return make_block(cfg["block_p"], cfg["block_q"], cfg["boundaries"], N, sign=cfg.get("sign") or 1)
    if cfg.get("shift_q") is not None:
        return make_constant_shift(cfg["shift_q"], N, sign=cfg.get("sign") or -1)
    return make_integers(N)


def _genfun(cfg, s):
    from .genfun import GeneratingFunction

    N_prod = cfg.get("N_prod")
    return GeneratingFunction(s, "sine_relative", None if N_prod is None else min(int(N_prod), s.N))


def cmd_spectrum(cfg):
    from .spectra import blaschke_report, separation_constant

    s = _spectrum(cfg)
    rep = blaschke_report(s, cfg["t_grid"])
    res = {
        "N": s.N,
        "descriptor": s.descriptor.to_dict(),
        "spectrum_id": s.fingerprint(),
        "separation": separation_constant(s) if s.N <= 4096 else None,
        "sup_delta": s.sup_delta,
        "sup_tau": s.sup_tau,
        "kadets_safe": s.sup_delta < 0.25,
        "blaschke": {k: to_jsonable(v) for k, v in rep.items()},
    }
    rows = [{"t": t, "S": v} for t, v in zip(rep["t"], rep["S"])]
    return res, rows, ["t", "S"], EXIT_OK


def cmd_critical(cfg):
    from .critical import block_averages, s_from_blocks, s_from_deltas, s_from_weights
    from .kfunc import weight_sequence

    s = _spectrum(cfg)
    method = cfg["method"]
    out = []
    if method in ("delta", "all"):
        out.append(s_from_deltas(s, cfg["tau"]))
    if method in ("blocks", "all"):
        b = block_averages(s)
        r = s_from_blocks(b, max(1, b.size // 2))
        out.append(dataclasses.replace(r, parameters={**r.parameters, "spectrum_id": s.fingerprint()}))
    if method in ("weights", "all"):
        g = _genfun(cfg, s)
        n_max = cfg.get("n_max") or max(4, int(math.log2(g.N_prod)) - 6)
        out.append(s_from_weights(weight_sequence(g, n_max)))
    rows = [r.to_dict() for r in out]
    return rows, rows, ["method", "s0", "s1", "uncertainty", "tau_used"], EXIT_OK


def cmd_kfunc(cfg):
    from .kfunc import DualNormCurve, dual_norm_curve, psi_norm_integral

    s = _spectrum(cfg)
    g = _genfun(cfg, s)
    if cfg["method"] == "integral":
        est = tuple(psi_norm_integral(g, t, cfg["X_factor"] * t) for t in cfg["t_grid"])
        curve = DualNormCurve(np.array([e.t for e in est]), np.array([e.log_norm for e in est]), "integral", est)
    else:
        curve = dual_norm_curve(g, cfg["t_grid"], "series")
    rows = curve.rows()
    return rows, rows, ["t", "log_norm", "method", "M_or_X", "tail_fraction"], EXIT_OK


def cmd_a2(cfg):
    from .muckenhoupt import sweep_s

    s = _spectrum(cfg)
    g = _genfun(cfg, s)
    crit = tuple(cfg["s_crit"]) if cfg.get("s_crit") else None
    out = sweep_s(g, cfg["s_grid"], y=cfg.get("y"), j_min=cfg["j_min"], j_max=cfg["j_max"], s_crit=crit)
    rows = [r for rep in out["reports"] for r in rep.rows()]
    return out["summary"], rows, ["s", "j", "constant"], EXIT_OK


def cmd_subcouple(cfg):
    from .kfunc import WeightSeq
    from .subcouple import classify, two_slope_weight

    n_max = int(cfg["n_max"])
    if (cfg.get("slope") is None) == (cfg.get("two_slope") is None):
        raise ValidationError("give exactly one of --slope or --two-slope")
    if cfg.get("slope") is not None:
        w = WeightSeq.from_slope(cfg["slope"], n_max)
    else:
        a, b = cfg["two_slope"]
        w = two_slope_weight(a, b, n_max)
    c = classify(cfg["theta"], w, k_max=cfg["k_max"], lsv_sizes=cfg.get("sizes"))
    d = c.to_dict()
    return d, d["lsv_table"], ["N", "lsv"], EXIT_OK


def cmd_gram(cfg):
    from .basisdiag import cond_and_bounds, gram

    s = _spectrum(cfg)
    G = gram(s, cfg["mode"], cfg.get("t"))
    cond, lo, hi = cond_and_bounds(G)
    res = {"size": G.size, "mode": G.mode, "t": G.t, "cond": cond, "riesz_lower": lo, "riesz_upper": hi, "hermitian_defect": G.hermitian_defect()}
    extra = {cfg["export"]: G.to_bytes()} if cfg.get("export") else {}
    return res, [res], list(res), EXIT_OK, extra


def cmd_reconcile(cfg):
    from .critical import CriticalIndices, reconcile

    runs = cfg.get("runs") or []
    if len(runs) < 2:
        raise ValidationError("reconcile needs at least two run files")
    results = []
    for path in runs:
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read run {path}: {exc}") from exc
        items = doc.get("result") if isinstance(doc, dict) else None
        if not isinstance(items, list) or not items:
            raise ValidationError(f"{path} is not a critical-run output")
        results.extend(CriticalIndices.from_dict(r) for r in items)
    rep = reconcile(results, cfg["slack"])
    d = rep.to_dict()
    return d, d["pairs"], ["a", "b", "d_s0", "d_s1", "allowed", "same_spectrum", "agree"], EXIT_OK if rep.passed else EXIT_FAIL


COMMANDS = {
    "spectrum": cmd_spectrum,
    "critical": cmd_critical,
    "kfunc-sweep": cmd_kfunc,
    "a2-sweep": cmd_a2,
    "subcouple": cmd_subcouple,
    "gram": cmd_gram,
    "reconcile": cmd_reconcile,
}


def run(cfg: dict) -> int:
    """Execute a resolved config; returns the exit code."""
    out = COMMANDS[cfg["command"]](cfg)
    result, rows, fields, code = out[:4]
    extra = out[4] if len(out) > 4 else {}
    if cfg["format"] == "csv":
        text = csv_document(rows, fields, cfg)
    else:
        text = json_document(result, cfg)
    for path, data in extra.items():
        write_atomic(path, data)
    if cfg.get("out"):
        write_atomic(cfg["out"], text)
    else:
        sys.stdout.write(text)
    return code


def _fail(kind, exc, code):
    sys.stderr.write(json.dumps({"error": kind, "message": str(exc), "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    from .quadrature import NonConvergence

    try:
        cfg = resolve(sys.argv[1:] if argv is None else argv)
        return run(cfg)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except (NonConvergence, ArithmeticError, FloatingPointError) as exc:
        return _fail("non_convergence", exc, EXIT_NUMERIC)
    except (ValueError, TypeError, KeyError, OSError) as exc:
        return _fail("validation", exc, EXIT_INVALID)


if __name__ == "__main__":
    sys.exit(main())
