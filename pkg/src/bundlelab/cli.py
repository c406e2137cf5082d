"""Config-driven command-line front end.

Every run writes ``result.json`` (an envelope with the command, the full
effective parameter set, and the result) into the output directory, plus
optional CSV/SVG artifacts.  Standard output carries a one-line summary;
progress and warnings go to standard error.  Exit codes: 0 success (and
"similar"), 1 "not similar", 2 "inconclusive", 64 config errors, 70
computation errors.

Config files are flat ``key = value`` text with optional ``[section]``
headers; keys match the long flag names and flags override the file.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import classify, frames, geometry, monodromy, operators, verify
from .errors import BundleLabError, ConfigError
from .funcspec import BlaschkeSpec, parse_function_spec
from .svgout import emit_svg
from .weights import equivalent, growth_classify, parse_weight_id

__all__ = ["main", "run", "RunConfig", "parse_config_file"]

_KNOWN_KEYS = {
    "command", "weights", "weights2", "fn", "f1", "f2", "blaschke",
    "n-max", "trunc", "res", "bounds", "t", "probe", "out", "normalization",
    "csv", "samples",
}


class RunConfig:
    """Validated command id plus option mapping."""

    def __init__(self, command, options):
        self.command = command
        self.options = options

    def get(self, key, default=None):
        return self.options.get(key, default)


def parse_config_file(path):
    """Flat key = value lines with optional [section] headers.

    Unknown keys are rejected with their line and column.
    """
    options = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            stripped = line.strip()
            if not stripped or stripped.startswith(("#", ";")):
                continue
            if stripped.startswith("[") and stripped.endswith("]"):
                continue  # sections are organizational only
            if "=" not in stripped:
                raise ConfigError("expected key = value", line=lineno, column=1)
            key, _, value = stripped.partition("=")
            key = key.strip()
            if key not in _KNOWN_KEYS:
                col = line.index(key) + 1
                raise ConfigError(f"unknown key {key!r}", line=lineno, column=col)
            options[key] = value.strip()
    return options


def _progress(msg):
    print(msg, file=sys.stderr)


def _parse_bounds(text):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ConfigError(f"bounds need 4 comma-separated numbers, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"bad bounds {text!r}") from exc


def _blaschke_from(text):
    spec = parse_function_spec(text)
    if not isinstance(spec, BlaschkeSpec):
        raise ConfigError("expected a blaschke(...) literal")
    return spec.product


def _write_json(out_dir, name, payload):
    path = Path(out_dir) / name
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1, allow_nan=False)
        fh.write("\n")
    return str(path)


def _sanitize(value):
    """JSON-safe copy: numpy scalars to python, non-finite to strings."""
    if isinstance(value, dict):
        return {k: _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(v) for v in value]
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if np.isfinite(v) else repr(v)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.ndarray):
        return _sanitize(value.tolist())
    return value


def _emit(config, params, result, artifacts=()):
    envelope = {
        "command": config.command,
        "parameters": _sanitize(params),
        "result": _sanitize(result),
    }
    out = config.get("out", ".")
    os.makedirs(out, exist_ok=True)
    path = _write_json(out, "result.json", envelope)
    for note in artifacts:
        _progress(f"wrote {note}")
    _progress(f"wrote {path}")
    return envelope


# -- command implementations -------------------------------------------------


def _cmd_weights_classify(config):
    w = parse_weight_id(config.get("weights", "hardy"))
    K = int(config.get("probe", 10000))
    rep = growth_classify(w, K)
    result = {
        "probe_limit": rep.probe_limit,
        "sup_val": rep.sup_val,
        "tail_trend": rep.tail_trend,
        "classification": rep.classification,
        "certified": rep.certified,
    }
    params = {"weights": w.id, "probe": K}
    _emit(config, params, result)
    tag = "certified" if rep.certified else "empirical"
    print(
        f"weights-classify {w.id}: {rep.classification} ({tag}), "
        f"sup {rep.sup_val:.6g}, trend {rep.tail_trend:+.3g}"
    )
    return 0


def _cmd_equivalent(config):
    w = parse_weight_id(config.get("weights", "hardy"))
    w2 = parse_weight_id(config.get("weights2", "hardy"))
    K = int(config.get("probe", 10000))
    ok, K1, K2 = equivalent(w, w2, K)
    result = {"equivalent": bool(ok), "K1": K1, "K2": K2, "probe": K}
    _emit(config, {"weights": w.id, "weights2": w2.id, "probe": K}, result)
    print(
        f"equivalent {w.id} ~ {w2.id}: {ok} "
        f"(ratio range [{K1:.6g}, {K2:.6g}] over k <= {K})"
    )
    return 0


def _cmd_gram(config):
    w = parse_weight_id(config.get("weights", "hardy"))
    B = _blaschke_from(config.get("blaschke", "blaschke(0; 0, 0.5)"))
    n_max = int(config.get("n-max", 40))
    K = int(config.get("trunc", 256))
    norm = config.get("normalization", "raw")
    F = frames.build_frame(B, w, n_max, K)
    G = frames.gram(F, norm)
    herm = float(np.max(np.abs(G.matrix - G.matrix.conj().T)))
    result = {
        "normalization": norm,
        "shape": list(G.matrix.shape),
        "hermitian_dev": herm,
        "max_tail": float(np.max(G.column_tails)) if G.column_tails.size else 0.0,
    }
    artifacts = []
    out = config.get("out", ".")
    os.makedirs(out, exist_ok=True)
    if config.get("csv", "yes") != "no":
        path = str(Path(out) / "gram.csv")
        operators.dump_matrix_csv(G.matrix, path)
        result["csv"] = "gram.csv"
        artifacts.append(path)
    params = {"weights": w.id, "blaschke": config.get("blaschke"),
              "n-max": n_max, "trunc": K, "normalization": norm,
              "csv": config.get("csv", "yes")}
    _emit(config, params, result, artifacts)
    print(
        f"gram {norm} {G.matrix.shape[0]}x{G.matrix.shape[1]}: "
        f"hermitian dev {herm:.3e}, tail {result['max_tail']:.3e}"
    )
    return 0


def _cmd_riesz(config):
    w = parse_weight_id(config.get("weights", "hardy"))
    B = _blaschke_from(config.get("blaschke", "blaschke(0; 0, 0.5)"))
    n_max = int(config.get("n-max", 100))
    K = int(config.get("trunc", 512))
    _progress(f"building frame for {w.id}, order {B.order}, n_max {n_max}, K {K}")
    F = frames.build_frame(B, w, n_max, K)
    rep = frames.riesz_bounds(F)
    _emit(config, {"weights": w.id, "blaschke": config.get("blaschke"),
                   "n-max": n_max, "trunc": K}, rep.to_dict())
    print(
        f"riesz {w.id}: c1 {rep.c1:.6g}, c2 {rep.c2:.6g}, cond {rep.cond:.4g}, "
        f"verdict {rep.verdict}"
    )
    return 0


def _cmd_index_map(config):
    spec = parse_function_spec(config.get("fn", "poly(2,1,1)"))
    bounds = _parse_bounds(config.get("bounds", "-1,5,-3,3"))
    res = int(config.get("res", 400))
    _progress(f"index map on {bounds} at {res}x{res}")
    imap = geometry.index_map(spec, bounds, res)
    out = config.get("out", ".")
    os.makedirs(out, exist_ok=True)
    svg_path = str(Path(out) / "map.svg")
    emit_svg(imap, svg_path)
    grid_path = _write_json(out, "grid.json", {
        "bounds": list(imap.bounds),
        "resolution": imap.resolution,
        "grid": imap.grid.tolist(),
    })
    # artifact references are relative so identical configs give identical bytes
    counts = {str(v): int(np.sum(imap.grid == v)) for v in imap.index_values}
    result = {
        "bounds": list(imap.bounds),
        "resolution": imap.resolution,
        "index_values": imap.index_values,
        "cells_per_index": counts,
        "probes": [
            {"omega": [o.real, o.imag], "index": n} for o, n in imap.probes
        ],
        "branch_values": [[b.real, b.imag] for b in imap.branch_points],
        "svg": "map.svg",
        "grid": "grid.json",
    }
    _emit(config, {"fn": config.get("fn"), "bounds": list(bounds), "res": res},
          result, [svg_path, grid_path])
    print(
        f"index-map: values {imap.index_values}, "
        f"{len(imap.probes)} probes cross-checked, svg {svg_path}"
    )
    return 0


def _cmd_decompose(config):
    spec = parse_function_spec(config.get("fn", "poly(0,1,0,2)"))
    dec = monodromy.decompose(spec)
    _emit(config, {"fn": config.get("fn")}, dec.to_dict())
    print(
        f"decompose: m = {dec.m}, residual {dec.residual:.3e} "
        f"({'indecomposable' if dec.m == 1 else f'inner order {dec.m}'})"
    )
    return 0


def _cmd_jordan(config):
    w = parse_weight_id(config.get("weights", "bergman:alpha=1"))
    spec = parse_function_spec(config.get("fn", "poly(0,1,0,2)"))
    K = int(config.get("trunc", 512))
    j = classify.jordan(spec, w, K=K)
    result = {
        "m": j.m,
        "direct_residual": None if np.isnan(j.direct_residual) else j.direct_residual,
        "checked_columns": j.checked_columns,
        "decomposition": j.decomposition.to_dict(),
        "certificate": j.certificate.to_dict() if j.certificate else None,
    }
    _emit(config, {"weights": w.id, "fn": config.get("fn"), "trunc": K}, result)
    print(
        f"jordan: m = {j.m}, direct residual "
        f"{j.direct_residual if j.checked_columns else 0.0:.3e}, "
        f"certificate {'accepted' if j.certificate and j.certificate.accepted else 'trivial' if j.m == 1 else 'failed'}"
    )
    return 0


def _cmd_similar(config):
    w = parse_weight_id(config.get("weights", "bergman:alpha=1"))
    f1 = parse_function_spec(config.get("f1", "poly(0,0,1)"))
    f2 = parse_function_spec(config.get("f2", "poly(0,0,1)"))
    K = int(config.get("trunc", 512))
    v = classify.similar(f1, f2, w, K=K)
    _emit(config, {"weights": w.id, "f1": config.get("f1"),
                   "f2": config.get("f2"), "trunc": K}, v.to_dict())
    print(f"similar: {v.status}" + (f" ({v.reason})" if v.reason else ""))
    return v.exit_code


def _cmd_kaplansky(config):
    w = parse_weight_id(config.get("weights", "bergman:alpha=1"))
    f1 = parse_function_spec(config.get("f1", "poly(0,0,1)"))
    f2 = parse_function_spec(config.get("f2", "poly(0,0,1)"))
    K = int(config.get("trunc", 512))
    double, single, consistent = classify.kaplansky(f1, f2, w, K=K)
    result = {
        "double": double.to_dict(),
        "single": single.to_dict(),
        "consistent": bool(consistent),
    }
    _emit(config, {"weights": w.id, "f1": config.get("f1"),
                   "f2": config.get("f2"), "trunc": K}, result)
    print(
        f"kaplansky: double {double.status}, single {single.status}, "
        f"consistent {consistent}"
    )
    return 0 if consistent else 1


def _cmd_douglas(config):
    w = parse_weight_id(config.get("weights", "bergman:alpha=1"))
    B = _blaschke_from(config.get("blaschke", "blaschke(0; 0, 0.5)"))
    K = int(config.get("trunc", 512))
    n_max = int(config.get("n-max", 100))
    cert = classify.douglas_intertwiner(B, w, K=K, n_max=n_max)
    _emit(config, {"weights": w.id, "blaschke": config.get("blaschke"),
                   "trunc": K, "n-max": n_max}, cert.to_dict())
    print(
        f"douglas: residual {cert.residual:.3e}, cond {cert.cond:.4g}, "
        f"{'accepted' if cert.accepted else 'failed'}"
    )
    return 0 if cert.accepted else 1


def _cmd_counterexample(config):
    w = parse_weight_id(config.get("weights", "reciprocal:nln"))
    t = float(config.get("t", 0.5))
    n_max = int(config.get("n-max", 400))
    rep = classify.counterexample_probe(t, w, n_max)
    result = rep.to_dict()
    out = config.get("out", ".")
    os.makedirs(out, exist_ok=True)
    if config.get("csv", "yes") != "no":
        path = str(Path(out) / "profile.csv")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "r_n"])
            for n, r in enumerate(rep.profile):
                writer.writerow([n, f"{r:.17g}"])
        result["csv"] = "profile.csv"
    _emit(config, {"weights": w.id, "t": t, "n-max": n_max,
                   "csv": config.get("csv", "yes")}, result)
    print(f"counterexample {w.id} t={t}: {rep.verdict} (slope {rep.slope:+.4f})")
    return 0


def _cmd_verify(config):
    passed, failed, records = verify.run_all(report=print)
    result = {"passed": passed, "failed": failed, "checks": records}
    _emit(config, {}, result)
    print(f"verify: {passed} passed, {failed} failed")
    return 0 if failed == 0 else 1


_COMMANDS = {
    "weights-classify": _cmd_weights_classify,
    "equivalent": _cmd_equivalent,
    "gram": _cmd_gram,
    "riesz": _cmd_riesz,
    "index-map": _cmd_index_map,
    "decompose": _cmd_decompose,
    "jordan": _cmd_jordan,
    "similar": _cmd_similar,
    "kaplansky": _cmd_kaplansky,
    "douglas": _cmd_douglas,
    "counterexample": _cmd_counterexample,
    "verify": _cmd_verify,
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="bundle-lab",
        description="finite-truncation laboratory for weighted Hardy space geometry",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS), nargs="?")
    parser.add_argument("--config", help="key = value config file")
    parser.add_argument("--weights", help="weight preset id, e.g. bergman:alpha=1")
    parser.add_argument("--weights2", help="second weight preset (equivalent)")
    parser.add_argument("--fn", help="function spec expression")
    parser.add_argument("--f1", help="first function spec")
    parser.add_argument("--f2", help="second function spec")
    parser.add_argument("--blaschke", help="blaschke(theta; z1, z2, ...) literal")
    parser.add_argument("--n-max", dest="n_max", help="frame power cutoff")
    parser.add_argument("--trunc", help="row truncation K")
    parser.add_argument("--res", help="index map cells per axis")
    parser.add_argument("--bounds", help="re_min,re_max,im_min,im_max")
    parser.add_argument("--t", help="automorphism parameter in (0,1)")
    parser.add_argument("--probe", help="weight probe horizon")
    parser.add_argument("--normalization", choices=["raw", "beta", "beta-inv"])
    parser.add_argument("--csv", choices=["yes", "no"], help="write CSV artifacts")
    parser.add_argument("--out", help="output directory (default .)")
    return parser


def run(config):
    """Dispatch a RunConfig; returns the process exit status."""
    if config.command not in _COMMANDS:
        raise ConfigError(f"unknown command {config.command!r}")
    return _COMMANDS[config.command](config)


_VALUE_FLAGS = {
    "--config", "--weights", "--weights2", "--fn", "--f1", "--f2",
    "--blaschke", "--n-max", "--trunc", "--res", "--bounds", "--t",
    "--probe", "--normalization", "--csv", "--out",
}


def _preprocess(argv):
    """Join value flags with their argument so negative values survive argparse."""
    out = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def main(argv=None):
    parser = _build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(_preprocess(list(argv)))
    try:
        options = {}
        if args.config:
            options.update(parse_config_file(args.config))
        flag_map = {
            "weights": args.weights, "weights2": args.weights2, "fn": args.fn,
            "f1": args.f1, "f2": args.f2, "blaschke": args.blaschke,
            "n-max": args.n_max, "trunc": args.trunc, "res": args.res,
            "bounds": args.bounds, "t": args.t, "probe": args.probe,
            "normalization": args.normalization, "csv": args.csv, "out": args.out,
        }
        for key, val in flag_map.items():
            if val is not None:
                options[key] = val
        command = args.command or options.get("command")
        if not command:
            parser.print_usage(sys.stderr)
            raise ConfigError("no command given (argument or config 'command =')")
        config = RunConfig(command, options)
        return run(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 64
    except BundleLabError as exc:
        diag = {"error": type(exc).__name__, "message": str(exc)}
        out = (args.out if args is not None else None) or "."
        try:
            os.makedirs(out, exist_ok=True)
            _write_json(out, "error.json", diag)
        except OSError:
            pass
        print(f"computation error: {exc}", file=sys.stderr)
        return 70


if __name__ == "__main__":
    sys.exit(main())
