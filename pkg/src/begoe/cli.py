"""Command-line front end: ``begoe <subcommand> [options]``.

Configuration precedence is built-in defaults < ``--config`` JSON file <
command-line flags.  Every output file carries the full effective
configuration in its '#' header, and a ``manifest.json`` records the files
written, the seed derivation, wall time and package version.

Set ``BEGOE_THREADS`` to process ensemble members on several threads.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import PAIRINGS, TimeGrid
from .experiments import (
    density_series,
    ensemble_pass,
    entropy_series,
    lambda_scan,
    ldos_series,
    lh_series,
    npc_series,
    qparam_series,
    transport_series,
    zeta_series,
)
from .fock_basis import CapacityError, enumerate_basis
from .kbody_ensemble import VARIANTS, EnsembleSpec
from .qtheory import q_formula
from .series import ObservableSeries, write_csv, write_json
from .spectral_analysis import HistogramSpec

OBSERVABLES = ("density", "ldos", "npc", "lh", "zeta", "qparam", "entropy", "survival", "transport")
FORMATS = ("csv", "json")

DEFAULTS = {
    "N": 4,
    "m": 10,
    "k": 2,
    "lambda": 0.5,
    "members": 100,
    "seed": 42,
    "variant": "plain",
    "include_h1": True,
    "diag_variance": 2.0,
    "observables": [],
    "bins": 50,
    "range": [-3.0, 3.0],
    "state_bins": 25,
    "state_range": [-2.5, 2.5],
    "target_Ek": 0.0,
    "n_k": None,
    "t_max": 3.0,
    "t_points": 61,
    "pairing": "endpoints",
    "in_index": 0,
    "transport_points": 2000,
    "out_dir": "out",
    "format": "csv",
}

SEED_DERIVATION = "member stream = numpy PCG64(SeedSequence([seed, member]))"


class ConfigError(ValueError):
    pass


@lru_cache(maxsize=None)
def build_id() -> str:
    """Short sha1 over the package sources, stable within one build."""
    h = hashlib.sha1()
    for path in sorted(Path(__file__).parent.glob("*.py")):
        h.update(path.name.encode())
        h.update(path.read_bytes())
    return h.hexdigest()[:12]


@dataclass
class RunConfig:
    spec: EnsembleSpec
    observables: list
    hist: HistogramSpec = field(default_factory=HistogramSpec)
    state_bins: int = 25
    state_range: tuple = (-2.5, 2.5)
    target_Ek: float = 0.0
    n_k: int | None = None
    t_max: float = 3.0
    t_points: int = 61
    pairing: str = "endpoints"
    in_index: int = 0
    transport_points: int = 2000
    out_dir: str = "out"
    format: str = "csv"
    raw: dict = field(default_factory=dict)

    def effective(self) -> dict:
        """Flat JSON-able config; round-trips through :func:`parse_config`."""
        return dict(self.raw)


def _check_range(name, value, lo=None, hi=None, integer=False):
    if integer and (not isinstance(value, (int, np.integer)) or isinstance(value, bool)):
        raise ConfigError(f"{name} must be an integer, got {value!r}")
    if lo is not None and value < lo:
        raise ConfigError(f"{name} = {value} violates lower bound {lo}")
    if hi is not None and value > hi:
        raise ConfigError(f"{name} = {value} violates upper bound {hi}")


def parse_config(source=None, overrides: dict | None = None, require_observables: bool = True) -> RunConfig:
    """Build a validated :class:`RunConfig`.

    ``source`` is a path to a flat JSON file, a dict, or None.  Keys in
    ``overrides`` win over the file.  Unknown keys and out-of-range values
    raise :class:`ConfigError` naming the offending field.
    """
    raw = dict(DEFAULTS)
    given = {}
    if isinstance(source, (str, os.PathLike)):
        with open(source) as fh:
            given.update(json.load(fh))
    elif isinstance(source, dict):
        given.update(source)
    given.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = sorted(set(given) - set(DEFAULTS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    raw.update(given)

    for name in ("N", "m", "k", "members", "seed", "bins", "state_bins", "t_points", "transport_points",
                 "in_index"):
        _check_range(name, raw[name], integer=True)
    _check_range("N", raw["N"], lo=1)
    _check_range("m", raw["m"], lo=1)
    _check_range("k", raw["k"], lo=1, hi=raw["m"])
    _check_range("members", raw["members"], lo=1)
    _check_range("seed", raw["seed"], lo=0, hi=2**64 - 1)
    _check_range("lambda", raw["lambda"], lo=0.0)
    _check_range("diag_variance", raw["diag_variance"], lo=0.0)
    _check_range("bins", raw["bins"], lo=10)
    _check_range("state_bins", raw["state_bins"], lo=1)
    _check_range("t_max", raw["t_max"], lo=1e-12)
    _check_range("t_points", raw["t_points"], lo=2)
    _check_range("transport_points", raw["transport_points"], lo=2)
    if raw["n_k"] is not None:
        _check_range("n_k", raw["n_k"], lo=1, integer=True)
    if raw["variant"] not in VARIANTS:
        raise ConfigError(f"variant must be one of {VARIANTS}, got {raw['variant']!r}")
    if raw["pairing"] not in PAIRINGS:
        raise ConfigError(f"pairing must be one of {PAIRINGS}, got {raw['pairing']!r}")
    if raw["format"] not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}, got {raw['format']!r}")
    obs = list(raw["observables"])
    bad = [o for o in obs if o not in OBSERVABLES]
    if bad:
        raise ConfigError(f"unknown observables: {', '.join(bad)}")
    if require_observables and not obs:
        raise ConfigError("observables must be non-empty")
    for name in ("range", "state_range"):
        lo, hi = raw[name]
        if not lo < hi:
            raise ConfigError(f"{name} must satisfy lo < hi, got {raw[name]}")
        raw[name] = [float(lo), float(hi)]

    try:
        spec = EnsembleSpec(
            N=raw["N"], m=raw["m"], k=raw["k"], lam=float(raw["lambda"]), members=raw["members"],
            seed=raw["seed"], variant=raw["variant"], include_h1=bool(raw["include_h1"]),
            diag_variance=float(raw["diag_variance"]),
        )
    except CapacityError as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(
        spec=spec,
        observables=obs,
        hist=HistogramSpec(raw["bins"], tuple(raw["range"])),
        state_bins=raw["state_bins"],
        state_range=tuple(raw["state_range"]),
        target_Ek=float(raw["target_Ek"]),
        n_k=raw["n_k"],
        t_max=float(raw["t_max"]),
        t_points=raw["t_points"],
        pairing=raw["pairing"],
        in_index=raw["in_index"],
        transport_points=raw["transport_points"],
        out_dir=str(raw["out_dir"]),
        format=raw["format"],
        raw=raw,
    )


def _stem(spec: EnsembleSpec, name: str) -> str:
    stem = f"{name}_N{spec.N}_m{spec.m}_k{spec.k}"
    if spec.variant != "plain":
        stem += f"_{spec.variant}"
    return stem


def compute(config: RunConfig) -> list[tuple[str, ObservableSeries, dict]]:
    """Evaluate every requested observable; returns ``(stem, series, summary)``."""
    spec = config.spec
    obs = set(config.observables)
    out = []
    grid = TimeGrid.uniform(config.t_max, config.t_points) if obs & {"entropy", "survival"} else None
    if obs & {"density", "ldos", "npc", "lh", "entropy", "survival"}:
        res = ensemble_pass(spec, ldos="ldos" in obs, states=bool(obs & {"npc", "lh"}), time_grid=grid,
                            hist=config.hist, target_Ek=config.target_Ek, n_k=config.n_k)
        if "density" in obs:
            out.append((_stem(spec, "density"), *density_series(res, config.hist)))
        if "ldos" in obs:
            out.append((_stem(spec, "ldos"), *ldos_series(res, config.hist, config.target_Ek)))
        if "npc" in obs:
            out.append((_stem(spec, "npc"), *npc_series(res, config.state_bins, config.state_range)))
        if "lh" in obs:
            out.append((_stem(spec, "lh"), *lh_series(res, config.state_bins, config.state_range)))
        if obs & {"entropy", "survival"}:
            ser, summary = entropy_series(res)
            if "entropy" in obs:
                out.append((_stem(spec, "entropy"), ser, summary))
            if "survival" in obs:
                surv = ObservableSeries("survival", ser.abscissa, ser.extra["survival"])
                out.append((_stem(spec, "survival"), surv, {}))
    if "zeta" in obs:
        out.append((_stem(spec, "zeta"), *zeta_series(spec)))
    if "qparam" in obs:
        out.append((f"qparam_N{spec.N}_m{spec.m}", *qparam_series(spec.N, spec.m)))
    if "transport" in obs:
        out.append((_stem(spec, f"transport_{config.pairing}"),
                    *transport_series(spec, config.pairing, config.transport_points, config.in_index)))
    return out


def _write(config: RunConfig, results, written: list, extra_header: dict | None = None):
    os.makedirs(config.out_dir, exist_ok=True)
    for stem, series, summary in results:
        header = {"config": config.effective(), "summary": summary, "version": __version__, "build": build_id()}
        header.update(extra_header or {})
        path = os.path.join(config.out_dir, f"{stem}.{config.format}")
        written.append(path)
        (write_csv if config.format == "csv" else write_json)(path, series, header)


def _write_manifest(out_dir, configs, written, wall):
    path = os.path.join(out_dir, "manifest.json")
    manifest = {
        "version": __version__,
        "build": build_id(),
        "seed_derivation": SEED_DERIVATION,
        "threads": os.environ.get("BEGOE_THREADS", "1"),
        "wall_time_s": round(wall, 3),
        "configs": [c.effective() for c in configs],
        "files": sorted(os.path.basename(p) for p in written),
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    written.append(path)


def run_many(configs: list[RunConfig], out_dir: str | None = None) -> list[str]:
    """Run several configs into one directory; on failure, remove partial outputs."""
    written: list[str] = []
    start = time.perf_counter()
    try:
        for cfg in configs:
            _write(cfg, compute(cfg), written)
        _write_manifest(out_dir or configs[0].out_dir, configs, written, time.perf_counter() - start)
    except BaseException:
        for path in written:
            if os.path.exists(path):
                os.remove(path)
        raise
    return written


def run(config: RunConfig) -> list[str]:
    """Execute one config and return the paths written."""
    return run_many([config])


FIGURE_LAMBDAS = [0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0]


def figure_configs(fig: int, base: dict) -> list[RunConfig]:
    """Configs for one of the numbered reproduction recipes.

    ``base`` holds user overrides (seed, members, out_dir, format).
    """
    def cfg(**kw):
        merged = dict(kw)
        merged.update({k: v for k, v in base.items() if v is not None})
        return parse_config(merged)

    if fig in (1, 2):
        obs = ["density"] if fig == 1 else ["ldos"]
        return [cfg(N=4, m=10, k=k, **{"lambda": 0.5}, members=100, observables=obs) for k in range(2, 11)]
    if fig in (4, 5):
        obs = ["npc"] if fig == 4 else ["lh"]
        return [cfg(N=5, m=10, k=k, **{"lambda": 0.5 if k < 10 else 1.0}, members=100, observables=obs)
                for k in range(2, 11)]
    if fig == 6:
        return [cfg(N=4, m=10, k=k, **{"lambda": 0.5}, members=100, observables=["entropy"])
                for k in (2, 4, 6, 8, 10)]
    if fig == 7:
        return [cfg(N=2, m=9, k=k, members=2000, include_h1=False, variant=v, observables=["transport"])
                for k in range(1, 10) for v in VARIANTS]
    if fig == 8:
        return [cfg(N=3, m=m, k=k, members=2000, include_h1=False, variant=v, observables=["transport"])
                for m in range(1, 7) for k in range(1, m + 1) for v in VARIANTS]
    raise ConfigError(f"no reproduction recipe for figure {fig}")


def reproduce_figure3(base: dict) -> list[str]:
    """Fitted q and zeta^2 against lambda for N=5, m=10, every k."""
    written: list[str] = []
    configs = []
    start = time.perf_counter()
    try:
        for k in range(2, 11):
            merged = {"N": 5, "m": 10, "k": k, "members": 100, "observables": ["density", "zeta"]}
            merged.update({kk: v for kk, v in base.items() if v is not None})
            c = parse_config(merged)
            configs.append(c)
            ser, summary = lambda_scan(c.spec, np.array(FIGURE_LAMBDAS), c.hist)
            _write(c, [(f"fig3_N5_m10_k{k}", ser, summary)], written)
        _write_manifest(configs[0].out_dir, configs, written, time.perf_counter() - start)
    except BaseException:
        for path in written:
            if os.path.exists(path):
                os.remove(path)
        raise
    return written


def write_basis(N: int, m: int, path_or_stream) -> None:
    """CSV listing ``index, n_1, ..., n_N`` of the m-boson basis."""
    basis = enumerate_basis(N, m)
    lines = [f"# N: {N}", f"# m: {m}", f"# dim: {basis.dim}", "index," + ",".join(f"n{i}" for i in range(1, N + 1))]
    lines += [f"{i}," + ",".join(str(x) for x in s) for i, s in enumerate(basis.states)]
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_stream, "write"):
        path_or_stream.write(text)
    else:
        with open(path_or_stream, "w") as fh:
            fh.write(text)


def write_qparam(N: int, m: int, path_or_stream) -> None:
    """CSV table ``N, m, k, q`` for k = 1..m."""
    lines = ["N,m,k,q"] + [f"{N},{m},{k},{q_formula(N, m, k):.17g}" for k in range(1, m + 1)]
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_stream, "write"):
        path_or_stream.write(text)
    else:
        with open(path_or_stream, "w") as fh:
            fh.write(text)


def _add_common(p: argparse.ArgumentParser, ensemble: bool = True):
    p.add_argument("--config", help="flat JSON config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--format", choices=FORMATS)
    if ensemble:
        p.add_argument("--N", type=int)
        p.add_argument("--m", type=int)
        p.add_argument("--k", type=int)
        p.add_argument("--lambda", dest="lam", type=float)
        p.add_argument("--members", type=int)
        p.add_argument("--variant", choices=VARIANTS)
        p.add_argument("--no-h1", dest="include_h1", action="store_const", const=False)
        p.add_argument("--pairing", choices=PAIRINGS)
        p.add_argument("--n-k", dest="n_k", type=int)
        p.add_argument("--t-max", dest="t_max", type=float)
        p.add_argument("--t-points", dest="t_points", type=int)


def _overrides(args) -> dict:
    keys = ("seed", "out_dir", "format", "N", "m", "k", "members", "variant", "include_h1", "pairing", "n_k",
            "t_max", "t_points")
    out = {k: getattr(args, k, None) for k in keys}
    out["lambda"] = getattr(args, "lam", None)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="begoe", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("basis", help="list the occupation-number basis as CSV")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--out", help="output file (default stdout)")

    p = sub.add_parser("qparam", help="q(N, m, k) table as CSV")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--out", help="output file (default stdout)")

    for name in ("density", "ldos", "npc", "lh", "zeta", "entropy", "survival", "transport"):
        _add_common(sub.add_parser(name, help=f"compute the {name} observable"))

    p = sub.add_parser("run", help="run every observable listed in a config file")
    _add_common(p)

    p = sub.add_parser("reproduce-figure", help="regenerate the data behind one figure")
    p.add_argument("figure", type=int, choices=range(1, 9))
    p.add_argument("--members", type=int)
    _add_common(p, ensemble=False)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "basis":
            write_basis(args.N, args.m, args.out or sys.stdout)
            return 0
        if args.command == "qparam":
            write_qparam(args.N, args.m, args.out or sys.stdout)
            return 0
        if args.command == "reproduce-figure":
            base = {"seed": args.seed, "out_dir": args.out_dir, "format": args.format, "members": args.members}
            if args.figure == 3:
                written = reproduce_figure3(base)
            else:
                written = run_many(figure_configs(args.figure, base), args.out_dir or DEFAULTS["out_dir"])
        else:
            over = _overrides(args)
            if args.command != "run":
                over["observables"] = [args.command]
            written = run(parse_config(args.config, over))
    except (ConfigError, CapacityError, ValueError) as exc:
        print(f"begoe: error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
