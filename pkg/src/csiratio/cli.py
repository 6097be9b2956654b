"""Command-line front end.

Subcommands: ``simulate``, ``estimate``, ``sweep``, ``spectrum`` and
``convergence``.  Exit status is 0 on success, 1 for input or config
errors and 2 when an estimator stage fails (partial outputs are still
written).  ``CSIRATIO_OUT`` overrides the output directory when ``--out``
is not given.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path as FsPath

import numpy as np

from . import __version__
from .exceptions import CsiRatioError, EstimationError, FormatError, InvalidConfigError
from .harness.convergence import run_convergence_study
from .harness.output import write_manifest
from .harness.spectra import fig7_paths, run_spectrum_shapes
from .harness.sweep import SweepSpec, run_nmse_sweep, write_nmse_csv
from .io import read_tensor, write_csv, write_tensor
from .pipeline import UplinkSensingEstimator
from .runconfig import RunConfig, draw_truth, load_run_config
from .signal_model import generate_offsets, static_component, synthesize_csi

log = logging.getLogger("csiratio")

EXIT_OK, EXIT_INPUT, EXIT_ESTIMATOR = 0, 1, 2
OUT_ENV = "CSIRATIO_OUT"


def _out_dir(args, cfg: RunConfig) -> FsPath:
    out = args.out or os.environ.get(OUT_ENV) or cfg.output or "."
    path = FsPath(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load(args) -> RunConfig:
    cfg = load_run_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def _spec(cfg: RunConfig) -> dict:
    spec = dict(cfg.raw)
    spec["seed"] = cfg.seed
    return spec


def _truth_and_tensor(cfg: RunConfig):
    paths = draw_truth(cfg)
    ss = np.random.SeedSequence([cfg.seed, 1])
    offset_seed, noise_seed = ss.spawn(2)
    offsets = generate_offsets(cfg.offsets, cfg.system.packet_count, seed=np.random.default_rng(offset_seed))
    Y = synthesize_csi(cfg.system, paths, offsets, noise_seed=np.random.default_rng(noise_seed))
    return paths, offsets, Y


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    cfg = _load(args)
    out = _out_dir(args, cfg)
    paths, offsets, Y = _truth_and_tensor(cfg)
    tensor = write_tensor(Y, out / "csi.csit")
    truth = out / "truth.json"
    truth.write_text(json.dumps({"paths": paths.to_dict(),
                                 "offsets": {"timing_offset": offsets.timing_offset.tolist(),
                                             "cfo": offsets.cfo.tolist()}}, indent=2) + "\n")
    outputs = [tensor, tensor.with_name(tensor.name + ".json"), truth]
    if args.csv:
        outputs.append(write_csv(Y, out / "csi.csv"))
    write_manifest(out / "manifest.json", spec=_spec(cfg), seed=cfg.seed, wall_time=time.perf_counter() - t0,
                   outputs=outputs, extra={"command": "simulate", "dims": list(Y.shape)})
    log.info("wrote %s with dims %s", tensor, Y.shape)
    return EXIT_OK


def cmd_estimate(args) -> int:
    t0 = time.perf_counter()
    cfg = _load(args)
    out = _out_dir(args, cfg)
    Y = read_tensor(args.tensor)
    if Y.shape != cfg.system.shape:
        raise InvalidConfigError(f"tensor dims {Y.shape} do not match config system {cfg.system.shape}")
    est_cfg = dict(cfg.estimator)
    n_paths = int(est_cfg.pop("n_paths", cfg.n_paths))
    static = None
    if est_cfg.get("static_mode", "oracle") == "oracle":
        # oracle mode reads the declared ground-truth static component only
        static = static_component(draw_truth(cfg), cfg.system)
    est = UplinkSensingEstimator(n_paths, static=static, **est_cfg)
    status = EXIT_OK
    outputs = []
    try:
        est.fit(Y)
        result = est.estimate_set_
    except EstimationError as exc:
        log.error("%s", exc)
        result = exc.partial
        result.flags.append(f"failed:{exc.stage}")
        status = EXIT_ESTIMATOR
    outputs.append(out / "estimates.json")
    result.to_json(outputs[-1])
    for name, trace in result.spectra.items():
        outputs.append(trace.to_csv(out / f"spectrum_{name}.csv"))
    write_manifest(out / "manifest.json", spec=_spec(cfg), seed=cfg.seed, wall_time=time.perf_counter() - t0,
                   outputs=outputs, extra={"command": "estimate", "tensor": str(args.tensor), "exit_status": status})
    return status


def cmd_sweep(args) -> int:
    t0 = time.perf_counter()
    cfg = _load(args)
    out = _out_dir(args, cfg)
    spec = SweepSpec(snr_db=list(cfg.sweep.get("snr_db", [0, 5, 10, 15, 20])),
                     trials=int(cfg.sweep.get("trials", 100)), scenario=cfg.scenario, offsets=cfg.offsets.kind,
                     static_mode=cfg.estimator.get("static_mode", "oracle"), seed=cfg.seed,
                     config=cfg.system)
    records = run_nmse_sweep(spec, n_jobs=args.jobs)
    csv_path = write_nmse_csv(records, out / "nmse.csv")
    failures = {str(r.snr_db): r.failures for r in records if r.kind == "doppler"}
    write_manifest(out / "manifest.json", spec=_spec(cfg), seed=cfg.seed, wall_time=time.perf_counter() - t0,
                   outputs=[csv_path], extra={"command": "sweep", "sweep": spec.to_dict(), "failures": failures,
                                              "nmse_normalization": {"doppler": "|true|^2", "delay": "|true|^2",
                                                                     "aoa": "pi^2"}})
    return EXIT_OK


def cmd_spectrum(args) -> int:
    t0 = time.perf_counter()
    cfg = _load(args)
    out = _out_dir(args, cfg)
    paths = cfg.paths
    if paths is None:
        paths = fig7_paths(cfg.system, cfg.seed, **cfg.spectrum)
    try:
        shapes = run_spectrum_shapes(paths, config=cfg.system)
    except EstimationError as exc:
        log.error("%s", exc)
        return EXIT_ESTIMATOR
    outputs = shapes.write(out)
    write_manifest(out / "manifest.json", spec=_spec(cfg), seed=cfg.seed, wall_time=time.perf_counter() - t0,
                   outputs=outputs, extra={"command": "spectrum", "paths": paths.to_dict(),
                                           "estimates": shapes.estimates.tolist()})
    return EXIT_OK


def cmd_convergence(args) -> int:
    t0 = time.perf_counter()
    cfg = _load(args)
    out = _out_dir(args, cfg)
    c = cfg.convergence
    grid = run_convergence_study(c.get("L_values", range(0, 6)), c.get("Ls_values", range(1, 11)),
                                 trials=int(c.get("trials", 100)), seed=cfg.seed, p=int(c.get("p", 2)),
                                 q=int(c.get("q", 1)), los=bool(c.get("los", False)),
                                 los_advantage_db=float(c.get("los_advantage_db", 10.0)), config=cfg.system,
                                 n_jobs=args.jobs)
    csv_path = grid.to_csv(out / "convergence.csv")
    write_manifest(out / "manifest.json", spec=_spec(cfg), seed=cfg.seed, wall_time=time.perf_counter() - t0,
                   outputs=[csv_path], extra={"command": "convergence"})
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "estimate": cmd_estimate, "sweep": cmd_sweep, "spectrum": cmd_spectrum,
            "convergence": cmd_convergence}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="csiratio", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML or JSON run config")
        p.add_argument("--out", help="output directory (default: $%s, then the config's 'output')" % OUT_ENV)
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes for sweeps")
        if name == "simulate":
            p.add_argument("--csv", action="store_true", help="also export m,g,n,re,im CSV")
        if name == "estimate":
            p.add_argument("--tensor", required=True, help="CSIT container written by 'simulate'")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except FormatError as exc:
        print(f"error: format error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InvalidConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CsiRatioError as exc:
        print(f"error: estimator failure: {exc}", file=sys.stderr)
        return EXIT_ESTIMATOR


if __name__ == "__main__":
    sys.exit(main())
