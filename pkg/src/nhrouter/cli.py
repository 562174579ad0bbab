"""Command line front end: ``nhrouter <subcommand> [options]``.

Exit codes: 0 success, 2 configuration error, 3 solver failure.
"""
from __future__ import annotations

import argparse
import sys

from . import __version__, sweeps
from .calibration import calibrate
from .config import apply_override, load_config, parse_config
from .errors import ConfigError, SolverError
from .storage import WAVEFORM_HEADER, waveform_rows
from .tables import write_csv, write_json

COMMANDS = ("spectrum", "map", "isolation", "flip", "qubits", "storage", "calibrate")


class _Writer:
    def __init__(self, out, fmt):
        self.dir = sweeps.write_outputs_dir(out)
        self.fmt = fmt
        self.files = []

    def table(self, stem, header, rows):
        if self.fmt == "json":
            name = stem + ".json"
            write_json(self.dir / name, {"columns": list(header), "rows": [list(r) for r in rows]})
        else:
            name = stem + ".csv"
            write_csv(self.dir / name, header, rows)
        self.files.append(name)

    def json(self, name, obj):
        write_json(self.dir / name, obj)
        self.files.append(name)


def _run(cmd, cfg, w: _Writer, workers):
    if cmd == "spectrum":
        w.table("spectrum", *sweeps.run_spectrum(cfg, workers))
    elif cmd == "map":
        header, maps = sweeps.run_map(cfg, workers)
        for d, rows in maps.items():
            w.table(f"map_{d}", header, rows)
    elif cmd == "isolation":
        w.table("isolation", *sweeps.run_isolation_vs_depth(cfg, workers))
    elif cmd == "flip":
        w.table("flip", *sweeps.run_helicity_flip(cfg, workers))
    elif cmd == "qubits":
        header, rows, report = sweeps.run_qubit_report(cfg, workers)
        w.table("qubits", header, rows)
        w.json("qubits.json", report)
    elif cmd == "storage":
        signal, fw, bw, summary = sweeps.run_storage(cfg, workers)
        w.table("storage_input", WAVEFORM_HEADER, waveform_rows(signal))
        w.table("storage_forward", WAVEFORM_HEADER, waveform_rows(fw.output))
        w.table("storage_backward", WAVEFORM_HEADER, waveform_rows(bw.output))
        w.json("storage.json", summary)
    elif cmd == "calibrate":
        w.json("calibration.json", calibrate().to_dict())


def build_parser():
    ap = argparse.ArgumentParser(prog="nhrouter", description="Chiral atom-photon router simulations.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON configuration file (defaults when omitted)")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, help="override the configured seed")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--set", action="append", default=[], metavar="KEY=JSON",
                       help="override a config field, e.g. --set model.gamma_gs=0.002")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else parse_config(None)
        for s in args.set:
            cfg = apply_override(cfg, s)
        if args.seed is not None:
            cfg = apply_override(cfg, f"seed={args.seed}")
        if args.workers < 1:
            raise ConfigError("must be >= 1", "--workers")
        w = _Writer(args.out, args.format)
        _run(args.command, cfg, w, args.workers)
        manifest = {
            "command": args.command,
            "config_hash": cfg.hash(),
            "tool_version": __version__,
            "outputs": sorted(w.files),
        }
        write_json(w.dir / "manifest.json", manifest)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except SolverError as e:
        print(f"solver error: {e}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
