"""Command-line front end: detect / evaluate / synth subcommands."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional

from . import evaluate as ev
from . import pipeline, synth
from .errors import LanwatchError
from .ingest import Protocol, honeypot_positives, merge_streams, parse_protocol_csv

PROTO_ARGS = (("arp", Protocol.ARP), ("tcp", Protocol.TCP), ("udp", Protocol.UDP))


def _sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lanwatch")
    sub = parser.add_subparsers(dest="command", required=True)

    det = sub.add_parser("detect", help="run the window-based detectors")
    det.add_argument("--arp", help="ARP feature CSV")
    det.add_argument("--tcp", help="TCP feature CSV")
    det.add_argument("--udp", help="UDP feature CSV")
    det.add_argument("--require-all", action="store_true",
                     help="fail if any protocol file is missing")
    det.add_argument("--window-size", type=int, default=pipeline.DEFAULT_WIDTH)
    det.add_argument("--step", type=int, default=pipeline.DEFAULT_STEP)
    det.add_argument("--alpha", type=float, default=0.1)
    det.add_argument("--detectors", default="lookout",
                     help="comma-separated subset of lookout,ocsvm")
    det.add_argument("--bw-quantile", type=float, default=0.9)
    det.add_argument("--pot-quantile", type=float, default=0.9)
    det.add_argument("--nu", type=float, default=0.1)
    det.add_argument("--gamma", type=float, default=None)
    det.add_argument("--seed", type=int, default=0)
    det.add_argument("--from-manifest", help="rerun from a run-manifest.json")
    det.add_argument("--out", required=True, help="output directory")

    eva = sub.add_parser("evaluate", help="score a report series")
    eva.add_argument("--report", required=True, help="report.json from detect")
    eva.add_argument("--labels", help="labels.csv with ground truth")
    eva.add_argument("--positives", choices=["from-data"],
                     help="derive ground truth from the input CSVs")
    eva.add_argument("--arp")
    eva.add_argument("--tcp")
    eva.add_argument("--udp")
    eva.add_argument("--detector", default=None,
                     help="detector for the early-detection and totals tables")
    eva.add_argument("--out", required=True)

    syn = sub.add_parser("synth", help="generate a labeled synthetic trace")
    syn.add_argument("--scenario", required=True,
                     help="scenario file or the bundled name 'paper-archetypes'")
    syn.add_argument("--seed", type=int, default=None,
                     help="override the scenario seed")
    syn.add_argument("--out", required=True)
    return parser


def _parse_inputs(paths: Dict[str, Optional[str]], require_all: bool):
    parts = []
    used = {}
    for name, protocol in PROTO_ARGS:
        path = paths.get(name)
        if path is None:
            if require_all:
                raise LanwatchError(f"missing required {name} file (--require-all)")
            continue
        if not Path(path).exists():
            raise LanwatchError(f"{name} file not found: {path}")
        parts.append(parse_protocol_csv(path, protocol))
        used[name] = path
    if not parts:
        raise LanwatchError("no input files given")
    return merge_streams(parts), used


def _cmd_detect(args) -> int:
    if args.from_manifest:
        with open(args.from_manifest, encoding="utf-8") as fh:
            manifest = json.load(fh)
        cfg = pipeline.PipelineConfig(**manifest["config"])
        paths = {name: entry["path"] for name, entry in manifest["inputs"].items()}
        require_all = False
    else:
        cfg = pipeline.PipelineConfig(
            width=args.window_size, step=args.step, alpha=args.alpha,
            detectors=tuple(d.strip() for d in args.detectors.split(",") if d.strip()),
            bw_quantile=args.bw_quantile, pot_quantile=args.pot_quantile,
            nu=args.nu, gamma=args.gamma, seed=args.seed,
        )
        paths = {"arp": args.arp, "tcp": args.tcp, "udp": args.udp}
        require_all = args.require_all
    stream, used = _parse_inputs(paths, require_all)
    series = pipeline.run(cfg, stream)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    pipeline.write_report_json(outdir / "report.json", series, cfg)
    for detector, reports in series.items():
        pipeline.write_report_csv(outdir / f"report-{detector}.csv", reports)
    manifest = {
        "command": "detect",
        "config": cfg.to_dict(),
        "inputs": {name: {"path": str(p), "sha256": _sha256(p)}
                   for name, p in sorted(used.items())},
        "outputs": ["report.json"] + [f"report-{d}.csv" for d in sorted(series)],
    }
    manifest["config"]["detectors"] = list(cfg.detectors)
    with open(outdir / "run-manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    n_flagged = sum(len(r.entries) for reports in series.values() for r in reports)
    print(f"wrote {len(next(iter(series.values())))} windows, "
          f"{n_flagged} flagged entries to {outdir}", file=sys.stderr)
    return 0


def _cmd_evaluate(args) -> int:
    config, series = pipeline.load_report_json(args.report)
    if not series or all(not reports for reports in series.values()):
        raise LanwatchError("report contains no windows to evaluate")
    if args.labels:
        labels = synth.load_labels(args.labels)
        positives = {n: lab.first_contact for n, lab in labels.items()
                     if lab.first_contact is not None}
    elif args.positives == "from-data":
        stream, _ = _parse_inputs(
            {"arp": args.arp, "tcp": args.tcp, "udp": args.udp}, False)
        positives = honeypot_positives(stream)
    else:
        raise LanwatchError("need --labels or --positives from-data")
    step = int(config.get("step", 3600))
    detector = args.detector or sorted(series)[0]
    if detector not in series:
        raise LanwatchError(f"detector {detector!r} not present in report")
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    rows = ev.early_detection(series[detector], positives, step)
    ev.write_early_detection_csv(outdir / "early_detection.csv", rows)
    fpr = {det: ev.fpr_series(reports, positives)
           for det, reports in series.items()}
    ev.write_fpr_csv(outdir / "fpr.csv", fpr)
    totals = ev.score_totals(series[detector])
    ev.write_score_totals_csv(outdir / "score_totals.csv", totals)
    print(f"wrote early_detection.csv, fpr.csv, score_totals.csv to {outdir}",
          file=sys.stderr)
    return 0


def _cmd_synth(args) -> int:
    spec = synth.load_scenario(args.scenario, seed_override=args.seed)
    stream, labels = synth.build_scenario(spec)
    synth.write_scenario_outputs(args.out, stream, labels)
    n_contact = sum(1 for lab in labels.values() if lab.first_contact is not None)
    print(f"{len(stream)} records, {spec.n_benign} benign nodes, "
          f"{len(labels)} injected ({n_contact} honeypot-contacting) -> {args.out}",
          file=sys.stderr)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"detect": _cmd_detect, "evaluate": _cmd_evaluate,
                "synth": _cmd_synth}
    try:
        return handlers[args.command](args)
    except (LanwatchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
