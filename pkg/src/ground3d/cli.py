"""Command-line front end.

Subcommands: eval, gen, cog, iou, bench.  Data goes to files or stdout, logs
go to stderr.  Exit codes: 0 ok, 2 input/schema error, 3 generation
shortfall, 4 backend configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .annotation import GenConfig, generate_dataset, load_affordances, make_scene
from .backends import BackendError, OracleGrounder, RuleReasoner
from .bench import run_bench
from .chain import CoGConfig, run_chain, run_single_pass
from .io import (
    FormatError,
    load_predictions,
    load_records,
    load_scene_dir,
    save_predictions,
    save_records,
    save_scene,
)
from .metrics import EvalConfig, evaluate
from .scene import Box3D, PredictionSet, ReasoningType, SchemaError

log = logging.getLogger("ground3d")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SHORTFALL = 3
EXIT_BACKEND = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ground3d",
        description="3D reasoning-grounding toolkit: evaluate, generate, chain, measure.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="score predictions with Acc@kIoU")
    p.add_argument("--records", required=True, help="records.jsonl")
    p.add_argument("--scenes", required=True, help="directory of <scene_id>.json files")
    p.add_argument("--preds", required=True, help="preds.jsonl")
    p.add_argument("--k", type=float, default=0.25, help="IoU threshold (default 0.25)")
    p.add_argument("--iou-mode", choices=["oriented", "axis_aligned"], default="oriented")
    p.add_argument("--matching", choices=["hungarian", "greedy"], default="hungarian")
    p.add_argument("--confidence-floor", type=float, default=0.0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--json", dest="json_out", help="also write the report as JSON")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gen", help="generate question-answer-location records")
    p.add_argument("--scenes", required=True, help="directory of <scene_id>.json files")
    p.add_argument("--out", required=True, help="output records.jsonl")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--counts",
        help="per-type counts, e.g. spatial=20,functional=10,logical=15,emotional=5,safety=5",
    )
    p.add_argument("--preset", choices=["validation-ratio", "full-size"])
    p.add_argument("--total", type=int, help="override the preset's total record count")
    p.add_argument("--allow-short", action="store_true", help="exit 0 despite shortfalls")
    p.add_argument(
        "--make-scenes",
        type=int,
        metavar="N",
        help="first synthesize N scenes into --scenes (must be empty or missing)",
    )
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("cog", help="run chained grounding over records")
    p.add_argument("--records", required=True)
    p.add_argument("--scenes", required=True)
    p.add_argument("--out-preds", required=True)
    p.add_argument("--out-traces", help="also write one chain trace per record")
    p.add_argument("--grounder", choices=["oracle", "remote"], default="oracle")
    p.add_argument("--reasoner", choices=["rule", "remote"], default="rule")
    p.add_argument("--mode", choices=["cog", "single-pass"], default="cog")
    p.add_argument("--inject-all-objects", action="store_true")
    p.add_argument("--threshold", type=float, default=0.5, help="anchor confidence gate")
    p.add_argument("--max-rounds", type=int, default=2)
    p.add_argument("--remote-url", help="base URL (or $GROUND3D_REMOTE_URL)")
    p.add_argument("--remote-token", help="bearer token (or $GROUND3D_REMOTE_TOKEN)")
    p.add_argument("--timeout", type=float, default=30.0, help="remote call timeout (s)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--include-timings", action="store_true", help="keep timings in traces")
    p.set_defaults(func=cmd_cog)

    p = sub.add_parser("iou", help="IoU of two boxes given as literals")
    p.add_argument("--box-a", required=True, help="cx,cy,cz,sx,sy,sz[,yaw,pitch,roll]")
    p.add_argument("--box-b", required=True, help="cx,cy,cz,sx,sy,sz[,yaw,pitch,roll]")
    p.set_defaults(func=cmd_iou)

    p = sub.add_parser("bench", help="kernel throughput (all backends)")
    p.add_argument("--pairs", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", dest="json_out", help="write results as JSON")
    p.set_defaults(func=cmd_bench)

    return parser


def cmd_eval(args) -> int:
    try:
        scenes = load_scene_dir(args.scenes)
        records = load_records(args.records, scenes=scenes)
        preds = load_predictions(args.preds)
        cfg = EvalConfig(
            k_iou=args.k,
            iou_mode=args.iou_mode,
            matching=args.matching,
            confidence_floor=args.confidence_floor,
        )
        report = evaluate(records, scenes, preds, cfg, jobs=args.jobs)
    except (FormatError, SchemaError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    print(report.format_table())
    if args.json_out:
        Path(args.json_out).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
        log.info("report written to %s", args.json_out)
    return EXIT_OK


def _parse_counts(spec: str) -> dict:
    counts = {}
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        key, _, value = part.partition("=")
        counts[ReasoningType.from_name(key.strip())] = int(value)
    return counts


def cmd_gen(args) -> int:
    scenes_dir = Path(args.scenes)
    try:
        if args.make_scenes is not None:
            scenes_dir.mkdir(parents=True, exist_ok=True)
            if any(scenes_dir.glob("*.json")):
                log.error("--make-scenes requires an empty scenes directory: %s", scenes_dir)
                return EXIT_INPUT
            for i in range(args.make_scenes):
                scene = make_scene(f"scene{i:04d}", seed=args.seed)
                save_scene(scene, scenes_dir / f"{scene.scene_id}.json")
            log.info("synthesized %d scenes into %s", args.make_scenes, scenes_dir)
        scenes = load_scene_dir(scenes_dir)
        if not scenes:
            log.error("no scenes found in %s", scenes_dir)
            return EXIT_SHORTFALL
        cfg = GenConfig(
            counts=_parse_counts(args.counts) if args.counts else {},
            seed=args.seed,
            preset=args.preset,
            total=args.total,
        )
        result = generate_dataset(list(scenes.values()), cfg)
    except (FormatError, SchemaError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    save_records(result.records, args.out)
    log.info("%d records written to %s", len(result.records), args.out)
    if result.shortfalls:
        for rtype, missing in result.shortfalls.items():
            log.warning("shortfall: %s is missing %d records", rtype.value, missing)
        if not args.allow_short:
            return EXIT_SHORTFALL
    return EXIT_OK


def _make_backends(args):
    table = load_affordances()
    if args.grounder == "remote" or args.reasoner == "remote":
        from .remote import RemoteBackend

        remote = RemoteBackend(
            base_url=args.remote_url, token=args.remote_token, timeout=args.timeout
        )
    grounder = OracleGrounder(table) if args.grounder == "oracle" else remote
    reasoner = RuleReasoner(table) if args.reasoner == "rule" else remote
    return table, grounder, reasoner


def cmd_cog(args) -> int:
    try:
        scenes = load_scene_dir(args.scenes)
        records = load_records(args.records, scenes=scenes)
    except (FormatError, SchemaError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    try:
        table, grounder, reasoner = _make_backends(args)
    except BackendError as exc:
        log.error("backend configuration: %s", exc)
        return EXIT_BACKEND
    cfg = CoGConfig(
        confidence_threshold=args.threshold,
        max_rounds=args.max_rounds,
        inject_all_objects=args.inject_all_objects,
    )

    failures = 0

    def process(rec):
        scene = scenes[rec.scene_id]
        if args.mode == "single-pass":
            return run_chain_safe(
                lambda: run_single_pass(rec.question, scene, grounder, reasoner, cfg), rec
            )
        return run_chain_safe(
            lambda: run_chain(rec.question, scene, grounder, reasoner, cfg, table=table), rec
        )

    def run_chain_safe(fn, rec):
        try:
            return fn(), None
        except BackendError as exc:
            return None, f"record {rec.record_id}: {exc}"

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            outcomes = list(pool.map(process, records))
    else:
        outcomes = [process(rec) for rec in records]

    preds = []
    trace_lines = []
    for rec, (trace, error) in zip(records, outcomes):
        if error is not None:
            failures += 1
            log.warning("%s", error)
            preds.append(PredictionSet(record_id=rec.record_id, boxes=()))
            continue
        preds.append(
            PredictionSet(
                record_id=rec.record_id,
                boxes=trace.boxes,
                answer_text=trace.answer_text,
            )
        )
        if args.out_traces:
            trace_lines.append(
                {"record_id": rec.record_id, **trace.to_dict(include_timings=args.include_timings)}
            )

    save_predictions(preds, args.out_preds)
    log.info("%d prediction sets written to %s", len(preds), args.out_preds)
    if args.out_traces:
        with open(args.out_traces, "w", encoding="utf-8") as fh:
            for line in trace_lines:
                fh.write(json.dumps(line) + "\n")
        log.info("%d traces written to %s", len(trace_lines), args.out_traces)
    if failures:
        log.warning("%d record(s) failed and were scored as empty predictions", failures)
    return EXIT_OK


def _parse_box(literal: str) -> Box3D:
    parts = [float(v) for v in literal.split(",")]
    if len(parts) == 6:
        parts += [0.0, 0.0, 0.0]
    if len(parts) != 9:
        raise ValueError(
            f"box literal needs 6 or 9 comma-separated numbers, got {len(parts)}"
        )
    return Box3D(center=tuple(parts[0:3]), size=tuple(parts[3:6]), euler=tuple(parts[6:9]))


def cmd_iou(args) -> int:
    from . import geometry

    try:
        box_a = _parse_box(args.box_a)
        box_b = _parse_box(args.box_b)
    except (ValueError, SchemaError) as exc:
        log.error("bad box literal: %s", exc)
        return EXIT_INPUT
    print(f"{geometry.iou(box_a, box_b):.6f}")
    return EXIT_OK


def cmd_bench(args) -> int:
    t0 = time.perf_counter()
    results = run_bench(n_pairs=args.pairs, seed=args.seed)
    for r in results:
        print(
            f"{r.backend:>12}: {r.pairs_per_second:>12,.0f} pairs/s "
            f"({r.n_pairs} pairs in {r.seconds:.3f}s, mean IoU {r.mean_iou:.4f})"
        )
    if len(results) == 2:
        fast = max(results, key=lambda r: r.pairs_per_second)
        slow = min(results, key=lambda r: r.pairs_per_second)
        print(f"{'speedup':>12}: {fast.pairs_per_second / slow.pairs_per_second:.1f}x")
    log.info("bench completed in %.2fs", time.perf_counter() - t0)
    if args.json_out:
        Path(args.json_out).write_text(
            json.dumps([r.__dict__ for r in results], indent=2) + "\n"
        )
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
