"""Command-line entry points.

Subcommands:

* run          one image + question -> answer, trace, optional overlay
* eval         benchmark sweep -> report JSON
* synth        synthetic scene generation (PNG + spec JSON + bench JSONL)
* serve-check  wire-protocol conformance probe against an adapter endpoint
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import yaml

from ..config import PipelineConfig, pipeline_config_from_dict
from ..errors import DeepscanError
from ..experts.base import ExpertBundle, Question
from ..experts.parsing import extract_option_letter
from ..experts.remote import remote_bundle
from ..experts.replay import replay_bundle
from ..reasoning import run_pipeline
from ..synth.oracles import oracle_bundle
from ..synth.scenes import SceneParams, generate_scene, spec_from_dict, spec_to_dict
from .bench import BenchItem, letter_for, load_bench
from .evaluate import PipelineRunner, evaluate
from .overlay import draw_overlay
from .pngio import read_png, write_png
from .servecheck import run_serve_check


def _load_config(path: str | None, k_override: str | None, one_shot: bool) -> PipelineConfig:
    data = {}
    if path:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
    cfg = pipeline_config_from_dict(data)
    scan_over = {}
    if k_override is not None:
        scan_over["k"] = None if k_override.lower() in ("inf", "none") else int(k_override)
    if one_shot:
        scan_over["one_shot"] = True
    if scan_over:
        from dataclasses import replace

        cfg = PipelineConfig(scan=replace(cfg.scan, **scan_over), refocus=cfg.refocus, lvlm=cfg.lvlm)
    return cfg


def _spec_path_for_image(oracle_root: Path, image_path: Path) -> Path:
    if oracle_root.is_dir():
        return oracle_root / (image_path.stem + ".json")
    if oracle_root.suffix == ".json":
        return oracle_root
    return oracle_root.with_suffix(".json")


def _bundle_factory(experts_arg: str, lvlm_cfg):
    """Resolve --experts oracle:<dir>|remote:<url>|replay:<dir> to a factory."""
    kind, _, rest = experts_arg.partition(":")
    if kind == "oracle":
        root = Path(rest)

        def factory(item: BenchItem) -> ExpertBundle:
            spec_path = _spec_path_for_image(root, item.image_path)
            with spec_path.open() as fh:
                spec = spec_from_dict(json.load(fh))
            return oracle_bundle(spec, lvlm_cfg)

        return factory
    if kind == "remote":
        shared = remote_bundle(rest or None, lvlm_cfg)
        return lambda item: shared
    if kind == "replay":
        shared = replay_bundle(rest, lvlm_cfg)
        return lambda item: shared
    raise DeepscanError(f"unknown experts backend {experts_arg!r}")


def _cmd_run(args) -> int:
    cfg = _load_config(args.config, args.k, args.one_shot)
    image = read_png(args.image)
    options = [o.strip() for o in args.options.split(",")] if args.options else None
    question = Question(text=args.question, options=options)
    item = BenchItem(
        id=Path(args.image).stem,
        image_path=Path(args.image),
        question=args.question,
        options=tuple(options) if options else ("yes", "no"),
        answer_index=0,
    )
    bundle = _bundle_factory(args.experts, cfg.lvlm)(item)
    try:
        answer, trace = run_pipeline(image, question, bundle, cfg)
    except DeepscanError as exc:
        trace = getattr(exc, "trace", None)
        if trace is not None and args.trace:
            Path(args.trace).write_text(trace.to_json(include_timing=args.include_timing))
        print(f"error: {exc}", file=sys.stderr)
        return 1
    trace_path = args.trace or str(Path(args.image).with_suffix(".trace.json"))
    Path(trace_path).write_text(trace.to_json(include_timing=args.include_timing))
    if args.overlay:
        write_png(args.overlay, draw_overlay(image, trace))
    letter = extract_option_letter(answer) if options else None
    print(answer)
    if letter:
        print(f"[option letter: {letter}]", file=sys.stderr)
    return 0


def _cmd_eval(args) -> int:
    cfg = _load_config(args.config, args.k, args.one_shot)
    items = load_bench(args.bench)
    factory = _bundle_factory(args.experts, cfg.lvlm)
    runner = PipelineRunner(factory, cfg)
    report = evaluate(
        items,
        runner,
        mode=args.mode,
        jobs=args.jobs,
        cyclic_agg=args.cyclic_agg,
        trace_dir=args.trace_dir,
        resume=args.resume,
    )
    payload = report.to_json(include_timing=False)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        tmp = Path(args.out).with_suffix(".tmp")
        tmp.write_text(payload)
        tmp.replace(args.out)
    else:
        print(payload)
    print(
        f"n={report.n} mode={report.mode} accuracy={report.accuracy:.4f} "
        f"miou={report.miou if report.miou is None else round(report.miou, 4)} "
        f"wall={report.wall_time_s:.2f}s",
        file=sys.stderr,
    )
    return 0


def _cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    params = SceneParams(
        canvas=args.canvas,
        question_kind=args.question_kind,
        target_area_ratio=args.target_ratio,
        n_lookalikes=args.lookalikes,
        n_distractors=args.distractors,
        decoy=args.decoy,
        faint_second=args.faint_second,
        placement=args.placement,
    )
    bench_lines = []
    for i in range(args.count):
        seed = args.seed + i
        image, spec = generate_scene(seed, params)
        stem = f"{i:04d}"
        write_png(out / f"{stem}.png", image)
        (out / f"{stem}.json").write_text(
            json.dumps(spec_to_dict(spec), sort_keys=True, indent=1)
        )
        gt = spec.gt_union_bbox()
        bench_lines.append(
            json.dumps(
                {
                    "id": stem,
                    "image": f"{stem}.png",
                    "question": spec.question.text,
                    "options": spec.question.options,
                    "answer": letter_for(spec.question.answer_index),
                    "gt_bbox": gt.to_list(),
                    "subset": spec.question.kind,
                },
                sort_keys=True,
            )
        )
    (out / "bench.jsonl").write_text("\n".join(bench_lines) + "\n")
    print(f"wrote {args.count} scenes to {out}", file=sys.stderr)
    return 0


def _cmd_serve_check(args) -> int:
    results = run_serve_check(args.url, timeout_s=args.timeout)
    ok = True
    for res in results:
        status = "PASS" if res.ok else "FAIL"
        detail = f" ({res.detail})" if res.detail else ""
        print(f"[{status}] {res.name}{detail}")
        ok &= res.ok
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deepscan",
        description="Bottom-up visual evidence localization and grounded answering.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="answer one question about one image")
    run_p.add_argument("--image", required=True)
    run_p.add_argument("--question", required=True)
    run_p.add_argument("--options", help="comma-separated option texts")
    run_p.add_argument("--experts", required=True, help="oracle:<dir> | remote:<url> | replay:<dir>")
    run_p.add_argument("--config", help="YAML config file")
    run_p.add_argument("--k", help="override candidate budget (int or 'inf')")
    run_p.add_argument("--one-shot", action="store_true", help="image-level exploration, no tiling")
    run_p.add_argument("--trace", help="trace JSON output path")
    run_p.add_argument("--overlay", help="overlay PNG output path")
    run_p.add_argument("--include-timing", action="store_true")
    run_p.set_defaults(fn=_cmd_run)

    eval_p = sub.add_parser("eval", help="evaluate a JSONL benchmark")
    eval_p.add_argument("--bench", required=True)
    eval_p.add_argument("--experts", required=True)
    eval_p.add_argument("--mode", choices=["plain", "cyclic"], default="plain")
    eval_p.add_argument("--cyclic-agg", choices=["all", "mean"], default="all")
    eval_p.add_argument("--jobs", type=int, default=1)
    eval_p.add_argument("--config", help="YAML config file")
    eval_p.add_argument("--k", help="override candidate budget (int or 'inf')")
    eval_p.add_argument("--one-shot", action="store_true")
    eval_p.add_argument("--out", help="report JSON path (stdout when omitted)")
    eval_p.add_argument("--trace-dir", help="per-item result directory")
    eval_p.add_argument("--resume", action="store_true", help="skip items with existing traces")
    eval_p.set_defaults(fn=_cmd_eval)

    synth_p = sub.add_parser("synth", help="synthetic scene tools")
    synth_sub = synth_p.add_subparsers(dest="synth_command", required=True)
    gen_p = synth_sub.add_parser("generate", help="emit PNG scenes + spec JSON + bench JSONL")
    gen_p.add_argument("--seed", type=int, required=True)
    gen_p.add_argument("--count", type=int, required=True)
    gen_p.add_argument("--out", required=True)
    gen_p.add_argument("--canvas", type=int, default=1024)
    gen_p.add_argument("--target-ratio", type=float, default=5e-4)
    gen_p.add_argument("--distractors", type=int, default=3)
    gen_p.add_argument("--lookalikes", type=int, default=3)
    gen_p.add_argument("--question-kind", choices=["attribute", "spatial"], default="attribute")
    gen_p.add_argument("--decoy", action="store_true")
    gen_p.add_argument("--faint-second", action="store_true")
    gen_p.add_argument("--placement", choices=["any", "central"], default="any")
    gen_p.set_defaults(fn=_cmd_synth)

    check_p = sub.add_parser("serve-check", help="probe an adapter server for conformance")
    check_p.add_argument("--url", required=True)
    check_p.add_argument("--timeout", type=float, default=30.0)
    check_p.set_defaults(fn=_cmd_serve_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.fn(args)
    except DeepscanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
