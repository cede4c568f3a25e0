"""Command-line interface: convert, prompt, evaluate, render, validate.

All commands stream JSON lines, emit results in input order regardless of
worker count, and avoid any nondeterministic state, so a fixed input and
configuration always produce byte-identical artifacts. Output files may
start with a ``{"_meta": ...}`` line recording the tool, command and seed;
readers skip it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, TypeVar

from . import metrics, model, prompts, raster, render, scene
from .bubble import BubbleDiagram
from .model import Floorplan

T = TypeVar("T")
U = TypeVar("U")

DEFAULT_SEED = prompts.DEFAULT_SEED
RASTER_THRESHOLD = raster.DEFAULT_ADJACENCY_THRESHOLD
SCENE_THRESHOLD = scene.DEFAULT_ADJACENCY_THRESHOLD


@dataclass(frozen=True)
class RunConfig:
    """Shared run settings; the seed is recorded in every artifact header."""

    seed: int
    threshold: float
    jobs: int = 1
    out: Optional[str] = None

    def __post_init__(self) -> None:
        if self.threshold < 0:
            raise ValueError("threshold must be nonnegative")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")


def _default_seed() -> int:
    return int(os.environ.get("FLOORBENCH_SEED", DEFAULT_SEED))


def _ordered_map(fn: Callable[[T], U], items: Sequence[T], jobs: int) -> List[U]:
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _meta_line(command: str, config: RunConfig) -> str:
    return json.dumps({"_meta": {"tool": "floorbench", "command": command, "seed": config.seed}})


def _read_jsonl(path: str) -> List[dict]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if isinstance(obj, dict) and "_meta" in obj and len(obj) == 1:
                continue
            records.append(obj)
    return records


def _write_lines(path: Optional[str], lines: Iterable[str]) -> None:
    text = "".join(line + "\n" for line in lines)
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")


def _load_floorplans(path: str) -> List[Tuple[int, Floorplan]]:
    plans = []
    with open(path, "r", encoding="utf-8") as fh:
        raw_lines = [line.strip() for line in fh if line.strip()]
    index = 0
    for line in raw_lines:
        obj = json.loads(line)
        if isinstance(obj, dict) and "_meta" in obj and len(obj) == 1:
            continue
        outcome = model.parse_strict(line)
        if outcome.floorplan is None:
            details = "; ".join(str(d) for d in outcome.errors())
            raise ValueError(f"invalid floorplan at record {index}: {details}")
        plans.append((index, outcome.floorplan))
        index += 1
    return plans


def cmd_convert(args: argparse.Namespace) -> int:
    threshold = args.threshold
    if threshold is None:
        threshold = RASTER_THRESHOLD if args.kind == "raster" else SCENE_THRESHOLD
    config = RunConfig(seed=args.seed, threshold=threshold, jobs=args.jobs, out=args.out)

    if args.kind == "raster":
        cmap = raster.CategoryMap.from_json(args.category_map) if args.category_map else raster.CategoryMap.load_default()
        input_path = Path(args.input)
        if input_path.is_dir():
            files = sorted(
                str(p) for p in input_path.iterdir() if p.suffix.lower() in (".png", ".raw")
            )
        else:
            files = [str(input_path)]
        if not files:
            print("convert: no raster inputs found", file=sys.stderr)
            return 1

        def work(path: str) -> Tuple[str, Optional[str], Optional[str]]:
            try:
                plan = raster.RasterPlan.from_png(path) if path.lower().endswith(".png") else raster.RasterPlan.from_raw(path)
                fp = raster.convert_raster(plan, cmap, adjacency_threshold=config.threshold)
                return path, model.serialize(fp, compact=True), None
            except (ValueError, OSError) as exc:
                return path, None, str(exc)

        results = _ordered_map(work, files, config.jobs)
    else:
        records = []
        with open(args.input, "r", encoding="utf-8") as fh:
            records = [line.strip() for line in fh if line.strip()]

        def work(line: str) -> Tuple[str, Optional[str], Optional[str]]:
            try:
                obj = json.loads(line)
                if isinstance(obj, dict) and "_meta" in obj and len(obj) == 1:
                    return line, None, None
                record = scene.parse_scene_record(obj)
                fp, diags = scene.convert_scene(record, adjacency_threshold=config.threshold)
                note = "; ".join(str(d) for d in diags) if diags else None
                return line, model.serialize(fp, compact=True), note
            except (ValueError, json.JSONDecodeError) as exc:
                return line, None, f"error: {exc}"

        results = _ordered_map(work, records, config.jobs)

    lines = [_meta_line("convert", config)]
    ok = 0
    failures = 0
    for source, payload, note in results:
        if payload is not None:
            lines.append(payload)
            ok += 1
            if note:
                print(f"convert: warning: {note}", file=sys.stderr)
        elif note is not None:
            failures += 1
            print(f"convert: {note}", file=sys.stderr)
    _write_lines(config.out, lines)
    print(f"convert: {ok} converted, {failures} failed", file=sys.stderr)
    return 1 if failures and not ok else 0


def cmd_prompt(args: argparse.Namespace) -> int:
    config = RunConfig(seed=args.seed, threshold=args.threshold, jobs=args.jobs, out=args.out)
    template = prompts.DEFAULT_TEMPLATE
    if args.template_config:
        with open(args.template_config, "r", encoding="utf-8") as fh:
            template = prompts.PromptTemplate.from_obj(json.load(fh))
    prompt_type = prompts.PromptType(args.prompt_type)
    plans = _load_floorplans(args.floorplans)

    def work(item: Tuple[int, Floorplan]) -> str:
        index, fp = item
        spec = prompts.make_generation_prompt(
            fp,
            prompt_type,
            seed=prompts.derive_seed(config.seed, index),
            with_bd=args.with_bd,
            bd_threshold=config.threshold,
        )
        if args.masking == "random":
            spec = prompts.PromptSpec(
                constraint_set=prompts.apply_random_mask(spec.constraint_set, spec.seed),
                adjacency=spec.adjacency,
                prompt_type=spec.prompt_type,
                seed=spec.seed,
            )
        elif args.masking == "preset":
            spec = prompts.PromptSpec(
                constraint_set=prompts.apply_preset_mask(spec.constraint_set, spec.seed),
                adjacency=spec.adjacency,
                prompt_type=spec.prompt_type,
                seed=spec.seed,
            )
        record = {
            "index": index,
            "prompt": prompts.render_full_prompt(spec, template),
            "ground_truth": model.floorplan_to_obj(fp),
            "prompt_type": spec.prompt_type.value,
            "seed": spec.seed,
        }
        if spec.adjacency is not None:
            record["bubble_diagram"] = spec.adjacency.to_obj()
        return json.dumps(record)

    lines = [_meta_line("prompt", config)]
    lines.extend(_ordered_map(work, plans, config.jobs))
    _write_lines(config.out, lines)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = RunConfig(seed=args.seed, threshold=args.threshold, jobs=args.jobs, out=args.out)
    prompt_records = _read_jsonl(args.prompts)
    generations = {}
    for obj in _read_jsonl(args.generations):
        generations[int(obj["index"])] = obj["text"]

    def work(item: Tuple[int, dict]) -> Tuple[str, Optional[List[metrics.MetricScore]]]:
        position, record = item
        index = int(record.get("index", position))
        text = generations.get(index)
        if text is None:
            return str(index), None
        cs, parsed_bd = prompts.parse_prompt(record["prompt"])
        input_bd = None
        if "bubble_diagram" in record:
            input_bd = BubbleDiagram.from_obj(record["bubble_diagram"])
        elif parsed_bd is not None:
            input_bd = parsed_bd
        scores, parsed = metrics.score_generation(text, cs, input_bd, bd_threshold=config.threshold)
        return str(index), scores if parsed else None

    results = _ordered_map(work, list(enumerate(prompt_records)), config.jobs)
    per_plan = {}
    parse_failures = 0
    for key, scores in results:
        if scores is None:
            parse_failures += 1
        else:
            per_plan[key] = scores
    report = metrics.aggregate(per_plan, parse_failures=parse_failures)

    obj = {"meta": {"tool": "floorbench", "command": "evaluate", "seed": config.seed}}
    obj.update(report.to_obj())
    payload = json.dumps(obj, indent=2) + "\n"
    if config.out is None:
        sys.stdout.write(payload)
    else:
        Path(config.out).parent.mkdir(parents=True, exist_ok=True)
        Path(config.out).write_text(payload, encoding="utf-8")
        if args.format == "csv":
            csv_path = str(Path(config.out).with_suffix(".csv"))
            Path(csv_path).write_text(metrics.report_csv(report), encoding="utf-8")
    print(
        f"evaluate: {len(per_plan)} scored, {parse_failures} parse failures",
        file=sys.stderr,
    )
    return 0


def cmd_render(args: argparse.Namespace) -> int:
    config = RunConfig(seed=args.seed, threshold=args.threshold, jobs=args.jobs, out=args.out)
    plans = _load_floorplans(args.floorplans)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    def work(item: Tuple[int, Floorplan]) -> Tuple[int, str]:
        index, fp = item
        svg = render.render_svg(
            fp, with_bubble=args.with_bd, threshold=config.threshold, seed=config.seed
        )
        return index, svg

    for index, svg in _ordered_map(work, plans, config.jobs):
        (out_dir / f"plan_{index:04d}.svg").write_text(svg, encoding="utf-8")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    with open(args.floorplans, "r", encoding="utf-8") as fh:
        raw_lines = [line.strip() for line in fh if line.strip()]
    errors = 0
    warnings = 0
    index = 0
    for line in raw_lines:
        obj = json.loads(line)
        if isinstance(obj, dict) and "_meta" in obj and len(obj) == 1:
            continue
        outcome = model.parse_strict(line)
        diags = list(outcome.diagnostics)
        if outcome.floorplan is not None:
            diags.extend(model.validate_floorplan(outcome.floorplan))
        for diag in diags:
            print(f"record {index}: {diag}", file=sys.stderr)
            if diag.severity == model.ERROR:
                errors += 1
            else:
                warnings += 1
        index += 1
    print(f"validate: {index} records, {errors} errors, {warnings} warnings", file=sys.stderr)
    if errors:
        return 1
    if args.strict and warnings:
        return 1
    return 0


def _add_common(parser: argparse.ArgumentParser, threshold_default: Optional[float]) -> None:
    parser.add_argument("--seed", type=int, default=_default_seed(),
                        help="run seed (default 12345, FLOORBENCH_SEED overrides)")
    parser.add_argument("--threshold", type=float, default=threshold_default,
                        help="adjacency threshold in length units (inclusive)")
    parser.add_argument("--jobs", type=int, default=1, help="worker count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="floorbench",
        description="Floorplan conversion, prompt construction and evaluation toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="convert raster or scene sources to canonical floorplans")
    p.add_argument("input", help="raster file/directory or scene JSONL file")
    p.add_argument("--kind", choices=("raster", "scene"), required=True)
    p.add_argument("--category-map", help="category map JSON (raster); bundled default otherwise")
    p.add_argument("--out", help="output floorplan JSONL (stdout otherwise)")
    _add_common(p, None)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("prompt", help="build generation prompts from ground-truth floorplans")
    p.add_argument("floorplans", help="floorplan JSONL file")
    p.add_argument("--prompt-type", default=prompts.PromptType.SPECIFIC.value,
                   choices=[t.value for t in prompts.PromptType])
    p.add_argument("--with-bd", action="store_true", help="attach the bubble diagram")
    p.add_argument("--masking", choices=("none", "random", "preset"), default="none",
                   help="additional constraint masking regime")
    p.add_argument("--template-config", help="JSON file overriding the chat header tokens")
    p.add_argument("--out", help="output prompts JSONL (stdout otherwise)")
    _add_common(p, SCENE_THRESHOLD)
    p.set_defaults(func=cmd_prompt)

    p = sub.add_parser("evaluate", help="score generations against their prompts")
    p.add_argument("prompts", help="prompts JSONL file")
    p.add_argument("generations", help='generations JSONL file ({"index", "text"})')
    p.add_argument("--format", choices=("json", "csv"), default="json",
                   help="csv additionally writes the aggregate table next to --out")
    p.add_argument("--out", help="report JSON path (stdout otherwise)")
    _add_common(p, SCENE_THRESHOLD)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("render", help="render floorplans to SVG files")
    p.add_argument("floorplans", help="floorplan JSONL file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--with-bd", action="store_true", help="overlay the bubble diagram")
    _add_common(p, SCENE_THRESHOLD)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("validate", help="check floorplan documents against the schema and invariants")
    p.add_argument("floorplans", help="floorplan JSONL file")
    p.add_argument("--strict", action="store_true", help="treat warnings as failures")
    _add_common(p, SCENE_THRESHOLD)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
