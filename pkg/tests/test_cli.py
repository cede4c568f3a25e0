from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

from floorbench import cli
from floorbench.model import parse_strict, serialize
from floorbench.raster import CategoryMap, rasterize_floorplan

from synth import random_plan


def write_plans(path: Path, plans) -> None:
    path.write_text("".join(serialize(fp, compact=True) + "\n" for fp in plans), encoding="utf-8")


def read_records(path: Path):
    records = []
    for line in path.read_text(encoding="utf-8").splitlines():
        obj = json.loads(line)
        if isinstance(obj, dict) and set(obj) == {"_meta"}:
            continue
        records.append(obj)
    return records


def make_generations(prompts_path: Path, out_path: Path, mutate=None) -> None:
    lines = []
    for rec in read_records(prompts_path):
        text = json.dumps(rec["ground_truth"])
        if mutate is not None:
            text = mutate(rec["index"], text)
        lines.append(json.dumps({"index": rec["index"], "text": text}))
    out_path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


@pytest.fixture()
def plans_file(tmp_path):
    rng = random.Random(1234)
    plans = [random_plan(rng) for _ in range(6)]
    path = tmp_path / "plans.jsonl"
    write_plans(path, plans)
    return path


class TestConvert:
    def test_raster_directory(self, tmp_path):
        rng = random.Random(5)
        cmap = CategoryMap.load_default()
        raster_dir = tmp_path / "rasters"
        raster_dir.mkdir()
        for i in range(3):
            rasterize_floorplan(random_plan(rng), cmap).to_png(str(raster_dir / f"plan_{i}.png"))
        out = tmp_path / "converted.jsonl"
        assert cli.main(["convert", str(raster_dir), "--kind", "raster", "--out", str(out)]) == 0
        records = read_records(out)
        assert len(records) == 3
        for rec in records:
            assert parse_strict(json.dumps(rec)).ok

    def test_scene_with_corrupt_line(self, tmp_path, capsys):
        scene_path = tmp_path / "scenes.jsonl"
        good = {
            "rooms": [
                {
                    "id": "room|0",
                    "room_type": "Bedroom",
                    "floor_polygon": [{"x": 0, "z": 0}, {"x": 0, "z": 3}, {"x": 3, "z": 3}, {"x": 3, "z": 0}],
                }
            ]
        }
        scene_path.write_text(json.dumps(good) + "\n" + "{broken\n" + json.dumps(good) + "\n", encoding="utf-8")
        out = tmp_path / "converted.jsonl"
        assert cli.main(["convert", str(scene_path), "--kind", "scene", "--out", str(out)]) == 0
        assert len(read_records(out)) == 2
        assert "error" in capsys.readouterr().err

    def test_all_failures_nonzero_exit(self, tmp_path):
        scene_path = tmp_path / "scenes.jsonl"
        scene_path.write_text("{broken\n", encoding="utf-8")
        out = tmp_path / "converted.jsonl"
        assert cli.main(["convert", str(scene_path), "--kind", "scene", "--out", str(out)]) == 1

    def test_converted_output_passes_validate(self, tmp_path):
        rng = random.Random(6)
        cmap = CategoryMap.load_default()
        raster_dir = tmp_path / "rasters"
        raster_dir.mkdir()
        rasterize_floorplan(random_plan(rng), cmap).to_png(str(raster_dir / "a.png"))
        out = tmp_path / "converted.jsonl"
        cli.main(["convert", str(raster_dir), "--kind", "raster", "--out", str(out)])
        assert cli.main(["validate", str(out), "--strict"]) == 0


class TestPrompt:
    def test_total_area_prompt_contents(self, plans_file, tmp_path):
        out = tmp_path / "prompts.jsonl"
        assert cli.main([
            "prompt", str(plans_file), "--prompt-type", "total-area", "--out", str(out),
        ]) == 0
        records = read_records(out)
        assert len(records) == 6
        first_total = records[0]["ground_truth"]["total_area"]
        assert f"{{'total_area': {first_total}}}" in records[0]["prompt"]

    def test_byte_identical_across_runs(self, plans_file, tmp_path):
        out1 = tmp_path / "p1.jsonl"
        out2 = tmp_path / "p2.jsonl"
        args = ["prompt", str(plans_file), "--prompt-type", "partial-room-area", "--with-bd"]
        cli.main(args + ["--out", str(out1)])
        cli.main(args + ["--out", str(out2)])
        assert out1.read_bytes() == out2.read_bytes()

    def test_with_bd_adds_adjacency(self, plans_file, tmp_path):
        out = tmp_path / "prompts.jsonl"
        cli.main(["prompt", str(plans_file), "--with-bd", "--threshold", "2", "--out", str(out)])
        for rec in read_records(out):
            assert "bubble_diagram" in rec
            assert "adjacency constraints:" in rec["prompt"]

    def test_seed_env_override(self, plans_file, tmp_path, monkeypatch):
        out_default = tmp_path / "a.jsonl"
        out_env = tmp_path / "b.jsonl"
        cli.main(["prompt", str(plans_file), "--prompt-type", "partial-room-area", "--out", str(out_default)])
        monkeypatch.setenv("FLOORBENCH_SEED", "999")
        cli.main(["prompt", str(plans_file), "--prompt-type", "partial-room-area", "--out", str(out_env)])
        assert out_default.read_bytes() != out_env.read_bytes()

    def test_masking_flag(self, plans_file, tmp_path):
        out = tmp_path / "prompts.jsonl"
        cli.main(["prompt", str(plans_file), "--masking", "preset", "--out", str(out)])
        for rec in read_records(out):
            assert "'room_count':" in rec["prompt"]


class TestEvaluate:
    def test_ground_truth_scores_perfectly(self, plans_file, tmp_path):
        prompts = tmp_path / "prompts.jsonl"
        gens = tmp_path / "gens.jsonl"
        report_path = tmp_path / "report.json"
        cli.main(["prompt", str(plans_file), "--with-bd", "--threshold", "2", "--out", str(prompts)])
        make_generations(prompts, gens)
        assert cli.main([
            "evaluate", str(prompts), str(gens), "--threshold", "2", "--out", str(report_path),
        ]) == 0
        report = json.loads(report_path.read_text())
        assert report["parse_failures"] == 0
        agg = report["aggregate"]
        assert agg["self.p_area"]["mean"] == 1.0
        assert agg["self.overlap"]["mean"] == 0.0
        assert agg["prompt.total_area"]["mean"] == 1.0
        assert agg["compatibility"]["mean"] == 0.0

    def test_garbage_line_counted_not_fatal(self, plans_file, tmp_path):
        prompts = tmp_path / "prompts.jsonl"
        gens = tmp_path / "gens.jsonl"
        report_path = tmp_path / "report.json"
        cli.main(["prompt", str(plans_file), "--out", str(prompts)])
        make_generations(prompts, gens, mutate=lambda i, t: "garbage" if i == 2 else t)
        cli.main(["evaluate", str(prompts), str(gens), "--out", str(report_path)])
        report = json.loads(report_path.read_text())
        assert report["parse_failures"] == 1
        assert report["aggregate"]["self.p_area"]["n"] == 5

    def test_csv_written(self, plans_file, tmp_path):
        prompts = tmp_path / "prompts.jsonl"
        gens = tmp_path / "gens.jsonl"
        report_path = tmp_path / "report.json"
        cli.main(["prompt", str(plans_file), "--out", str(prompts)])
        make_generations(prompts, gens)
        cli.main(["evaluate", str(prompts), str(gens), "--format", "csv", "--out", str(report_path)])
        csv_path = report_path.with_suffix(".csv")
        assert csv_path.exists()
        assert csv_path.read_text().startswith("parse_failures,")

    def test_sample_plan_self_evaluation(self, sample_plan, tmp_path):
        plans = tmp_path / "plans.jsonl"
        write_plans(plans, [sample_plan])
        prompts = tmp_path / "prompts.jsonl"
        gens = tmp_path / "gens.jsonl"
        report_path = tmp_path / "report.json"
        cli.main(["prompt", str(plans), "--prompt-type", "total-area", "--out", str(prompts)])
        assert "{'total_area': 183.6}" in read_records(prompts)[0]["prompt"]
        cli.main(["prompt", str(plans), "--out", str(prompts)])
        make_generations(prompts, gens)
        cli.main(["evaluate", str(prompts), str(gens), "--out", str(report_path)])
        agg = json.loads(report_path.read_text())["aggregate"]
        assert agg["self.p_area"]["mean"] == pytest.approx(0.869, abs=1e-3)
        assert agg["self.total_area"]["mean"] == 1.0

    def test_wrapped_generation_text_recovered(self, plans_file, tmp_path):
        prompts = tmp_path / "prompts.jsonl"
        gens = tmp_path / "gens.jsonl"
        report_path = tmp_path / "report.json"
        cli.main(["prompt", str(plans_file), "--out", str(prompts)])
        make_generations(prompts, gens, mutate=lambda i, t: f"Sure! Here you go: {t} Enjoy.")
        cli.main(["evaluate", str(prompts), str(gens), "--out", str(report_path)])
        assert json.loads(report_path.read_text())["parse_failures"] == 0


class TestRender:
    def test_sample_plan_svg(self, sample_plan, tmp_path):
        plans = tmp_path / "plans.jsonl"
        write_plans(plans, [sample_plan])
        out_dir = tmp_path / "svg"
        assert cli.main([
            "render", str(plans), "--out", str(out_dir), "--with-bd", "--threshold", "2",
        ]) == 0
        svg = (out_dir / "plan_0000.svg").read_text()
        assert svg.count("<polygon") == 5
        assert svg.count("bubble-edge") == 6

    def test_empty_plan_valid_svg(self, tmp_path):
        plans = tmp_path / "plans.jsonl"
        plans.write_text('{"room_count":0,"total_area":0,"room_types":[],"rooms":[]}\n')
        out_dir = tmp_path / "svg"
        cli.main(["render", str(plans), "--out", str(out_dir)])
        svg = (out_dir / "plan_0000.svg").read_text()
        assert svg.startswith("<?xml") and "</svg>" in svg

    def test_render_deterministic(self, plans_file, tmp_path):
        out1 = tmp_path / "svg1"
        out2 = tmp_path / "svg2"
        cli.main(["render", str(plans_file), "--out", str(out1), "--with-bd"])
        cli.main(["render", str(plans_file), "--out", str(out2), "--with-bd"])
        for p1 in sorted(out1.iterdir()):
            assert p1.read_bytes() == (out2 / p1.name).read_bytes()


class TestValidate:
    def test_sample_plan_warnings_and_strictness(self, sample_plan, tmp_path):
        plans = tmp_path / "plans.jsonl"
        write_plans(plans, [sample_plan])
        assert cli.main(["validate", str(plans)]) == 0
        assert cli.main(["validate", str(plans), "--strict"]) == 1

    def test_derived_plans_clean(self, plans_file):
        assert cli.main(["validate", str(plans_file), "--strict"]) == 0

    def test_duplicate_id_nonzero_exit(self, sample_plan_text, tmp_path):
        obj = json.loads(sample_plan_text)
        obj["rooms"][1]["id"] = obj["rooms"][0]["id"]
        plans = tmp_path / "plans.jsonl"
        plans.write_text(json.dumps(obj) + "\n")
        assert cli.main(["validate", str(plans)]) == 1


class TestJobsDeterminism:
    def test_prompt_and_evaluate_jobs_invariant(self, plans_file, tmp_path):
        outs = {}
        for jobs in ("1", "3"):
            prompts = tmp_path / f"prompts_{jobs}.jsonl"
            gens = tmp_path / f"gens_{jobs}.jsonl"
            report = tmp_path / f"report_{jobs}.json"
            cli.main(["prompt", str(plans_file), "--with-bd", "--jobs", jobs, "--out", str(prompts)])
            make_generations(prompts, gens)
            cli.main(["evaluate", str(prompts), str(gens), "--jobs", jobs, "--out", str(report)])
            outs[jobs] = (prompts.read_bytes(), report.read_bytes())
        assert outs["1"] == outs["3"]
