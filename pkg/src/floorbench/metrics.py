"""Self-consistency, prompt-consistency and aggregate scoring.

Self-consistency checks how the numbers inside one floorplan agree with each
other (stated areas vs polygon areas, counts, duplicate ids, overlaps).
Prompt-consistency checks how a generation agrees with the constraints that
were in its prompt; a metric is emitted only when its constraint was present,
and inapplicable metrics render as "-" in reports.

All ratio metrics lie in [0, 1] via the clamped relative-error complement
``1 - |measured - reference| / |reference|``; 1.0 means exact agreement.
Higher is better everywhere except Overlap (an occurrence indicator, lower is
better) and Compatibility (a graph edit distance, lower is better).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from . import geometry
from .bubble import BubbleDiagram, compatibility
from .model import Floorplan, parse_lenient, round1
from .prompts import ConstraintSet

SELF_P_AREA = "self.p_area"
SELF_TOTAL_AREA = "self.total_area"
SELF_OVERLAP = "self.overlap"
SELF_R_COUNT = "self.r_count"
SELF_ID = "self.id"
SELF_R_H = "self.r_h"
SELF_R_W = "self.r_w"
PC_NUM_R = "prompt.num_r"
PC_TOTAL_AREA = "prompt.total_area"
PC_R_AREA = "prompt.r_area"
PC_ID = "prompt.id"
PC_TYPE = "prompt.type"
PC_ID_VS_TYPE = "prompt.id_vs_type"
PC_R_H = "prompt.r_h"
PC_R_W = "prompt.r_w"
COMPATIBILITY = "compatibility"

# Report column order mirrors the metric listing convention: the
# self-consistency group, the shared height/width pair, the
# prompt-consistency group, then compatibility.
METRIC_ORDER = (
    SELF_TOTAL_AREA,
    SELF_P_AREA,
    SELF_OVERLAP,
    SELF_ID,
    SELF_R_COUNT,
    SELF_R_H,
    SELF_R_W,
    PC_TOTAL_AREA,
    PC_NUM_R,
    PC_ID,
    PC_R_AREA,
    PC_TYPE,
    PC_ID_VS_TYPE,
    PC_R_H,
    PC_R_W,
    COMPATIBILITY,
)


@dataclass(frozen=True)
class MetricScore:
    name: str
    value: Optional[float]
    per_item: Tuple[float, ...] = ()
    applicable: bool = True

    def to_obj(self) -> Dict:
        return {
            "name": self.name,
            "value": self.value,
            "per_item": list(self.per_item),
            "applicable": self.applicable,
        }


def _inapplicable(name: str) -> MetricScore:
    return MetricScore(name=name, value=None, applicable=False)


def ratio_score(measured: float, reference: float) -> float:
    """Clamped relative-error complement in [0, 1]; 1.0 iff exact match."""
    if not math.isfinite(reference):
        raise ValueError(f"non-finite reference value: {reference}")
    if not math.isfinite(measured):
        return 0.0
    score = 1.0 - abs(measured - reference) / max(abs(reference), 1e-9)
    return min(1.0, max(0.0, score))


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def _room_geometry(fp: Floorplan):
    """Per-room polygon area and bounding box; degenerate rooms yield None."""
    out = []
    for room in fp.rooms:
        try:
            pts = room.points()
            out.append((geometry.shoelace_area(pts), geometry.bounding_box(pts)))
        except ValueError:
            out.append(None)
    return out


def self_consistency(fp: Floorplan) -> List[MetricScore]:
    """Score agreement among the numbers of a single floorplan.

    Emits P.Area (polygon vs stated area, per-room mean), Total Area (room
    area sum vs stated total), Overlap (1 when any pair of rooms overlaps),
    R.Count and ID indicators (1 = pass), and R.H / R.W (bounding box vs
    stated dimensions). Rooms with degenerate polygons are excluded from the
    per-room means.
    """
    geo = _room_geometry(fp)
    scores: List[MetricScore] = []

    p_area = [ratio_score(g[0], room.area) for room, g in zip(fp.rooms, geo) if g is not None]
    if p_area:
        scores.append(MetricScore(SELF_P_AREA, _mean(p_area), tuple(p_area)))
    else:
        scores.append(_inapplicable(SELF_P_AREA))

    stated_sum = round1(math.fsum(room.area for room in fp.rooms))
    scores.append(MetricScore(SELF_TOTAL_AREA, ratio_score(stated_sum, fp.total_area)))

    rect = [
        (i, fp.rooms[i].points())
        for i, g in enumerate(geo)
        if g is not None and geometry.is_rectilinear(fp.rooms[i].points())
    ]
    overlapping = 0.0
    for a in range(len(rect)):
        for b in range(a + 1, len(rect)):
            if geometry.polygons_overlap(rect[a][1], rect[b][1]):
                overlapping = 1.0
                break
        if overlapping:
            break
    scores.append(MetricScore(SELF_OVERLAP, overlapping))

    scores.append(MetricScore(SELF_R_COUNT, 1.0 if fp.room_count == len(fp.rooms) else 0.0))

    ids = [room.id for room in fp.rooms]
    scores.append(MetricScore(SELF_ID, 1.0 if len(set(ids)) == len(ids) else 0.0))

    r_h = [ratio_score(g[1].height, room.height) for room, g in zip(fp.rooms, geo) if g is not None]
    r_w = [ratio_score(g[1].width, room.width) for room, g in zip(fp.rooms, geo) if g is not None]
    scores.append(MetricScore(SELF_R_H, _mean(r_h), tuple(r_h)) if r_h else _inapplicable(SELF_R_H))
    scores.append(MetricScore(SELF_R_W, _mean(r_w), tuple(r_w)) if r_w else _inapplicable(SELF_R_W))
    return scores


def _precision_recall(generated: Sequence[str], requested: Sequence[str]) -> Tuple[float, float]:
    """Multiset precision and recall of generated items vs requested items."""
    gen = Counter(generated)
    req = Counter(requested)
    inter = sum((gen & req).values())
    precision = inter / sum(gen.values()) if gen else 0.0
    recall = inter / sum(req.values()) if req else 0.0
    return precision, recall


def prompt_consistency(fp: Floorplan, cs: ConstraintSet) -> List[MetricScore]:
    """Score a generation against the constraints of its prompt.

    Only metrics whose constraint appears in the set are applicable: Num.R
    needs room_count, Total Area needs total_area, R.Area / ID / IDvsType /
    R.H / R.W need room entries carrying the respective field, and Type needs
    either the room_types list or typed room entries. Requested rooms missing
    from the generation score 0 and lower recall.

    ID and Type report coverage of the requested set (the recall) as their
    headline value, so prompts constraining only some rooms do not penalize a
    generation for the unconstrained rest; the (precision, recall) pair is
    kept in per_item.
    """
    geo = _room_geometry(fp)
    by_id: Dict[str, int] = {}
    for i, room in enumerate(fp.rooms):
        by_id.setdefault(room.id, i)
    scores: List[MetricScore] = []

    if cs.room_count is not None:
        scores.append(MetricScore(PC_NUM_R, ratio_score(len(fp.rooms), cs.room_count)))
    else:
        scores.append(_inapplicable(PC_NUM_R))

    if cs.total_area is not None:
        polygon_sum = math.fsum(g[0] for g in geo if g is not None)
        scores.append(MetricScore(PC_TOTAL_AREA, ratio_score(polygon_sum, cs.total_area)))
    else:
        scores.append(_inapplicable(PC_TOTAL_AREA))

    def match_dimension(name: str, attr: str, pick) -> MetricScore:
        entries = [rc for rc in cs.rooms if rc.id is not None and getattr(rc, attr) is not None]
        if not entries:
            return _inapplicable(name)
        per = []
        for rc in entries:
            idx = by_id.get(rc.id)
            if idx is None or geo[idx] is None:
                per.append(0.0)
            else:
                per.append(ratio_score(pick(geo[idx]), getattr(rc, attr)))
        return MetricScore(name, _mean(per), tuple(per))

    scores.append(match_dimension(PC_R_AREA, "area", lambda g: g[0]))

    requested_ids = [rc.id for rc in cs.rooms if rc.id is not None]
    if requested_ids:
        precision, recall = _precision_recall(sorted({r.id for r in fp.rooms}), sorted(set(requested_ids)))
        scores.append(MetricScore(PC_ID, recall, (precision, recall)))
    else:
        scores.append(_inapplicable(PC_ID))

    if cs.room_types is not None:
        requested_types = list(cs.room_types)
    else:
        requested_types = [rc.room_type for rc in cs.rooms if rc.room_type is not None]
    if requested_types:
        precision, recall = _precision_recall([r.room_type for r in fp.rooms], requested_types)
        scores.append(MetricScore(PC_TYPE, recall, (precision, recall)))
    else:
        scores.append(_inapplicable(PC_TYPE))

    typed_entries = [(rc.id, rc.room_type) for rc in cs.rooms if rc.id is not None and rc.room_type is not None]
    if typed_entries:
        wanted = set(typed_entries)
        matched = sum(1 for room in fp.rooms if (room.id, room.room_type) in wanted)
        scores.append(MetricScore(PC_ID_VS_TYPE, min(1.0, matched / len(typed_entries))))
    else:
        scores.append(_inapplicable(PC_ID_VS_TYPE))

    scores.append(match_dimension(PC_R_H, "height", lambda g: g[1].height))
    scores.append(match_dimension(PC_R_W, "width", lambda g: g[1].width))
    return scores


def score_generation(
    text: str,
    cs: ConstraintSet,
    input_bd: Optional[BubbleDiagram] = None,
    bd_threshold: float = 2.0,
) -> Tuple[Optional[List[MetricScore]], bool]:
    """Lenient-parse one generation and score it against its prompt.

    Returns (scores, parsed). Unparseable generations yield (None, False)
    and count as parse failures upstream. A generation whose polygons are not
    rectilinear still gets its consistency scores, but compatibility cannot
    be extracted and is marked inapplicable for that plan.
    """
    outcome = parse_lenient(text)
    if outcome.floorplan is None:
        return None, False
    fp = outcome.floorplan
    scores = self_consistency(fp)
    scores.extend(prompt_consistency(fp, cs))
    if input_bd is not None:
        try:
            scores.append(MetricScore(COMPATIBILITY, float(compatibility(input_bd, fp, bd_threshold))))
        except ValueError:
            scores.append(_inapplicable(COMPATIBILITY))
    return scores, True


@dataclass(frozen=True)
class AggregateStat:
    mean: float
    std: float
    n: int

    def to_obj(self) -> Dict:
        return {"mean": self.mean, "std": self.std, "n": self.n}

    def display(self) -> str:
        return f"{self.mean:.2f}±{self.std:.2f}"


@dataclass(frozen=True)
class EvalReport:
    per_plan: Mapping[str, Tuple[MetricScore, ...]]
    aggregate: Mapping[str, AggregateStat]
    parse_failures: int = 0

    def to_obj(self) -> Dict:
        return {
            "parse_failures": self.parse_failures,
            "aggregate": {name: stat.to_obj() for name, stat in self.aggregate.items()},
            "per_plan": {key: [s.to_obj() for s in scores] for key, scores in self.per_plan.items()},
        }


def aggregate(
    per_plan: Mapping[str, Sequence[MetricScore]],
    parse_failures: int = 0,
) -> EvalReport:
    """Fold per-plan scores into per-metric mean, population std and count.

    Only applicable scores from successfully parsed plans contribute;
    indicator metrics aggregate to pass fractions. A metric with zero
    applicable plans is left out of the aggregate.
    """
    buckets: Dict[str, List[float]] = {}
    for scores in per_plan.values():
        for score in scores:
            if score.applicable and score.value is not None:
                buckets.setdefault(score.name, []).append(score.value)
    stats: Dict[str, AggregateStat] = {}
    ordered = [name for name in METRIC_ORDER if name in buckets]
    ordered += [name for name in sorted(buckets) if name not in METRIC_ORDER]
    for name in ordered:
        values = buckets[name]
        mean = _mean(values)
        std = math.sqrt(math.fsum((v - mean) ** 2 for v in values) / len(values))
        stats[name] = AggregateStat(mean=mean, std=std, n=len(values))
    frozen = {key: tuple(scores) for key, scores in per_plan.items()}
    return EvalReport(per_plan=frozen, aggregate=stats, parse_failures=parse_failures)


def report_csv(report: EvalReport) -> str:
    """One-row CSV of the aggregate, columns in the standard metric order.

    Inapplicable metrics print as "-", matching the table convention."""
    header = ",".join(("parse_failures",) + METRIC_ORDER)
    cells = [str(report.parse_failures)]
    for name in METRIC_ORDER:
        stat = report.aggregate.get(name)
        cells.append(stat.display() if stat is not None else "-")
    return header + "\n" + ",".join(cells) + "\n"
