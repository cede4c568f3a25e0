"""Floorplan data-structure, prompt-construction and evaluation toolkit."""

from .bubble import BubbleDiagram, compatibility, extract_bubble, graph_edit_distance
from .geometry import (
    Rect,
    bounding_box,
    boundary_manhattan_distance,
    polygons_overlap,
    rect_decompose,
    shoelace_area,
    simplify_collinear,
)
from .metrics import (
    EvalReport,
    MetricScore,
    aggregate,
    prompt_consistency,
    ratio_score,
    self_consistency,
)
from .model import (
    Diagnostic,
    Floorplan,
    ParseOutcome,
    Room,
    Vertex,
    derive_fields,
    parse_lenient,
    parse_strict,
    serialize,
    validate_floorplan,
)
from .prompts import (
    ConstraintSet,
    PromptSpec,
    PromptType,
    RoomConstraint,
    apply_preset_mask,
    apply_random_mask,
    build_adjacency_string,
    build_constraint_string,
    full_constraints,
    make_generation_prompt,
    render_full_prompt,
)
from .raster import CategoryMap, RasterPlan, RoomMask, convert_raster, extract_room_masks, trace_perimeter
from .scene import SceneRecord, convert_scene, parse_scene_record

__version__ = "0.1.0"

__all__ = [
    "BubbleDiagram",
    "CategoryMap",
    "ConstraintSet",
    "Diagnostic",
    "EvalReport",
    "Floorplan",
    "MetricScore",
    "ParseOutcome",
    "PromptSpec",
    "PromptType",
    "RasterPlan",
    "Rect",
    "Room",
    "RoomConstraint",
    "RoomMask",
    "SceneRecord",
    "Vertex",
    "aggregate",
    "apply_preset_mask",
    "apply_random_mask",
    "boundary_manhattan_distance",
    "bounding_box",
    "build_adjacency_string",
    "build_constraint_string",
    "compatibility",
    "convert_raster",
    "convert_scene",
    "derive_fields",
    "extract_bubble",
    "extract_room_masks",
    "full_constraints",
    "graph_edit_distance",
    "make_generation_prompt",
    "parse_lenient",
    "parse_scene_record",
    "parse_strict",
    "polygons_overlap",
    "prompt_consistency",
    "ratio_score",
    "rect_decompose",
    "render_full_prompt",
    "self_consistency",
    "serialize",
    "shoelace_area",
    "simplify_collinear",
    "trace_perimeter",
    "validate_floorplan",
]
