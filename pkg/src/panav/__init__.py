"""Privacy-aware indoor route planning from annotated point clouds.

The pipeline: project a scene to top-view and traversability grids, link
rooms through hallways into a graph, enumerate and realize candidate routes,
build an exposure field around sensitive rooms, score each route, and pick
one, either with a vision-language selector or a deterministic heuristic.
"""

from .config import PipelineParams, export_default_config, load_config
from .errors import PanavError, StageError
from .grid_maps import (
    CeilingPolicy,
    GridGeometry,
    RoomMask,
    TopViewMap,
    TraversabilityMap,
    build_room_mask,
    build_top_view,
    build_traversability,
)
from .kernels import NATIVE_AVAILABLE, active_lane
from .path_planning import (
    MetricPath,
    TopologicalPath,
    astar,
    enumerate_simple_paths,
    filter_candidates,
    inflate_obstacles,
    realize_metric_path,
)
from .pipeline import (
    EpisodeConfig,
    EpisodeResult,
    export_artifacts,
    run_benchmark,
    run_episode,
    synthetic_benchmark_config,
)
from .privacy_field import (
    DistanceField,
    PrivacyField,
    RiskScore,
    exact_distance_oracle,
    fmm_distance,
    gaussian_modulate,
    path_risk,
)
from .scene_ingest import (
    Episode,
    Room,
    RoomCategory,
    SceneSet,
    parse_s3dis_area,
    parse_scene_file,
    write_scene_file,
)
from .selection import (
    SelectorVerdict,
    build_prompt,
    heuristic_select,
    majority_select,
    parse_verdict,
    render_candidate,
    vlm_select,
)
from .synthetic import SyntheticLayout, generate_synthetic_world
from .topo_graph import TopoGraph, build_topology, min_room_distance

__version__ = "0.1.0"

__all__ = [
    "CeilingPolicy",
    "DistanceField",
    "Episode",
    "EpisodeConfig",
    "EpisodeResult",
    "GridGeometry",
    "MetricPath",
    "NATIVE_AVAILABLE",
    "PanavError",
    "PipelineParams",
    "PrivacyField",
    "RiskScore",
    "Room",
    "RoomCategory",
    "RoomMask",
    "SceneSet",
    "SelectorVerdict",
    "StageError",
    "SyntheticLayout",
    "TopViewMap",
    "TopoGraph",
    "TopologicalPath",
    "TraversabilityMap",
    "active_lane",
    "astar",
    "build_prompt",
    "build_room_mask",
    "build_top_view",
    "build_topology",
    "build_traversability",
    "enumerate_simple_paths",
    "exact_distance_oracle",
    "export_artifacts",
    "export_default_config",
    "filter_candidates",
    "fmm_distance",
    "gaussian_modulate",
    "generate_synthetic_world",
    "heuristic_select",
    "inflate_obstacles",
    "load_config",
    "majority_select",
    "min_room_distance",
    "parse_s3dis_area",
    "parse_scene_file",
    "parse_verdict",
    "path_risk",
    "realize_metric_path",
    "render_candidate",
    "run_benchmark",
    "run_episode",
    "synthetic_benchmark_config",
    "vlm_select",
    "write_scene_file",
]
