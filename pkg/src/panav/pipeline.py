"""End-to-end episode runs: scene to maps to graph to candidates to field to
selection, with stage-attributed failures and deterministic artifacts.

A report (and every exported artifact) is a pure function of the episode
config when the heuristic selector is used; rerunning the same config must
produce identical bytes. Wall-clock timings therefore appear only in
benchmark rows, never in reports.
"""

from __future__ import annotations

import csv
import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .clients import HttpVlmClient
from .config import PipelineParams
from .errors import (
    EmptySourcesError,
    IoFailureError,
    NoCandidatesError,
    PanavError,
    SegmentUnreachableError,
    StageError,
    UnknownRoomError,
)
from .grid_maps import (
    CeilingPolicy,
    build_room_mask,
    build_top_view,
    build_traversability,
    write_traversability_pgm,
)
from .kernels import SQRT2, active_lane
from .path_planning import (
    MetricPath,
    astar,
    enumerate_simple_paths,
    filter_candidates,
    inflate_obstacles,
    realize_metric_path,
    write_paths_file,
)
from .privacy_field import (
    fmm_distance,
    gaussian_modulate,
    path_risk,
    write_field_file,
)
from .imaging import heatmap_png, path_overlay_png, top_view_rgb, array_to_png_bytes
from .scene_ingest import (
    Episode,
    SceneSet,
    parse_s3dis_area,
    parse_scene_file,
)
from .selection import (
    SelectorVerdict,
    heuristic_select,
    render_candidate,
    vlm_select,
    write_transcript_log,
)
from .synthetic import SyntheticLayout, generate_synthetic_world
from .topo_graph import build_topology, write_graph_file

STAGES = (
    "scene_ingest",
    "grid_maps",
    "topo_graph",
    "path_planning",
    "privacy_field",
    "selection",
)

METHOD_BASELINE = "shortest-astar"
METHOD_OURS = "privacy-aware"

CSV_HEADER = (
    "area",
    "method",
    "p_risk",
    "cell_distance",
    "world_distance_m",
    "path_id",
    "runtime_ms",
)

BASELINE_PATH_ID = -1  # baseline rows are not candidates


@dataclass(frozen=True)
class EpisodeConfig:
    """One navigation task plus the scene it runs in.

    Exactly one of scene_file, s3dis_area, synthetic_seed must be set.
    """

    instruction: str
    start_room: str
    goal_room: str
    scene_file: Path | None = None
    s3dis_area: Path | None = None
    synthetic_seed: int | None = None
    synthetic_layout: SyntheticLayout | None = None
    params: PipelineParams = dc_field(default_factory=PipelineParams)

    def __post_init__(self):
        sources = [
            s
            for s in (self.scene_file, self.s3dis_area, self.synthetic_seed)
            if s is not None
        ]
        if len(sources) != 1:
            raise ValueError("config needs exactly one scene source")
        if self.synthetic_layout is not None and self.synthetic_seed is None:
            raise ValueError("synthetic_layout requires synthetic_seed")
        if not self.instruction.strip():
            raise ValueError("instruction must be non-empty")


@dataclass(frozen=True, eq=False)
class EpisodeResult:
    """Everything run_episode computed: the JSON-ready report plus the
    intermediate products needed for artifact export."""

    report: dict
    scene: SceneSet
    top: object
    tra: object
    graph: object
    candidates: tuple[MetricPath, ...]
    scores: tuple
    distance_field: object
    privacy_field: object
    verdict: SelectorVerdict


@contextmanager
def _stage(name: str):
    try:
        yield
    except StageError:
        raise
    except PanavError as exc:
        raise StageError(name, exc) from exc


def _load_scene(config: EpisodeConfig) -> SceneSet:
    if config.scene_file is not None:
        return parse_scene_file(config.scene_file)
    if config.s3dis_area is not None:
        return parse_s3dis_area(config.s3dis_area)
    layout = config.synthetic_layout or SyntheticLayout()
    return generate_synthetic_world(config.synthetic_seed, layout)


def prepare_episode(config: EpisodeConfig):
    """Run every stage up to scoring; selection happens separately."""
    p = config.params
    with _stage("scene_ingest"):
        scene = _load_scene(config)
    with _stage("grid_maps"):
        policy = CeilingPolicy.parse(p.ceiling_policy)
        top = build_top_view(scene, p.resolution, policy)
        tra = build_traversability(
            scene, top.geometry, policy, p.floor_band, p.obstacle_band
        )
        if p.inflate_radius_cells > 0:
            tra = inflate_obstacles(tra, p.inflate_radius_cells)
    with _stage("topo_graph"):
        graph = build_topology(scene, tra, p.adjacency_threshold)
        for name in (config.start_room, config.goal_room):
            if not graph.has_node(name):
                raise UnknownRoomError(f"unknown room {name!r}")
        episode = Episode(
            scene, config.instruction, config.start_room, config.goal_room
        )
    with _stage("path_planning"):
        routes = enumerate_simple_paths(
            graph, config.start_room, config.goal_room
        )
        topo_candidates = filter_candidates(graph, routes, p.k)
        if not topo_candidates:
            raise NoCandidatesError(
                f"no hallway-routed path from {config.start_room!r} "
                f"to {config.goal_room!r}"
            )
        realized = []
        dropped = []
        for cand in topo_candidates:
            try:
                realized.append(realize_metric_path(cand, graph, tra))
            except SegmentUnreachableError as exc:
                dropped.append({"nodes": list(cand.nodes), "reason": str(exc)})
        if not realized:
            raise NoCandidatesError("every candidate failed grid realization")
    with _stage("privacy_field"):
        mask = build_room_mask(scene, tra.geometry, p.masked_categories)
        ys, xs = np.nonzero(mask.mask)
        if len(xs) == 0:
            raise EmptySourcesError(
                f"no cells for categories {', '.join(p.masked_categories)}"
            )
        sources = np.stack([xs, ys], axis=1).astype(np.int32)
        dist = fmm_distance(tra, sources)
        priv = gaussian_modulate(dist, p.sigma_d, p.field_mode)
        scores = tuple(path_risk(mp, priv) for mp in realized)
    return {
        "scene": scene,
        "episode": episode,
        "top": top,
        "tra": tra,
        "graph": graph,
        "topo_candidates": topo_candidates,
        "candidates": tuple(realized),
        "dropped": dropped,
        "distance_field": dist,
        "privacy_field": priv,
        "scores": scores,
    }


def _select(ctx, config: EpisodeConfig, client) -> SelectorVerdict:
    p = config.params
    with _stage("selection"):
        if p.selector == "heuristic":
            return SelectorVerdict(
                runs=(), chosen=heuristic_select(ctx["scores"]), method="heuristic"
            )
        if client is None:
            if not p.vlm_endpoint:
                raise ValueError(
                    "selector 'vlm' needs a client or a configured endpoint"
                )
            client = HttpVlmClient(p.vlm_endpoint)
        renderings = [
            render_candidate(ctx["top"], mp, p.render_scale)
            for mp in ctx["candidates"]
        ]
        return vlm_select(client, ctx["episode"], renderings)


def _report(ctx, config: EpisodeConfig, verdict: SelectorVerdict) -> dict:
    p = config.params
    geom = ctx["tra"].geometry
    by_id = {s.path_id: s for s in ctx["scores"]}
    topo_by_id = {t.path_id: t for t in ctx["topo_candidates"]}
    cands = []
    for mp in ctx["candidates"]:
        topo = topo_by_id[mp.path_id]
        s = by_id[mp.path_id]
        cands.append(
            {
                "path_id": mp.path_id,
                "nodes": list(mp.nodes),
                "topo_length_m": topo.topo_length,
                "cell_count": int(len(mp.cells)),
                "cell_length": mp.cell_length,
                "world_length_m": mp.world_length,
                "risk": s.risk,
            }
        )
    priv = ctx["privacy_field"]
    return {
        "area": ctx["scene"].area_name,
        "instruction": config.instruction,
        "start_room": config.start_room,
        "goal_room": config.goal_room,
        "parameters": {
            "resolution": p.resolution,
            "floor_band": p.floor_band,
            "obstacle_band": list(p.obstacle_band),
            "ceiling_policy": p.ceiling_policy,
            "adjacency_threshold": p.adjacency_threshold,
            "k": p.k,
            "inflate_radius_cells": p.inflate_radius_cells,
            "sigma_d": p.sigma_d,
            "field_mode": p.field_mode,
            "masked_categories": list(p.masked_categories),
            "selector": p.selector,
            "render_scale": p.render_scale,
        },
        "grid": {
            "width": geom.width,
            "height": geom.height,
            "resolution": geom.resolution,
            "origin": [geom.origin_x, geom.origin_y],
            "floor_z": ctx["top"].floor_z,
        },
        "field": {
            "mu": priv.mu,
            "sigma": priv.sigma,
            "mode": priv.mode,
        },
        "candidates": cands,
        "dropped_candidates": ctx["dropped"],
        "chosen_path_id": verdict.chosen,
        "selector_method": verdict.method,
        "kernel_lane": active_lane(),
    }


def run_episode(config: EpisodeConfig, client=None) -> EpisodeResult:
    """Full pipeline for one episode; see module docstring for determinism."""
    ctx = prepare_episode(config)
    verdict = _select(ctx, config, client)
    report = _report(ctx, config, verdict)
    return EpisodeResult(
        report=report,
        scene=ctx["scene"],
        top=ctx["top"],
        tra=ctx["tra"],
        graph=ctx["graph"],
        candidates=ctx["candidates"],
        scores=ctx["scores"],
        distance_field=ctx["distance_field"],
        privacy_field=ctx["privacy_field"],
        verdict=verdict,
    )


def export_artifacts(result: EpisodeResult, out_dir) -> list[Path]:
    """Write the report and every figure/map artifact; byte-stable for a
    given result. Returns the written paths."""
    out = Path(out_dir)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)

        def emit(name: str, data: bytes):
            p = out / name
            p.write_bytes(data)
            written.append(p)

        emit(
            "report.json",
            (json.dumps(result.report, indent=2, sort_keys=True) + "\n").encode(),
        )
        emit("top_view.png", array_to_png_bytes(top_view_rgb(result.top)))
        write_traversability_pgm(result.tra, out / "traversability.pgm")
        written += [out / "traversability.pgm", out / "traversability.meta"]
        write_field_file(
            result.distance_field.geometry,
            result.distance_field.values,
            out / "distance_field.bin",
        )
        priv = result.privacy_field
        write_field_file(
            priv.geometry,
            priv.values,
            out / "privacy_field.bin",
            extra={
                "mu": repr(priv.mu),
                "sigma": repr(priv.sigma),
                "sigma_d": repr(priv.sigma_d),
                "mode": priv.mode,
            },
        )
        written += [out / "distance_field.bin", out / "privacy_field.bin"]
        dvals = result.distance_field.values
        emit("distance_field.png", heatmap_png(dvals))
        emit("privacy_field.png", heatmap_png(priv.values, vmin=0.0, vmax=1.0))
        scale = result.report["parameters"]["render_scale"]
        chosen = result.report["chosen_path_id"]
        for mp in result.candidates:
            emit(
                f"candidate_path_{mp.path_id}.png",
                path_overlay_png(
                    result.top, mp.cells, scale=scale, label=f"path_{mp.path_id}"
                ),
            )
            if mp.path_id == chosen:
                emit(
                    "selected_path.png",
                    path_overlay_png(
                        result.top,
                        mp.cells,
                        scale=scale,
                        label=f"path_{mp.path_id} (selected)",
                    ),
                )
        write_paths_file(result.candidates, out / "paths.txt", include_cells=True)
        write_graph_file(result.graph, out / "graph.txt")
        written += [out / "paths.txt", out / "graph.txt"]
        if result.verdict.method == "vlm":
            write_transcript_log(result.verdict, out / "transcripts.json")
            written.append(out / "transcripts.json")
    except OSError as exc:
        raise IoFailureError(f"artifact export failed: {exc}") from exc
    return written


def _baseline_path(ctx) -> MetricPath:
    """Direct grid A* between the start and goal node centers."""
    graph = ctx["graph"]
    episode = ctx["episode"]
    tra = ctx["tra"]
    ca = graph.node(episode.start_room).cell
    cb = graph.node(episode.goal_room).cell
    cells, ns, nd = astar(tra, ca, cb)
    cell_length = float(ns + nd * SQRT2)
    return MetricPath(
        path_id=BASELINE_PATH_ID,
        nodes=(episode.start_room, episode.goal_room),
        cells=cells,
        cell_length=cell_length,
        world_length=float(cell_length * tra.geometry.resolution),
    )


@dataclass(frozen=True)
class BenchmarkRow:
    area: str
    method: str
    p_risk: float
    cell_distance: float
    world_distance_m: float
    path_id: int
    runtime_ms: float

    def as_csv(self) -> list[str]:
        return [
            self.area,
            self.method,
            repr(self.p_risk),
            repr(self.cell_distance),
            repr(self.world_distance_m),
            str(self.path_id),
            f"{self.runtime_ms:.3f}",
        ]


def run_benchmark(configs, client=None):
    """Two rows per episode: the direct-A* baseline and the full pipeline,
    both scored on the same privacy field. Failures are recorded per row and
    the run continues. Returns (rows, failures), rows sorted by (area,
    method)."""
    configs = list(configs)
    if not configs:
        raise ValueError("benchmark needs at least one episode config")
    rows = []
    failures = []
    for config in configs:
        t0 = time.perf_counter()
        try:
            ctx = prepare_episode(config)
        except StageError as exc:
            area = _config_area_label(config)
            failures.append((area, METHOD_OURS, str(exc)))
            failures.append((area, METHOD_BASELINE, str(exc)))
            continue
        area = ctx["scene"].area_name
        t_prep = time.perf_counter() - t0
        try:
            t1 = time.perf_counter()
            verdict = _select(ctx, config, client)
            score = next(
                s for s in ctx["scores"] if s.path_id == verdict.chosen
            )
            ours_ms = (t_prep + time.perf_counter() - t1) * 1000.0
            rows.append(
                BenchmarkRow(
                    area,
                    METHOD_OURS,
                    score.risk,
                    score.cell_length,
                    score.world_length,
                    verdict.chosen,
                    ours_ms,
                )
            )
        except StageError as exc:
            failures.append((area, METHOD_OURS, str(exc)))
        try:
            t2 = time.perf_counter()
            with _stage("path_planning"):
                base = _baseline_path(ctx)
            with _stage("privacy_field"):
                base_score = path_risk(base, ctx["privacy_field"])
            base_ms = (t_prep + time.perf_counter() - t2) * 1000.0
            rows.append(
                BenchmarkRow(
                    area,
                    METHOD_BASELINE,
                    base_score.risk,
                    base_score.cell_length,
                    base_score.world_length,
                    BASELINE_PATH_ID,
                    base_ms,
                )
            )
        except StageError as exc:
            failures.append((area, METHOD_BASELINE, str(exc)))
    rows.sort(key=lambda r: (r.area, r.method))
    return rows, failures


def _config_area_label(config: EpisodeConfig) -> str:
    if config.scene_file is not None:
        return Path(config.scene_file).stem
    if config.s3dis_area is not None:
        return Path(config.s3dis_area).name
    return f"synthetic_{config.synthetic_seed}"


def write_benchmark_csv(rows, path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(row.as_csv())


def s3dis_episode_configs(
    area_dir, params: PipelineParams | None = None
) -> list[EpisodeConfig]:
    """Default episodes for one dataset area, derived from room names alone:
    first office to last office, to first conference room, and to first
    bathroom, whichever exist."""
    from .scene_ingest import RoomCategory, category_for_name

    area = Path(area_dir)
    rooms = sorted(d.name for d in area.iterdir() if d.is_dir())
    by_cat = {}
    for r in rooms:
        by_cat.setdefault(category_for_name(r), []).append(r)
    offices = by_cat.get(RoomCategory.OFFICE, [])
    if not offices:
        return []
    start = offices[0]
    p = params or PipelineParams()
    episodes = []

    def add(goal, instruction):
        if goal is not None and goal != start:
            episodes.append(
                EpisodeConfig(
                    instruction=instruction,
                    start_room=start,
                    goal_room=goal,
                    s3dis_area=area,
                    params=p,
                )
            )

    add(
        offices[-1] if len(offices) > 1 else None,
        f"send a classified file from {start} to {offices[-1]}",
    )
    conferences = by_cat.get(RoomCategory.CONFERENCE, [])
    if conferences:
        add(
            conferences[0],
            f"send fragile equipment from {start} to {conferences[0]}",
        )
    bathrooms = by_cat.get(RoomCategory.BATHROOM, [])
    if bathrooms:
        add(bathrooms[0], f"send medicine from {start} to {bathrooms[0]}")
    return episodes


def synthetic_benchmark_config(
    seed: int, params: PipelineParams | None = None
) -> EpisodeConfig:
    """Seeded loop-world episode used by the synthetic benchmark: offices
    line the south corridor, so the direct route is short but exposed and the
    north corridor offers a clean detour."""
    layout = SyntheticLayout(
        offices=4 + seed % 4,
        hallways=4,
        topology="loop",
        point_spacing=0.08,
    )
    p = params or PipelineParams(resolution=0.1)
    return EpisodeConfig(
        instruction="carry a confidential parcel without lingering near offices",
        start_room="office_1",
        goal_room="office_2",
        synthetic_seed=seed,
        synthetic_layout=layout,
        params=p,
    )
