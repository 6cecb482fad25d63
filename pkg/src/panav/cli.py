"""Command-line driver for the whole toolkit.

Subcommands cover each pipeline stage plus full runs and benchmarks; flags
mirror the config keys, and --config loads an INI produced by
export-defaults.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .config import (
    PipelineParams,
    SELECTORS,
    dump_config,
    export_default_config,
    load_config,
)
from .errors import PanavError
from .grid_maps import (
    CeilingPolicy,
    build_top_view,
    build_traversability,
    write_traversability_pgm,
)
from .imaging import array_to_png_bytes, heatmap_png, top_view_rgb
from .path_planning import inflate_obstacles, write_paths_file
from .pipeline import (
    EpisodeConfig,
    export_artifacts,
    prepare_episode,
    run_benchmark,
    run_episode,
    s3dis_episode_configs,
    synthetic_benchmark_config,
    write_benchmark_csv,
)
from .privacy_field import FIELD_MODES, write_field_file
from .scene_ingest import parse_s3dis_area, parse_scene_file, write_scene_file
from .synthetic import SyntheticLayout, generate_synthetic_world
from .topo_graph import build_topology, write_graph_file

ENV_DATA_DIR = "PANAV_DATA_DIR"


def _add_scene_source(ap: argparse.ArgumentParser) -> None:
    g = ap.add_mutually_exclusive_group(required=True)
    g.add_argument("--scene-file", type=Path, help="scene text file")
    g.add_argument("--s3dis-area", type=Path, help="dataset Area_N directory")
    g.add_argument(
        "--synthetic-seed",
        type=int,
        help="generate a synthetic world from this seed",
    )


def _add_param_flags(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--config", type=Path, help="INI config file")
    ap.add_argument("--resolution", type=float, help="grid resolution, m/cell")
    ap.add_argument("--sigma-d", type=float, dest="sigma_d")
    ap.add_argument("--k", type=int, help="max candidate paths")
    ap.add_argument("--field-mode", choices=FIELD_MODES, dest="field_mode")
    ap.add_argument("--selector", choices=SELECTORS)
    ap.add_argument(
        "--adjacency-threshold", type=float, dest="adjacency_threshold"
    )


def _params_from(args) -> PipelineParams:
    base = load_config(args.config) if args.config else PipelineParams()
    return base.with_overrides(
        resolution=getattr(args, "resolution", None),
        sigma_d=getattr(args, "sigma_d", None),
        k=getattr(args, "k", None),
        field_mode=getattr(args, "field_mode", None),
        selector=getattr(args, "selector", None),
        adjacency_threshold=getattr(args, "adjacency_threshold", None),
    )


def _load_scene(args):
    if args.scene_file is not None:
        return parse_scene_file(args.scene_file)
    if args.s3dis_area is not None:
        return parse_s3dis_area(args.s3dis_area)
    return generate_synthetic_world(args.synthetic_seed, SyntheticLayout())


def _episode_config(args, params: PipelineParams) -> EpisodeConfig:
    return EpisodeConfig(
        instruction=args.instruction,
        start_room=args.start,
        goal_room=args.goal,
        scene_file=args.scene_file,
        s3dis_area=args.s3dis_area,
        synthetic_seed=args.synthetic_seed,
        params=params,
    )


def _build_maps(scene, params: PipelineParams):
    policy = CeilingPolicy.parse(params.ceiling_policy)
    top = build_top_view(scene, params.resolution, policy)
    tra = build_traversability(
        scene, top.geometry, policy, params.floor_band, params.obstacle_band
    )
    if params.inflate_radius_cells > 0:
        tra = inflate_obstacles(tra, params.inflate_radius_cells)
    return top, tra


def _cmd_ingest(args) -> int:
    scene = _load_scene(args)
    write_scene_file(scene, args.out)
    print(f"{scene.area_name}: {len(scene.rooms)} rooms, "
          f"{scene.total_points()} points -> {args.out}")
    return 0


def _cmd_maps(args) -> int:
    params = _params_from(args)
    scene = _load_scene(args)
    top, tra = _build_maps(scene, params)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "top_view.png").write_bytes(array_to_png_bytes(top_view_rgb(top)))
    write_traversability_pgm(tra, out / "traversability.pgm")
    free = int(tra.traversable.sum())
    print(
        f"{tra.geometry.width}x{tra.geometry.height} cells at "
        f"{tra.geometry.resolution} m, {free} traversable -> {out}"
    )
    return 0


def _cmd_graph(args) -> int:
    params = _params_from(args)
    scene = _load_scene(args)
    _, tra = _build_maps(scene, params)
    graph = build_topology(scene, tra, params.adjacency_threshold)
    write_graph_file(graph, args.out)
    print(f"{len(graph.nodes)} nodes, {len(graph.edges)} edges -> {args.out}")
    return 0


def _run_prepared(args):
    params = _params_from(args)
    config = _episode_config(args, params)
    return prepare_episode(config), config


def _cmd_paths(args) -> int:
    ctx, _ = _run_prepared(args)
    write_paths_file(ctx["candidates"], args.out, include_cells=True)
    for mp in ctx["candidates"]:
        print(
            f"path_{mp.path_id}: {' > '.join(mp.nodes)}  "
            f"{mp.world_length:.2f} m"
        )
    print(f"-> {args.out}")
    return 0


def _cmd_field(args) -> int:
    params = _params_from(args)
    scene = _load_scene(args)
    _, tra = _build_maps(scene, params)
    from .grid_maps import build_room_mask
    from .privacy_field import fmm_distance, gaussian_modulate
    import numpy as np

    mask = build_room_mask(scene, tra.geometry, params.masked_categories)
    ys, xs = np.nonzero(mask.mask)
    sources = np.stack([xs, ys], axis=1).astype(np.int32)
    dist = fmm_distance(tra, sources)
    priv = gaussian_modulate(dist, params.sigma_d, params.field_mode)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_field_file(dist.geometry, dist.values, out / "distance_field.bin")
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
    (out / "distance_field.png").write_bytes(heatmap_png(dist.values))
    (out / "privacy_field.png").write_bytes(
        heatmap_png(priv.values, vmin=0.0, vmax=1.0)
    )
    print(f"mu={priv.mu:.3f} sigma={priv.sigma:.3f} mode={priv.mode} -> {out}")
    return 0


def _cmd_score(args) -> int:
    ctx, _ = _run_prepared(args)
    print("path_id,nodes,cell_distance,world_distance_m,p_risk")
    for s in ctx["scores"]:
        mp = next(m for m in ctx["candidates"] if m.path_id == s.path_id)
        print(
            f"{s.path_id},{'>'.join(mp.nodes)},{s.cell_length!r},"
            f"{s.world_length!r},{s.risk!r}"
        )
    return 0


def _cmd_select(args) -> int:
    params = _params_from(args)
    config = _episode_config(args, params)
    result = run_episode(config)
    chosen = result.report["chosen_path_id"]
    mp = next(m for m in result.candidates if m.path_id == chosen)
    print(f"chosen path_{chosen}: {' > '.join(mp.nodes)}")
    return 0


def _cmd_run(args) -> int:
    params = _params_from(args)
    config = _episode_config(args, params)
    result = run_episode(config)
    written = export_artifacts(result, args.out_dir)
    chosen = result.report["chosen_path_id"]
    print(f"chosen path_{chosen} ({result.report['selector_method']}), "
          f"{len(written)} artifacts -> {args.out_dir}")
    return 0


def _cmd_bench(args) -> int:
    params = _params_from(args)
    configs = []
    data_dir = os.environ.get(ENV_DATA_DIR)
    if args.s3dis_root is None and data_dir:
        args.s3dis_root = Path(data_dir)
    if args.s3dis_root is not None:
        areas = sorted(
            d for d in Path(args.s3dis_root).iterdir()
            if d.is_dir() and d.name.startswith("Area_")
        )
        for area in areas:
            configs.extend(s3dis_episode_configs(area, params))
    if not configs:
        configs = [
            synthetic_benchmark_config(seed, params)
            for seed in range(args.seed, args.seed + args.count)
        ]
    rows, failures = run_benchmark(configs)
    write_benchmark_csv(rows, args.out)
    print(f"{len(rows)} rows -> {args.out}")
    for area, method, reason in failures:
        print(f"failed: {area}/{method}: {reason}", file=sys.stderr)
    return 0 if not failures else 1


def _cmd_export_defaults(args) -> int:
    if args.out is None:
        sys.stdout.write(dump_config(PipelineParams()))
        return 0
    export_default_config(args.out)
    print(f"defaults -> {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="panav",
        description="privacy-aware indoor route planning from point clouds",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="normalize a scene into the text format")
    _add_scene_source(p)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("maps", help="build top-view and traversability maps")
    _add_scene_source(p)
    _add_param_flags(p)
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=_cmd_maps)

    p = sub.add_parser("graph", help="build the room adjacency graph")
    _add_scene_source(p)
    _add_param_flags(p)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=_cmd_graph)

    for name, func, help_text in (
        ("paths", _cmd_paths, "enumerate and realize candidate paths"),
        ("score", _cmd_score, "score candidates on the privacy field"),
        ("select", _cmd_select, "run selection and print the chosen path"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_scene_source(p)
        _add_param_flags(p)
        p.add_argument("--start", required=True)
        p.add_argument("--goal", required=True)
        p.add_argument("--instruction", default="deliver an item")
        if name == "paths":
            p.add_argument("--out", type=Path, required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("field", help="compute distance and exposure fields")
    _add_scene_source(p)
    _add_param_flags(p)
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=_cmd_field)

    p = sub.add_parser("run", help="full episode with artifact export")
    _add_scene_source(p)
    _add_param_flags(p)
    p.add_argument("--start", required=True)
    p.add_argument("--goal", required=True)
    p.add_argument("--instruction", default="deliver an item")
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("bench", help="baseline-vs-pipeline benchmark CSV")
    _add_param_flags(p)
    p.add_argument(
        "--s3dis-root",
        type=Path,
        help=f"dataset root (default: ${ENV_DATA_DIR})",
    )
    p.add_argument("--seed", type=int, default=0, help="first synthetic seed")
    p.add_argument(
        "--count", type=int, default=10, help="number of synthetic worlds"
    )
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("export-defaults", help="write the default config INI")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=_cmd_export_defaults)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PanavError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
