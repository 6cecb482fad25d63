"""Pipeline parameters and their INI-style config representation.

Every tunable has a default here; ``export-defaults`` writes them all out so
the knobs are discoverable without reading source.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, replace
from pathlib import Path

from .grid_maps import (
    CeilingPolicy,
    DEFAULT_FLOOR_BAND,
    DEFAULT_OBSTACLE_BAND,
    DEFAULT_RESOLUTION,
)
from .path_planning import DEFAULT_K
from .privacy_field import DEFAULT_SIGMA_D, FIELD_MODES
from .selection import DEFAULT_MODEL, DEFAULT_TEMPERATURE
from .topo_graph import DEFAULT_ADJACENCY_THRESHOLD

SELECTORS = ("heuristic", "vlm")

DEFAULT_MASKED_CATEGORIES = ("office",)
DEFAULT_RENDER_SCALE = 4


@dataclass(frozen=True)
class PipelineParams:
    resolution: float = DEFAULT_RESOLUTION
    floor_band: float = DEFAULT_FLOOR_BAND
    obstacle_band: tuple[float, float] = DEFAULT_OBSTACLE_BAND
    ceiling_policy: str = "auto"
    adjacency_threshold: float = DEFAULT_ADJACENCY_THRESHOLD
    k: int = DEFAULT_K
    inflate_radius_cells: float = 0.0
    sigma_d: float = DEFAULT_SIGMA_D
    field_mode: str = "risk-inverted"
    masked_categories: tuple[str, ...] = DEFAULT_MASKED_CATEGORIES
    selector: str = "heuristic"
    render_scale: int = DEFAULT_RENDER_SCALE
    vlm_endpoint: str = ""
    vlm_model: str = DEFAULT_MODEL
    vlm_temperature: float = DEFAULT_TEMPERATURE

    def __post_init__(self):
        CeilingPolicy.parse(self.ceiling_policy)  # validates
        if self.field_mode not in FIELD_MODES:
            raise ValueError(f"unknown field mode {self.field_mode!r}")
        if self.selector not in SELECTORS:
            raise ValueError(f"unknown selector {self.selector!r}")
        if not self.masked_categories:
            raise ValueError("masked_categories must be non-empty")

    def with_overrides(self, **kwargs) -> "PipelineParams":
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **kwargs) if kwargs else self


def _build_parser(params: PipelineParams) -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    cp["grid_maps"] = {
        "resolution": repr(params.resolution),
        "floor_band": repr(params.floor_band),
        "obstacle_band_low": repr(params.obstacle_band[0]),
        "obstacle_band_high": repr(params.obstacle_band[1]),
        "ceiling_policy": params.ceiling_policy,
    }
    cp["topo_graph"] = {
        "adjacency_threshold": repr(params.adjacency_threshold),
    }
    cp["path_planning"] = {
        "k": str(params.k),
        "inflate_radius_cells": repr(params.inflate_radius_cells),
    }
    cp["privacy_field"] = {
        "sigma_d": repr(params.sigma_d),
        "field_mode": params.field_mode,
        "masked_categories": ",".join(params.masked_categories),
    }
    cp["selection"] = {
        "selector": params.selector,
        "render_scale": str(params.render_scale),
    }
    cp["vlm"] = {
        "endpoint": params.vlm_endpoint,
        "model": params.vlm_model,
        "temperature": repr(params.vlm_temperature),
    }
    return cp


def write_config(params: PipelineParams, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        _build_parser(params).write(fh)


def dump_config(params: PipelineParams) -> str:
    import io

    buf = io.StringIO()
    _build_parser(params).write(buf)
    return buf.getvalue()


def export_default_config(path) -> None:
    write_config(PipelineParams(), path)


def load_config(path) -> PipelineParams:
    cp = configparser.ConfigParser()
    with Path(path).open("r", encoding="utf-8") as fh:
        cp.read_file(fh)
    d = PipelineParams()

    def get(section, key, fallback):
        return cp.get(section, key, fallback=fallback)

    cats = get("privacy_field", "masked_categories", ",".join(d.masked_categories))
    return PipelineParams(
        resolution=float(get("grid_maps", "resolution", repr(d.resolution))),
        floor_band=float(get("grid_maps", "floor_band", repr(d.floor_band))),
        obstacle_band=(
            float(get("grid_maps", "obstacle_band_low", repr(d.obstacle_band[0]))),
            float(get("grid_maps", "obstacle_band_high", repr(d.obstacle_band[1]))),
        ),
        ceiling_policy=get("grid_maps", "ceiling_policy", d.ceiling_policy),
        adjacency_threshold=float(
            get("topo_graph", "adjacency_threshold", repr(d.adjacency_threshold))
        ),
        k=int(get("path_planning", "k", str(d.k))),
        inflate_radius_cells=float(
            get("path_planning", "inflate_radius_cells", repr(d.inflate_radius_cells))
        ),
        sigma_d=float(get("privacy_field", "sigma_d", repr(d.sigma_d))),
        field_mode=get("privacy_field", "field_mode", d.field_mode),
        masked_categories=tuple(
            c.strip() for c in cats.split(",") if c.strip()
        ),
        selector=get("selection", "selector", d.selector),
        render_scale=int(get("selection", "render_scale", str(d.render_scale))),
        vlm_endpoint=get("vlm", "endpoint", d.vlm_endpoint),
        vlm_model=get("vlm", "model", d.vlm_model),
        vlm_temperature=float(
            get("vlm", "temperature", repr(d.vlm_temperature))
        ),
    )
