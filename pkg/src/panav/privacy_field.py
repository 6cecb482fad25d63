"""Distance field from masked rooms, Gaussian modulation, and path risk.

The distance field is a first-order eikonal solve over traversable cells
seeded at the masked cells; modulation turns it into a [0, 1] exposure field;
a path's risk is the field summed over its cells.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateFieldError,
    EmptySourcesError,
    GeometryMismatchError,
    MalformedSceneError,
)
from .grid_maps import GridGeometry, TraversabilityMap
from .kernels import fmm_field

FIELD_MAGIC = "PANAV-FIELD v1"

# "risk-inverted" peaks at the masked rooms and decays outward: exposure is
# highest next to what must be avoided. "peak-far" is the mirrored variant
# peaking at the far end of the field; it is kept selectable for comparison.
FIELD_MODES = ("risk-inverted", "peak-far")

DEFAULT_SIGMA_D = 3.0


@dataclass(frozen=True, eq=False)
class DistanceField:
    geometry: GridGeometry
    values: np.ndarray  # (H, W) float64, cell units; inf where unreachable

    def __post_init__(self):
        self.values.setflags(write=False)


@dataclass(frozen=True, eq=False)
class PrivacyField:
    geometry: GridGeometry
    values: np.ndarray  # (H, W) float64 in [0, 1]
    mu: float
    sigma: float
    sigma_d: float
    mode: str

    def __post_init__(self):
        self.values.setflags(write=False)


@dataclass(frozen=True)
class RiskScore:
    path_id: int
    risk: float
    world_length: float
    cell_length: float


def _checked_sources(geometry: GridGeometry, sources) -> np.ndarray:
    src = np.asarray(list(sources), dtype=np.int32).reshape(-1, 2)
    if len(src) == 0:
        raise EmptySourcesError("no source cells")
    ok = (
        (src[:, 0] >= 0)
        & (src[:, 0] < geometry.width)
        & (src[:, 1] >= 0)
        & (src[:, 1] < geometry.height)
    )
    if not ok.all():
        raise GeometryMismatchError("source cells outside the grid")
    return src


def fmm_distance(tra: TraversabilityMap, sources) -> DistanceField:
    """Geodesic cell distance from the source set over traversable cells.

    Sources may sit on obstacle cells (masked rooms are obstacles); they get
    distance 0 and seed the march. Unreachable cells stay inf.
    """
    src = _checked_sources(tra.geometry, sources)
    values = fmm_field(tra.traversable, src)
    return DistanceField(tra.geometry, values)


def exact_distance_oracle(tra: TraversabilityMap, sources) -> DistanceField:
    """Straight-line distance to the nearest source, ignoring obstacles
    between. Brute force; meant for verification on small grids."""
    src = _checked_sources(tra.geometry, sources)
    h, w = tra.traversable.shape
    ys, xs = np.mgrid[0:h, 0:w]
    best = np.full((h, w), np.inf)
    for sx, sy in src:
        d = np.sqrt((xs - int(sx)) ** 2.0 + (ys - int(sy)) ** 2.0)
        np.minimum(best, d, out=best)
    reachable = tra.traversable.copy()
    reachable[src[:, 1], src[:, 0]] = True
    best[~reachable] = np.inf
    return DistanceField(tra.geometry, best)


def gaussian_modulate(
    d: DistanceField, sigma_d: float = DEFAULT_SIGMA_D, mode: str = "risk-inverted"
) -> PrivacyField:
    """Map a distance field into [0, 1] with a Gaussian of width mu/sigma_d.

    risk-inverted: exp(-D^2 / (2 sigma^2)), peak 1 at D = 0.
    peak-far: exp(-(D - mu)^2 / (2 sigma^2)), peak 1 at D = mu.
    Cells with infinite distance map to 0 in both modes.
    """
    if sigma_d <= 0:
        raise ValueError("sigma_d must be positive")
    if mode not in FIELD_MODES:
        raise ValueError(f"unknown field mode {mode!r}")
    finite = np.isfinite(d.values)
    if not (finite & (d.values > 0)).any():
        raise DegenerateFieldError("distance field has no positive finite value")
    mu = float(d.values[finite].max())
    sigma = mu / sigma_d
    dv = d.values[finite]
    if mode == "risk-inverted":
        g = np.exp(-(dv * dv) / (2.0 * sigma * sigma))
    else:
        g = np.exp(-((dv - mu) ** 2) / (2.0 * sigma * sigma))
    values = np.zeros_like(d.values)
    values[finite] = g
    return PrivacyField(d.geometry, values, mu, sigma, float(sigma_d), mode)


def path_risk(path, field: PrivacyField) -> RiskScore:
    """Sum of field values over the path's cells.

    Consecutive duplicate cells count once; a cell revisited later counts
    again per visit.
    """
    cells = np.asarray(path.cells)
    if len(cells):
        geom = field.geometry
        if (
            cells[:, 0].min() < 0
            or cells[:, 0].max() >= geom.width
            or cells[:, 1].min() < 0
            or cells[:, 1].max() >= geom.height
        ):
            raise GeometryMismatchError("path leaves the field grid")
    total = 0.0
    prev = None
    for x, y in cells:
        cur = (int(x), int(y))
        if cur == prev:
            continue
        total += float(field.values[cur[1], cur[0]])
        prev = cur
    return RiskScore(
        path_id=path.path_id,
        risk=total,
        world_length=path.world_length,
        cell_length=path.cell_length,
    )


# field export


def write_field_file(geometry: GridGeometry, values: np.ndarray, path, extra=None):
    """Versioned raster container: two text lines, then row-major little-
    endian float32 cells."""
    meta = {
        "origin_x": repr(geometry.origin_x),
        "origin_y": repr(geometry.origin_y),
        "resolution": repr(geometry.resolution),
        "width": str(geometry.width),
        "height": str(geometry.height),
    }
    if extra:
        meta.update({k: str(v) for k, v in extra.items()})
    header = FIELD_MAGIC + "\n" + " ".join(
        f"{k}={v}" for k, v in sorted(meta.items())
    ) + "\n"
    blob = np.ascontiguousarray(values, dtype="<f4").tobytes()
    with Path(path).open("wb") as fh:
        fh.write(header.encode("utf-8"))
        fh.write(blob)


def read_field_file(path):
    """Returns (geometry, float32 values, extra-meta dict)."""
    path = Path(path)
    blob = path.read_bytes()
    head, _, rest = blob.partition(b"\n")
    if head.decode("utf-8", "replace") != FIELD_MAGIC:
        raise MalformedSceneError(f"{path}: missing {FIELD_MAGIC!r} header")
    meta_line, _, payload = rest.partition(b"\n")
    meta = {}
    for tok in meta_line.decode("utf-8").split():
        key, _, value = tok.partition("=")
        meta[key] = value
    geometry = GridGeometry(
        origin_x=float(meta.pop("origin_x")),
        origin_y=float(meta.pop("origin_y")),
        resolution=float(meta.pop("resolution")),
        width=int(meta.pop("width")),
        height=int(meta.pop("height")),
    )
    n = geometry.width * geometry.height
    expect = n * struct.calcsize("<f")
    if len(payload) != expect:
        raise MalformedSceneError(
            f"{path}: payload holds {len(payload)} bytes, expected {expect}"
        )
    values = np.frombuffer(payload, dtype="<f4").reshape(
        geometry.height, geometry.width
    )
    return geometry, values, meta
