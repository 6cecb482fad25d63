"""Candidate rendering, selector prompting, verdict parsing, and voting.

A selector run shows every labeled candidate map to a vision-language client
together with the navigation instruction, five times; the majority of the
parsed verdicts wins. A deterministic risk-minimizing selector covers offline
use and testing.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    AllRunsFailedError,
    MalformedVerdictError,
    NoCandidatesError,
    UnauthorizedError,
    ClientTransportError,
    VerdictOutOfRangeError,
)
from .imaging import path_overlay_png

DEFAULT_TEMPERATURE = 0.5
DEFAULT_MODEL = "gpt-4-turbo"
VOTE_RUNS = 5

_FINAL_RE = re.compile(r"FINAL:\s*path_(\d+)")
_TOKEN_RE = re.compile(r"(?<![\w])path_(\d+)(?![\w])")


@dataclass(frozen=True)
class CandidateRendering:
    path_id: int
    image: bytes  # PNG
    caption: str

    def __post_init__(self):
        if not self.image.startswith(b"\x89PNG"):
            raise ValueError("image is not a PNG")


@dataclass(frozen=True)
class VlmRequest:
    system_text: str
    user_text: str
    images: tuple[bytes, ...]
    temperature: float = DEFAULT_TEMPERATURE
    model: str = DEFAULT_MODEL

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be in [0, 2]")
        if not self.images:
            raise ValueError("request needs at least one image")


@dataclass(frozen=True)
class RunRecord:
    transcript: str | None  # raw assistant text, None when transport failed
    path_id: int | None  # parsed id, None when the run failed
    error: str | None = None


@dataclass(frozen=True)
class SelectorVerdict:
    runs: tuple[RunRecord, ...]
    chosen: int
    method: str  # "vlm" or "heuristic"


def render_candidate(top, path, scale: int = 4) -> CandidateRendering:
    """Top view with the candidate drawn in red and captioned path_<id>."""
    caption = f"path_{path.path_id}"
    png = path_overlay_png(top, path.cells, scale=scale, label=caption)
    return CandidateRendering(path.path_id, png, caption)


def build_prompt(
    episode,
    candidates,
    model: str = DEFAULT_MODEL,
    temperature: float = DEFAULT_TEMPERATURE,
) -> VlmRequest:
    """Chat request carrying the instruction and every candidate map.

    The user text names each attached image by its caption and demands a
    final line of the exact form "FINAL: path_<id>".
    """
    candidates = list(candidates)
    if not candidates:
        raise NoCandidatesError("no candidate renderings to choose from")
    labels = ", ".join(c.caption for c in candidates)
    user_lines = [
        f"Instruction: {episode.instruction}",
        f"Start room: {episode.start_room}",
        f"Goal room: {episode.goal_room}",
        (
            f"The {len(candidates)} attached top-view maps each show one "
            f"candidate route in red, labeled {labels} in the image corner."
        ),
        (
            "Think step by step: consider which rooms each route passes, "
            "how exposed it is, and how well it fits the instruction. "
            "Then answer with the single best route."
        ),
        'Your last line must be exactly "FINAL: path_<id>".',
    ]
    system_text = (
        "You select routes for an indoor delivery robot. Weigh the "
        "sensitivity of the task against the areas each route crosses."
    )
    return VlmRequest(
        system_text=system_text,
        user_text="\n".join(user_lines),
        images=tuple(c.image for c in candidates),
        temperature=temperature,
        model=model,
    )


def parse_verdict(transcript: str, candidate_count: int) -> int:
    """Extract the chosen path id from assistant text.

    The last "FINAL: path_<id>" line wins; failing that, the last standalone
    path_<n> token.
    """
    if candidate_count < 1:
        raise ValueError("candidate_count must be >= 1")
    matches = _FINAL_RE.findall(transcript)
    if not matches:
        matches = _TOKEN_RE.findall(transcript)
    if not matches:
        raise MalformedVerdictError("no path id in transcript")
    path_id = int(matches[-1])
    if not 0 <= path_id < candidate_count:
        raise VerdictOutOfRangeError(path_id, candidate_count)
    return path_id


def majority_select(verdicts) -> int:
    """Most frequent id; ties go to the lowest id."""
    verdicts = list(verdicts)
    if not verdicts:
        raise ValueError("verdicts must be non-empty")
    counts = {}
    for v in verdicts:
        counts[v] = counts.get(v, 0) + 1
    return min(counts, key=lambda p: (-counts[p], p))


def vlm_select(client, episode, candidates, runs: int = VOTE_RUNS) -> SelectorVerdict:
    """Query the client ``runs`` times and majority-vote the parsed answers.

    Failed runs (transport or parse) are recorded and excluded from the
    vote; credential rejections abort immediately. Raises AllRunsFailed when
    no run parses.
    """
    candidates = list(candidates)
    request = build_prompt(episode, candidates)
    records = []
    parsed = []
    for _ in range(runs):
        try:
            text = client.complete(request)
        except UnauthorizedError:
            raise
        except ClientTransportError as exc:
            records.append(RunRecord(None, None, f"transport: {exc}"))
            continue
        try:
            pid = parse_verdict(text, len(candidates))
        except (MalformedVerdictError, VerdictOutOfRangeError) as exc:
            records.append(RunRecord(text, None, str(exc)))
            continue
        records.append(RunRecord(text, pid))
        parsed.append(pid)
    if not parsed:
        raise AllRunsFailedError([r.error for r in records])
    return SelectorVerdict(tuple(records), majority_select(parsed), "vlm")


def heuristic_select(scores) -> int:
    """Lowest risk; ties go to shorter world length, then lower id."""
    scores = list(scores)
    if not scores:
        raise ValueError("scores must be non-empty")
    best = min(scores, key=lambda s: (s.risk, s.world_length, s.path_id))
    return best.path_id


def write_transcript_log(verdict: SelectorVerdict, path) -> None:
    """Audit log: every run's raw transcript and parse outcome, as JSON."""
    payload = {
        "method": verdict.method,
        "chosen": verdict.chosen,
        "runs": [
            {
                "transcript": r.transcript,
                "path_id": r.path_id,
                "error": r.error,
            }
            for r in verdict.runs
        ],
    }
    Path(path).write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
