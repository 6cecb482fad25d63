"""Exception types shared across the toolkit.

Every failure the pipeline can attribute to a stage derives from
:class:`PanavError`; the CLI catches that base class and nothing else.
"""


class PanavError(Exception):
    """Base class for all toolkit errors."""


# scene ingest


class NoScenesError(PanavError):
    """Dataset root exists but holds no room data."""


class MalformedRecordError(PanavError):
    """A point record failed to parse; carries file and line for the abort."""

    def __init__(self, path, line_no, reason):
        self.path = str(path)
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"{self.path}:{line_no}: {reason}")


class MalformedSceneError(PanavError):
    """Scene file violates the PANAV-SCENE schema."""


class InvalidLayoutError(PanavError):
    """Synthetic layout parameters cannot produce a valid world."""


# grid maps


class EmptyAfterFilterError(PanavError):
    """Ceiling filtering removed every point of the scene."""


class GeometryMismatchError(PanavError):
    """Grid data combined across incompatible geometries."""


# topological graph


class EmptyRoomError(PanavError):
    """Room without points where points are required."""


class NoTraversableCenterError(PanavError):
    """No traversable cell near the room centroid."""

    def __init__(self, room):
        self.room = room
        super().__init__(f"no traversable cell within reach of room {room!r}")


class UnknownRoomError(PanavError):
    """Named room does not exist in the scene or graph."""


# path planning


class NotTraversableError(PanavError):
    """Endpoint cell is an obstacle or out of bounds."""


class UnreachableError(PanavError):
    """No grid path between the requested cells."""


class SegmentUnreachableError(PanavError):
    """A leg of a topological route could not be realized on the grid."""

    def __init__(self, a, b):
        self.a = a
        self.b = b
        super().__init__(f"no grid path between rooms {a!r} and {b!r}")


# privacy field


class EmptySourcesError(PanavError):
    """Distance transform requested with no source cells."""


class DegenerateFieldError(PanavError):
    """Distance field has no positive finite value to modulate."""


# selection


class NoCandidatesError(PanavError):
    """Selector invoked with an empty candidate set."""


class MalformedVerdictError(PanavError):
    """Transcript holds no recognizable path verdict."""


class VerdictOutOfRangeError(PanavError):
    """Transcript names a path id outside the candidate range."""

    def __init__(self, path_id, candidate_count):
        self.path_id = path_id
        self.candidate_count = candidate_count
        super().__init__(
            f"verdict path_{path_id} outside candidate range 0..{candidate_count - 1}"
        )


class AllRunsFailedError(PanavError):
    """Every selector run failed to produce a usable verdict."""

    def __init__(self, causes):
        self.causes = tuple(causes)
        super().__init__("; ".join(str(c) for c in self.causes) or "all runs failed")


class UnauthorizedError(PanavError):
    """Endpoint rejected the credentials; surfaced without retry."""


class ClientTransportError(PanavError):
    """Transport-level failure talking to the selector endpoint."""


# pipeline


class IoFailureError(PanavError):
    """Artifact export could not write to the target location."""


class StageError(PanavError):
    """Module error annotated with the pipeline stage it came from."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {type(cause).__name__}: {cause}")
