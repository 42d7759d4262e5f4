"""Exception types shared across the toolkit."""


class LaneGraphError(Exception):
    """Base class for all toolkit-specific errors."""


class GraphStructureError(LaneGraphError, ValueError):
    """A grid graph cannot be built from the given inputs."""


class PathEnumerationLimitError(LaneGraphError, RuntimeError):
    """Brute-force enumeration would exceed the configured path cap."""


class ApSpaceLimitError(LaneGraphError, RuntimeError):
    """All-pairs solve refused: node count exceeds the quadratic-memory guard."""


class GeometryError(LaneGraphError, ValueError):
    """Degenerate projective configuration (direction in the image plane,
    singular ground-to-image map, ...)."""


class RansacNoConsensusError(LaneGraphError, RuntimeError):
    """No hypothesis reached the minimum consensus size."""


class ConfigError(LaneGraphError, ValueError):
    """Invalid run configuration.  Collects every violated constraint."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
