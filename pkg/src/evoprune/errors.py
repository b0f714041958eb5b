"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: configuration problems exit
with 2, data/format problems with 3, optimization-stage failures with 4.
"""


class EvoPruneError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(EvoPruneError):
    """Invalid, unknown, or inconsistent configuration."""


class InvalidSpecError(EvoPruneError):
    """Arguments violate an operation's preconditions."""


class ShapeError(EvoPruneError):
    """Array dimensions or genome lengths do not line up."""


class EmptyDataError(EvoPruneError):
    """An operation received a dataset with no rows."""


class FormatError(EvoPruneError):
    """A persisted artifact is corrupt or has the wrong version."""


class InvalidIntervalError(EvoPruneError):
    """A pruning interval with th1 > th2 reached weight surgery unrepaired."""


class ContractViolationError(EvoPruneError):
    """An engine invariant was broken, e.g. an unevaluated individual."""


class AnchorSelectionError(EvoPruneError):
    """No (heavy, light) anchor pair satisfies the selection rule."""


class CorridorError(EvoPruneError):
    """The sparsity corridor between the anchors is empty or inverted."""


class DegenerateLayerError(EvoPruneError):
    """A prunable layer has no nonzero weights left to score."""
