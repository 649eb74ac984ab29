"""
errors.py - Exception hierarchy

Every error raised on purpose by the package derives from QwalkError. The
domain errors also derive from ValueError so callers that only care about
"bad input" can catch that.
"""


class QwalkError(Exception):
    """Base class for all qwalk errors."""


class CoinError(QwalkError, ValueError):
    """Coin parameters outside their family's domain."""


class BiasedGroverRangeError(CoinError):
    """Bias too small for a unitary BiasedGrover completion to exist."""


class GraphError(QwalkError, ValueError):
    """Invalid graph builder parameters."""


class GraphInvariantError(GraphError):
    """A built graph failed validation."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__(
            f"Graph failed validation with {len(self.violations)} violation(s): "
            + "; ".join(self.violations[:5])
        )


class WalkError(QwalkError, ValueError):
    """Coin/graph dimension mismatch or an out-of-range vertex."""


class SearchError(QwalkError, ValueError):
    """Search configuration incompatible with the graph."""


class AnalysisError(QwalkError, ValueError):
    """Degenerate or insufficient input to a fit."""


class ConfigError(QwalkError, ValueError):
    """Experiment config or settings could not be parsed."""
