"""Exception hierarchy shared across the toolkit.

Exit-code mapping for the CLI lives in `cli.py`; the classes here carry no
formatting logic.
"""


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class InvalidConfig(ToolkitError):
    """Configuration violates a geometric or numeric invariant."""


class GraphDegenerate(ToolkitError):
    """Normal graph amplitude too large for an immersed surface."""


class DegenerateMetric(ToolkitError):
    """Discrete first fundamental form lost positivity."""


class NoCriticalLength(ToolkitError):
    """The configuration is stable at every length; no finite threshold."""


class NoBifurcation(ToolkitError):
    """No nontrivial branch exists for this configuration."""


class PoleInBracket(ToolkitError):
    """A root bracket straddles a tangent pole with no genuine sign change."""


class ConvergenceFailure(ToolkitError):
    """An iterative eigensolve failed to converge."""


class DegenerateKernel(ToolkitError):
    """The near-zero eigenspace is not one-dimensional after symmetry restriction."""


class NewtonDiverged(ToolkitError):
    """Newton iteration exceeded its budget or started diverging."""


class ContinuationStalled(ToolkitError):
    """Arclength step size underflowed during branch continuation."""
