"""Exception types shared across the package.

Everything derives from HolofeynError so callers can catch broadly.  The CLI
maps ParseError to exit code 1, failed internal assertions to 2, and
NonConvergence to 3.
"""


class HolofeynError(Exception):
    pass


### graph errors

class SelfLoop(HolofeynError):
    """An edge has equal head and tail."""


class Disconnected(HolofeynError):
    """Operation requires a connected (sub)graph."""


class EmptyEdgeSet(HolofeynError):
    """Graph or subgraph with no edges where edges are required."""


class EmptySubset(HolofeynError):
    """An empty vertex or edge subset was passed."""


class OverlappingVertexSets(HolofeynError):
    """Vertex sets that must be disjoint overlap."""


### symbolic algebra errors

class VariableMismatch(HolofeynError):
    """Polynomials over different variable lists were combined."""


class GeneratorMismatch(HolofeynError):
    """Exterior elements over different generator lists were combined."""


### Schwinger space / quadrature errors

class ConstraintViolated(HolofeynError):
    """Chart coordinates violate a sphere constraint."""


class NonPositiveT(HolofeynError):
    """A Schwinger parameter that must be positive is not."""


class NonPositiveEpsilon(HolofeynError):
    """A cutoff that must be positive is not."""


class NonConvergence(HolofeynError):
    """A quadrature or Monte Carlo estimate failed its tolerance."""


### amplitude errors

class CoincidentPoints(HolofeynError):
    """Kernel evaluated at coincident points where it is singular."""


class DegreeMismatch(HolofeynError):
    """Test form degree incompatible with the requested pairing."""


class NotLaman(HolofeynError):
    """Graph is not Laman where a Laman graph is required."""


### input errors

class ParseError(HolofeynError):
    """Malformed graph description or CLI input."""
