"""Exception types shared across the package."""


class DemandcutError(Exception):
    """Base class for all package errors."""


class ValidationError(DemandcutError):
    """An instance or document violates a structural invariant."""


class ParseError(DemandcutError):
    """Input text does not conform to the document schema."""


class ParameterError(DemandcutError):
    """A parameter is out of range for the requested operation."""


class SizeGuardError(DemandcutError):
    """Requested enumeration exceeds the configured cap."""


class NotBipartiteError(DemandcutError):
    """Demand graph admits no source/sink split with every edge source -> sink."""


class NotTK2FreeError(DemandcutError):
    """Demand graph contains an induced matching of the forbidden size."""

    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"demand graph contains an induced matching: {list(witness)}")


class InfeasibleStructureError(DemandcutError):
    """A demand pair is connected by uncuttable (infinite-weight) edges."""


class NoFeasibleCutError(DemandcutError):
    """No subset of finite edges separates all demand pairs."""


class NoFiniteAssignmentError(DemandcutError):
    """Every label assignment violates a hard constraint."""


class InvalidCutError(DemandcutError):
    """A cut references unknown or uncuttable edges."""


class InfiniteEdgeCutError(DemandcutError):
    """Threshold rounding tried to cut an infinite-weight edge."""


class MarginalMismatchError(DemandcutError):
    """Transport endpoints are not distributions over a common label set."""


class InfeasibleInputError(DemandcutError):
    """A solution fails the feasibility checks required by a translation."""


class DimensionMismatchError(DemandcutError):
    """A point's dimension does not match the program's variable count."""


class NumericFailureError(DemandcutError):
    """The LP backend stopped without a conclusive status."""


class DirectedInputError(DemandcutError):
    """Operation is defined for undirected instances only."""


class AssumptionViolationError(DemandcutError):
    """Supply graph lacks the structure required by the reduction."""


class MalformedFamilyError(DemandcutError):
    """Predicate family is inconsistent with every bipartite demand pattern."""
