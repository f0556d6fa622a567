"""
Exception hierarchy for meetsense
Every failing operation raises one of these; detector rejection is a value, not an error
"""


# ════════════════════════════════════════════════════════════════
# CUSTOM EXCEPTIONS
# ════════════════════════════════════════════════════════════════


class MeetSenseError(Exception):
    """Base exception for all pipeline errors"""

    pass


class ParameterError(MeetSenseError):
    """Invalid parameter value (band edges, window sizes, ...)"""

    pass


class AlignmentError(MeetSenseError):
    """Traces cannot be aligned or do not share a usable span"""

    pass


class DegenerateInputError(MeetSenseError):
    """Input carries no information (e.g. all-zero segment)"""

    pass


class InsufficientDataError(MeetSenseError):
    """Too few defined samples to compute a feature"""

    pass


class DegenerateGraphError(MeetSenseError):
    """Graph has zero total edge weight"""

    pass


class InsufficientPopulationError(MeetSenseError):
    """Fewer subjects than the operation needs"""

    pass


class ScenarioValidationError(MeetSenseError):
    """Scenario violates a simulator invariant"""

    pass


class DatasetError(MeetSenseError):
    """Dataset directory is missing files or is malformed"""

    pass
