"""Exception hierarchy shared across the toolkit."""


class DeaError(Exception):
    """Base class for all toolkit errors."""


class DataError(DeaError):
    """Malformed or invariant-violating dataset input."""


class SynthesisError(DataError):
    """A stats spec that no column of the requested length can match."""


class SolverError(DeaError):
    """Linear-programming failure (bad input, singular basis, no optimum)."""


class ModelError(DeaError):
    """DEA model construction or evaluation failure, with DMU context."""
