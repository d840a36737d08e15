"""Exception types shared across the package."""


class DhsieveError(Exception):
    pass


class QubitConsumedError(DhsieveError):
    """A phase qubit was used twice; single-use discipline violated."""


class BackendMismatchError(DhsieveError):
    """Qubits from different backends were combined."""


class SieveExhaustedError(DhsieveError):
    """A sieve run produced no target qubit; the caller may retry."""


class NoHiddenReflectionError(DhsieveError):
    """Verification kept failing: the oracle hides no reflection."""


class InsufficientCopiesError(DhsieveError):
    """Too few qubit copies for the requested tomography accuracy."""


class SimonCaseError(DhsieveError):
    """Every group element satisfies 2v = 0; the reduction to a hidden
    shift pair does not apply (Simon-style escape, out of scope)."""
