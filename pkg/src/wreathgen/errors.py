"""Exception hierarchy shared by every module.

The CLI maps each class to its own exit code.
"""


class WreathgenError(Exception):
    exit_code = 1


class InputError(WreathgenError, ValueError):
    """Malformed or inconsistent input (bad permutation, wrong degree, ...)."""

    exit_code = 2


class CapError(WreathgenError):
    """An exhaustive computation would exceed a configured cap."""

    exit_code = 3

    def __init__(self, cap_name: str, limit, requested, what: str = ""):
        self.cap_name = cap_name
        self.limit = limit
        self.requested = requested
        msg = f"{cap_name} exceeded: {requested} > {limit}"
        if what:
            msg = f"{what}: {msg}"
        super().__init__(msg)


class InvariantError(WreathgenError, AssertionError):
    """An internal consistency check failed."""

    exit_code = 4


class MissingConstantError(WreathgenError):
    """A certificate constant could not be computed and no override was given."""

    exit_code = 3

    def __init__(self, names, detail: str = ""):
        self.names = tuple(names)
        msg = "missing constant(s) " + ", ".join(self.names)
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
