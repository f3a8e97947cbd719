"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or out-of-contract input. The CLI maps this to exit code 2."""


class UnavailableError(RuntimeError):
    """A requested quantity cannot be computed from the data at hand."""
