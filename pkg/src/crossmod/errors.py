"""Exception types shared across the package."""


class StructureError(ValueError):
    """Tables or cells with inconsistent shapes or out-of-range indices."""


class MalformedWord(ValueError):
    """A path or sphere word whose endpoints do not chain."""


class CapExceeded(RuntimeError):
    """A search or matrix would exceed its configured size cap."""


class GaugeInvarianceError(ValueError):
    """Operator data that would break gauge invariance."""


class WeightError(ValueError):
    """A weight table failing its positivity or invariance conditions."""


class ParseError(ValueError):
    """Input that is not valid JSON or does not follow the expected schema."""
