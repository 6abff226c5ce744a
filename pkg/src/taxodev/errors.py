"""Exception taxonomy.

Three fatal families, one per CLI exit code: configuration problems (exit 2),
data problems (exit 3), numerical degeneracies (exit 4). Misuse guards such as
:class:`DoubleOrientation` sit directly under :class:`TaxodevError` because a
correct pipeline never raises them.
"""


class TaxodevError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(TaxodevError):
    """Invalid configuration file, flag, or parameter combination."""


class DataError(TaxodevError):
    """Input data violates a structural contract."""


class DegeneracyError(TaxodevError):
    """The data is numerically degenerate for the requested computation."""


# -- data errors --------------------------------------------------------------

class MalformedRow(DataError):
    """A table row could not be parsed; carries the 1-based line number."""

    def __init__(self, line_number, message):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class DuplicateObservation(DataError):
    """Two rows share the same (entity, period, variable) key."""


class UnknownVariable(DataError):
    """A variable is referenced but absent from the catalog."""


class UnknownPeriod(DataError):
    """A requested period is not present in the panel."""


class EmptyCrossSection(DataError):
    """Every entity was dropped from a cross-section extraction."""


class EmptyGroup(DataError):
    """A declared group contains no panel entities."""


class UnassignedEntity(DataError):
    """A panel entity is missing from the grouping."""


class SchemaMismatch(DataError):
    """Variable lists of two aligned structures disagree."""


# -- numerical degeneracies ----------------------------------------------------

class DegenerateVariable(DegeneracyError):
    """A variable has zero variance and cannot be standardized."""


class DegenerateSpread(DegeneracyError):
    """All distances to the pattern are zero; the measure is undefined."""


class ZeroBaseline(DegeneracyError):
    """Percent change requested against a zero baseline value."""


class TooFewObjects(DegeneracyError):
    """Fewer than two objects; no pairwise structure exists."""


class IndexUndefined(DegeneracyError):
    """A validity index is undefined for this partition."""


# -- configuration / parameter errors ------------------------------------------

class InvalidK(ConfigError):
    """Requested cluster count is outside the feasible range."""


class NoMethods(ConfigError):
    """An empty clustering method list was supplied."""


# -- misuse guards --------------------------------------------------------------

class NotOriented(TaxodevError):
    """Operation requires a destimulant-oriented panel."""


class DoubleOrientation(TaxodevError):
    """Orientation applied twice to the same panel."""
