"""Exception hierarchy shared by every module."""


class InhomogError(ValueError):
    """Base class for all domain errors raised by the package."""


class BadGrid(InhomogError):
    pass


class BadDigits(InhomogError):
    pass


class TooDeep(InhomogError):
    pass


class BadWeights(InhomogError):
    pass


class BadScale(InhomogError):
    pass


class BadScales(InhomogError):
    pass


class BadRange(InhomogError):
    pass


class CodeTooShort(InhomogError):
    pass


class NotInSet(InhomogError):
    pass


class BadEpsilon(InhomogError):
    pass


class BadDelta(InhomogError):
    pass


class LambdaOutOfRange(InhomogError):
    pass


class WindowEmpty(InhomogError):
    pass


class StateSpaceTooLarge(InhomogError):
    pass


class DegenerateSigma(InhomogError):
    pass


class ConfigError(InhomogError):
    """Malformed configuration file; ``field`` names the offending key path."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if field is not None:
            where.append(f"field {field!r}")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
