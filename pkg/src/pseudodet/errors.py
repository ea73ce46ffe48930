class PseudodetError(Exception):
    pass


class InputShapeError(PseudodetError, ValueError):
    pass


class BudgetError(PseudodetError):
    """A requested computation exceeds a configured enumeration cap."""


class ParameterError(PseudodetError, ValueError):
    pass


class OracleError(PseudodetError):
    pass
