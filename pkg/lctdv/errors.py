'''Exception hierarchy for lctdv.

Library code raises these; only the command line layer turns them into exit
codes (see config/exit_codes.py).
'''

from typing import List


class LctdvError(Exception):
    '''Base class for every error raised by the library.'''


class DimensionMismatch(LctdvError):
    pass


class SingularMatrix(LctdvError):
    pass


class NotSymmetric(LctdvError):
    pass


class InvalidRank(LctdvError):
    pass


class ParseError(LctdvError):

    def __init__(self, message: str, line: int = 0, column: int = 0, source: str = ''):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        where = f"{source}:" if source else ''
        super().__init__(f"{where}{line}:{column}: {message}")


class ValidationError(LctdvError):

    def __init__(self, violations: List[str], source: str = ''):
        self.violations = list(violations)
        prefix = f"{source}: " if source else ''
        super().__init__(prefix + '; '.join(self.violations))


class UnknownCurve(LctdvError):
    pass


class UnknownVariable(LctdvError):
    pass


class SingularGram(LctdvError):
    pass


class InconsistentTangency(LctdvError):
    pass


class UnknownPoint(LctdvError):
    pass


class BudgetExceeded(LctdvError):
    pass


class ZeroDivisor(LctdvError):
    pass


class NoCandidates(LctdvError):
    pass


class DepthExceeded(LctdvError):
    pass


class IndexOutOfRange(LctdvError):
    pass


class FixtureNotFound(LctdvError):
    pass
