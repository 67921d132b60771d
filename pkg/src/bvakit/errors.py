"""Exception types shared across the toolkit."""


class BvaError(Exception):
    """Base class for all toolkit errors."""


class ParseError(BvaError, ValueError):
    pass


class TautologyError(BvaError, ValueError):
    def __init__(self, clause):
        self.clause = tuple(clause)
        super().__init__(f"tautological clause {list(self.clause)}")


class WidthError(BvaError, ValueError):
    def __init__(self, clause, limit=2):
        self.clause = tuple(clause)
        super().__init__(f"clause {list(self.clause)} violates width limit {limit}")


class Conflict(BvaError):
    """Unit propagation derived the empty clause."""

    def __init__(self, trail):
        self.trail = list(trail)
        super().__init__(f"conflict after propagating {self.trail}")


class NotSimple(BvaError, ValueError):
    def __init__(self, violation):
        self.violation = violation
        super().__init__(f"formula is not simple: {violation}")


class CycleError(BvaError):
    def __init__(self, cycle, what="directed"):
        self.cycle = list(cycle)
        super().__init__(f"{what} cycle {self.cycle}")


class NotCoherentBiclique(BvaError, ValueError):
    pass


class PatternMissing(BvaError, ValueError):
    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__(f"clauses absent from formula: {self.missing}")


class MixedEdgesError(BvaError, ValueError):
    pass


class DomainError(BvaError, ValueError):
    pass


class BlowupGuard(BvaError):
    pass


class SolverError(BvaError):
    pass


class AuditFailure(BvaError):
    def __init__(self, verdict, context=""):
        self.verdict = verdict
        super().__init__(f"audit failed {context}: {verdict}")
