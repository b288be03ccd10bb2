"""Exception hierarchy.  Every error raised on bad input derives from ``LorentzMaxError``."""


class LorentzMaxError(Exception):
    pass


class MissingCell(LorentzMaxError, KeyError):
    pass


class BadExponent(LorentzMaxError, ValueError):
    pass


class InadmissibleTriple(BadExponent):
    pass


class CapExceeded(LorentzMaxError):
    pass


class Inconsistent(LorentzMaxError):
    pass


class IllegalSplit(LorentzMaxError, ValueError):
    pass


class NonIntegerSplit(IllegalSplit):
    pass


class BadSequence(LorentzMaxError, ValueError):
    pass


class Infeasible(LorentzMaxError):
    def __init__(self, constraint: str, detail: str = ""):
        super().__init__(f"no solution for {constraint}" + (f": {detail}" if detail else ""))
        self.constraint = constraint


class UncertifiedPlan(LorentzMaxError, ValueError):
    pass


class BadCase(LorentzMaxError, ValueError):
    pass


class EmptyList(LorentzMaxError, ValueError):
    pass


class DegenerateComponent(LorentzMaxError, ValueError):
    pass


class NotCombined(LorentzMaxError, TypeError):
    pass


class UnknownKind(LorentzMaxError, ValueError):
    pass


class ZeroFunction(LorentzMaxError, ValueError):
    pass


class BudgetExceeded(LorentzMaxError):
    pass


class BadParams(LorentzMaxError, ValueError):
    pass


class DegenerateSweep(LorentzMaxError, ValueError):
    pass


class BadTriple(LorentzMaxError, ValueError):
    pass
