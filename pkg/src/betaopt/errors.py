"""Exception hierarchy shared by all modules.

Each exception carries a stable ``code`` used by the CLI to build
machine-readable error objects and pick an exit status.
"""

from __future__ import annotations


class BetaOptError(Exception):
    code = "error"
    exit_status = 1


class DigitOutOfRange(BetaOptError):
    code = "digit_out_of_range"
    exit_status = 3


class BracketInvalid(BetaOptError):
    code = "bracket_invalid"
    exit_status = 3


class PrecisionInsufficient(BetaOptError):
    code = "precision_insufficient"
    exit_status = 4


class HorizonExceeded(BetaOptError):
    code = "horizon_exceeded"
    exit_status = 4


class BudgetExceeded(BetaOptError):
    code = "budget_exceeded"
    exit_status = 4


class NotAdmissible(BetaOptError):
    code = "not_admissible"
    exit_status = 3


class NotAParryWord(BetaOptError):
    code = "not_a_parry_word"
    exit_status = 3


class VerificationFailed(BetaOptError):
    code = "verification_failed"
    exit_status = 4


class PreconditionFailed(BetaOptError):
    code = "precondition_failed"
    exit_status = 3


class Undecidable(BetaOptError):
    code = "undecidable"
    exit_status = 2


class NotShadowable(BetaOptError):
    code = "not_shadowable"
    exit_status = 3


class NoConvergence(BetaOptError):
    code = "no_convergence"
    exit_status = 4
