"""Exception taxonomy shared by all forcelab modules.

Exit-code mapping used by the CLI: InputError -> 2, BudgetError -> 3,
VerificationError -> 1.
"""

from __future__ import annotations


class ForcelabError(Exception):
    """Base class for all forcelab errors."""


class InputError(ForcelabError):
    """Malformed or inconsistent input data."""


class BudgetError(ForcelabError):
    """A construction would exceed a configured size budget."""


class VerificationError(ForcelabError):
    """A checked property failed; carries a witness payload when available."""

    def __init__(self, message: str, witness: object = None):
        super().__init__(message)
        self.witness = witness
