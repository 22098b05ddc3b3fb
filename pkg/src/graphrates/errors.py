"""Exception taxonomy shared across modules.

The CLI maps these onto exit codes: ConfigError -> 2, InfeasibleError -> 3,
NonConvergenceError -> 4. Plain ValueError stays a programming error.
"""


class ConfigError(ValueError):
    """Malformed or inconsistent configuration input."""


class InfeasibleError(ValueError):
    """The requested combinatorial object does not exist (counts, capacities)."""


class NonConvergenceError(RuntimeError):
    """A solver failed to reach its stated tolerance."""


class BudgetError(RuntimeError):
    """An exact enumeration was asked to exceed its resource budget."""
