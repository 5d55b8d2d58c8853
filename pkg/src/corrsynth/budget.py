"""Guard rails for exact enumerations.

Exact computations in this package enumerate sequence spaces whose size grows
exponentially in the blocklength.  Every such loop calls :func:`check_budget`
with its term count before allocating; anything larger must go through a
sampling path instead.
"""

from __future__ import annotations

import os

DEFAULT_BUDGET = 10**8
ENV_VAR = "CORRSYNTH_BUDGET"


class BudgetExceededError(RuntimeError):
    """An exact enumeration would evaluate more terms than the budget allows."""


def enumeration_budget(override: int | None = None) -> int:
    """Current term budget: explicit override, else $CORRSYNTH_BUDGET, else default."""
    if override is not None:
        return int(override)
    raw = os.environ.get(ENV_VAR)
    if raw is None:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"{ENV_VAR} must be an integer, got {raw!r}") from exc
    if value <= 0:
        raise ValueError(f"{ENV_VAR} must be positive, got {value}")
    return value


def check_budget(terms: int, budget: int | None = None, what: str = "enumeration") -> None:
    """Raise :class:`BudgetExceededError` if ``terms`` exceeds the budget."""
    limit = enumeration_budget(budget)
    if terms > limit:
        raise BudgetExceededError(
            f"{what} needs {terms} terms, budget is {limit}; "
            f"raise {ENV_VAR} or use a sampling path"
        )
