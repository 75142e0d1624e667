"""Error types and resource limits shared across the package.

Exit-code policy for the command line tool:

* ``ParseError``   -> exit 2 (bad ring/group/window syntax, bad fixture data)
* ``Refusal``      -> exit 3 (a precondition intrinsic to the computation
  failed: a norm multiplication map is not an isomorphism, a tower did not
  stabilize, an enumeration budget was exceeded, a hypothesis check failed)
* anything else    -> exit 1 (internal assertion failure; a bug)
"""

from __future__ import annotations

import os

DEFAULT_MAX_ENUM = 2 ** 16


class ParseError(ValueError):
    """Malformed input text (ring spec, window, fixture file)."""


class Refusal(RuntimeError):
    """A computation declined to produce an answer, with a reason."""


class MuNotIsoError(Refusal):
    """The multiplication map out of a norm tensor ring is not injective.

    Carries a ``witness``: a nonzero kernel element together with its order.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class StabilizationError(Refusal):
    """A pro-object failed to stabilize within the allowed depth."""


class EnumerationBudget(Refusal):
    """An exhaustive enumeration would exceed the configured budget."""


def max_enum() -> int:
    """Enumeration budget; override with the TCRCALC_MAX_ENUM env variable."""
    raw = os.environ.get("TCRCALC_MAX_ENUM")
    if raw is None:
        return DEFAULT_MAX_ENUM
    try:
        value = int(raw)
    except ValueError as exc:
        raise ParseError(f"TCRCALC_MAX_ENUM is not an integer: {raw!r}") from exc
    if value <= 0:
        raise ParseError("TCRCALC_MAX_ENUM must be positive")
    return value


def check_budget(size: int, what: str) -> None:
    limit = max_enum()
    if size > limit:
        raise EnumerationBudget(
            f"{what} needs {size} elements, over the budget of {limit} "
            "(raise TCRCALC_MAX_ENUM to override)"
        )


class OperationCancelled(RuntimeError):
    """Raised from inside a long loop after CancelToken.cancel() was called."""


class CancelToken:
    """Cooperative cancellation flag polled by long-running enumerations.

    The command line tool arms one of these from a SIGINT handler; library
    callers may share a token across threads (setting it is thread safe).
    """

    __slots__ = ("_cancelled",)

    def __init__(self) -> None:
        self._cancelled = False

    def cancel(self) -> None:
        self._cancelled = True

    @property
    def cancelled(self) -> bool:
        return self._cancelled

    def check(self) -> None:
        if self._cancelled:
            raise OperationCancelled("computation interrupted")


def poll(token: CancelToken | None) -> None:
    """Check an optional cancellation token at a loop head."""
    if token is not None:
        token.check()
