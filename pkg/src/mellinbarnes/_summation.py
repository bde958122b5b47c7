"""Compensated summation, the shared series stopping rule, and the lock that
serializes elevated-precision (mpmath) sections.

Summation order is always fixed by the caller, so converged results are
bit-reproducible run to run.  mpmath working precision is process-global
state; every block that adjusts it must hold MP_LOCK so concurrent callers
cannot perturb each other's precision.
"""

from __future__ import annotations

import threading

__all__ = ["KahanSum", "SeriesStopper", "MP_LOCK"]

MP_LOCK = threading.RLock()


class KahanSum:
    """Kahan-compensated accumulator; works for float or complex terms."""

    __slots__ = ("value", "_comp")

    def __init__(self, start=0.0):
        self.value = start
        self._comp = 0.0 * start

    def add(self, term):
        y = term - self._comp
        t = self.value + y
        self._comp = (t - self.value) - y
        self.value = t
        return self.value


class SeriesStopper:
    """Stopping rule shared by every residue summation in the library.

    Converged after `needed` consecutive contributions each below
    tol * max(1, |partial sum|); flagged diverging when contribution
    magnitudes increase for `diverge_run` consecutive steps after the
    first `diverge_grace` steps.

    With abort_on_divergence the growth flag also stops the summation; callers
    summing entire series (growth is always transient there) leave it off and
    rely on the convergence rule plus the unconditional overflow abort.
    """

    OVERFLOW = 1e300

    def __init__(self, tol: float, needed: int = 3, diverge_run: int = 5,
                 diverge_grace: int = 10, abort_on_divergence: bool = True):
        self.tol = tol
        self.needed = needed
        self.diverge_run = diverge_run
        self.diverge_grace = diverge_grace
        self.abort_on_divergence = abort_on_divergence
        self._small = 0
        self._grow = 0
        self._count = 0
        self._last_mag = None
        self.converged = False
        self.diverging = False

    def update(self, contribution_mag: float, partial_mag: float) -> bool:
        """Feed one contribution magnitude; returns True when summation should stop."""
        self._count += 1
        if not contribution_mag < self.OVERFLOW:  # inf/nan included
            self.diverging = True
            return True
        if contribution_mag <= self.tol * max(1.0, partial_mag):
            self._small += 1
            if self._small >= self.needed:
                self.converged = True
                return True
        else:
            self._small = 0
        if self._last_mag is not None and contribution_mag > self._last_mag:
            self._grow += 1
            if self._count > self.diverge_grace and self._grow >= self.diverge_run:
                self.diverging = True
                if self.abort_on_divergence:
                    return True
        else:
            self._grow = 0
        self._last_mag = contribution_mag
        return False
