"""Logical complex-multiply accounting for the FFT and chirp-z kernels.

Counts are size-based formulas (radix-2 FFT: ``n/2 log2 n`` per transform),
not hardware counters. Counting is off unless a counter is activated with
:func:`counting`.
"""

from __future__ import annotations

import contextlib
import contextvars
import math
from collections import defaultdict

_ACTIVE = contextvars.ContextVar("sktdlvt_opcounter", default=None)
_STAGE = contextvars.ContextVar("sktdlvt_opstage", default="other")


class OpCounter:
    """Complex multiplies per stage label."""

    def __init__(self):
        self._counts = defaultdict(int)

    def add(self, stage, n):
        if n < 0:
            raise ValueError("op counts are monotone")
        self._counts[stage] += int(n)

    def reset(self):
        self._counts.clear()

    @property
    def complex_multiplies(self):
        return dict(self._counts)

    def total(self):
        return sum(self._counts.values())

    def __repr__(self):
        return f"OpCounter({dict(self._counts)!r})"


@contextlib.contextmanager
def counting(counter):
    token = _ACTIVE.set(counter)
    try:
        yield counter
    finally:
        _ACTIVE.reset(token)


@contextlib.contextmanager
def stage(label):
    token = _STAGE.set(label)
    try:
        yield
    finally:
        _STAGE.reset(token)


def _record(n):
    c = _ACTIVE.get()
    if c is not None:
        c.add(_STAGE.get(), n)


def fft_cost(n):
    return 0 if n < 2 else int(n // 2 * math.log2(n))


def count_fft(n, howmany=1):
    _record(fft_cost(n) * howmany)


def count_mults(n):
    _record(n)
