"""Opt-in counters for circuit evaluations and gradient norms."""
from __future__ import annotations

import contextlib
import contextvars
from dataclasses import dataclass, field


@dataclass
class Instrumentation:
    circuit_evaluations: int = 0
    grad_norms: list[float] = field(default_factory=list)


_active: contextvars.ContextVar[Instrumentation | None] = contextvars.ContextVar("hqgan_instrumentation", default=None)


@contextlib.contextmanager
def instrument():
    """Collect evaluation counts and gradient norms inside the ``with`` block."""
    inst = Instrumentation()
    token = _active.set(inst)
    try:
        yield inst
    finally:
        _active.reset(token)


def record_evaluations(n: int) -> None:
    inst = _active.get()
    if inst is not None:
        inst.circuit_evaluations += int(n)


def record_grad_norm(value: float) -> None:
    inst = _active.get()
    if inst is not None:
        inst.grad_norms.append(float(value))
