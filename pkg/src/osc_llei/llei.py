"""The explicit local-linear-extension exponential stepper.

One step from state U_n at time t_n: lift x = [u; t] around xhat =
[U_n; t_n] (where the lifted vector is the first basis vector e_1),
advance the truncated lifted dynamics exactly with one matrix
exponential,

    w = exp((A1k / eps + A0k) h) e_1,

and read the increment off the degree-1 block: the u-rows give
U_{n+1} - U_n, and the t-row must equal h (checked, since time is
transported exactly).  The scheme is fully explicit; accuracy is set by
the extension order k of the catalog.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .extension import build_A0, build_A1
from .mindex import MultiIndexCatalog, build_catalog
from .sysdef import AugmentedSystem, OscillatorySystem, UnsupportedOrderError, augment

BLOWUP_NORM = 1e12


class BlowUpError(RuntimeError):
    """Trajectory norm exceeded the abort threshold (or went non-finite)."""

    def __init__(self, step_index: int, t: float, norm: float):
        super().__init__(
            f"state blew up at step {step_index} (t = {t:.6g}): |U| = {norm:.3e}"
        )
        self.step_index = step_index
        self.t = t
        self.norm = norm


@dataclass(frozen=True)
class Trajectory:
    """Uniform-grid solution samples with the run's metadata.

    states[n] is the state at times[n]; states[0] is the initial value
    eps^nu * u_in.  h is the actual (snapped) step; h_requested records
    the pre-snap request when they differ.  y_dim marks [y; p] layouts.
    """

    times: np.ndarray
    states: np.ndarray
    epsilon: float
    h: float
    k: int | None = None
    h_requested: float | None = None
    y_dim: int | None = None

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1


def _step_matrices(system, catalog, aug, Un, tn, h):
    xhat = np.concatenate([np.asarray(Un, dtype=complex), [tn]])
    A1k = build_A1(catalog, aug.A1, xhat)
    A0k = build_A0(catalog, system.oracle, xhat)
    return (A1k / system.epsilon + A0k) * h


def _advance(system, catalog, aug, Un, tn, h):
    M = _step_matrices(system, catalog, aug, Un, tn, h)
    w = linalg.expm(M)[:, 0]
    d = system.d
    t_comp = w[d + 1]
    # a non-finite w falls through to the caller's blow-up check
    if np.isfinite(t_comp) and abs(t_comp - h) > 1e-12 * max(1.0, abs(h)):
        raise ArithmeticError(
            f"time component of the lifted step is {t_comp!r}, expected h = {h!r}"
        )
    return Un + w[1 : d + 1]


def step(
    system: OscillatorySystem,
    catalog: MultiIndexCatalog,
    Un,
    tn: float,
    h: float,
) -> np.ndarray:
    """One scheme step from (Un, tn) with step size h."""
    if h <= 0:
        raise ValueError("step size must be positive")
    if catalog.k > system.max_order:
        raise UnsupportedOrderError(
            f"k = {catalog.k} exceeds the oracle's max_order {system.max_order}"
        )
    if catalog.d_plus_1 != system.d + 1:
        raise ValueError("catalog dimension does not match the system")
    Un = np.asarray(Un, dtype=complex)
    out = _advance(system, catalog, augment(system), Un, tn, h)
    if not np.all(np.isfinite(out)):
        raise BlowUpError(0, tn, float("inf"))
    return out


def integrate(system: OscillatorySystem, k: int, h: float) -> Trajectory:
    """Run N = round(T/h) uniform steps over [0, T].

    h is snapped so the uniform grid covers [0, T] exactly; the snap is
    recorded on the returned trajectory.  Aborts with BlowUpError when
    the state norm passes 1e12 or goes non-finite.
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    if k > system.max_order:
        raise UnsupportedOrderError(
            f"k = {k} exceeds the oracle's max_order {system.max_order}"
        )
    catalog = build_catalog(system.d + 1, k)
    aug = augment(system)
    N = max(1, round(system.T / h))
    h_snap = system.T / N
    times = np.linspace(0.0, system.T, N + 1)
    states = np.empty((N + 1, system.d), dtype=complex)
    states[0] = system.initial_state
    for n in range(N):
        states[n + 1] = _advance(system, catalog, aug, states[n], times[n], h_snap)
        norm = float(np.linalg.norm(states[n + 1]))
        if not np.isfinite(norm) or norm > BLOWUP_NORM:
            raise BlowUpError(n, float(times[n]), norm)
    return Trajectory(
        times=times,
        states=states,
        epsilon=system.epsilon,
        h=h_snap,
        k=k,
        h_requested=h if abs(h_snap - h) > 1e-12 * h else None,
        y_dim=system.y_dim,
    )
