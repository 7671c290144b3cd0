"""RK4 reference solver."""

from __future__ import annotations

import math

import numpy as np
import pytest

from osc_llei import (
    BlowUpError,
    OscillatorySystem,
    PolynomialOracle,
    builtin,
    fit_order,
    integrate,
    rk4_integrate,
    second_order_to_first_order,
)


def identity_growth_system(T: float) -> OscillatorySystem:
    # du/dt = u expressed through F (A = 0)
    return OscillatorySystem(
        d=1,
        A=np.zeros((1, 1)),
        epsilon=1.0,
        nu=0.0,
        u_in=np.array([1.0]),
        T=T,
        oracle=PolynomialOracle(1, [(1, (1,), 1.0)]),
    )


def test_one_step_rk4_polynomial() -> None:
    h = 0.1
    traj = rk4_integrate(identity_growth_system(T=h), h)
    want = 1.0 + h + h**2 / 2 + h**3 / 6 + h**4 / 24
    assert abs(traj.states[-1, 0] - want) <= 1e-15 * want
    assert len(traj.times) == 2


def test_fourth_order_self_convergence() -> None:
    system = builtin("example1", 1.0, T=1.0)
    fine = rk4_integrate(system, 1 / 5120)
    hs = [1 / 10, 1 / 20, 1 / 40, 1 / 80]
    errs = []
    for h in hs:
        got = rk4_integrate(system, h)
        errs.append(float(np.linalg.norm(got.states[-1] - fine.states[-1])))
    slope = fit_order(hs, errs)
    assert slope is not None and abs(slope - 4.0) <= 0.2, (slope, errs)


def test_harmonic_oscillator_closed_form() -> None:
    system = second_order_to_first_order(
        M=np.array([[1.0]]),
        g_oracle=PolynomialOracle(1, []),
        y_in=[1.0],
        ydot_in=[0.5],
        epsilon=1.0,
        nu=0.0,
        T=3.0,
    )
    traj = rk4_integrate(system, 1e-3)
    t = traj.times
    y = np.cos(t) + 0.5 * np.sin(t)
    p = -np.sin(t) + 0.5 * np.cos(t)
    assert np.max(np.abs(traj.states[:, 0] - y)) <= 1e-11
    assert np.max(np.abs(traj.states[:, 1] - p)) <= 1e-11


def test_resolution_guard_and_override() -> None:
    system = builtin("example1", 0.01, T=0.5)  # rho = 1, eps/(4 rho) = 0.0025
    with pytest.raises(ValueError):
        rk4_integrate(system, 0.01)
    with pytest.warns(UserWarning):
        traj = rk4_integrate(system, 0.01, allow_unresolved=True)
    assert np.all(np.isfinite(traj.states.real))


def test_sampling_aligns_with_scheme_grid() -> None:
    system = builtin("example1", 0.5)
    n = 24
    stride = 50
    h = system.T / n
    ref = rk4_integrate(system, h / stride, sample_stride=stride)
    traj = integrate(system, 1, h)
    assert ref.states.shape == traj.states.shape
    assert np.max(np.abs(ref.times - traj.times)) <= 1e-12 * system.T


def test_blow_up_detection() -> None:
    system = OscillatorySystem(
        d=1,
        A=np.zeros((1, 1)),
        epsilon=1.0,
        nu=0.0,
        u_in=np.array([3.0]),
        T=2.0,
        oracle=PolynomialOracle(1, [(1, (1, 1), 1.0)]),
    )
    with pytest.raises(BlowUpError):
        rk4_integrate(system, 1e-3)


def test_argument_validation() -> None:
    system = identity_growth_system(T=1.0)
    with pytest.raises(ValueError):
        rk4_integrate(system, -0.1)
    with pytest.raises(ValueError):
        rk4_integrate(system, 0.1, sample_stride=0)


def test_real_fast_path_matches_complex_path() -> None:
    # the same trajectory computed with real and complex arithmetic
    real_sys = builtin("example1", 0.5, T=1.0)
    traj_real = rk4_integrate(real_sys, 1e-3)

    complex_sys = OscillatorySystem(
        d=2,
        A=real_sys.A + 0j,
        epsilon=0.5,
        nu=1.0,
        u_in=real_sys.u_in.astype(complex),
        T=1.0,
        oracle=_ComplexWrap(real_sys.oracle),
        y_dim=1,
    )
    traj_cplx = rk4_integrate(complex_sys, 1e-3)
    assert np.allclose(traj_real.states, traj_cplx.states, rtol=0, atol=1e-13)


class _ComplexWrap:
    """Force the complex path by reporting real_valued = False."""

    real_valued = False
    max_order = 64

    def __init__(self, inner):
        self.inner = inner

    def partial(self, alpha, u, t):
        return self.inner.partial(alpha, u, t)

    def value(self, u, t):
        return self.inner.value(u, t).astype(complex)


def test_pi_period_sanity() -> None:
    # example1's linear part has period 2 pi eps; a quarter period of the
    # fast phase rotates [y; p] by 90 degrees when g is switched off
    system = second_order_to_first_order(
        M=np.array([[1.0]]),
        g_oracle=PolynomialOracle(1, []),
        y_in=[1.0],
        ydot_in=[0.0],
        epsilon=0.125,
        nu=0.0,
        T=0.125 * math.pi / 2,
    )
    traj = rk4_integrate(system, 1e-5)
    assert np.allclose(traj.states[-1], [0.0, -1.0], atol=1e-8)
