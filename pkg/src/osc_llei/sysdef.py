"""Problem definitions: oscillatory systems, derivative oracles, builtins.

An OscillatorySystem is the initial value problem

    du/dt = (1/epsilon) A u + F(u, t),   u(0) = epsilon^nu * u_in

on [0, T], with A diagonalizable and purely imaginary in spectrum.  The
nonlinearity F enters the integrator only through a DerivativeOracle
supplying mixed partials d^alpha F evaluated at a point, where alpha is
a multi-index over the d+1 variables (u_1, ..., u_d, t).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import linalg
from ._jets import Jet
from .mindex import MultiIndex, gamma, representative

_EPS = float(np.finfo(float).eps)


class ConfigError(ValueError):
    """Malformed problem configuration."""


class UnsupportedOrderError(ValueError):
    """A derivative of order beyond the oracle's max_order was requested."""


class SpectrumWarning(UserWarning):
    """A's eigenvalues sit measurably off the imaginary axis."""


class DerivativeOracle:
    """Evaluator of mixed partials d^alpha F(u, t).

    alpha is a multi-index with components in [1, d+1]; component d+1
    differentiates in t.  The value depends only on the multiset of
    alpha (mixed partials commute), and |alpha| = 0 returns F itself.
    Subclasses implement _partial on the sorted alpha.
    """

    max_order: int = 64
    real_valued: bool = False

    def partial(self, alpha, u, t) -> np.ndarray:
        alpha = representative(alpha)
        if len(alpha) > self.max_order:
            raise UnsupportedOrderError(
                f"order {len(alpha)} exceeds oracle max_order {self.max_order}"
            )
        return np.asarray(self._partial(alpha, np.asarray(u), t))

    def _partial(self, alpha: MultiIndex, u: np.ndarray, t) -> np.ndarray:
        raise NotImplementedError

    def value(self, u, t) -> np.ndarray:
        """F(u, t) itself; overridden where a direct formula is cheaper."""
        return self.partial((), u, t)


def eval_partial(oracle: DerivativeOracle, alpha, u, t) -> np.ndarray:
    """d^alpha F(u, t) via the oracle; permutation-invariant in alpha."""
    return oracle.partial(alpha, u, t)


class PolynomialOracle(DerivativeOracle):
    """Exact partials of a polynomial F given as monomial terms.

    terms: sequence of (row, alpha, coeff) with row in [1, d] (1-based F
    component), alpha a multi-index over [1, d+1] naming the monomial
    x^alpha in the variables x = (u_1, ..., u_d, t), and coeff complex.
    An empty term list is the zero nonlinearity.
    """

    def __init__(self, d: int, terms):
        self.d = d
        self.terms: list[tuple[int, tuple[int, ...], complex]] = []
        for row, alpha, coeff in terms:
            if not 1 <= row <= d:
                raise ValueError(f"term row {row} outside 1..{d}")
            exps = [0] * (d + 1)
            for c in representative(alpha):
                if c > d + 1:
                    raise ValueError(f"monomial component {c} outside 1..{d + 1}")
                exps[c - 1] += 1
            self.terms.append((row - 1, tuple(exps), complex(coeff)))
        self.real_valued = all(c.imag == 0 for _, _, c in self.terms)

    def _partial(self, alpha, u, t):
        beta = [0] * (self.d + 1)
        for c in alpha:
            if c > self.d + 1:
                raise ValueError(f"multi-index component {c} outside 1..{self.d + 1}")
            beta[c - 1] += 1
        x = list(u) + [t]
        out = np.zeros(self.d, dtype=complex)
        for row, exps, coeff in self.terms:
            val = coeff
            for q in range(self.d + 1):
                e, b = exps[q], beta[q]
                if b > e:
                    val = 0.0
                    break
                # falling factorial e*(e-1)*...*(e-b+1), then x^(e-b)
                for i in range(b):
                    val *= e - i
                if e - b:
                    val *= x[q] ** (e - b)
            out[row] += val
        return out


class FiniteDifferenceOracle(DerivativeOracle):
    """Iterated central differences of a black-box F(u, t) -> d-vector.

    The step for an order-j derivative is eps^(1/(j+2)) * max(1, |u|_inf,
    |t|), balancing truncation against cancellation; accuracy degrades
    with order (documented, not an error).
    """

    def __init__(self, F: Callable, k_max: int, real_valued: bool = False):
        self.F = F
        self.max_order = k_max
        self.real_valued = real_valued

    def _partial(self, alpha, u, t):
        j = len(alpha)
        if j == 0:
            return np.asarray(self.F(u, t))
        scale = max(1.0, float(np.max(np.abs(u))) if len(u) else 1.0, abs(t))
        eta = _EPS ** (1.0 / (j + 2)) * scale
        return self._diff(alpha, np.asarray(u, dtype=complex), complex(t), eta)

    def _diff(self, comps, u, t, eta):
        if not comps:
            return np.asarray(self.F(u, t), dtype=complex)
        q, rest = comps[0], comps[1:]
        if q <= len(u):
            up, um = u.copy(), u.copy()
            up[q - 1] += eta
            um[q - 1] -= eta
            hi = self._diff(rest, up, t, eta)
            lo = self._diff(rest, um, t, eta)
        else:
            hi = self._diff(rest, u, t + eta, eta)
            lo = self._diff(rest, u, t - eta, eta)
        return (hi - lo) / (2 * eta)

    def value(self, u, t):
        return np.asarray(self.F(u, t))


def finite_difference_oracle(F: Callable, k_max: int, real_valued: bool = False) -> DerivativeOracle:
    return FiniteDifferenceOracle(F, k_max, real_valued)


@dataclass
class OscillatorySystem:
    """The problem (A, epsilon, nu, u_in, T) plus F's derivative oracle.

    y_dim marks systems with the [y; p] phase-space layout (p = epsilon
    * dy/dt), enabling split error reporting for y and dy/dt.
    Immutable by convention; share freely across workers.
    """

    d: int
    A: np.ndarray
    epsilon: float
    nu: float
    u_in: np.ndarray
    T: float
    oracle: DerivativeOracle
    max_order: int = 0
    y_dim: int | None = None
    name: str = ""
    eps_factory: Callable[[float], "OscillatorySystem"] | None = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=complex)
        self.u_in = np.asarray(self.u_in, dtype=complex)
        if self.A.shape != (self.d, self.d):
            raise ValueError(f"A has shape {self.A.shape}, expected ({self.d}, {self.d})")
        if self.u_in.shape != (self.d,):
            raise ValueError(f"u_in has shape {self.u_in.shape}, expected ({self.d},)")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.T > 0:
            raise ValueError("T must be positive")
        if self.max_order == 0:
            self.max_order = self.oracle.max_order
        norm_a = float(np.linalg.norm(self.A, 2))
        if norm_a > 0:
            off_axis = float(np.max(np.abs(linalg.eigvals(self.A).real)))
            if off_axis > 1e-9 * norm_a:
                warnings.warn(
                    f"eigenvalues of A deviate from the imaginary axis by {off_axis:.3e}",
                    SpectrumWarning,
                    stacklevel=2,
                )

    @property
    def initial_state(self) -> np.ndarray:
        return (self.epsilon**self.nu) * self.u_in

    @property
    def is_real(self) -> bool:
        return (
            bool(np.all(self.A.imag == 0))
            and bool(np.all(self.u_in.imag == 0))
            and self.oracle.real_valued
        )

    def F(self, u, t) -> np.ndarray:
        return np.asarray(self.oracle.value(u, t))

    def with_epsilon(self, epsilon: float) -> "OscillatorySystem":
        """The same problem family at a different epsilon."""
        if self.eps_factory is not None:
            return self.eps_factory(epsilon)
        return replace(self, epsilon=epsilon)


@dataclass(frozen=True)
class AugmentedSystem:
    """Time-augmented form: x = [u; t], dx/dt = (1/eps) A1 x + f(x).

    A1 carries A in the upper-left block with a zero last row and
    column; f appends the constant 1 driving the time coordinate.
    """

    system: OscillatorySystem
    A1: np.ndarray

    def f(self, x) -> np.ndarray:
        x = np.asarray(x)
        u, t = x[:-1], x[-1]
        return np.concatenate([self.system.F(u, t), [1.0]])

    def partial_all(self, beta, u, t) -> np.ndarray:
        """d^beta of all d+1 augmented components at (u, t).

        The time row f_{d+1} = 1 contributes only at |beta| = 0.
        """
        vals = np.zeros(self.system.d + 1, dtype=complex)
        vals[:-1] = self.system.oracle.partial(beta, u, t)
        if len(tuple(beta)) == 0:
            vals[-1] = 1.0
        return vals


def augment(system: OscillatorySystem) -> AugmentedSystem:
    d = system.d
    A1 = np.zeros((d + 1, d + 1), dtype=complex)
    A1[:d, :d] = system.A
    return AugmentedSystem(system=system, A1=A1)


class _TransformedOracle(DerivativeOracle):
    """Oracle for F(u, t) = [0; epsilon * g(y, t)] with u = [y; p].

    Remaps multi-indices over (y_1..y_dy, p_1..p_dy, t) to g's variables
    (y_1..y_dy, t); any p-derivative is identically zero.
    """

    def __init__(self, g_oracle: DerivativeOracle, dy: int, epsilon: float):
        self.g_oracle = g_oracle
        self.dy = dy
        self.epsilon = epsilon
        self.max_order = g_oracle.max_order
        self.real_valued = g_oracle.real_valued

    def _partial(self, alpha, u, t):
        dy = self.dy
        out = np.zeros(2 * dy, dtype=complex)
        g_alpha = []
        for c in alpha:
            if c <= dy:
                g_alpha.append(c)
            elif c <= 2 * dy:
                return out
            else:
                g_alpha.append(dy + 1)
        out[dy:] = self.epsilon * self.g_oracle.partial(tuple(g_alpha), u[:dy], t)
        return out

    def value(self, u, t):
        u = np.asarray(u)
        g = np.asarray(self.g_oracle.value(u[: self.dy], t))
        if g.dtype.kind == "c" and self.real_valued and u.dtype.kind != "c":
            g = g.real
        out = np.zeros(2 * self.dy, dtype=np.result_type(g.dtype, float))
        out[self.dy :] = self.epsilon * g
        return out


def second_order_to_first_order(
    M,
    g_oracle: DerivativeOracle,
    y_in,
    ydot_in,
    epsilon: float,
    nu: float,
    T: float,
    name: str = "",
) -> OscillatorySystem:
    """First-order phase-space form of y'' + (1/eps^2) M y = g(y, t).

    With the scaled momentum p = eps * dy/dt and u = [y; p]:

        A = [[0, I], [-M, 0]],   F(u, t) = [0; eps * g(y, t)],
        u(0) = eps^nu * [y_in; ydot_in].

    M must be symmetric positive definite; its square-rooted spectrum
    becomes the oscillator frequencies of A.
    """
    M = np.asarray(M, dtype=float)
    dy = M.shape[0]
    if M.shape != (dy, dy) or not np.allclose(M, M.T, atol=1e-12 * max(1.0, np.abs(M).max())):
        raise ValueError("M must be symmetric")
    if np.min(np.linalg.eigvalsh(M)) <= 0:
        raise ValueError("M must be positive definite")
    A = np.zeros((2 * dy, 2 * dy))
    A[:dy, dy:] = np.eye(dy)
    A[dy:, :dy] = -M
    u_in = np.concatenate([np.asarray(y_in, dtype=complex), np.asarray(ydot_in, dtype=complex)])
    factory = lambda eps: second_order_to_first_order(
        M, g_oracle, y_in, ydot_in, eps, nu, T, name
    )
    return OscillatorySystem(
        d=2 * dy,
        A=A,
        epsilon=epsilon,
        nu=nu,
        u_in=u_in,
        T=T,
        oracle=_TransformedOracle(g_oracle, dy, epsilon),
        y_dim=dy,
        name=name,
        eps_factory=factory,
    )


_OMEGA1 = 2.0 * math.sqrt(6.0)


class _PendulumForcingOracle(DerivativeOracle):
    """Exact partials of g(y, t) = -(t + cos(2 sqrt(6) t)) sin(y), d = 1.

    d^m_y d^n_t g = -a_n(t) * sin(y + m pi/2), where a_0 = t + cos(w t),
    a_n = [n == 1] + w^n cos(w t + n pi/2) for n >= 1, w = 2 sqrt(6).
    """

    real_valued = True

    def _partial(self, alpha, u, t):
        m = sum(1 for c in alpha if c == 1)
        n = len(alpha) - m
        if n == 0:
            a_n = t + np.cos(_OMEGA1 * t)
        else:
            a_n = (1.0 if n == 1 else 0.0) + _OMEGA1**n * np.cos(_OMEGA1 * t + n * np.pi / 2)
        return np.array([-a_n * np.sin(u[0] + m * np.pi / 2)])

    def value(self, u, t):
        return np.array([-(t + np.cos(_OMEGA1 * t)) * np.sin(u[0])])


class _ChargedParticleOracle(DerivativeOracle):
    """Exact partials of F = [0, 0, g_1, g_2] for the charged-particle force.

    g_i(y, t) = y_i / (y_1^2 + y_2^2 + (2 - cos(pi t))^2)^(3/2), evaluated
    through truncated Taylor (jet) arithmetic in the active variables
    (y_1, y_2, t); derivatives in the momentum variables vanish.
    """

    max_order = 10
    real_valued = True

    def __init__(self):
        self._memo: tuple | None = None

    def _jets(self, y1, y2, t, K):
        key = (complex(y1), complex(y2), complex(t), K)
        memo = self._memo  # snapshot: safe under concurrent replacement
        if memo is None or memo[0] != key:
            j_y1 = Jet.variable(0, y1, 3, K)
            j_y2 = Jet.variable(1, y2, 3, K)
            j_t = Jet.variable(2, t, 3, K)
            c = 2.0 - (np.pi * j_t).cos()
            s = j_y1 * j_y1 + j_y2 * j_y2 + c * c
            s32 = s.power(-1.5)
            memo = (key, (j_y1 * s32, j_y2 * s32))
            self._memo = memo
        return memo[1]

    def _partial(self, alpha, u, t):
        out = np.zeros(4, dtype=complex)
        e = [0, 0, 0]
        for c in alpha:
            if c in (3, 4):
                return out
            e[0 if c == 1 else 1 if c == 2 else 2] += 1
        g1, g2 = self._jets(u[0], u[1], t, len(alpha))
        out[2] = g1.partial(tuple(e))
        out[3] = g2.partial(tuple(e))
        return out

    def value(self, u, t):
        c = 2.0 - np.cos(np.pi * t)
        s = u[0] * u[0] + u[1] * u[1] + c * c
        w = s**-1.5
        return np.array([0.0 * w, 0.0 * w, u[0] * w, u[1] * w])


def builtin(name: str, epsilon: float, T: float | None = None) -> OscillatorySystem:
    """One of the benchmark problems: example1, example2-E6, example2-E3.

    example1: the forced pendulum y'' + y/eps^2 = g(y, t)/... with
    g(y, t) = -(t + cos(2 sqrt(6) t)) sin(y), y(0) = eps, dy/dt(0) =
    sqrt(3), in phase-space form (d = 2), default T = 6.

    example2-E*: 2D charged particle dynamics in strong electric (E) and
    magnetic (B = 1) fields, d = 4 state [y; p] with eigenvalues
    {+-2i, +-3i} (E = 6, resonant) or {+-i sqrt((7 +- sqrt(13))/2)}
    (E = 3, non-resonant), y(0) = [0, 0], dy/dt(0) = [3, 4], default
    T = 1.
    """
    if name == "example1":
        return second_order_to_first_order(
            M=np.array([[1.0]]),
            g_oracle=_PendulumForcingOracle(),
            y_in=[1.0],
            ydot_in=[math.sqrt(3.0)],
            epsilon=epsilon,
            nu=1.0,
            T=6.0 if T is None else T,
            name="example1",
        )
    if name in ("example2-E6", "example2-E3"):
        E = 6.0 if name.endswith("E6") else 3.0
        B = 1.0
        A = np.array(
            [
                [0.0, 0.0, 1.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
                [-E, 0.0, 0.0, B],
                [0.0, -E, -B, 0.0],
            ]
        )
        Tval = 1.0 if T is None else T
        return OscillatorySystem(
            d=4,
            A=A,
            epsilon=epsilon,
            nu=1.0,
            u_in=np.array([0.0, 0.0, 3.0, 4.0]),
            T=Tval,
            oracle=_ChargedParticleOracle(),
            y_dim=2,
            name=name,
            eps_factory=lambda eps: builtin(name, eps, Tval),
        )
    raise ConfigError(f"unknown builtin problem {name!r}")


def _complex_entry(v, what: str) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(v[0], v[1])
    raise ConfigError(f"{what} must be a number or an [re, im] pair, got {v!r}")


def load_config(cfg: dict) -> OscillatorySystem:
    """Build a system from a JSON-style dict.

    Either {"name": <builtin>, "epsilon": e, "T"?: t} or the inline form
    {"d", "A", "epsilon", "nu", "u_in", "T", "poly_F"?} where A is a
    row-major list of d*d [re, im] pairs, u_in a list of d entries, and
    poly_F a list of {"row": 1-based F row, "alpha": [components in
    1..d+1], "coeff": [re, im]} monomial terms.
    """
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if "name" in cfg:
        if "epsilon" not in cfg:
            raise ConfigError("builtin config requires 'epsilon'")
        return builtin(cfg["name"], float(cfg["epsilon"]), cfg.get("T"))
    missing = [k for k in ("d", "A", "epsilon", "nu", "u_in", "T") if k not in cfg]
    if missing:
        raise ConfigError(f"config missing keys: {', '.join(missing)}")
    try:
        d = int(cfg["d"])
        flat = [_complex_entry(v, "A entry") for v in cfg["A"]]
        if len(flat) != d * d:
            raise ConfigError(f"A must have d*d = {d * d} entries, got {len(flat)}")
        A = np.array(flat, dtype=complex).reshape(d, d)
        u_in = np.array([_complex_entry(v, "u_in entry") for v in cfg["u_in"]])
        if u_in.shape != (d,):
            raise ConfigError(f"u_in must have {d} entries")
        terms = []
        for item in cfg.get("poly_F", []):
            terms.append(
                (
                    int(item["row"]),
                    tuple(int(c) for c in item["alpha"]),
                    _complex_entry(item["coeff"], "poly_F coeff"),
                )
            )
        oracle = PolynomialOracle(d, terms)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad config: {exc}") from exc
    return OscillatorySystem(
        d=d,
        A=A,
        epsilon=float(cfg["epsilon"]),
        nu=float(cfg["nu"]),
        u_in=u_in,
        T=float(cfg["T"]),
        oracle=oracle,
        name=str(cfg.get("name", "")),
    )


def load_config_file(path) -> OscillatorySystem:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return load_config(cfg)
