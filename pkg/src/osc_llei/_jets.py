"""Truncated multivariate Taylor arithmetic (forward-mode jets).

A Jet stores the Taylor coefficients of a scalar function of n
variables around a base point, truncated at total degree K, as a map
from exponent tuples to coefficients.  Arithmetic propagates exact
coefficients, so mixed partials recovered from a jet are accurate to
machine precision.  Analytic functions are applied by composing their
scalar Taylor series with the zero-constant part of the jet, which
terminates at degree K because that part is nilpotent under truncation.

Internal helper for derivative oracles; not part of the public API.
"""

from __future__ import annotations

import math

import numpy as np


class Jet:
    __slots__ = ("n", "K", "coeffs")

    def __init__(self, n: int, K: int, coeffs: dict[tuple[int, ...], complex]):
        self.n = n
        self.K = K
        self.coeffs = coeffs

    @classmethod
    def constant(cls, value, n: int, K: int) -> "Jet":
        return cls(n, K, {(0,) * n: value} if value != 0 else {})

    @classmethod
    def variable(cls, i: int, value, n: int, K: int) -> "Jet":
        e = tuple(1 if q == i else 0 for q in range(n))
        c = {(0,) * n: value, e: 1.0}
        if value == 0:
            del c[(0,) * n]
        return cls(n, K, c)

    def coeff(self, e: tuple[int, ...]):
        return self.coeffs.get(tuple(e), 0.0)

    def partial(self, e: tuple[int, ...]):
        """Mixed partial with exponent vector e: coefficient times prod e_q!."""
        scale = math.prod(math.factorial(q) for q in e)
        return self.coeff(e) * scale

    def _const(self):
        return self.coeffs.get((0,) * self.n, 0.0)

    def __add__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            other = Jet.constant(other, self.n, self.K)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, 0.0) + c
        return Jet(self.n, self.K, out)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet(self.n, self.K, {e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other) -> "Jet":
        return self + (-other if isinstance(other, Jet) else -1 * Jet.constant(other, self.n, self.K))

    def __rsub__(self, other) -> "Jet":
        return (-self) + other

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return Jet(self.n, self.K, {e: c * other for e, c in self.coeffs.items()})
        out: dict[tuple[int, ...], complex] = {}
        for e1, c1 in self.coeffs.items():
            d1 = sum(e1)
            for e2, c2 in other.coeffs.items():
                if d1 + sum(e2) > self.K:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0.0) + c1 * c2
        return Jet(self.n, self.K, out)

    __rmul__ = __mul__

    def compose_series(self, series) -> "Jet":
        """Evaluate sum_m series[m] * (self - const)^m, m = 0..K."""
        w = Jet(self.n, self.K, {e: c for e, c in self.coeffs.items() if sum(e) > 0})
        out = Jet.constant(series[0], self.n, self.K)
        wp = Jet.constant(1.0, self.n, self.K)
        for m in range(1, self.K + 1):
            wp = wp * w
            if not wp.coeffs:
                break
            out = out + wp * series[m]
        return out

    def cos(self) -> "Jet":
        a0 = self._const()
        series = [np.cos(a0 + m * np.pi / 2) / math.factorial(m) for m in range(self.K + 1)]
        return self.compose_series(series)

    def sin(self) -> "Jet":
        a0 = self._const()
        series = [np.sin(a0 + m * np.pi / 2) / math.factorial(m) for m in range(self.K + 1)]
        return self.compose_series(series)

    def power(self, p: float) -> "Jet":
        """self**p for non-integer p; the constant term must be nonzero."""
        a0 = self._const()
        if a0 == 0:
            raise ZeroDivisionError("jet power with zero constant term")
        series = []
        binom = 1.0
        for m in range(self.K + 1):
            series.append(binom * a0 ** (p - m))
            binom *= (p - m) / (m + 1)
        return self.compose_series(series)
