"""Constants and exact mean sequences of the lamination height processes.

``mu(n)`` is the mean height at an independent uniform point after ``n``
self-similar trials; ``mu_h(n)`` is the homogeneous analogue.  ``mu`` is
available by three independent routes: the O(n^2) recurrence, the
alternating Gamma sum in extended precision, and the double binomial
transform of the exact rational sequence ``mu_star``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import special

SQRT17 = math.sqrt(17.0)
BETA = (SQRT17 - 3.0) / 2.0


def log_gamma(x):
    """log Gamma(x) for x > 0 (scalar or array)."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("log_gamma needs positive arguments")
    out = special.gammaln(x)
    return out if out.ndim else float(out)


def beta_fn(x, y):
    """Euler Beta function B(x, y) for positive arguments."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("beta_fn needs positive arguments")
    out = special.beta(x, y)
    return out if out.ndim else float(out)


def log_beta(x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log_beta needs positive arguments")
    out = special.betaln(x, y)
    return out if out.ndim else float(out)


def asymptotic_c() -> float:
    """Leading constant of mu(n) ~ c n^(beta/2)."""
    g = BETA / 2.0 + 1.0
    return math.exp(0.5 * math.log(math.pi) + log_gamma(2 * g - 0.5)
                    - math.log(2.0) - log_gamma(g) - 2.0 * log_gamma(g + 0.5))


def kappa() -> float:
    """Scale of the self-similar limit mean, E Z(s) = kappa (s(1-s))^beta."""
    return asymptotic_c() / beta_fn(BETA + 1.0, BETA + 1.0)


def kappa_h() -> float:
    return 24.0 / (math.pi * math.exp(log_gamma(1.0 / 3.0)))


@dataclass(frozen=True)
class Constants:
    beta: float
    gamma: float
    gamma_bar: float
    q: float
    q_prime: float
    c: float
    kappa: float
    kappa_h: float
    q_h: float
    q_bar: float
    sqrt_pi: float

    def check(self, tol: float = 1e-14) -> list[str]:
        """Names of the defining identities that fail at tolerance ``tol``."""
        bad = []
        if abs(self.beta - (SQRT17 - 3) / 2) > tol:
            bad.append("beta")
        if abs(self.gamma - (1 + SQRT17) / 4) > tol:
            bad.append("gamma")
        if abs(self.gamma + self.gamma_bar - 0.5) > tol or abs(self.gamma * self.gamma_bar + 1) > tol:
            bad.append("gamma_bar")
        if abs(self.q - 2 / (SQRT17 - 2)) > tol:
            bad.append("q")
        if abs(self.kappa * beta_fn(self.beta + 1, self.beta + 1) - self.c) > tol * self.c:
            bad.append("kappa")
        if abs(self.q_h - 6 / 7) > tol:
            bad.append("q_h")
        if abs(self.q_bar - 4 / 5) > tol:
            bad.append("q_bar")
        return bad


@lru_cache(maxsize=None)
def constants() -> Constants:
    b = BETA
    # D = V - U has density 2(1 - d) on (0, 1)
    e_d = lambda p: 2.0 * beta_fn(p + 1.0, 2.0)  # E D^p
    e_1md = lambda p: 2.0 / (p + 2.0)  # E (1 - D)^p
    q = e_1md(2 * b) + e_d(2 * b)
    # E (D(1 - D))^(2 beta) = 2 B(2 beta + 1, 2 beta + 2)
    q_prime = 2.0 * math.sqrt(2.0 * beta_fn(2 * b + 1, 2 * b + 2))
    # W uniform: E W^p = 1/(p + 1); a uniform point falls in [U, V) w.p. 1/3
    e_w = lambda p: 1.0 / (p + 1.0)
    q_h = e_w(4 / 3) + e_w(4 / 3)
    q_bar = e_w(2 / 3) + e_w(2 / 3) / 3.0
    return Constants(
        beta=b,
        gamma=b / 2 + 1,
        gamma_bar=(1 - SQRT17) / 4,
        q=q,
        q_prime=q_prime,
        c=asymptotic_c(),
        kappa=kappa(),
        kappa_h=kappa_h(),
        q_h=q_h,
        q_bar=q_bar,
        sqrt_pi=math.sqrt(math.pi),
    )


# -- self-similar mean: recurrence route -------------------------------------

def split_kernel(n: int) -> np.ndarray:
    """pi_{n,k} for k = 1 .. n-1, computed in log space."""
    k = np.arange(1, n, dtype=float)
    log_binom = log_gamma(n) - log_gamma(k + 1) - log_gamma(n - k)
    t1 = np.exp(log_binom + log_beta(k + 1, n - k))
    t2 = np.exp(log_binom + log_beta(k + 1.5, n - k))
    return 2.0 * t1 - t2


@lru_cache(maxsize=8)
def _recurrence_table(n_max: int) -> np.ndarray:
    mu = np.zeros(n_max + 1)
    for n in range(1, n_max + 1):
        mu[n] = 1.0 / 3.0 + (float(np.dot(mu[1:n], split_kernel(n))) if n > 1 else 0.0)
    mu.setflags(write=False)
    return mu


def mean_recurrence(n_max: int) -> np.ndarray:
    """``mu[0..n_max]`` with ``mu[0] = 0``, from the one-step recurrence."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    return _recurrence_table(int(n_max))


# -- self-similar mean: alternating Gamma sum ---------------------------------

@dataclass(frozen=True)
class PrecisionPolicy:
    """Working bits for the alternating sum at index n.

    Terms reach about 2^n / n in size while the sum stays below n, so about
    n bits cancel; ``slope`` bits per index plus ``offset`` guard bits.
    """

    slope: float = 1.0
    offset: int = 64

    def bits(self, n: int) -> int:
        return int(math.ceil(self.slope * n + 2 * math.log2(n + 1))) + self.offset


DEFAULT_POLICY = PrecisionPolicy()


def _alternating_sum(n: int, bits: int) -> Fraction:
    """sum_k C(n, k) (-1)^(k+1) f(k) in fixed point with ``bits`` fractional bits.

    f(1) = sqrt(pi) / (4 Gamma(5/2)) = 1/3, and Gamma(z + 1) = z Gamma(z)
    turns f(k) / f(k-1) into (k - g)(k - g_bar) / (k (k + 1/2)), which is
    (2k^2 - k - 2) / (k (2k + 1)) because g + g_bar = 1/2 and g g_bar = -1.
    """
    one = 1 << bits
    term = n * one // 3  # C(n, 1) f(1)
    total = term
    for k in range(2, n + 1):
        term = term * ((2 * k * k - k - 2) * (n - k + 1)) // (k * k * (2 * k + 1))
        if k % 2:
            total += term
        else:
            total -= term
    return Fraction(total, one)


def mean_closed_form(n: int, policy: PrecisionPolicy = DEFAULT_POLICY, check: bool = False) -> float:
    """mu(n) from the alternating binomial sum, in extended precision.

    With ``check`` the sum is repeated with 64 more bits and the precision
    is raised until both evaluations agree to 1e-12.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    bits = policy.bits(n)
    value = _alternating_sum(n, bits)
    while check:
        again = _alternating_sum(n, bits + 64)
        if abs(again - value) < Fraction(1, 10**12):
            break
        bits, value = bits + 64, again
    return float(value)


# -- exact rational route ------------------------------------------------------

def mu_star(n: int) -> Fraction:
    """Binomial transform of mu at n, as an exact rational."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = Fraction(-1, 3)
    for j in range(2, n + 1):
        out *= Fraction(2 * j * j - j - 2, j * (2 * j + 1))
    return out


def mu_star_sequence(n_max: int) -> list[Fraction]:
    """``[mu_star(0) = 0, mu_star(1), ..., mu_star(n_max)]``."""
    seq = [Fraction(0), Fraction(-1, 3)]
    for j in range(2, n_max + 1):
        seq.append(seq[-1] * Fraction(2 * j * j - j - 2, j * (2 * j + 1)))
    return seq[:n_max + 1]


def binomial_transform(a: Sequence) -> list[Fraction]:
    """``a*(n) = sum_k C(n, k) (-1)^k a(k)``, exact; an involution."""
    fr = [Fraction(x) for x in a]
    if not fr:
        return []
    den = math.lcm(*(x.denominator for x in fr))
    num = [x.numerator * (den // x.denominator) for x in fr]
    out = []
    for n in range(len(num)):
        acc = 0
        for k in range(n + 1):
            t = math.comb(n, k) * num[k]
            acc += -t if k % 2 else t
        out.append(Fraction(acc, den))
    return out


def euler_transform_coeffs(a: Sequence) -> list[Fraction]:
    """Coefficients of the Euler transform ``f*(z) = f(z/(z-1)) / (1-z)``.

    These are the binomial transform of the coefficients of ``f``; applying
    the map twice gives back ``a``.
    """
    return binomial_transform(a)


def mean_exact(n_max: int) -> list[Fraction]:
    """Exact ``mu(0..n_max)`` as the binomial transform of ``mu_star``."""
    return binomial_transform(mu_star_sequence(n_max))


# -- dispatch ----------------------------------------------------------------------

RECURRENCE_LIMIT = 2048


def mean_selfsimilar(n: int) -> float:
    """mu(n): recurrence table up to RECURRENCE_LIMIT, alternating sum above."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n <= RECURRENCE_LIMIT:
        return float(mean_recurrence(RECURRENCE_LIMIT)[n])
    return _closed_form_cached(int(n))


@lru_cache(maxsize=64)
def _closed_form_cached(n: int) -> float:
    return mean_closed_form(n)


# -- homogeneous mean ---------------------------------------------------------------

def mean_homogeneous(n: int, route: str = "gamma") -> float:
    """mu_h(n) = Gamma(n + 4/3) / (Gamma(4/3) n!) - 1 by the chosen route.

    ``gamma`` uses log-gamma differences, ``recurrence`` the averaged
    one-step recurrence and ``product`` the telescoped product.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if route == "gamma":
        # Gamma(n + 4/3) / Gamma(n + 1) as a Pochhammer symbol; differencing
        # two log-gammas of size n log n loses ~1e-10 relative at n = 1e5
        return float(special.poch(n + 1.0, 1.0 / 3.0)) / math.exp(log_gamma(4.0 / 3.0)) - 1.0
    if route == "recurrence":
        return float(homogeneous_recurrence(n)[n])
    if route == "product":
        return float(np.prod(1.0 + 1.0 / (3.0 * np.arange(1, n + 1)))) - 1.0
    raise ValueError(f"unknown route {route!r}")


def homogeneous_recurrence(n_max: int) -> np.ndarray:
    """``mu_h[0..n_max]`` from ``mu(n) = 1/3 + 4/(3n) sum_{k<n} mu(k)``."""
    mu = np.zeros(n_max + 1)
    running = 0.0
    for n in range(1, n_max + 1):
        mu[n] = 1.0 / 3.0 + 4.0 * running / (3.0 * n)
        running += mu[n]
    return mu


def brownian_gap() -> tuple[float, float]:
    """(value E e(xi)^2 would need under the homogeneous recursion, actual value 2)."""
    lhs = 10.0 / 3.0 * beta_fn(4.0 / 3.0, 4.0 / 3.0) * math.sqrt(math.pi) / 2.0
    return lhs, 2.0


def mean_table(ns: Sequence[int]) -> list[tuple[int, float, float, float, float]]:
    """Rows ``(n, mu(n), mu_h(n), c n^(beta/2), mu(n) - c n^(beta/2))``."""
    c = asymptotic_c()
    rows = []
    for n in ns:
        mu = mean_selfsimilar(n)
        lead = c * n ** (BETA / 2)
        rows.append((int(n), mu, mean_homogeneous(n), lead, mu - lead))
    return rows
