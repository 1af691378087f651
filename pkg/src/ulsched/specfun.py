"""Special functions and quadrature for the analytic engine.

The heart of the module is the interference exponent integral

    J(t) = integral_{t^(-1/alpha)}^inf  y / (y^alpha + 1) dy,   alpha > 2,

which drives every interference Laplace transform, plus an alternating
binomial summation routine that stays accurate where the naive sum loses
all significance (binomial coefficients reach ~1e29 by n = 100 while the
result lives in [0, 1]).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import mpmath as mp
import numpy as np
from scipy.integrate import quad, quad_vec
from scipy.special import gamma as _gamma_fn
from scipy.special import gammainc as _reg_lower_gamma
from scipy.special import hyp2f1 as _hyp2f1


class ConvergenceError(RuntimeError):
    """Adaptive quadrature exhausted its subdivision budget."""


class PrecisionError(ArithmeticError):
    """Estimated cancellation error exceeds the accuracy contract."""


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 200

    def __post_init__(self):
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be at least 1")


# ------------------------------------------------------- incomplete gamma

def lower_incomplete_gamma(a: float, b: float) -> float:
    """gamma(a, b) = integral_0^b t^(a-1) e^(-t) dt (unregularized)."""
    if a <= 0.0:
        raise ValueError(f"lower incomplete gamma requires a > 0, got a={a}")
    if b < 0.0:
        raise ValueError(f"lower incomplete gamma requires b >= 0, got b={b}")
    return float(_reg_lower_gamma(a, b) * _gamma_fn(a))


# ------------------------------------------------ interference exponent J

def _check_exponent_domain(theta_k: float, alpha: float) -> None:
    if not theta_k > 0.0:
        raise ValueError(f"theta_k must be positive, got {theta_k}")
    if alpha <= 2.0:
        raise ValueError(
            f"interference exponent integral diverges for alpha <= 2, got alpha={alpha}")


@lru_cache(maxsize=1 << 16)
def _exponent_quad(theta_k: float, alpha: float) -> float:
    """Core quadrature for J, on the regularized finite form.

    Substituting y = t^(-1/a)/v and then w = v^(a-2) turns the tail integral
    into a smooth one on [0, 1]:

        J(t) = t^(1-2/a) / (a-2) * integral_0^1 dw / (1 + t * w^(a/(a-2)))

    with no endpoint singularity for any alpha > 2.  The integrand's only
    feature is a knee at w* = t^(-(a-2)/a), handed to the quadrature as a
    breakpoint.  Returns the plain integral (the w-integral), not J.
    """
    q = alpha / (alpha - 2.0)
    pts = None
    if theta_k > 1.0:
        wstar = theta_k ** (-1.0 / q)
        if 0.0 < wstar < 1.0:
            pts = [wstar]
    val, _ = quad(lambda w: 1.0 / (1.0 + theta_k * w ** q), 0.0, 1.0,
                  epsabs=1e-15, epsrel=1e-13, limit=200, points=pts)
    return val


def interference_exponent_integral(theta_k: float, alpha: float) -> float:
    """J(theta_k) = integral_{theta_k^(-1/alpha)}^inf y/(y^alpha + 1) dy."""
    _check_exponent_domain(theta_k, alpha)
    w_int = _exponent_quad(float(theta_k), float(alpha))
    return theta_k ** (1.0 - 2.0 / alpha) * w_int / (alpha - 2.0)


def interference_exponent_scaled(theta_k: float, alpha: float) -> float:
    """theta_k^(2/alpha) * J(theta_k): the dimensionless factor that sits in
    the interference Laplace exponent.  Equal to theta_k * Q / (alpha - 2)
    with Q the finite w-integral, so no fractional powers are involved."""
    _check_exponent_domain(theta_k, alpha)
    return theta_k * _exponent_quad(float(theta_k), float(alpha)) / (alpha - 2.0)


def interference_exponent_scaled_mp(theta_k, alpha) -> "mp.mpf":
    """High-precision twin of interference_exponent_scaled, evaluated at the
    caller's current mpmath working precision.

    Outside a narrow band around theta_k = 1 the integral is summed by
    term-wise integration of the geometric expansion of the integrand
    (alternating power series with ratio theta_k or 1/theta_k); inside the
    band, tanh-sinh quadrature of the same finite form used by the double
    path.  Needed by the large-n alternating sums, whose terms must carry
    far more than double precision.
    """
    x = mp.mpf(theta_k)
    al = mp.mpf(alpha)
    if not x > 0:
        raise ValueError(f"theta_k must be positive, got {theta_k}")
    if not al > 2:
        raise ValueError(f"alpha must exceed 2, got {alpha}")
    if al == 4:
        # u(x) = sqrt(x) * arctan(sqrt(x)) / 2 exactly; arctan is far
        # cheaper than the generic series near the band edges
        r = mp.sqrt(x)
        return r * mp.atan(r) / 2
    eps = mp.mpf(10) ** (-(mp.mp.dps + 5))
    if x < mp.mpf("0.66"):
        # u(x) = sum_{m>=0} (-1)^m x^(m+1) / (alpha (m+1) - 2)
        s = mp.mpf(0)
        t = x
        m = 0
        while True:
            s += t / (al * (m + 1) - 2)
            if abs(t) < eps * abs(s) * (al * (m + 1) - 2):
                break
            t *= -x
            m += 1
        return s
    if x > mp.mpf("1.5"):
        # u(x) = x^(2/alpha) * J_inf - sum_{m>=0} (-1)^m x^(-m) / (alpha m + 2)
        jinf = mp.pi / (al * mp.sin(2 * mp.pi / al))
        s = mp.mpf(0)
        t = mp.mpf(1)
        m = 0
        while True:
            s += t / (al * m + 2)
            if abs(t) < eps * abs(s) * (al * m + 2):
                break
            t *= -1 / x
            m += 1
        return x ** (2 / al) * jinf - s
    q = al / (al - 2)
    wstar = x ** (-1 / q)
    pts = [0, wstar, 1] if wstar < 1 else [0, 1]
    w_int = mp.quad(lambda w: 1 / (1 + x * w ** q), pts)
    return x * w_int / (al - 2)


def gauss_2f1_special(theta_k: float, alpha: float) -> float:
    """2F1(1, 1-2/alpha; 2-2/alpha; -theta_k) — the hypergeometric twin of
    the exponent integral, kept as an independent cross-check route."""
    _check_exponent_domain(theta_k, alpha)
    b = 1.0 - 2.0 / alpha
    return float(_hyp2f1(1.0, b, b + 1.0, -theta_k))


# ------------------------------------------------------------- quadrature

def integrate_semiinfinite(f: Callable, spec: Optional[QuadratureSpec] = None):
    """Adaptive integral of f over (0, inf) via the map x = u/(1-u).

    f may return a scalar or a fixed-shape ndarray (the vector form lets a
    family of integrals share one adaptive mesh).  Raises ConvergenceError
    if the subdivision budget is exhausted before the tolerances are met.
    """
    if spec is None:
        spec = QuadratureSpec()

    def g(u):
        if u >= 1.0:
            return 0.0 * np.asarray(f(1.0))
        x = u / (1.0 - u)
        return np.asarray(f(x)) / (1.0 - u) ** 2

    res, _err, info = quad_vec(g, 0.0, 1.0, epsabs=spec.abs_tol,
                               epsrel=spec.rel_tol, limit=spec.max_subdivisions,
                               norm="max", full_output=True)
    if not info.success:
        raise ConvergenceError(
            f"semi-infinite quadrature did not converge within "
            f"{spec.max_subdivisions} subdivisions (neval={info.neval})")
    if np.ndim(res) == 0:
        return float(res)
    return res


# ------------------------------------------------------- alternating sums

# Above this bound on sum_k C(n,k)|t_k| * 2^-53 the compensated double-
# precision path cannot certify 1e-10 absolute accuracy; switch to mpmath.
_FLOAT_PATH_ERR_BOUND = 1e-11
_FLOAT_PATH_MAX_N = 25
_SUM_ERR_CONTRACT = 1e-9


def _alternating_sum_dps(n: int) -> int:
    # log10 C(n, n/2) ~ 0.302 n; headroom for the terms and partial sums
    return min(1000, max(50, int(0.302 * n) + 25))


def _validate_term(k: int, v: float) -> None:
    if not (-1e-9 <= v <= 1.0 + 1e-9):
        raise ValueError(
            f"alternating sum term out of [0,1]: term({k}) = {v}")


def alternating_binomial_sum(n: int, term: Callable[[int], float],
                             term_mp: Optional[Callable[[int], "mp.mpf"]] = None
                             ) -> float:
    """sum_{k=1}^{n} C(n,k) (-1)^(k+1) term(k), for term(k) in [0, 1].

    For small n the products are formed exactly in doubles and combined by
    math.fsum; an a-priori cancellation bound decides whether that result
    can be trusted.  Otherwise coefficients, partial sums — and the terms
    themselves, via term_mp when supplied — are evaluated in mpmath at a
    working precision scaled to n.  Double-precision term values passed
    through the fallback are treated as exact inputs; callers needing full
    accuracy at large n must supply term_mp (see interference_exponent_
    scaled_mp for the evaluator used by the SINR engine).

    Raises PrecisionError if the estimated cancellation error of the chosen
    path exceeds 1e-9 absolute.  The result is clamped to [0, 1] only after
    that check passes.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"alternating sum requires n >= 1, got n={n}")

    if n <= _FLOAT_PATH_MAX_N:
        coeffs = [math.comb(n, k) for k in range(1, n + 1)]
        terms = []
        for k in range(1, n + 1):
            v = float(term(k))
            _validate_term(k, v)
            terms.append(v)
        bound = math.fsum(c * abs(t) for c, t in zip(coeffs, terms)) * 2.0 ** -53
        if bound <= _FLOAT_PATH_ERR_BOUND:
            s = math.fsum(c * t if k % 2 == 1 else -c * t
                          for k, (c, t) in enumerate(zip(coeffs, terms), start=1))
            return min(1.0, max(0.0, s))
        # fall through to the extended path

    dps = _alternating_sum_dps(n)
    with mp.workdps(dps):
        s = mp.mpf(0)
        mag = mp.mpf(0)
        for k in range(1, n + 1):
            c = mp.mpf(math.comb(n, k))
            if term_mp is not None:
                t = mp.mpf(term_mp(k))
            else:
                v = float(term(k))
                _validate_term(k, v)
                t = mp.mpf(v)
            prod = c * t
            mag += abs(prod)
            s += prod if k % 2 == 1 else -prod
        # stay in mpf: mag overflows and 10^-dps underflows in doubles
        est_err = mag * mp.mpf(10) ** (-(dps - 2))
        if est_err > _SUM_ERR_CONTRACT:
            raise PrecisionError(
                f"alternating sum cancellation too severe at n={n}: "
                f"estimated error {mp.nstr(est_err, 3)} exceeds "
                f"{_SUM_ERR_CONTRACT}")
        out = float(s)
    return min(1.0, max(0.0, out))
