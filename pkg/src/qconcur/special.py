"""Error functions, the imaginary error function, generalized
hypergeometric series and Poisson weights.

erfi grows like exp(x^2), so alongside ``erfi`` there is ``erfi_scaled``
returning exp(-x^2)*erfi(x); every place in this package that would pair
erfi(sqrt(n)) with exp(-n) uses the scaled form and never materializes the
huge intermediate.
"""
import math

from .errors import InvalidParameters, NoConvergence, Overflow

SQRT_PI = math.sqrt(math.pi)
_TWO_OVER_SQRT_PI = 2.0 / SQRT_PI
# series/asymptotic crossover; both sides are accurate to ~1e-14 here
_ERFI_SPLIT = 8.0
_ERFI_XMAX = 40.0

PFQ_MAX_TERMS = 10_000
# stop once this many consecutive terms are negligible (guards against
# even/odd term-size oscillation)
_PFQ_SMALL_RUN = 3


def erf(x):
    """Standard error function (stdlib implementation, < 1 ulp error)."""
    return math.erf(x)


def _erfi_series_core(x):
    # sum x^(2k+1) / (k! (2k+1)); all terms positive, no cancellation
    xx = x * x
    power = x
    total = x
    k = 0
    while True:
        power *= xx / (k + 1)
        contrib = power / (2 * k + 3)
        total += contrib
        k += 1
        if contrib <= 1e-17 * total:
            return total


def _erfi_scaled_asymptotic(x):
    # exp(-x^2) erfi(x) ~ (x sqrt(pi))^-1 * sum (2k-1)!! / (2 x^2)^k
    inv2xx = 1.0 / (2.0 * x * x)
    term = 1.0
    total = 1.0
    k = 0
    while True:
        k += 1
        nxt = term * (2 * k - 1) * inv2xx
        if nxt >= term:
            break  # past the optimal truncation point
        term = nxt
        total += term
        if term < 1e-17 * total:
            break
    return total / (x * SQRT_PI)


def erfi(x):
    """Imaginary error function erfi(x) = (2/sqrt(pi)) * int_0^x exp(t^2) dt.

    Raises Overflow for x > 40 and for 26.7 <~ x <= 40 where the value
    exceeds double range; use erfi_scaled there.
    """
    if x < 0:
        return -erfi(-x)
    if x > _ERFI_XMAX:
        raise Overflow(f"erfi argument {x:g} beyond the x <= {_ERFI_XMAX:g} guard")
    if x <= _ERFI_SPLIT:
        return _TWO_OVER_SQRT_PI * _erfi_series_core(x)
    try:
        grow = math.exp(x * x)
    except OverflowError:
        raise Overflow(
            f"erfi({x:g}) exceeds double range; use erfi_scaled for tail-paired products"
        ) from None
    return grow * _erfi_scaled_asymptotic(x)


def erfi_scaled(x):
    """exp(-x^2) * erfi(x) for x >= 0; bounded, safe for any x up to 40."""
    if x < 0:
        raise InvalidParameters("erfi_scaled is defined for x >= 0")
    if x <= _ERFI_SPLIT:
        return math.exp(-x * x) * _TWO_OVER_SQRT_PI * _erfi_series_core(x)
    return _erfi_scaled_asymptotic(x)


def pfq_terms(upper, lower, x, count):
    """First ``count`` terms of the pFq series, term k being
    prod (a_i)_k / prod (b_j)_k * x^k / k!.

    Arithmetic stays in the type of the inputs (exact for Fractions),
    each term obtained from the previous by the one-step ratio.
    """
    terms = [x ** 0]  # multiplicative identity in the input arithmetic
    term = terms[0]
    for k in range(count - 1):
        for a in upper:
            term = term * (a + k)
        for b in lower:
            term = term / (b + k)
        term = term * x / (k + 1)
        terms.append(term)
    return terms


def pfq(upper, lower, x):
    """Generalized hypergeometric series sum_k [prod (a)_k / prod (b)_k] x^k / k!.

    Requires p <= q + 1 and a non-negative argument; raises
    InvalidParameters when a lower parameter is a non-positive integer
    (undefined series) and NoConvergence if 10^4 terms do not reach the
    stopping rule.
    """
    upper = list(upper)
    lower = list(lower)
    if len(upper) > len(lower) + 1:
        raise InvalidParameters(
            f"series with p={len(upper)} > q+1={len(lower) + 1} diverges for x != 0"
        )
    for b in lower:
        if b <= 0 and float(b) == int(b):
            raise InvalidParameters(f"lower parameter {b} is a non-positive integer")
    if x < 0:
        raise InvalidParameters("argument must be non-negative")

    term = x ** 0
    total = term
    small_run = 0
    for k in range(PFQ_MAX_TERMS):
        for a in upper:
            term = term * (a + k)
        for b in lower:
            term = term / (b + k)
        term = term * x / (k + 1)
        total = total + term
        if abs(float(term)) < 1e-16 * abs(float(total)):
            small_run += 1
            if small_run >= _PFQ_SMALL_RUN:
                return total
        else:
            small_run = 0
    raise NoConvergence(f"pFq did not converge within {PFQ_MAX_TERMS} terms at x={x}")


def poisson_weight(n, nbar):
    """Poisson probability exp(-nbar) nbar^n / n!, computed in log space."""
    if nbar <= 0:
        raise InvalidParameters("poisson_weight requires nbar > 0")
    return math.exp(-nbar + n * math.log(nbar) - math.lgamma(n + 1))
