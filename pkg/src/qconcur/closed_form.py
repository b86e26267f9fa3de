"""Closed-form late-time level populations versus mean photon number.

The three population expressions are built from the imaginary error
function and generalized hypergeometric series 2F2 with half-integer
parameters.  The published text of these expressions contains
typographical inconsistencies; every correction applied here is isolated
in FORMULA_REPAIRS with the original alongside, and both readings stay
evaluable:

    variant="repaired" (default): corrected reading, with every
        Erfi(sqrt(nbar)) paired with exp(-nbar) (bounded combination,
        evaluated through the scaled erfi without huge intermediates).
    variant="printed": the literal transcription.  It diverges like
        exp(+2 nbar) in the w01/w10 expression and overflows the erfi
        range for moderate nbar in the w00 head; such evaluations raise
        Overflow rather than silently returning garbage.

The normalization constant is fixed by requiring the four populations to
sum to one.  Note the per-unit w00 value grows without bound as nbar
increases (the hypergeometric block dominates), so in the semiclassical
regime the normalized populations concentrate on |00> rather than
equalizing; the averaged concurrence still vanishes there.
"""
import math
from dataclasses import dataclass

import numpy as np

from . import special
from .concurrence import Populations, concurrence_mixed_averaged
from .errors import InvalidParameters, NonPositiveWeight, Overflow

SQRT_PI = math.sqrt(math.pi)
NBAR_MAX = 200.0

# transcribed coefficients of the w00 bracket, kept as named constants so
# tests can audit them against the source text
C_OUTER = 3075
C_F12 = 33075
C_F32 = 3675
C_INNER = 27
C_F52 = 147
C_F72 = 50
C_F92 = 1225
C_BLOCK = 32
C_DENOM = 1058400

_VARIANTS = ("printed", "repaired")


def _check(nbar, variant):
    if variant not in _VARIANTS:
        raise InvalidParameters(f"variant must be one of {_VARIANTS}, got {variant!r}")
    if nbar <= 0:
        raise InvalidParameters("nbar must be > 0")
    if nbar > NBAR_MAX:
        raise InvalidParameters(f"nbar={nbar:g} beyond the supported range {NBAR_MAX:g}")


def _f(a, b, nbar):
    return special.pfq([a, a], [b, b], nbar)


def w01_avg(nbar, variant="repaired"):
    """Averaged occupation of |01> (== |10>) per unit normalization.

    1/2 + (1/32) [12 - 2/nbar + e^{-nbar} sqrt(pi) (1-2 nbar)^2
                  Erfi(sqrt(nbar)) / nbar^{3/2}]
    in the repaired reading; the printed reading carries e^{+nbar} instead
    and blows up like e^{2 nbar}.
    """
    _check(nbar, variant)
    if variant == "repaired":
        tail = special.erfi_scaled(math.sqrt(nbar))
    else:
        try:
            tail = math.exp(2.0 * nbar) * special.erfi_scaled(math.sqrt(nbar))
        except OverflowError:
            raise Overflow(
                f"printed w01 expression overflows at nbar={nbar:g} (e^{{+nbar}} factor)"
            ) from None
    term = SQRT_PI * (1.0 - 2.0 * nbar) ** 2 * tail / nbar**1.5
    return 0.5 + (12.0 - 2.0 / nbar + term) / 32.0


def w10_avg(nbar, variant="repaired"):
    """Identical to w01_avg by construction (single shared code path)."""
    return w01_avg(nbar, variant)


def _head_term(nbar, variant, which):
    # the e^{-nbar} sqrt(pi) Erfi(sqrt(nbar)) / (4 nbar) head shared by the
    # w11 (minus) and w00 (plus) expressions, in both readings
    if variant == "repaired":
        return SQRT_PI * special.erfi_scaled(math.sqrt(nbar)) / (4.0 * nbar)
    if which == "w11":
        # printed: exp(-nbar sqrt(pi) Erfi(nbar)) / (4 nbar); once erfi
        # exceeds double range the exponential underflows to its true
        # limit 0, so that is returned rather than an error
        try:
            exponent = -nbar * SQRT_PI * special.erfi(nbar)
        except Overflow:
            exponent = -math.inf
        return math.exp(exponent) / (4.0 * nbar)
    # w00 printed: e^{-nbar} sqrt(pi) Erfi(nbar) / (4 nbar); genuinely
    # divergent once erfi(nbar) leaves double range
    try:
        return math.exp(-nbar) * SQRT_PI * special.erfi(nbar) / (4.0 * nbar)
    except (Overflow, OverflowError):
        raise Overflow(
            f"printed w00 head overflows at nbar={nbar:g} (Erfi(nbar) beyond double range)"
        ) from None


def w11_avg(nbar, variant="repaired"):
    """Averaged occupation of |11> per unit normalization: the erfi head
    plus three 2F2 blocks, each damped by e^{-nbar}."""
    _check(nbar, variant)
    head = 0.5 - _head_term(nbar, variant, "w11")
    damp = math.exp(-nbar)
    blocks = 0.5 * damp * (
        (3.0 - 2.0 * nbar + nbar**2) / 3.0 * _f(1.5, 2.5, nbar)
        + (13.0 * nbar - 2.0 * nbar**2) / 25.0 * _f(2.5, 3.5, nbar)
        + 3.0 * nbar**2 / 49.0 * _f(3.5, 4.5, nbar)
    )
    return head + blocks


def w00_avg(nbar, variant="repaired"):
    """Averaged occupation of |00> per unit normalization: erfi head plus
    the large bracket of five 2F2 blocks with the transcribed coefficients."""
    _check(nbar, variant)
    head = 0.5 + _head_term(nbar, variant, "w00")
    if variant == "repaired":
        erfi_tail = special.erfi_scaled(math.sqrt(nbar))
    else:
        erfi_tail = special.erfi(math.sqrt(nbar))
    bracket = C_OUTER * (
        2.0 * math.sqrt(nbar) * (-16.0 * nbar + math.exp(-nbar) * (3.0 - 14.0 * nbar - 16.0 * nbar**2))
        - 3.0 * SQRT_PI * (1.0 - 2.0 * nbar) ** 2 * erfi_tail
    )
    block = C_BLOCK * nbar**1.5 * (
        C_F12 * nbar * _f(0.5, 1.5, nbar)
        + C_F32 * (12.0 + 5.0 * nbar**2) * _f(1.5, 2.5, nbar)
        + C_INNER * nbar * (
            C_F52 * (14.0 - 2.0 * nbar + nbar**2) * _f(2.5, 3.5, nbar)
            - C_F72 * (12.0 + nbar) * nbar * _f(3.5, 4.5, nbar)
        )
        + C_F92 * nbar**3 * _f(4.5, 5.5, nbar)
    )
    return head + (bracket + block) / (C_DENOM * nbar**1.5)


@dataclass(frozen=True)
class ClosedFormResult:
    nbar: float
    c_squared: float
    populations: Populations
    c_mixed: float
    variant: str


def normalize(nbar, variant="repaired"):
    """Fix the normalization constant by unit total occupation and return
    the normalized populations with their averaged concurrence.

    Raises NonPositiveWeight when any per-unit population is <= 0 under
    the chosen variant (reported, never clamped) and Overflow when a
    per-unit population leaves double range.
    """
    per_unit = {
        "w00": w00_avg(nbar, variant),
        "w01": w01_avg(nbar, variant),
        "w10": w10_avg(nbar, variant),
        "w11": w11_avg(nbar, variant),
    }
    bad = {k: v for k, v in per_unit.items() if not math.isfinite(v)}
    if bad:
        raise Overflow(f"non-finite per-unit populations at nbar={nbar:g}: {bad}")
    bad = {k: v for k, v in per_unit.items() if v <= 0}
    if bad:
        raise NonPositiveWeight(f"non-positive per-unit populations at nbar={nbar:g}: {bad}")
    total = sum(per_unit.values())
    c_squared = 1.0 / total
    pops = Populations(
        per_unit["w00"] / total,
        per_unit["w01"] / total,
        per_unit["w10"] / total,
        per_unit["w11"] / total,
    )
    return ClosedFormResult(nbar, c_squared, pops, concurrence_mixed_averaged(pops), variant)


def sweep(nbar_grid, variant="repaired"):
    """Evaluate normalize() over an ascending positive grid; errors from
    individual points propagate to the caller."""
    grid = np.asarray(nbar_grid, dtype=float)
    if len(grid) == 0 or grid[0] <= 0 or np.any(np.diff(grid) <= 0):
        raise InvalidParameters("nbar grid must be positive and strictly ascending")
    return [normalize(float(n), variant) for n in grid]


# Every textual correction applied by the repaired variant, with the
# original form; rendered verbatim into the discrepancy report.
FORMULA_REPAIRS = (
    {
        "location": "w01/w10 expression, erfi term",
        "printed": "exp(+nbar) * sqrt(pi) * (1-2*nbar)^2 * Erfi(sqrt(nbar)) / nbar^(3/2)",
        "repaired": "exp(-nbar) * sqrt(pi) * (1-2*nbar)^2 * Erfi(sqrt(nbar)) / nbar^(3/2)",
        "reason": "the printed sign makes the term grow like exp(2*nbar); the"
                  " repaired pairing is bounded and gives the finite"
                  " large-nbar limit of 1 per unit normalization",
    },
    {
        "location": "w11 expression, head term",
        "printed": "exp(-nbar*sqrt(pi)*Erfi(nbar)) / (4*nbar)",
        "repaired": "exp(-nbar) * sqrt(pi) * Erfi(sqrt(nbar)) / (4*nbar)",
        "reason": "parenthesization and argument read to match the"
                  " structurally identical erfi term of the w01/w10"
                  " expression (exp(-nbar) always pairs with Erfi(sqrt(nbar)))",
    },
    {
        "location": "w00 expression, head term",
        "printed": "exp(-nbar) * sqrt(pi) * Erfi(nbar) / (4*nbar)",
        "repaired": "exp(-nbar) * sqrt(pi) * Erfi(sqrt(nbar)) / (4*nbar)",
        "reason": "Erfi argument read as sqrt(nbar), same convention as above",
    },
    {
        "location": "w00 expression, 3075-bracket erfi term",
        "printed": "3*sqrt(pi)*(1-2*nbar)^2*Erfi(sqrt(nbar))",
        "repaired": "3*sqrt(pi)*(1-2*nbar)^2*exp(-nbar)*Erfi(sqrt(nbar))",
        "reason": "paired with exp(-nbar) under the same convention; unpaired"
                  " it grows like exp(nbar) against algebraic companions",
    },
)
