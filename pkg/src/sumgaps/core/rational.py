"""Arithmétique rationnelle exacte pour les seuils des procédures."""

import math
from decimal import ROUND_CEILING, Decimal, localcontext
from fractions import Fraction
from numbers import Rational

Number = int | float | str | Fraction


def as_fraction(value: Number) -> Fraction:
    """Convertit en Fraction ; les flottants passent par leur écriture décimale (0.1 -> 1/10)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def ceil_fraction(value: Fraction) -> int:
    """⌈value⌉ exact."""
    return -((-value.numerator) // value.denominator)


def floor_fraction(value: Fraction) -> int:
    return value.numerator // value.denominator


def ceil_sqrt(value: Fraction) -> int:
    """Plus petit entier s >= 0 tel que s² >= value."""
    if value <= 0:
        return 0
    s = math.isqrt(floor_fraction(value))
    while s * s < value:
        s += 1
    return s


def exact_log2(value: Fraction) -> int | None:
    """k si value = 2^k (k >= 0), None sinon."""
    n = value.numerator
    if value.denominator != 1 or n < 1 or n & (n - 1):
        return None
    return n.bit_length() - 1


def ceil_log2_sqrt(scale: Fraction, ratio: Fraction, x: int) -> int:
    """⌈scale · log2(ratio) · √x⌉ pour scale > 0, ratio >= 1 et x >= 0.

    Exact quand ratio est une puissance de 2. Sinon log2(ratio) est
    irrationnel, le produit n'est jamais entier et 60 chiffres décimaux
    correctement arrondis fixent le plafond.
    """
    if ratio < 1:
        raise ValueError(f"ratio={ratio} < 1")
    if x == 0 or ratio == 1:
        return 0
    k = exact_log2(ratio)
    if k is not None:
        return ceil_sqrt(scale * scale * k * k * x)
    with localcontext() as ctx:
        ctx.prec = 60
        log2 = (Decimal(ratio.numerator).ln() - Decimal(ratio.denominator).ln()) / Decimal(2).ln()
        value = Decimal(scale.numerator) / Decimal(scale.denominator) * log2 * Decimal(x).sqrt()
        return int(value.to_integral_value(rounding=ROUND_CEILING))
