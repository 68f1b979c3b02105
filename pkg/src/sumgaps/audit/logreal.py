"""Réels étendus positifs représentés par leur logarithme népérien.

Les bornes du type (1 - p)^{m/2} sous-passent les doubles dès que m dépasse
quelques milliers ; toutes les évaluations de l'audit passent par `LogReal`.
"""

import math
from dataclasses import dataclass
from functools import total_ordering
from typing import Any

from ..core.errors import PreconditionViolated

LN10 = math.log(10.0)


@total_ordering
@dataclass(frozen=True)
class LogReal:
    """Valeur x >= 0 stockée comme ln x (-inf pour 0, +inf pour +inf)."""

    log: float

    def __post_init__(self) -> None:
        if math.isnan(self.log):
            raise PreconditionViolated("Logarithme NaN", {"log": self.log})

    # --- Constructeurs ---

    @classmethod
    def zero(cls) -> "LogReal":
        return cls(-math.inf)

    @classmethod
    def one(cls) -> "LogReal":
        return cls(0.0)

    @classmethod
    def of(cls, value: float) -> "LogReal":
        """LogReal d'un flottant positif ou nul.

        Raises:
            PreconditionViolated: Si value < 0
        """
        if value < 0:
            raise PreconditionViolated(f"Valeur négative {value}", {"value": value})
        if value == 0:
            return cls.zero()
        return cls(math.log(value))

    @classmethod
    def power(cls, base: float, exponent: float) -> "LogReal":
        """base^exponent pour base >= 0 (0^0 = 1)."""
        if exponent == 0:
            return cls.one()
        if base == 0:
            return cls.zero() if exponent > 0 else cls(math.inf)
        return cls(exponent * math.log(base))

    @classmethod
    def complement_power(cls, p: float, exponent: float) -> "LogReal":
        """(1 - p)^exponent, calculé par log1p pour les petits p."""
        if exponent == 0:
            return cls.one()
        if p >= 1.0:
            return cls.zero() if exponent > 0 else cls(math.inf)
        return cls(exponent * math.log1p(-p))

    # --- Arithmétique ---

    def __mul__(self, other: "LogReal") -> "LogReal":
        if math.isinf(self.log) and math.isinf(other.log) and self.log != other.log:
            return LogReal.zero()  # 0 · ∞ n'apparaît que dans des termes vides
        return LogReal(self.log + other.log)

    def __truediv__(self, other: "LogReal") -> "LogReal":
        if other.log == -math.inf:
            raise PreconditionViolated("Division par zéro en espace logarithmique")
        return LogReal(self.log - other.log)

    def __add__(self, other: "LogReal") -> "LogReal":
        hi, lo = max(self.log, other.log), min(self.log, other.log)
        if lo == -math.inf:
            return LogReal(hi)
        if hi == math.inf:
            return LogReal(math.inf)
        return LogReal(hi + math.log1p(math.exp(lo - hi)))

    def scale(self, factor: float) -> "LogReal":
        """Multiplication par un scalaire positif."""
        return self * LogReal.of(factor)

    def __lt__(self, other: object) -> bool:
        if not isinstance(other, LogReal):
            return NotImplemented
        return self.log < other.log

    def minimum(self, other: "LogReal") -> "LogReal":
        return self if self.log <= other.log else other

    # --- Conversions ---

    def value(self) -> float:
        """Valeur flottante ; 0.0 en cas de sous-passement."""
        if self.log > 709.78:
            return math.inf
        return math.exp(self.log)

    def log10(self) -> float:
        return self.log / LN10

    def to_str(self, digits: int = 6) -> str:
        """Notation scientifique sans passer par un double (ex. '1.2e-500')."""
        if self.log == -math.inf:
            return "0"
        if self.log == math.inf:
            return "inf"
        decimal = self.log10()
        exponent = math.floor(decimal)
        mantissa = 10 ** (decimal - exponent)
        if round(mantissa, digits - 1) >= 10:
            mantissa /= 10
            exponent += 1
        return f"{mantissa:.{digits - 1}f}e{exponent:+d}"

    def to_json(self) -> dict[str, Any]:
        log = self.log if math.isfinite(self.log) else str(self.log)
        return {"log": log, "value": self.to_str()}

    def __str__(self) -> str:
        return self.to_str()
