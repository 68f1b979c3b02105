"""Exceptions de sumgaps."""

from typing import Any


class SumgapsError(Exception):
    """Erreur de base de sumgaps.

    Les catégories servent au CLI pour choisir le code de sortie.
    """

    PRECONDITION = "precondition"
    BUDGET = "budget"
    SUPPLY = "supply"
    ITERATION_GUARD = "iteration_guard"
    INVARIANT = "invariant"
    FORMAT = "format"
    UNKNOWN = "unknown"

    def __init__(
        self,
        message: str,
        error_type: str = "unknown",
        details: dict[str, Any] | None = None,
    ) -> None:
        """Initialise l'erreur.

        Args:
            message: Message d'erreur
            error_type: Catégorie de l'erreur (constantes de classe)
            details: Données de diagnostic sérialisables
        """
        super().__init__(message)
        self.error_type = error_type
        self.details = details or {}

    @property
    def is_usage_error(self) -> bool:
        """Indique si l'erreur provient d'entrées invalides (code de sortie 2)."""
        return self.error_type in (self.PRECONDITION, self.FORMAT, self.BUDGET, self.SUPPLY)


class PreconditionViolated(SumgapsError):
    """Une précondition d'une opération n'est pas satisfaite."""

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        super().__init__(message, self.PRECONDITION, details)


class BudgetExceeded(SumgapsError):
    """Une énumération exhaustive dépasserait le budget autorisé."""

    def __init__(self, message: str, required: int, cap: int) -> None:
        super().__init__(message, self.BUDGET, {"required": required, "cap": cap})
        self.required = required
        self.cap = cap


class InsufficientFingerprintSupply(SumgapsError):
    """A est trop petit pour fournir l'empreinte demandée."""

    def __init__(self, message: str, available: int, required: int) -> None:
        super().__init__(message, self.SUPPLY, {"available": available, "required": required})
        self.available = available
        self.required = required


class IterationGuardTripped(SumgapsError):
    """La procédure itérée a dépassé sa borne théorique ou n'a plus progressé."""

    def __init__(self, message: str, states: list[dict[str, Any]]) -> None:
        super().__init__(message, self.ITERATION_GUARD, {"states": states})
        self.states = states


class InvariantViolation(SumgapsError):
    """Un invariant structurel affirmé a été violé."""

    def __init__(self, message: str, details: dict[str, Any] | None = None) -> None:
        super().__init__(message, self.INVARIANT, details)


class SetFormatError(SumgapsError):
    """Sérialisation d'ensemble invalide."""

    def __init__(self, message: str) -> None:
        super().__init__(message, self.FORMAT)
