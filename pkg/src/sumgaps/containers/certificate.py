"""Certificat (F, Q) commun aux trois procédures, sérialisable en JSON."""

from dataclasses import dataclass, field
from typing import Any

from ..core.errors import InvariantViolation
from ..core.sets import NatSet


@dataclass(frozen=True)
class ContainerCertificate:
    """Empreinte F et conteneur Q produits par une procédure.

    `extra` porte les champs propres à chaque procédure (F0, phase1_mode...).
    """

    lemma: str
    F: NatSet
    Q: NatSet
    case: str
    iterations: int
    guarantees_applicable: bool
    trace: tuple[int, ...] = ()
    flags: tuple[str, ...] = ()
    extra: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "lemma": self.lemma,
            "F": list(self.F.members),
            "Q": list(self.Q.members),
            "case": self.case,
            "iterations": self.iterations,
            "guarantees_applicable": self.guarantees_applicable,
            "trace": list(self.trace),
            "flags": list(self.flags),
        }
        data.update(self.extra)
        return data


def check_structure(A: NatSet, F: NatSet, Q: NatSet) -> None:
    """F ⊆ A et A ∩ Q = ∅.

    Raises:
        InvariantViolation: Si l'une des deux propriétés échoue
    """
    if not F.issubset(A):
        raise InvariantViolation(
            "Empreinte hors de A", {"outside": list(F.difference(A).members)}
        )
    if not A.isdisjoint(Q):
        raise InvariantViolation(
            "Le conteneur rencontre A", {"common": list(A.intersection(Q).members)}
        )
