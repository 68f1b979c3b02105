"""Échantillonnage p-aléatoire reproductible.

Chaque élément x reçoit une uniforme dérivée de (graine, flux, x) par le
générateur à compteur Philox : l'uniforme de x est la x-ième sortie du flux
(graine, flux), quel que soit l'univers demandé. Deux univers différents
voient donc les mêmes tirages sur leur intersection, et deux probabilités
p <= p' produisent des ensembles emboîtés (couplage).
"""

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionViolated
from .sets import Interval, NatSet

MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class RandomSpec:
    """Paramètres d'un sous-ensemble p-aléatoire de `universe`."""

    p: float
    seed: int
    universe: Interval
    stream: int = 0  # indice d'essai en simulation

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise PreconditionViolated(f"p={self.p} hors de [0, 1]", {"p": self.p})
        if not 0 <= self.seed <= MAX_SEED:
            raise PreconditionViolated(f"Graine {self.seed} hors de [0, 2^64)", {"seed": self.seed})
        if self.stream < 0:
            raise PreconditionViolated(f"Flux {self.stream} négatif", {"stream": self.stream})


def element_uniforms(seed: int, stream: int, hi: int) -> np.ndarray:
    """Uniformes des éléments 1..hi pour le flux (seed, stream).

    Args:
        seed: Graine 64 bits
        stream: Indice du flux (essai)
        hi: Plus grand élément couvert

    Returns:
        Tableau float64 de longueur hi, l'élément x étant à l'indice x - 1
    """
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(stream,))
    generator = np.random.Generator(np.random.Philox(sequence))
    return generator.random(hi)


def sample_mask(p: float, uniforms: np.ndarray, universe: Interval) -> np.ndarray:
    """Masque d'inclusion sur `universe` à partir d'uniformes indexées depuis 1."""
    return uniforms[universe.lo - 1 : universe.hi] < p


def sample(spec: RandomSpec) -> NatSet:
    """Sous-ensemble p-aléatoire reproductible de spec.universe."""
    if spec.p <= 0.0:
        return NatSet.empty(spec.universe)
    if spec.p >= 1.0:
        return NatSet(spec.universe, (1 << spec.universe.size()) - 1)
    uniforms = element_uniforms(spec.seed, spec.stream, spec.universe.hi)
    return NatSet.from_mask(spec.universe, sample_mask(spec.p, uniforms, spec.universe))
