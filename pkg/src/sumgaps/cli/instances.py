"""Génération d'instances reproductibles pour container et verify."""

import numpy as np

from ..core.errors import PreconditionViolated
from ..core.sampling import RandomSpec, sample
from ..core.sets import NatSet, sumset
from .outputs import Instance


def missing_sums(A: NatSet, X: NatSet) -> NatSet:
    """(X + X) \\ (A + A) sur la fenêtre [2·lo, 2·hi] de X."""
    window = X.universe.sum_window()
    return NatSet.interval(window.lo, window.hi).difference(sumset(A))


def sample_instance(n: int, p: float, seed: int, stream: int = 0) -> Instance:
    """A p-aléatoire dans X = [1, n], Y = sommes manquantes de A."""
    X = NatSet.interval(1, n)
    A = sample(RandomSpec(p, seed, X.universe, stream))
    return Instance(A, X, missing_sums(A, X), {"n": n, "p": p, "seed": seed, "stream": stream})


def sub_superset(A: NatSet, F: NatSet, rng: np.random.Generator) -> NatSet:
    """F ∪ S pour S tiré uniformément parmi les parties de A \\ F."""
    rest = [a for a in A.members if a not in F]
    keep = [a for a, bit in zip(rest, rng.integers(0, 2, len(rest)), strict=True) if bit]
    return NatSet.from_iterable(A.universe, [*F.members, *keep])


def window_instance(root: int, width: int, rng: np.random.Generator) -> Instance:
    """Paire (2/5)-régulière X = [1, n], Y = [n+1-w, n+w], n = root².

    Tout y de Y a au moins ⌈(n-w)/2⌉ >= 2n/5 représentations x <= x'.
    A compte 2·root éléments de [1, (n-w)/2] : A + A évite Y, et |A| est
    exactement la cible ⌈2·log2(|Y|/w)·√n⌉ pour L = 2, d = w.

    Raises:
        PreconditionViolated: Si root < 20 ou si w sort de [2·root, n/5]
    """
    n = root * root
    if root < 20 or not 2 * root <= width <= n // 5:
        raise PreconditionViolated(
            f"Fenêtre hors domaine (root={root}, w={width})", {"root": root, "width": width}
        )
    X = NatSet.interval(1, n)
    Y = NatSet.from_iterable(X.universe.sum_window(), range(n + 1 - width, n + width + 1))
    pool = np.arange(1, (n - width) // 2 + 1)
    A = NatSet.from_iterable(X.universe, sorted(rng.choice(pool, 2 * root, replace=False).tolist()))
    return Instance(A, X, Y, {"root": root, "width": width})
