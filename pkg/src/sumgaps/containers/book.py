"""Registre de paires B ⊆ X × Y tenu par les procédures de conteneurs."""

from collections import defaultdict
from collections.abc import Iterable
from typing import Any

from ..core.errors import InvariantViolation


class PairBook:
    """Relation B ⊆ X × Y avec vues par ligne B(x, *) et par colonne B(*, y)."""

    def __init__(self) -> None:
        self._rows: dict[int, set[int]] = defaultdict(set)
        self._cols: dict[int, set[int]] = defaultdict(set)
        self._size = 0

    def add(self, x: int, y: int) -> None:
        """Ajoute (x, y) ; une paire déjà présente n'est pas recomptée."""
        row = self._rows[x]
        if y in row:
            return
        row.add(y)
        self._cols[y].add(x)
        self._size += 1

    def __len__(self) -> int:
        return self._size

    def __contains__(self, pair: object) -> bool:
        if not isinstance(pair, tuple) or len(pair) != 2:
            return False
        x, y = pair
        return y in self._rows.get(x, ())

    def row(self, x: int) -> frozenset[int]:
        """B(x, *)."""
        return frozenset(self._rows.get(x, ()))

    def column(self, y: int) -> frozenset[int]:
        """B(*, y)."""
        return frozenset(self._cols.get(y, ()))

    def row_size(self, x: int) -> int:
        return len(self._rows.get(x, ()))

    def column_size(self, y: int) -> int:
        return len(self._cols.get(y, ()))

    def rows_union(self, xs: Iterable[int]) -> set[int]:
        """B(F, *) = ∪_{x ∈ F} B(x, *)."""
        out: set[int] = set()
        for x in xs:
            out |= self._rows.get(x, set())
        return out

    def row_sizes(self) -> dict[int, int]:
        return {x: len(ys) for x, ys in self._rows.items() if ys}

    def column_sizes(self) -> dict[int, int]:
        return {y: len(xs) for y, xs in self._cols.items() if xs}

    def max_row(self) -> int:
        return max((len(ys) for ys in self._rows.values()), default=0)

    def max_column(self) -> int:
        return max((len(xs) for xs in self._cols.values()), default=0)

    def without_columns(self, ys: set[int]) -> "PairBook":
        """B' = B \\ (X × ys)."""
        pruned = PairBook()
        for x, row in self._rows.items():
            for y in row:
                if y not in ys:
                    pruned.add(x, y)
        return pruned

    def check(self) -> None:
        """Vérifie Σ_x |B(x,*)| = |B| = Σ_y |B(*,y)|.

        Raises:
            InvariantViolation: Si les vues divergent
        """
        by_rows = sum(len(ys) for ys in self._rows.values())
        by_cols = sum(len(xs) for xs in self._cols.values())
        if not by_rows == self._size == by_cols:
            raise InvariantViolation(
                "Vues ligne/colonne incohérentes",
                {"rows": by_rows, "size": self._size, "columns": by_cols},
            )

    def to_json(self) -> dict[str, Any]:
        return {
            "size": self._size,
            "max_row": self.max_row(),
            "max_column": self.max_column(),
        }
