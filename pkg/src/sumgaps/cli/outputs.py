"""Écriture des sorties (CSV, JSON) et lecture des instances."""

import csv
import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from ..core.errors import SetFormatError
from ..core.sets import NatSet


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[dict[str, Any]]) -> Path:
    """Écrit un CSV avec en-tête ; un itérable vide donne l'en-tête seul."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _cell(row.get(key, "")) for key in columns})
    return path


def read_csv(path: Path) -> list[dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def _cell(value: Any) -> Any:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return value


def write_json(path: Path, data: Any) -> Path:
    """JSON indenté, clés dans l'ordre d'insertion (sortie reproductible)."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, ensure_ascii=False, default=str)
        f.write("\n")
    return path


def read_json(path: Path) -> Any:
    """Lit un fichier JSON.

    Raises:
        SetFormatError: Si le contenu n'est pas du JSON valide
    """
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise SetFormatError(f"JSON invalide dans {path}: {e}") from e


def _decode_set(value: Any) -> NatSet:
    """Objet {"lo", "hi", "members"} ou forme compacte "lo-hi:base64"."""
    if isinstance(value, str):
        return NatSet.from_compact(value)
    if not isinstance(value, dict):
        raise SetFormatError(f"Ensemble illisible: {type(value).__name__}")
    return NatSet.from_json(value)


@dataclass(frozen=True)
class Instance:
    """Instance d'entrée des commandes container et verify."""

    A: NatSet
    X: NatSet
    Y: NatSet
    params: dict[str, Any]

    def to_json(self) -> dict[str, Any]:
        return {
            "A": self.A.to_json(),
            "X": self.X.to_json(),
            "Y": self.Y.to_json(),
            "params": self.params,
        }

    @classmethod
    def from_json(cls, data: Any) -> "Instance":
        """Décode une instance.

        Raises:
            SetFormatError: Si une clé manque ou si un ensemble est mal formé
        """
        if not isinstance(data, dict):
            raise SetFormatError("Une instance doit être un objet JSON")
        missing = [key for key in ("A", "X", "Y") if key not in data]
        if missing:
            raise SetFormatError(f"Clés manquantes dans l'instance: {', '.join(missing)}")
        params = data.get("params", {})
        if not isinstance(params, dict):
            raise SetFormatError("'params' doit être un objet")
        return cls(_decode_set(data["A"]), _decode_set(data["X"]), _decode_set(data["Y"]), params)


def load_instance(path: Path) -> Instance:
    return Instance.from_json(read_json(path))
