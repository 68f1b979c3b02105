"""Manifeste d'exécution joint à chaque sortie."""

from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

from .. import __version__
from ..config.loader import config_hash
from ..config.schema import Config
from .outputs import read_json, write_json

MANIFEST_FILE = "manifest.json"


@dataclass(frozen=True)
class RunManifest:
    """Commande, paramètres complets, graine et empreinte de la configuration.

    Deux manifestes égaux hors horodatage produisent des sorties identiques
    octet pour octet.
    """

    command: str
    parameters: dict[str, Any]
    seed: int | None
    config_hash: str
    version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    outputs: tuple[str, ...] = ()

    @classmethod
    def create(
        cls, command: str, parameters: dict[str, Any], seed: int | None, config: Config
    ) -> "RunManifest":
        return cls(command, parameters, seed, config_hash(config))

    def with_outputs(self, paths: list[Path]) -> "RunManifest":
        return RunManifest(
            self.command,
            self.parameters,
            self.seed,
            self.config_hash,
            self.version,
            self.timestamp,
            tuple(p.name for p in paths),
        )

    def same_run(self, other: "RunManifest") -> bool:
        """Égalité hors horodatage."""
        return (self.command, self.parameters, self.seed, self.config_hash, self.version) == (
            other.command,
            other.parameters,
            other.seed,
            other.config_hash,
            other.version,
        )

    def to_json(self) -> dict[str, Any]:
        data = asdict(self)
        data["outputs"] = list(self.outputs)
        return data

    def write(self, out_dir: Path) -> Path:
        return write_json(out_dir / MANIFEST_FILE, self.to_json())

    @classmethod
    def read(cls, path: Path) -> "RunManifest":
        data = read_json(path)
        return cls(
            command=data["command"],
            parameters=data["parameters"],
            seed=data.get("seed"),
            config_hash=data["config_hash"],
            version=data.get("version", __version__),
            timestamp=data.get("timestamp", ""),
            outputs=tuple(data.get("outputs", ())),
        )
