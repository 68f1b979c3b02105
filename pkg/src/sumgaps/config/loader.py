"""Chargement de la configuration depuis YAML."""

import hashlib
import json
import os
from pathlib import Path
from typing import Any

import yaml

from ..utils.logger import get_logger
from .schema import Config, validate_config

logger = get_logger("sumgaps.config")

CONFIG_DIR = ".sumgaps"
CONFIG_FILE = "config.yaml"


def load_config(config_path: Path | None = None) -> Config:
    """Charge la configuration depuis un fichier YAML.

    Ordre de priorité :
    1. config_path fourni explicitement
    2. .sumgaps/config.yaml (workspace local, en remontant l'arborescence)
    3. ~/.sumgaps/config.yaml (global)
    4. Configuration par défaut

    Args:
        config_path: Chemin optionnel vers le fichier de config

    Returns:
        Configuration validée

    Raises:
        FileNotFoundError: Si le fichier spécifié n'existe pas
        ValueError: Si la configuration est invalide
    """
    paths_to_try: list[Path] = []

    if config_path:
        if not config_path.exists():
            raise FileNotFoundError(f"Fichier de configuration introuvable: {config_path}")
        paths_to_try.append(config_path)
    else:
        workspace_config = _find_workspace_config(Path.cwd())
        if workspace_config:
            paths_to_try.append(workspace_config)
        paths_to_try.append(Path.home() / CONFIG_DIR / CONFIG_FILE)

    config_data: dict[str, Any] = {}

    for path in paths_to_try:
        if path.exists():
            with open(path, encoding="utf-8") as f:
                try:
                    loaded = yaml.safe_load(f)
                except yaml.YAMLError as e:
                    raise ValueError(f"YAML invalide dans {path}: {e}") from e
                if loaded:
                    if not isinstance(loaded, dict):
                        raise ValueError(f"{path} doit contenir un objet YAML")
                    config_data = loaded
                    break

    config_data = _apply_env_overrides(config_data)

    return validate_config(config_data)


def _find_workspace_config(start_path: Path) -> Path | None:
    """Recherche .sumgaps/config.yaml en remontant l'arborescence.

    Args:
        start_path: Répertoire de départ

    Returns:
        Chemin du fichier de config ou None
    """
    current = start_path.resolve()

    while True:
        config_file = current / CONFIG_DIR / CONFIG_FILE
        if config_file.exists():
            return config_file

        parent = current.parent
        if parent == current:
            break
        current = parent

    return None


def _apply_env_overrides(config: dict[str, Any]) -> dict[str, Any]:
    """Applique les overrides depuis les variables d'environnement.

    Variables supportées :
    - SUMGAPS_SEED: Graine de base
    - SUMGAPS_TRIALS: Nombre d'essais par cellule
    - SUMGAPS_WORKERS: Nombre de processus
    - SUMGAPS_CONFIDENCE: Niveau de confiance
    - SUMGAPS_LOG_LEVEL: Niveau de log

    Les valeurs non numériques sont ignorées avec un avertissement.

    Args:
        config: Configuration à modifier

    Returns:
        Configuration avec les overrides appliqués
    """
    simulation = dict(config.get("simulation") or {})

    for variable, key, cast in [
        ("SUMGAPS_SEED", "seed", int),
        ("SUMGAPS_TRIALS", "trials", int),
        ("SUMGAPS_WORKERS", "workers", int),
        ("SUMGAPS_CONFIDENCE", "confidence", float),
    ]:
        if raw := os.getenv(variable):
            try:
                simulation[key] = cast(raw)
            except ValueError:
                logger.warning(f"{variable}={raw!r} ignorée: valeur non numérique")

    if simulation:
        config["simulation"] = simulation

    if log_level := os.getenv("SUMGAPS_LOG_LEVEL"):
        config["logging"] = {**(config.get("logging") or {}), "level": log_level}

    return config


def get_config_path() -> Path:
    """Retourne le chemin du fichier de configuration à utiliser.

    Ordre de priorité :
    1. .sumgaps/config.yaml (workspace local)
    2. ~/.sumgaps/config.yaml (global)

    Returns:
        Chemin du fichier de config (peut ne pas exister)
    """
    workspace_config = _find_workspace_config(Path.cwd())
    if workspace_config:
        return workspace_config

    return Path.home() / CONFIG_DIR / CONFIG_FILE


def save_config(config: Config, config_path: Path | None = None) -> Path:
    """Sauvegarde la configuration dans un fichier YAML.

    Args:
        config: Configuration à sauvegarder
        config_path: Chemin du fichier de destination (par défaut: config actuelle)

    Returns:
        Chemin écrit
    """
    if config_path is None:
        config_path = get_config_path()

    config_path.parent.mkdir(parents=True, exist_ok=True)

    with open(config_path, "w", encoding="utf-8") as f:
        f.write("# Configuration sumgaps\n")
        f.write("# audit.L: null = somme de série par défaut (L_default)\n")
        yaml.dump(config.to_dict(), f, default_flow_style=False, allow_unicode=True, sort_keys=False)

    return config_path


def config_hash(config: Config) -> str:
    """SHA-256 du JSON canonique de la configuration validée."""
    canonical = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
