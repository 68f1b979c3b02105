"""Journalisation de sumgaps.

Tous les modules écrivent sous la hiérarchie « sumgaps.* ». stdout reste
réservé aux tableaux et fichiers de résultats : le journal va dans un
fichier (logging.file de la configuration) et, en DEBUG seulement, sur stderr.
"""

import logging
import sys
import time
from pathlib import Path
from typing import Any

ROOT_LOGGER = "sumgaps"

_FORMAT = "[%(asctime)s] %(levelname)s [%(name)s] %(message)s"
_DATEFMT = "%Y-%m-%d %H:%M:%S"


def setup_logger(
    name: str = ROOT_LOGGER, level: str = "INFO", log_file: Path | None = None
) -> logging.Logger:
    """Installe les handlers de la hiérarchie sumgaps.

    Appelé une fois par la commande `sumgaps` ; un second appel ne change
    que le niveau.

    Args:
        name: Racine à configurer
        level: DEBUG, INFO, WARNING ou ERROR
        log_file: Journal des exécutions (répertoire créé au besoin)

    Returns:
        Le logger racine
    """
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, level.upper()))
    if logger.handlers:
        return logger

    formatter = logging.Formatter(_FORMAT, datefmt=_DATEFMT)
    if level.upper() == "DEBUG":
        stderr = logging.StreamHandler(sys.stderr)
        stderr.setLevel(logging.DEBUG)
        stderr.setFormatter(formatter)
        logger.addHandler(stderr)
    if log_file:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        journal = logging.FileHandler(log_file, encoding="utf-8")
        journal.setLevel(logging.DEBUG)
        journal.setFormatter(formatter)
        logger.addHandler(journal)
    return logger


def get_logger(name: str) -> logging.Logger:
    """Logger d'un module, par exemple « sumgaps.containers.robust »."""
    return logging.getLogger(name)


class LogContext:
    """Encadre une procédure (conteneur, grille, audit) par deux lignes DEBUG.

    La ligne de fin porte la durée mesurée ; une exception qui traverse
    le bloc est journalisée en ERROR puis propagée.
    """

    def __init__(self, logger: logging.Logger, operation: str, **kwargs: Any) -> None:
        """
        Args:
            logger: Logger du module appelant
            operation: Nom de la procédure
            **kwargs: Paramètres affichés sur la ligne de début (n, κ, essais...)
        """
        self.logger = logger
        self.operation = operation
        self.kwargs = kwargs
        self._started = 0.0

    def __enter__(self) -> "LogContext":
        params = ", ".join(f"{k}={v}" for k, v in self.kwargs.items())
        self.logger.debug(f"[START] {self.operation} ({params})")
        self._started = time.perf_counter()
        return self

    def __exit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        elapsed = time.perf_counter() - self._started
        if exc_type:
            self.logger.error(f"[ERROR] {self.operation} après {elapsed:.3f}s: {exc_val}")
        else:
            self.logger.debug(f"[END] {self.operation} ({elapsed:.3f}s)")
