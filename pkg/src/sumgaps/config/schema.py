"""Schéma et validation de la configuration."""

from dataclasses import asdict, dataclass, field
from typing import Any


@dataclass
class SimulationConfig:
    """Paramètres par défaut des simulations Monte Carlo."""

    trials: int = 10_000
    confidence: float = 0.95  # Niveau des intervalles de Clopper-Pearson
    seed: int = 20240611
    workers: int = 1  # 1 = exécution dans le processus courant


@dataclass
class AuditConfig:
    """Constantes des énoncés asymptotiques, choisies pour l'audit.

    Aucune n'est fixée par les énoncés eux-mêmes (« il existe C > 1 ») :
    ce sont des paramètres déclarés, et chaque rapport porte
    `hypotheses_hold` pour ne rien affirmer hors de la région vérifiée.
    """

    C: float = 16.0
    L: float | None = None  # None = L_default()
    K0: float = 8192.0
    K: float = 8192.0  # K = M/d
    grid_points: int = 10_000  # Densité des grilles d'inégalités
    monotone_points: int = 100  # Points de la grille de monotonie

    def resolved_L(self) -> float:
        """L effectif (la somme de série par défaut si L n'est pas fixé)."""
        if self.L is not None:
            return self.L
        from ..audit.bounds import L_default

        return float(L_default())


@dataclass
class ContainerConfig:
    """Limites des procédures de conteneurs."""

    robust_cap: int = 1_000_000  # Familles R_X énumérées au plus
    phase1_size_cap: int = 2_000_000  # Sous-ensembles examinés en phase I exacte
    phase1_mode: str = "exact"  # "exact" ou "greedy"


@dataclass
class LoggingConfig:
    """Configuration du journal."""

    level: str = "INFO"
    file: str | None = None  # None = pas de fichier


@dataclass
class Config:
    """Configuration globale de sumgaps."""

    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    audit: AuditConfig = field(default_factory=AuditConfig)
    containers: ContainerConfig = field(default_factory=ContainerConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def _positive(section: str, name: str, value: Any, integer: bool = False) -> Any:
    kind = int if integer else (int, float)
    if isinstance(value, bool) or not isinstance(value, kind) or value <= 0:
        raise ValueError(f"{section}.{name} doit être un nombre strictement positif, pas '{value}'")
    return value


def _section(config: dict[str, Any], name: str) -> dict[str, Any]:
    data = config.get(name) or {}
    if not isinstance(data, dict):
        raise ValueError(f"La section '{name}' doit être un objet")
    return data


def validate_config(config: dict[str, Any]) -> Config:
    """Valide et convertit un dict en objet Config.

    Args:
        config: Configuration brute issue du YAML

    Returns:
        Config validée

    Raises:
        ValueError: Si la configuration est invalide
    """
    # Simulation
    sim_data = _section(config, "simulation")
    confidence = sim_data.get("confidence", 0.95)
    if not isinstance(confidence, (int, float)) or not 0 < confidence < 1:
        raise ValueError(f"simulation.confidence doit être dans ]0, 1[, pas '{confidence}'")
    seed = sim_data.get("seed", 20240611)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ValueError(f"simulation.seed doit être un entier de [0, 2^64), pas '{seed}'")
    simulation = SimulationConfig(
        trials=_positive("simulation", "trials", sim_data.get("trials", 10_000), integer=True),
        confidence=float(confidence),
        seed=seed,
        workers=_positive("simulation", "workers", sim_data.get("workers", 1), integer=True),
    )

    # Audit
    audit_data = _section(config, "audit")
    K0 = _positive("audit", "K0", audit_data.get("K0", 8192.0))
    L = audit_data.get("L")
    audit = AuditConfig(
        C=float(_positive("audit", "C", audit_data.get("C", 16.0))),
        L=None if L is None else float(_positive("audit", "L", L)),
        K0=float(K0),
        K=float(_positive("audit", "K", audit_data.get("K", K0))),
        grid_points=_positive(
            "audit", "grid_points", audit_data.get("grid_points", 10_000), integer=True
        ),
        monotone_points=_positive(
            "audit", "monotone_points", audit_data.get("monotone_points", 100), integer=True
        ),
    )
    if audit.monotone_points < 2:
        raise ValueError("audit.monotone_points doit valoir au moins 2")

    # Conteneurs
    cont_data = _section(config, "containers")
    phase1_mode = cont_data.get("phase1_mode", "exact")
    if phase1_mode not in ["exact", "greedy"]:
        raise ValueError(
            f"containers.phase1_mode doit être 'exact' ou 'greedy', pas '{phase1_mode}'"
        )
    containers = ContainerConfig(
        robust_cap=_positive(
            "containers", "robust_cap", cont_data.get("robust_cap", 1_000_000), integer=True
        ),
        phase1_size_cap=_positive(
            "containers",
            "phase1_size_cap",
            cont_data.get("phase1_size_cap", 2_000_000),
            integer=True,
        ),
        phase1_mode=phase1_mode,
    )

    # Journal
    log_data = _section(config, "logging")
    level = str(log_data.get("level", "INFO")).upper()
    if level not in LOG_LEVELS:
        raise ValueError(f"logging.level doit être l'un de {', '.join(LOG_LEVELS)}, pas '{level}'")
    logging_config = LoggingConfig(level=level, file=log_data.get("file"))

    return Config(
        simulation=simulation,
        audit=audit,
        containers=containers,
        logging=logging_config,
    )
