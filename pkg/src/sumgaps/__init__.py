"""sumgaps - éléments manquants dans les sommes d'ensembles aléatoires."""

__version__ = "0.1.0"
