"""Excepciones del paquete. Heredan de las built-in para poder capturarlas de ambas formas."""
from typing import Any


class SVineError(Exception):
    """Base de todos los errores del paquete."""


class CopulaDomainError(SVineError, ValueError):
    """Parámetros fuera del dominio de la familia o datos insuficientes."""


class NumericalError(SVineError, RuntimeError):
    """Falla numérica (inversión de h-función, optimizador) con diagnóstico adjunto."""

    def __init__(self, message: str, diagnostics: dict[str, Any] | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class StructureError(SVineError, ValueError):
    """Estructura de vine inválida: proximidad, permutaciones incompatibles, JSON mal formado."""


class EdgeLookupError(SVineError, KeyError):
    """La arista no pertenece a la estructura."""


class DatasetError(SVineError, ValueError):
    """Errores de ingesta del CSV (con números de fila)."""


class MarginError(SVineError, ValueError):
    """Serie degenerada o demasiado corta para ajustar un margen."""
