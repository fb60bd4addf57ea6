"""
Vocabulario de errores del laboratorio.

Los servicios lanzan estas excepciones; los routers las capturan en el borde
y las convierten en un código de salida distinto de cero.
"""


class ConfigurationError(ValueError):
    """Configuración inválida (geometría degenerada, clave desconocida, escenario inexistente)"""


class ContractViolation(ValueError):
    """Precondición de una operación incumplida por el llamador"""


class CheckpointError(Exception):
    """Error genérico de lectura/escritura de checkpoints"""


class CheckpointIntegrityError(CheckpointError):
    """Archivo truncado o con checksum inválido"""


class CheckpointVersionError(CheckpointError):
    """Versión de formato incompatible"""


class TrainingDivergedError(FloatingPointError):
    """Pérdida o gradiente no finito durante una actualización"""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
