import os
from dotenv import load_dotenv

load_dotenv()

class Settings:
    """Configuración centralizada del proceso (variables de entorno)"""
    
    # Configuración de la aplicación
    APP_NAME: str = "V2X Handover Lab"
    APP_DESCRIPTION: str = "Banco de pruebas de handover vertical DSRC / VLC con agentes de deep RL"
    APP_VERSION: str = "1.0.0"
    
    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO").upper()
    
    # Pool de workers para grid search y entrenamiento multi-semilla
    HANDOVER_WORKERS: int = int(os.getenv("HANDOVER_WORKERS", "1"))
    
    # Directorio raíz de salida por defecto
    HANDOVER_OUTPUT_DIR: str = os.getenv("HANDOVER_OUTPUT_DIR", "runs")
    
    def __init__(self):
        """Validar configuraciones críticas al inicializar"""
        if self.HANDOVER_WORKERS < 1:
            raise ValueError("HANDOVER_WORKERS debe ser >= 1")
        if self.LOG_LEVEL not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"LOG_LEVEL inválido: {self.LOG_LEVEL}")

# Instancia global de configuración
settings = Settings()
