from .settings import settings
from .run_config import RunConfig, load_config, parse_config, echo_config

__all__ = ["settings", "RunConfig", "load_config", "parse_config", "echo_config"]
