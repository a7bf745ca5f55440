"""Reference backend process for the chain-score wire protocol.

Wraps pretrained entailment / offensive-text / completion models and serves
them as newline-delimited JSON on stdio. Configuration is a single JSON file;
label order is always explicit there, never inferred from a checkpoint.
"""

from .config import ModelConfig, SidecarConfig, load_config
from .serve import serve

__version__ = "0.1.0"

__all__ = ["ModelConfig", "SidecarConfig", "load_config", "serve", "__version__"]
