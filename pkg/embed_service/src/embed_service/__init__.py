"""HTTP microservice serving sentence- and token-level text embeddings."""

__version__ = "0.1.0"

from .app import create_app, serve  # noqa: F401
from .encoders import DeterministicEncoder, EncoderConfig, build_encoders  # noqa: F401
