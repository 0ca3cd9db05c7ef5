"""sqcached: a network-enabled, memory-only cache daemon storing tabular
data, queried through a SQL subset over a line-based text protocol, with
automatic expiry by data age, row count, and operation count."""

from .engine import Affected, Engine
from .executor import ResultSet
from .kernel import BACKEND as KERNEL_BACKEND
from .server import Server, ServerConfig

__version__ = "0.1.0"

__all__ = [
    "Affected",
    "Engine",
    "KERNEL_BACKEND",
    "ResultSet",
    "Server",
    "ServerConfig",
    "__version__",
]
