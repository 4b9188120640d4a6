"""Python interpreter backend speaking the weavetex wire protocol."""

from weavetex_pybridge.server import HANDSHAKE, Session, handle_line, main, serve

__version__ = "0.1.0"

__all__ = ["HANDSHAKE", "Session", "handle_line", "main", "serve"]
