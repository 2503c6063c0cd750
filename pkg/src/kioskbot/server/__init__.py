"""Back-end server: sessions, protocol handling, and the accessible UI feed."""

from .codes import ReasonCode, SessionState
from .session import Session, SessionManager, UITree, UITreeItem, generate_ui

__all__ = [
    "ReasonCode",
    "SessionState",
    "Session",
    "SessionManager",
    "UITree",
    "UITreeItem",
    "generate_ui",
]
