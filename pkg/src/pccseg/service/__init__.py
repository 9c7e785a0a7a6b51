from .app import create_app
from .sessions import Session, SessionStatus, SessionStore

__all__ = ["create_app", "Session", "SessionStatus", "SessionStore"]
