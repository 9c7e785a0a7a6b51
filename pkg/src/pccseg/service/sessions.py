"""In-memory session store for interactive segmentation.

Sessions are identified by opaque tokens, expire after a configurable
idle time, and serialize their runs: at most one segmentation is in
flight per session. State transitions happen under the session lock.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass, field
from enum import Enum

from ..imgio import CutPolygon, ImageBuffer
from ..pipeline import SegmentationResult
from ..strokes import Stroke


class SessionStatus(str, Enum):
    IDLE = "idle"
    RUNNING = "running"
    DONE = "done"
    FAILED = "failed"


@dataclass
class Session:
    id: str
    image: ImageBuffer
    strokes: list[Stroke] = field(default_factory=list)
    polygon: CutPolygon | None = None
    status: SessionStatus = SessionStatus.IDLE
    progress_iteration: int = 0
    progress_domination: float = 0.0
    result: SegmentationResult | None = None
    error: str | None = None
    last_access: float = field(default_factory=time.monotonic)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


class SessionStore:
    """Thread-safe session registry with lazy idle expiry."""

    def __init__(self, ttl_seconds: float = 3600.0):
        self.ttl_seconds = ttl_seconds
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, image: ImageBuffer) -> Session:
        session = Session(id=secrets.token_urlsafe(16), image=image)
        with self._lock:
            self._expire_locked()
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session | None:
        with self._lock:
            self._expire_locked()
            session = self._sessions.get(session_id)
            if session is not None:
                session.last_access = time.monotonic()
            return session

    def _expire_locked(self) -> None:
        now = time.monotonic()
        dead = [
            sid
            for sid, s in self._sessions.items()
            if now - s.last_access > self.ttl_seconds and s.status != SessionStatus.RUNNING
        ]
        for sid in dead:
            del self._sessions[sid]

    def __len__(self) -> int:
        with self._lock:
            return len(self._sessions)
