from __future__ import annotations

from datetime import datetime, timezone
from enum import Enum


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


class PrecondMode(str, Enum):
    """How the linear systems of a reduction are preconditioned."""

    NONE = "none"
    FRESH = "spai"
    REUSE = "reuse"

    @classmethod
    def parse(cls, raw: str | PrecondMode) -> PrecondMode:
        if isinstance(raw, PrecondMode):
            return raw
        key = str(raw).strip().lower()
        aliases = {"freshspai": cls.FRESH, "fresh": cls.FRESH, "reusechain": cls.REUSE}
        if key in aliases:
            return aliases[key]
        return cls(key)


class PrecondKind(str, Enum):
    FRESH = "fresh"
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"
    SAME_MATRIX = "reused-same-matrix"
    NONE = "none"


class Direction(str, Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


class ReuseStrategy(str, Enum):
    # A_{i-1} P_{i-1} = A_i P_i, factors chain up
    SEQUENTIAL = "sequential"
    # A_1 P_1 = A_i P_i, one factor on top of the anchor
    ANCHORED = "anchored"
