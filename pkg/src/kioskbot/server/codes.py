from __future__ import annotations

from enum import Enum


class ReasonCode(str, Enum):
    """Closed set of error codes carried by protocol `error` messages."""

    UNRECOGNIZED_SCREEN = "UNRECOGNIZED_SCREEN"
    RELOCATION_REQUIRED = "RELOCATION_REQUIRED"
    OUT_OF_REACH = "OUT_OF_REACH"
    INTERNAL = "INTERNAL"


class SessionState(str, Enum):
    AWAITING_PLACEMENT = "AwaitingPlacement"
    LOCALIZING = "Localizing"
    READY = "Ready"
    EXECUTING = "Executing"
    RELOCATION_REQUIRED = "RelocationRequired"
    FAILED = "Failed"
