"""Communications task: radio-change requests over four radios.

Requests arrive as simulated air-traffic audio. Only requests addressed to
the own callsign are creditable; each accepts at most one response. With the
speech modality enabled, one utterance completes the oldest own pending
request (the system only detects that speech occurred).
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..config import CommsConfig


@dataclass
class CommsRequest:
    uid: int
    callsign: str
    radio: str
    frequency: float
    issued_at: float
    deadline: float
    audio_until: float

    def is_own(self, own_callsign: str) -> bool:
        return self.callsign == own_callsign


@dataclass
class CommsState:
    radios: dict[str, float]
    own_callsign: str
    pending: list[CommsRequest] = field(default_factory=list)
    speech_mode: bool = False

    @classmethod
    def from_config(cls, cfg: CommsConfig) -> "CommsState":
        return cls(
            radios={name: cfg.freq_low for name in cfg.radios},
            own_callsign=cfg.own_callsign,
        )

    def pending_own(self) -> list[CommsRequest]:
        return [r for r in self.pending if r.is_own(self.own_callsign)]

    def oldest_own(self) -> CommsRequest | None:
        own = self.pending_own()
        return min(own, key=lambda r: r.issued_at) if own else None

    def match_tuning(self, radio: str, frequency: float) -> CommsRequest | None:
        """Oldest own pending request satisfied by tuning radio to frequency."""
        hits = [
            r
            for r in self.pending_own()
            if r.radio == radio and abs(r.frequency - frequency) < 5e-4
        ]
        return min(hits, key=lambda r: r.issued_at) if hits else None

    def audio_active(self, now: float) -> bool:
        return any(r.issued_at <= now < r.audio_until for r in self.pending)

    @property
    def out_of_range(self) -> bool:
        return bool(self.pending_own())
