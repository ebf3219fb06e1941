"""Protocol gateway between a live console (browser) and the engine.

Frames are canonical-JSON text messages: serialize -> decode -> re-encode is
byte-identical. A frame reflects exactly the renderable world state (icons
included, policy internals excluded) and elides detail for stations outside
the operator's two-station view. Client messages arrive asynchronously but
take effect only through the per-tick input queue, so no client can observe
or create a torn world state.
"""
from __future__ import annotations

import json
import threading
import time
from collections import deque
from dataclasses import dataclass

import numpy as np

from .engine.inputs import OperatorInput, input_from_payload
from .engine.world import Engine
from .operators import InducedLoad, PhysioSynth, make_profile
from .policy import IconState, InteractionPlan
from .tasks import ALL_TASKS, Task
from .triallog import canonical_json
from .workload.features import PhysioSample

PROTOCOL_VERSION = 1

CLIENT_KINDS = ("join", "input", "station_focus", "push_to_talk", "heartbeat")
SERVER_KINDS = ("frame", "error")


def encode_message(data: dict) -> str:
    """One protocol message as canonical JSON text (newline-delimited when
    carried over a raw byte stream; one message per websocket text frame)."""
    return canonical_json({"v": PROTOCOL_VERSION, **data})


def decode_message(text: str) -> dict:
    data = json.loads(text)
    if not isinstance(data, dict):
        raise ValueError("protocol message must be a JSON object")
    if data.get("v") != PROTOCOL_VERSION:
        raise ValueError(f"unsupported protocol version {data.get('v')!r}")
    if data.get("kind") not in CLIENT_KINDS + SERVER_KINDS:
        raise ValueError(f"unknown message kind {data.get('kind')!r}")
    return data


def request_text(callsign: str, radio: str, frequency: float) -> str:
    return f"{callsign}, please change your {radio} radio to frequency {frequency:.3f}."


def serialize_frame(
    engine: Engine,
    icons: IconState,
    tick: int,
    focus: Task | None = None,
    stimuli: list[dict] | None = None,
    walk: dict | None = None,
) -> dict:
    """Renderable state frame. With a focus station, only the two visible
    stations carry detail; the rest are summarized to an alert flag."""
    now = engine.clock.elapsed
    visible = set(ALL_TASKS) if focus is None else set(engine.layout.visible_from(focus))
    stations: dict[str, dict] = {}

    for task in ALL_TASKS:
        if task not in visible:
            stations[task.value] = {
                "visible": False,
                "alert": engine.out_of_range(task),
            }
            continue
        if task == Task.TRACKING:
            tr = engine.tracking
            stations["tracking"] = {
                "visible": True,
                "target": [tr.target_pos[0], tr.target_pos[1]],
                "center": [tr.crosshair_center[0], tr.crosshair_center[1]],
                "mode": tr.mode,
            }
        elif task == Task.SYSMON:
            sm = engine.sysmon
            stations["sysmon"] = {
                "visible": True,
                "green_on": sm.green_on,
                "red_on": sm.red_on,
                "gauges": [
                    {"pos": sm.indicator_pos(i, now), "oor": sm.gauge_out_of_range(i)}
                    for i in range(4)
                ],
            }
        elif task == Task.RESMAN:
            res = engine.resources
            stations["resman"] = {
                "visible": True,
                "tanks": {
                    tid: {"level": tank.level, "capacity": tank.capacity}
                    for tid, tank in sorted(res.tanks.items())
                },
                "pumps": {
                    str(pid): {
                        "on": pump.on,
                        "failed": pump.failed,
                        "source": pump.source,
                        "sink": pump.sink,
                    }
                    for pid, pump in sorted(res.pumps.items())
                },
            }
        else:
            cm = engine.comms
            stations["comms"] = {
                "visible": True,
                "radios": {name: freq for name, freq in sorted(cm.radios.items())},
                "requests": [
                    {
                        "uid": r.uid,
                        "text": request_text(r.callsign, r.radio, r.frequency),
                        "radio": r.radio,
                        "frequency": r.frequency,
                        "deadline": r.deadline,
                    }
                    for r in cm.pending
                ],
                "speech_mode": cm.speech_mode,
            }

    return {
        "kind": "frame",
        "tick": tick,
        "t": now,
        "focus": focus.value if focus else None,
        "stations": stations,
        "icons": icons.to_payload(),
        "stimuli": stimuli or [],
        "walk": walk,
    }


@dataclass
class _Stimulus:
    stimulus: str
    task: str
    until: float


class ConsoleSession:
    """Bridges one live client to the trial loop.

    Implements the operator interface run_trial expects: queued client
    messages become engine inputs at the next tick, push-to-talk emits
    speech utterances while held, and the physiological channels are
    synthesized from behavior proxies (input rate, walking, speaking) since
    a live session has no sensors.
    """

    kind = "console"
    provides_ground_truth = False

    def __init__(self, heartbeat_timeout_s: float = 3.0, pause_on_disconnect: bool = False):
        self._lock = threading.Lock()
        self.inbox: deque[dict] = deque()
        self.outbox: deque[str] = deque(maxlen=64)
        self.engine: Engine | None = None
        self.layout = None
        self.focus = Task.TRACKING
        self.walking_to: Task | None = None
        self.walk_until = 0.0
        self.joined = False
        self.want_snapshot = False
        self.speaking = False
        self.next_utterance = 0.0
        self.stimuli: list[_Stimulus] = []
        self.recent_inputs: deque[float] = deque(maxlen=64)
        self.synth: PhysioSynth | None = None
        self.heartbeat_timeout_s = heartbeat_timeout_s
        self.pause_on_disconnect = pause_on_disconnect
        self.last_heartbeat = time.monotonic()
        self.frames_sent = 0

    def bind(self, engine: Engine, rng: np.random.Generator) -> "ConsoleSession":
        self.engine = engine
        self.layout = engine.layout
        self.synth = PhysioSynth(make_profile("nominal"), rng)
        return self

    # ------------------------------------------------------------------
    # Client side
    # ------------------------------------------------------------------
    def submit(self, message: dict) -> None:
        """Queue a decoded client message for the next tick."""
        with self._lock:
            self.inbox.append(message)
        self.last_heartbeat = time.monotonic()

    def submit_text(self, text: str) -> None:
        try:
            self.submit(decode_message(text))
        except (ValueError, json.JSONDecodeError) as exc:
            self._send({"kind": "error", "message": str(exc)})

    def _send(self, data: dict) -> None:
        with self._lock:
            self.outbox.append(encode_message(data))

    def take_outbox(self) -> list[str]:
        with self._lock:
            out = list(self.outbox)
            self.outbox.clear()
        return out

    @property
    def paused(self) -> bool:
        if not self.pause_on_disconnect or not self.joined:
            return False
        return (time.monotonic() - self.last_heartbeat) > self.heartbeat_timeout_s

    # ------------------------------------------------------------------
    # Operator interface (called from the trial loop)
    # ------------------------------------------------------------------
    def step(self, now: float, dt: float) -> list[OperatorInput]:
        out: list[OperatorInput] = []
        with self._lock:
            pending = list(self.inbox)
            self.inbox.clear()

        if self.walking_to is not None and now >= self.walk_until:
            self.focus = self.walking_to
            self.walking_to = None

        for msg in pending:
            kind = msg["kind"]
            if kind == "join":
                self.joined = True
                self.want_snapshot = True
            elif kind == "heartbeat":
                continue
            elif kind == "station_focus":
                dest = Task(msg["task"])
                if dest != self.focus and self.walking_to is None:
                    self.walking_to = dest
                    self.walk_until = now + self.layout.walk_time(self.focus, dest)
                    out.append(
                        OperatorInput(
                            "move_to_station", dest, now, {"from": self.focus.value}
                        )
                    )
            elif kind == "push_to_talk":
                if msg.get("state") == "start":
                    self.speaking = True
                    self.next_utterance = now
                else:
                    self.speaking = False
            elif kind == "input":
                payload = msg["payload"]
                try:
                    inp = input_from_payload(now, payload)
                except (KeyError, ValueError) as exc:
                    self._send({"kind": "error", "message": f"bad input: {exc}"})
                    continue
                self.recent_inputs.append(now)
                out.append(inp)

        if self.speaking and now >= self.next_utterance:
            out.append(OperatorInput("speech_utterance", Task.COMMS, now))
            self.recent_inputs.append(now)
            self.next_utterance = now + 1.0
        return out

    def notify_stimulus(self, plan: InteractionPlan, now: float) -> None:
        self.stimuli.append(_Stimulus(plan.stimulus, plan.task.value, now + 1.5))

    def induced_load(self, now: float) -> InducedLoad:
        """Behavior-proxy load: no sensors exist for a live human, so input
        rate, walking, speech, and audible traffic stand in for them."""
        eng = self.engine
        rate = sum(1 for t in self.recent_inputs if now - t <= 5.0)
        walking = self.walking_to is not None
        alerts = sum(1 for t in ALL_TASKS if eng.out_of_range(t))
        clamp = lambda v: min(max(v, 0.0), 1.0)
        return InducedLoad(
            cognitive=clamp(0.08 + 0.08 * rate + 0.1 * walking),
            physical=0.85 if walking else clamp(0.06 + 0.06 * rate),
            visual=clamp(0.1 + 0.15 * alerts),
            auditory=clamp(0.55 * eng.comms.audio_active(now) + 0.1 * alerts),
            speech=0.9 if self.speaking else 0.0,
        )

    def physio_step(self, load: InducedLoad, now: float, dt: float) -> PhysioSample:
        return self.synth.step(load, self.speaking, now, dt)

    # ------------------------------------------------------------------
    # Frames
    # ------------------------------------------------------------------
    def push_frame(self, engine: Engine, icons: IconState, tick: int) -> None:
        now = engine.clock.elapsed
        self.stimuli = [s for s in self.stimuli if s.until > now]
        walk = (
            {"to": self.walking_to.value, "until": self.walk_until}
            if self.walking_to is not None
            else None
        )
        frame = serialize_frame(
            engine,
            icons,
            tick,
            focus=self.focus,
            stimuli=[
                {"stimulus": s.stimulus, "task": s.task, "until": s.until}
                for s in self.stimuli
            ],
            walk=walk,
        )
        if self.want_snapshot:
            self.want_snapshot = False
        self._send(frame)
        self.frames_sent += 1


def create_app(session: ConsoleSession, runner_thread: threading.Thread | None = None):
    """FastAPI app exposing the session over a websocket at /ws."""
    import asyncio

    from fastapi import FastAPI, WebSocket, WebSocketDisconnect

    app = FastAPI(title="matbsim gateway")

    @app.get("/health")
    def health():
        return {"ok": True, "joined": session.joined}

    async def ws_loop(websocket) -> None:
        await websocket.accept()
        try:
            while True:
                for text in session.take_outbox():
                    await websocket.send_text(text)
                try:
                    text = await asyncio.wait_for(websocket.receive_text(), timeout=0.02)
                    session.submit_text(text)
                except asyncio.TimeoutError:
                    pass
        except WebSocketDisconnect:
            pass

    ws_loop.__annotations__ = {"websocket": WebSocket}
    app.add_api_websocket_route("/ws", ws_loop)

    return app


def serve_console_trial(cfg, mode, models=None, port: int = 8700):
    """Run a live console trial: trial loop in a worker thread, websocket
    gateway in the foreground (blocks until the trial ends)."""
    import uvicorn

    from .trial import run_trial

    session = ConsoleSession(pause_on_disconnect=True)
    holder = {}

    def work():
        holder["log"] = run_trial(
            cfg,
            mode,
            models=models,
            operator_factory=lambda engine, rng: session.bind(engine, rng),
            frame_sink=session.push_frame,
            pace_real_time=True,
        )

    thread = threading.Thread(target=work, daemon=True)
    thread.start()
    app = create_app(session, thread)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
    thread.join(timeout=5.0)
    return holder.get("log")
