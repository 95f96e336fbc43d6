"""Subprocess adapter exposing the activemix serve protocol as an env object.

The core simulator stays a separate process speaking line-delimited JSON on
its standard streams; this module turns that wire protocol into the
conventional ``reset(seed) -> obs`` / ``step(action) -> (obs, reward, done,
info)`` surface policy-gradient trainers expect. The adapter performs no
numerical transformation: rewards are parsed verbatim from the transcript
and ``info["raw"]`` keeps the exact response line, so downstream checks can
compare transcript strings directly.

Mapping to the protocol:

    reset(seed)   ->  {"cmd": "reset", "seed": seed}
    step(action)  ->  {"cmd": "step", "action": [...]} (row-major cell digits)
    close()       ->  {"cmd": "close"}
    spec          ->  {"cmd": "spec"} (probed once at startup)

Protocol error responses surface as ProtocolError carrying the error code;
transport problems (dead process, timeout, unparseable reply) surface as
AdapterError with a transcript excerpt.
"""

from __future__ import annotations

import json
import queue
import subprocess
import sys
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

DEFAULT_COMMAND = (sys.executable, "-m", "activemix")


class AdapterError(RuntimeError):
    """Transport-level failure: startup, timeout, EOF or malformed reply."""


class ProtocolError(RuntimeError):
    """The core answered with an error record ({"error": code, ...})."""

    def __init__(self, code: str, message: str = "") -> None:
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code


@dataclass
class AdapterConfig:
    """How to launch and talk to the core.

    command: argv prefix of the core executable; "serve" plus flags are
        appended. The executable must exist and answer a spec probe
        within ``timeout`` seconds.
    options: flat environment options forwarded as --key value flags
        (alpha, interaction_set, n_steps, seed-independent parameters...).
    timeout: seconds to wait for any single response line.
    """

    command: Sequence[str] = DEFAULT_COMMAND
    options: Mapping[str, object] = field(default_factory=dict)
    timeout: float = 10.0

    def argv(self) -> list[str]:
        out = [*self.command, "serve"]
        for key, value in self.options.items():
            out.append("--" + str(key).replace("_", "-"))
            out.append(str(value))
        return out


class SubprocessMixingEnv:
    """One adapter owns one core subprocess and one environment instance."""

    def __init__(self, config: AdapterConfig | None = None, **options) -> None:
        if config is None:
            config = AdapterConfig(options=options)
        elif options:
            raise ValueError("pass options either via config or keywords, not both")
        self.config = config
        self._transcript: deque[str] = deque(maxlen=40)
        self._lines: queue.Queue[str | None] = queue.Queue()
        self._ready = False
        try:
            self._proc = subprocess.Popen(
                config.argv(),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
            )
        except OSError as exc:
            raise AdapterError(f"cannot start core executable {config.command!r}: {exc}") from exc
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        # startup contract: the core must describe itself within the timeout
        self.spec = self._request({"cmd": "spec"})
        self.n_grid = int(self.spec["n_grid"])
        self.action_len = int(self.spec["action_len"])

    # ------------------------------------------------------------ transport

    def _pump(self) -> None:
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._lines.put(line.rstrip("\n"))
        self._lines.put(None)

    def _excerpt(self) -> str:
        return "\n".join(self._transcript) or "<empty transcript>"

    def _request(self, payload: dict) -> dict:
        if self._proc.poll() is not None:
            raise AdapterError(
                f"core process exited with status {self._proc.returncode}; "
                f"transcript:\n{self._excerpt()}"
            )
        line = json.dumps(payload)
        self._transcript.append(">> " + line)
        try:
            assert self._proc.stdin is not None
            self._proc.stdin.write(line + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise AdapterError(f"core pipe broke: {exc}; transcript:\n{self._excerpt()}") from exc
        try:
            reply = self._lines.get(timeout=self.config.timeout)
        except queue.Empty:
            raise AdapterError(
                f"no response within {self.config.timeout}s; transcript:\n{self._excerpt()}"
            ) from None
        if reply is None:
            raise AdapterError(f"core closed its stdout; transcript:\n{self._excerpt()}")
        self._transcript.append("<< " + reply)
        try:
            msg = json.loads(reply)
        except json.JSONDecodeError as exc:
            raise AdapterError(
                f"unparseable response {reply!r}: {exc}; transcript:\n{self._excerpt()}"
            ) from exc
        if isinstance(msg, dict) and "error" in msg:
            raise ProtocolError(str(msg["error"]), str(msg.get("message", "")))
        msg["_raw"] = reply
        return msg

    # ------------------------------------------------------------ env API

    def reset(self, seed: int) -> np.ndarray:
        """Start an episode; returns the (2, n_grid, n_grid) count tensor."""
        msg = self._request({"cmd": "reset", "seed": int(seed)})
        self._ready = True
        return np.asarray(msg["obs"], dtype=np.int64)

    def step(self, action) -> tuple[np.ndarray, float, bool, dict]:
        """Forward one action (flat digits or an (n_grid, n_grid) array).

        Returns (observation, reward, done, info) with the unweighted
        mixing/homogeneity parts in info["r_m"] / info["r_h"] and the raw
        response line in info["raw"].
        """
        if not self._ready:
            raise ProtocolError("not_reset", "call reset before step")
        digits = [int(v) for v in np.asarray(action, dtype=np.int64).reshape(-1)]
        if len(digits) != self.action_len:
            raise ProtocolError(
                "invalid_action", f"expected {self.action_len} digits, got {len(digits)}"
            )
        msg = self._request({"cmd": "step", "action": digits})
        obs = np.asarray(msg["obs"], dtype=np.int64)
        r_m, r_h = msg["reward_parts"]
        info = {"r_m": r_m, "r_h": r_h, "t": msg["t"], "raw": msg["_raw"]}
        return obs, float(msg["reward"]), bool(msg["done"]), info

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                self._request({"cmd": "close"})
            except (AdapterError, ProtocolError):
                pass
            try:
                self._proc.wait(timeout=self.config.timeout)
            except subprocess.TimeoutExpired:
                self._proc.kill()
        self._ready = False

    def __enter__(self) -> "SubprocessMixingEnv":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
