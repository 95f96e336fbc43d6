"""Line-delimited record formats shared by the CLI, protocol and verifier.

Every float is printed with 17 significant digits so transcripts are
bit-faithful: parsing a formatted value and re-formatting it reproduces the
byte-identical string. Records are one JSON object per line with fixed key
order; NaN and infinities use the Python-extension tokens that json.loads
accepts.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .environment import StepResult, combined_reward, homogeneity_reward, mixing_reward
from .params import SimParams
from .spectral import SpectrumRecord


def fmt_float(x: float) -> str:
    """17-significant-digit decimal form of a float (round-trip exact)."""
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(float(x), ".17g")


def dumps(obj) -> str:
    """Compact JSON with insertion-ordered keys and 17-digit floats."""
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(float(obj))
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def config_record(params: SimParams, alpha: float, extra: dict | None = None) -> dict:
    """Flat key-value run header mirroring SimParams plus alpha."""
    rec = {
        "kind": "config",
        "dt": params.dt,
        "spring_k": params.spring_k,
        "cutoff_inner": params.cutoff_inner,
        "cutoff_outer": params.cutoff_outer,
        "decay_rate": params.decay_rate,
        "mass": params.mass,
        "box_half": params.box_half,
        "n_part": params.n_part,
        "n_grid": params.n_grid,
        "n_steps": params.n_steps,
        "interaction_set": params.interaction_set,
        "mobility": params.mobility,
        "alpha": alpha,
    }
    if extra:
        rec.update(extra)
    return rec


def step_record(episode: int, action_digits: list[int], result: StepResult) -> dict:
    return {
        "kind": "step",
        "episode": episode,
        "t": result.t,
        "action": action_digits,
        "counts": result.observation,
        "r_m": result.reward_parts[0],
        "r_h": result.reward_parts[1],
        "reward": result.reward,
    }


def summary_record(episode: int, seed: int, steps: int, return_m: float, return_h: float, ret: float) -> dict:
    return {
        "kind": "summary",
        "episode": episode,
        "seed": seed,
        "steps": steps,
        "return_m": return_m,
        "return_h": return_h,
        "return": ret,
    }


def spectrum_line(episode: int, rec: SpectrumRecord) -> dict:
    return {
        "kind": "spectrum",
        "episode": episode,
        "t": rec.t,
        "n_active": rec.n_active,
        "n_attractive": rec.n_attractive,
        "n_repulsive": rec.n_repulsive,
        "eigenvalues": rec.eigenvalues,
        "gershgorin_lo": rec.gershgorin_lo,
        "gershgorin_hi": rec.gershgorin_hi,
        "log_det": rec.log_det,
    }


def spectrum_summary_line(episode: int, n_records: int, sum_log_det: float) -> dict:
    return {
        "kind": "spectrum_summary",
        "episode": episode,
        "n_records": n_records,
        "sum_log_det": sum_log_det,
    }


def write_records(path: str | Path, recs: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in recs:
            fh.write(dumps(rec))
            fh.write("\n")


def read_records(path: str | Path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


class VerifyError(AssertionError):
    """A trajectory file disagrees with rewards recomputed from its counts."""


def verify_trajectory(path: str | Path) -> dict:
    """Recompute every reward in a trajectory file from its counts alone.

    Returns {"steps": n, "episodes": m} on success; raises VerifyError on
    the first mismatching record. Floats must match exactly: the file's
    17-digit values round-trip losslessly and the recomputation follows the
    identical arithmetic.
    """
    recs = list(read_records(path))
    if not recs or recs[0].get("kind") != "config":
        raise VerifyError("trajectory must start with a config record")
    cfg = recs[0]
    params = SimParams(
        dt=cfg["dt"],
        spring_k=cfg["spring_k"],
        cutoff_inner=cfg["cutoff_inner"],
        cutoff_outer=cfg["cutoff_outer"],
        decay_rate=cfg["decay_rate"],
        mass=cfg["mass"],
        box_half=cfg["box_half"],
        n_part=cfg["n_part"],
        n_grid=cfg["n_grid"],
        n_steps=cfg["n_steps"],
        interaction_set=cfg["interaction_set"],
        mobility=cfg["mobility"],
    )
    alpha = cfg["alpha"]
    frame_skip = int(cfg.get("frame_skip", 1))

    steps = 0
    episodes: dict[int, dict[str, float]] = {}
    for rec in recs[1:]:
        if rec["kind"] == "step":
            counts = np.asarray(rec["counts"], dtype=np.int64)
            if int(counts.sum()) != params.n_part:
                raise VerifyError(f"step {rec['t']}: counts sum to {counts.sum()}")
            if frame_skip == 1:
                r_m = mixing_reward(counts, params)
                r_h = homogeneity_reward(counts, params)
                if r_m != rec["r_m"] or r_h != rec["r_h"]:
                    raise VerifyError(
                        f"step {rec['t']}: recomputed ({r_m}, {r_h}) != recorded "
                        f"({rec['r_m']}, {rec['r_h']})"
                    )
                if combined_reward(r_m, r_h, alpha) != rec["reward"]:
                    raise VerifyError(f"step {rec['t']}: blended reward mismatch")
            else:
                # Skipped frames fold several observations into one record;
                # only the blend identity remains checkable from counts.
                if combined_reward(rec["r_m"], rec["r_h"], alpha) != rec["reward"]:
                    raise VerifyError(f"step {rec['t']}: blended reward mismatch")
            ep = episodes.setdefault(rec["episode"], {"r_m": 0.0, "r_h": 0.0, "r": 0.0})
            ep["r_m"] += rec["r_m"]
            ep["r_h"] += rec["r_h"]
            ep["r"] += rec["reward"]
            steps += 1
        elif rec["kind"] == "summary":
            ep = episodes.get(rec["episode"])
            if ep is None:
                raise VerifyError(f"summary for unseen episode {rec['episode']}")
            for key, name in (("r_m", "return_m"), ("r_h", "return_h"), ("r", "return")):
                if not math.isclose(ep[key], rec[name], rel_tol=0.0, abs_tol=1e-12):
                    raise VerifyError(
                        f"episode {rec['episode']}: {name} {rec[name]} != accumulated {ep[key]}"
                    )
    return {"steps": steps, "episodes": len(episodes)}
