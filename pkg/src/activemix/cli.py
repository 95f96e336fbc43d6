"""Command-line entry point: run episodes, extract spectra, serve a trainer.

Subcommands:
    run      episodes under a scripted policy -> line-delimited trajectory
    spectra  update-matrix spectra under a policy -> records + histogram
    serve    one environment over stdin/stdout line-delimited messages

Flags mirror the run configuration; a --config file (flat JSON object)
overrides flags, and ACTIVEMIX_OUTDIR sets the default output directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from . import records
from .environment import ActionGrid, MixingEnv
from .params import (
    ConfigError,
    EpisodeFinishedError,
    INTERACTION_SETS,
    InvalidActionError,
    InvalidPolicyError,
    SimParams,
)
from .policies import POLICY_KINDS, PolicySpec, policy_action, validate_policy
from .spectral import SpectrumRecord, analyze_matrix, spectrum_histogram

PARAM_KEYS = (
    "dt",
    "spring_k",
    "cutoff_inner",
    "cutoff_outer",
    "decay_rate",
    "mass",
    "box_half",
    "n_part",
    "n_grid",
    "n_steps",
    "interaction_set",
    "mobility",
)
POLICY_KEYS = ("policy", "period", "duty", "collapse", "side", "columns", "cells", "interval")


@dataclass
class RunConfig:
    params: SimParams = field(default_factory=SimParams)
    alpha: float = 0.5
    seeds: list[int] = field(default_factory=lambda: [0])
    policy: PolicySpec = field(default_factory=lambda: PolicySpec("no_op"))
    placement: str = "uniform"
    frame_skip: int = 1
    episodes: int = 1
    spectra_stride: int = 1
    hist_bins: int = 200
    hist_range: tuple[float, float] = (0.9, 1.1)
    out: Path = Path("trajectory.jsonl")
    spectra_out: Path = Path("spectra.jsonl")
    hist_out: Path = Path("eigenvalue_histogram.txt")


def parse_seed_spec(text: str) -> list[int]:
    """A single seed ("7") or a half-open range ("0..32")."""
    if ".." in text:
        lo, _, hi = text.partition("..")
        lo_i, hi_i = int(lo), int(hi)
        if hi_i <= lo_i:
            raise ConfigError(f"empty seed range {text!r}")
        return list(range(lo_i, hi_i))
    return [int(text)]


def parse_cells_spec(text: str) -> tuple[tuple[int, int], ...]:
    """Cell mask like "1,1;1,2;2,1"."""
    cells = []
    for part in text.replace(" ", ";").split(";"):
        if not part:
            continue
        x, _, y = part.partition(",")
        cells.append((int(x), int(y)))
    if not cells:
        raise ConfigError(f"empty cell mask {text!r}")
    return tuple(cells)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="activemix", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=Path, help="flat JSON config; its keys override flags")
        for key in ("dt", "spring-k", "cutoff-inner", "cutoff-outer", "decay-rate", "mass", "box-half", "mobility"):
            p.add_argument(f"--{key}", type=float)
        for key in ("n-part", "n-grid", "n-steps"):
            p.add_argument(f"--{key}", type=int)
        p.add_argument("--interaction-set", choices=INTERACTION_SETS)
        p.add_argument("--alpha", type=float)
        p.add_argument("--seed", type=str, help="integer or half-open range lo..hi")
        p.add_argument("--placement", choices=("uniform", "stratified"))
        p.add_argument("--frame-skip", type=int)
        p.add_argument("--policy", choices=POLICY_KINDS)
        p.add_argument("--period", type=int)
        p.add_argument("--duty", type=float)
        p.add_argument("--collapse", action=argparse.BooleanOptionalAction, default=None)
        p.add_argument("--side", choices=("left", "right", "bottom", "top"))
        p.add_argument("--columns", type=int)
        p.add_argument("--cells", type=str, help='mask like "1,1;1,2"')
        p.add_argument("--interval", type=int)
        p.add_argument("--episodes", type=int)

    p_run = sub.add_parser("run", help="run episodes and write a trajectory file")
    add_common(p_run)
    p_run.add_argument("--out", type=Path)

    p_spec = sub.add_parser("spectra", help="extract update-matrix spectra and a histogram")
    add_common(p_spec)
    p_spec.add_argument("--stride", type=int, help="capture a matrix every N steps")
    p_spec.add_argument("--bins", type=int)
    p_spec.add_argument("--hist-range", type=float, nargs=2, metavar=("LO", "HI"))
    p_spec.add_argument("--spectra-out", type=Path)
    p_spec.add_argument("--hist-out", type=Path)

    p_serve = sub.add_parser("serve", help="serve one environment over stdin/stdout")
    add_common(p_serve)
    return parser


def _merged_options(args: argparse.Namespace) -> dict:
    """Flag values (non-None) overridden by config-file entries."""
    opts = {k.replace("-", "_"): v for k, v in vars(args).items() if v is not None}
    opts.pop("command", None)
    cfg_path = opts.pop("config", None)
    if cfg_path is not None:
        try:
            loaded = json.loads(Path(cfg_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {cfg_path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a flat JSON object")
        for key, value in loaded.items():
            key = str(key).replace("-", "_")
            if key == "lambda":  # accepted alias for the deactivation rate
                key = "decay_rate"
            opts[key] = value
    return opts


def make_config(args: argparse.Namespace) -> RunConfig:
    opts = _merged_options(args)
    cfg = RunConfig()

    param_kwargs = {k: opts.pop(k) for k in PARAM_KEYS if k in opts}
    cfg.params = SimParams(**param_kwargs)

    if "alpha" in opts:
        cfg.alpha = float(opts.pop("alpha"))
        if not 0.0 <= cfg.alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {cfg.alpha}")
    if "placement" in opts:
        cfg.placement = str(opts.pop("placement"))
    if "frame_skip" in opts:
        cfg.frame_skip = int(opts.pop("frame_skip"))

    seed_spec = opts.pop("seed", None)
    seeds = parse_seed_spec(str(seed_spec)) if seed_spec is not None else None
    episodes = opts.pop("episodes", None)
    if seeds is not None and len(seeds) > 1:
        if episodes is not None and int(episodes) != len(seeds):
            raise ConfigError(f"--episodes {episodes} conflicts with seed range of {len(seeds)}")
        cfg.seeds, cfg.episodes = seeds, len(seeds)
    else:
        base = seeds[0] if seeds else 0
        cfg.episodes = int(episodes) if episodes is not None else 1
        if cfg.episodes < 1:
            raise ConfigError("episodes must be >= 1")
        cfg.seeds = list(range(base, base + cfg.episodes))

    policy_kwargs = {}
    kind = opts.pop("policy", None)
    for key in ("period", "duty", "collapse", "side", "columns", "interval"):
        if key in opts:
            policy_kwargs[key] = opts.pop(key)
    if "cells" in opts:
        raw = opts.pop("cells")
        policy_kwargs["cells"] = parse_cells_spec(raw) if isinstance(raw, str) else tuple(
            (int(x), int(y)) for x, y in raw
        )
    cfg.policy = PolicySpec(kind=kind or "no_op", **policy_kwargs)

    outdir = Path(os.environ.get("ACTIVEMIX_OUTDIR", "."))

    def resolve(p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else outdir / p

    if "stride" in opts:
        cfg.spectra_stride = int(opts.pop("stride"))
        if cfg.spectra_stride < 1:
            raise ConfigError("stride must be >= 1")
    if "bins" in opts:
        cfg.hist_bins = int(opts.pop("bins"))
    if "hist_range" in opts:
        lo, hi = opts.pop("hist_range")
        cfg.hist_range = (float(lo), float(hi))
    for key, attr in (("out", "out"), ("spectra_out", "spectra_out"), ("hist_out", "hist_out")):
        if key in opts:
            setattr(cfg, attr, Path(opts.pop(key)))
    cfg.out = resolve(cfg.out)
    cfg.spectra_out = resolve(cfg.spectra_out)
    cfg.hist_out = resolve(cfg.hist_out)

    if opts:
        raise ConfigError(f"unknown config keys: {sorted(opts)}")
    return cfg


def _make_env(cfg: RunConfig, capture_matrices: bool = False) -> MixingEnv:
    return MixingEnv(
        cfg.params,
        cfg.alpha,
        placement=cfg.placement,
        frame_skip=cfg.frame_skip,
        capture_matrices=capture_matrices,
    )


def run_records(cfg: RunConfig) -> Iterator[dict]:
    """Drive all configured episodes; yield config, step and summary records."""
    validate_policy(cfg.policy, cfg.params)
    yield records.config_record(
        cfg.params,
        cfg.alpha,
        extra={
            "placement": cfg.placement,
            "frame_skip": cfg.frame_skip,
            "policy": cfg.policy.kind,
            "episodes": cfg.episodes,
        },
    )
    for episode, seed in enumerate(cfg.seeds):
        env = _make_env(cfg)
        obs = env.reset(seed)
        ret_m = ret_h = ret = 0.0
        steps = 0
        while True:
            action = policy_action(cfg.policy, obs, env.t)
            result = env.step(action)
            yield records.step_record(episode, action.digits(), result)
            ret_m += result.reward_parts[0]
            ret_h += result.reward_parts[1]
            ret += result.reward
            steps = result.t
            obs = result.observation
            if result.done:
                break
        yield records.summary_record(episode, seed, steps, ret_m, ret_h, ret)


def collect_spectra(cfg: RunConfig) -> Iterator[tuple[int, SpectrumRecord]]:
    """Episode-tagged spectrum records captured every stride steps.

    Always runs at frame_skip 1: the matrix belongs to a single simulation
    step, and the stride alone controls the capture cadence.
    """
    validate_policy(cfg.policy, cfg.params)
    for episode, seed in enumerate(cfg.seeds):
        env = _make_env(replace(cfg, frame_skip=1), capture_matrices=True)
        obs = env.reset(seed)
        while True:
            t_apply = env.t
            action = policy_action(cfg.policy, obs, t_apply)
            result = env.step(action)
            if t_apply % cfg.spectra_stride == 0:
                yield episode, analyze_matrix(result.update_matrix, t_apply)
            obs = result.observation
            if result.done:
                break


def cmd_run(cfg: RunConfig) -> int:
    cfg.out.parent.mkdir(parents=True, exist_ok=True)
    records.write_records(cfg.out, run_records(cfg))
    return 0


def cmd_spectra(cfg: RunConfig) -> int:
    cfg.spectra_out.parent.mkdir(parents=True, exist_ok=True)
    cfg.hist_out.parent.mkdir(parents=True, exist_ok=True)

    all_records: list[SpectrumRecord] = []
    lines: list[dict] = [
        records.config_record(
            cfg.params,
            cfg.alpha,
            extra={"policy": cfg.policy.kind, "episodes": cfg.episodes, "stride": cfg.spectra_stride},
        )
    ]
    current = None
    count = 0
    total = 0.0
    for episode, rec in collect_spectra(cfg):
        if current is not None and episode != current:
            lines.append(records.spectrum_summary_line(current, count, total))
            count, total = 0, 0.0
        current = episode
        count += 1
        total += rec.log_det  # NaN from a flagged matrix propagates on purpose
        all_records.append(rec)
        lines.append(records.spectrum_line(episode, rec))
    if current is not None:
        lines.append(records.spectrum_summary_line(current, count, total))

    records.write_records(cfg.spectra_out, lines)
    hist = spectrum_histogram(all_records, bins=cfg.hist_bins, value_range=cfg.hist_range)
    cfg.hist_out.write_text(hist.to_text())
    return 0


def cmd_serve(cfg: RunConfig, stdin=None, stdout=None) -> int:
    """Line-delimited request/response session over standard streams."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    env = _make_env(cfg)

    def respond(payload: dict) -> None:
        stdout.write(records.dumps(payload))
        stdout.write("\n")
        stdout.flush()

    try:
        serve_loop(env, cfg, stdin, respond)
    except BrokenPipeError:
        # Client went away. Point stdout at devnull so the interpreter's
        # final flush does not die on the same broken pipe.
        try:
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        except (OSError, ValueError):
            pass
    return 0


def serve_loop(env: MixingEnv, cfg: RunConfig, stdin, respond) -> None:
    ready = False
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            respond({"error": "bad_message", "message": f"not valid JSON: {exc}"})
            continue
        if not isinstance(msg, dict):
            respond({"error": "bad_message", "message": "request must be a JSON object"})
            continue
        cmd = msg.get("cmd")
        if cmd == "spec":
            respond(env.describe())
        elif cmd == "reset":
            seed = msg.get("seed", 0)
            if not isinstance(seed, int):
                respond({"error": "bad_message", "message": "seed must be an integer"})
                continue
            obs = env.reset(seed)
            ready = True
            respond({"obs": obs})
        elif cmd == "step":
            if not ready:
                respond({"error": "not_reset", "message": "call reset before step"})
                continue
            action = msg.get("action")
            n_cells = cfg.params.n_grid ** 2
            if (
                not isinstance(action, list)
                or len(action) != n_cells
                or not all(isinstance(v, int) and 0 <= v <= 2 for v in action)
            ):
                respond({"error": "invalid_action", "message": f"action must be {n_cells} digits in 0..2"})
                continue
            grid = ActionGrid(np.asarray(action, dtype=np.int64).reshape(cfg.params.n_grid, cfg.params.n_grid))
            try:
                result = env.step(grid)
            except InvalidActionError as exc:
                respond({"error": "invalid_action", "message": str(exc)})
                continue
            except EpisodeFinishedError as exc:
                respond({"error": "episode_finished", "message": str(exc)})
                continue
            respond(
                {
                    "obs": result.observation,
                    "reward": result.reward,
                    "reward_parts": list(result.reward_parts),
                    "done": result.done,
                    "t": result.t,
                }
            )
        elif cmd == "close":
            respond({"ok": True})
            break
        else:
            respond({"error": "bad_message", "message": f"unknown cmd {cmd!r}"})


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "spectra":
            return cmd_spectra(cfg)
        return cmd_serve(cfg)
    except (ConfigError, InvalidPolicyError, InvalidActionError) as exc:
        print(f"activemix: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
