"""Drive the line-delimited serve protocol the way an external trainer would.

`activemix serve` owns one environment and answers one JSON line per
request on stdout. This script spawns it as a subprocess, asks for the
static spec, resets, steps a few hand-written actions, provokes the
protocol errors, and prints the raw transcript. Every float in the
responses carries 17 significant digits, so transcripts are byte-stable
across identical sessions.
"""

import json
import subprocess
import sys


def main() -> None:
    proc = subprocess.Popen(
        [sys.executable, "-m", "activemix", "serve", "--alpha", "1.0"],
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        text=True,
    )

    def ask(request: dict) -> dict:
        line = json.dumps(request)
        proc.stdin.write(line + "\n")
        proc.stdin.flush()
        reply = proc.stdout.readline().strip()
        shown = reply if len(reply) <= 100 else reply[:97] + "..."
        print(f">> {line}")
        print(f"<< {shown}\n")
        return json.loads(reply)

    spec = ask({"cmd": "spec"})
    n_cells = spec["action_len"]

    # stepping before reset is a protocol error, not a crash
    ask({"cmd": "step", "action": [0] * n_cells})

    reset = ask({"cmd": "reset", "seed": 7})
    counts = reset["obs"]
    total = sum(sum(sum(row) for row in plane) for plane in counts)
    print(f"observation counts sum to {total} (one per particle)\n")

    all_attract = [1] * n_cells
    left_repulse = [2] * (n_cells // 2) + [0] * (n_cells - n_cells // 2)
    for action in (all_attract, all_attract, left_repulse):
        reply = ask({"cmd": "step", "action": action})
        r_m, r_h = reply["reward_parts"]
        print(f"t={reply['t']}: reward={reply['reward']} (r_m={r_m}, r_h={r_h})\n")

    # malformed actions are rejected with an error code and the session continues
    ask({"cmd": "step", "action": [7] * n_cells})

    ask({"cmd": "close"})
    proc.wait(timeout=10)
    print(f"server exited with status {proc.returncode}")


if __name__ == "__main__":
    main()
