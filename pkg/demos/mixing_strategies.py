"""Walk through every scripted control strategy and what it does to the rewards.

Each policy runs for one default episode (96 particles, 100 steps). For
every run we print the per-step mixing and homogeneity rewards at the
start and end, the episode sums, and the mean nearest-neighbor distance,
which makes the qualitative behavior of each strategy visible without any
plotting:

* collapse_all pulls everything into dense clusters: homogeneity collapses
  while tag imbalance usually shrinks,
* activate_one_side empties a strip through the periodic boundary and is
  the strongest pure-mixing strategy available to repulsive-only control,
* the spreading policies flatten occupancy, and
* oscillation alternates contraction and expansion, the combination that
  produces two-sided update-matrix spectra.
"""

import numpy as np

import activemix as am
from activemix.policies import PolicySpec, policy_action

RUNS = [
    (am.ATTRACTIVE_ONLY, PolicySpec("no_op")),
    (am.ATTRACTIVE_ONLY, PolicySpec("collapse_all")),
    (am.ATTRACTIVE_ONLY, PolicySpec("collapse_all", duty=0.5, period=4)),
    (am.ATTRACTIVE_ONLY, PolicySpec("collapse_some")),
    (am.ATTRACTIVE_ONLY, PolicySpec("activate_little")),
    (am.REPULSIVE_ONLY, PolicySpec("activate_one_side", side="left", columns=2)),
    (am.REPULSIVE_ONLY, PolicySpec("repulsive_spreading")),
    (am.BOTH, PolicySpec("attr_rep_spreading")),
    (am.BOTH, PolicySpec("oscillation", period=10, duty=0.5, collapse=True)),
    (am.BOTH, PolicySpec("oscillation", period=10, collapse=False)),
]


def describe(spec: PolicySpec) -> str:
    extras = []
    if spec.kind in ("oscillation", "collapse_all") and spec.duty is not None:
        extras.append(f"duty={spec.duty}")
    if spec.kind == "oscillation":
        extras.append(f"period={spec.period}, collapse={spec.collapse}")
    if spec.kind == "activate_one_side":
        extras.append(f"side={spec.side}, columns={spec.columns}")
    return spec.kind + (f" ({', '.join(extras)})" if extras else "")


def main(seed: int = 0) -> None:
    print(f"one episode per strategy, seed {seed}, defaults, alpha = 0.5\n")
    header = f"{'strategy':38s} {'r_m(1)':>9s} {'r_m(T)':>9s} {'r_h(1)':>9s} {'r_h(T)':>9s} {'sum_m':>8s} {'sum_h':>8s} {'nn(T)':>7s}"
    print(header)
    print("-" * len(header))
    for interaction_set, spec in RUNS:
        params = am.SimParams(interaction_set=interaction_set)
        env = am.MixingEnv(params, alpha=0.5)
        obs = env.reset(seed)
        first = None
        sums = np.zeros(2)
        while True:
            res = env.step(policy_action(spec, obs, env.t))
            if first is None:
                first = res.reward_parts
            sums += res.reward_parts
            obs = res.observation
            if res.done:
                break
        last = res.reward_parts
        nn = am.mean_nearest_neighbor_distance(env.state, params)
        print(
            f"{describe(spec):38s} {first[0]:9.5f} {last[0]:9.5f} {first[1]:9.5f} "
            f"{last[1]:9.5f} {sums[0]:8.4f} {sums[1]:8.4f} {nn:7.4f}"
        )

    print(
        "\nReading the table: r_m is the per-step tag-imbalance penalty, r_h the"
        "\noccupancy-flatness penalty (both 0 at best). collapse_all drives nn"
        "\ntoward zero and r_h far down; activate_one_side improves r_m the most"
        "\namong single-interaction policies; oscillation keeps both in play."
    )


if __name__ == "__main__":
    main()
