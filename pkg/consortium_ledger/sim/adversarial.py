"""
Randomized adversarial scenarios for safety sweeps.

Each seed yields a scenario with crashes of at most a minority of the
initial nodes (each replaced by a fresh node and removed by governance),
partitions, delay and drop changes, and reconfigurations that overlap with
one another.
"""

import random
from typing import List, Optional

from consortium_ledger.sim.scenario import ClientSpec, FaultSpec, GovernanceStep, Scenario

NODE_COUNTS = (1, 3, 5, 7)


def _trust(node_id: str) -> dict:
    return {"name": "transition_node_to_trusted", "args": {"node_id": node_id}}


def _remove(node_id: str) -> dict:
    return {"name": "remove_node", "args": {"node_id": node_id}}


def adversarial_scenario(
    seed: int, nodes: Optional[int] = None, duration_ms: float = 1500.0
) -> Scenario:
    """Scenario for one seed; `nodes` defaults to a seeded pick of 1, 3, 5 or 7."""
    rng = random.Random(f"adversarial:{seed}")
    n = nodes or rng.choice(NODE_COUNTS)
    tolerated = (n - 1) // 2
    member_count = rng.choice((1, 3))
    members = [f"m{i}" for i in range(member_count)]

    clients = [
        ClientSpec(name="writer", read_ratio=0.2, think_ms=rng.uniform(1.0, 10.0), timeout_ms=200.0),
        ClientSpec(
            name="stream",
            mode="open",
            rate_per_s=rng.uniform(50.0, 300.0),
            read_ratio=0.3,
            timeout_ms=200.0,
        ),
    ]
    faults: List[FaultSpec] = []
    governance: List[GovernanceStep] = []
    known = [f"n{i}" for i in range(n)]
    removable = list(known[1:])
    alive = list(known)
    next_id = n
    crashes = 0
    t = 300.0

    for round_no in range(rng.randint(2, 5)):
        t += rng.uniform(80.0, 250.0)
        if t >= duration_ms - 100.0:
            break
        kind = rng.choice(("crash", "partition", "network", "retire", "join"))

        if kind == "crash" and crashes < tolerated:
            crashes += 1
            label = f"lost{round_no}"
            new_id = f"n{next_id}"
            next_id += 1
            target = "primary" if rng.random() < 0.5 or not alive else rng.choice(alive)
            if target in alive:
                alive.remove(target)
            if target in removable:
                removable.remove(target)
            faults.append(
                FaultSpec(at_ms=t, kind="restart_as_new", node=target, new_node=new_id, label=label)
            )
            governance.append(
                GovernanceStep(
                    at_ms=t + 5.0,
                    label=f"replace-{round_no}",
                    member=members[0],
                    actions=[_trust(new_id), _remove(f"@{label}")],
                    voters=members,
                    after_pending=[new_id],
                )
            )
            known.append(new_id)
        elif kind == "partition" and len(known) > 1:
            shuffled = list(known)
            rng.shuffle(shuffled)
            cut = rng.randint(1, len(shuffled) - 1)
            faults.append(FaultSpec(at_ms=t, kind="partition", groups=[shuffled[:cut], shuffled[cut:]]))
            faults.append(FaultSpec(at_ms=t + rng.uniform(50.0, 300.0), kind="heal"))
        elif kind == "network":
            low = rng.uniform(0.5, 5.0)
            faults.append(
                FaultSpec(
                    at_ms=t,
                    kind="network",
                    min_delay_ms=low,
                    max_delay_ms=low + rng.uniform(0.0, 40.0),
                    drop_rate=rng.choice((0.0, 0.01, 0.05)),
                )
            )
            faults.append(
                FaultSpec(
                    at_ms=t + rng.uniform(100.0, 300.0),
                    kind="network",
                    min_delay_ms=1.0,
                    max_delay_ms=5.0,
                    drop_rate=0.0,
                )
            )
        elif kind == "retire" and removable:
            victim = rng.choice(removable)
            removable.remove(victim)
            if victim in alive:
                alive.remove(victim)
            governance.append(
                GovernanceStep(
                    at_ms=t,
                    label=f"retire-{round_no}",
                    member=members[-1],
                    actions=[_remove(victim)],
                    voters=members,
                )
            )
        else:
            new_id = f"n{next_id}"
            next_id += 1
            faults.append(FaultSpec(at_ms=t, kind="join", new_node=new_id))
            # overlaps with whatever reconfiguration is in flight
            governance.append(
                GovernanceStep(
                    at_ms=t + rng.uniform(0.0, 30.0),
                    label=f"join-{round_no}",
                    member=members[0],
                    actions=[_trust(new_id)],
                    voters=members,
                    after_pending=[new_id],
                )
            )
            known.append(new_id)

    return Scenario(
        name=f"adversarial-{seed}",
        seed=seed,
        nodes=n,
        members=member_count,
        duration_ms=duration_ms,
        clients=clients,
        faults=faults,
        governance=governance,
    )
