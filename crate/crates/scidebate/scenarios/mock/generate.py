"""Regenerates script.jsonl for the bundled mock scenario.

Every (agent, round, phase) call the engine makes must have exactly one
entry. Keep cross_sample and the candidate budget in campaign.json large
enough that every agent sees every active peer candidate.
"""
import json
from pathlib import Path

HERE = Path(__file__).parent
AGENTS = ["chen_l", "okafor_n", "ruiz_m", "sato_k", "varga_e"]
ROUNDS = 3
K = 3
POOL = [l.split()[0] for l in (HERE / "pool.smi").read_text().splitlines() if l.strip()]

INVALID = "c1ccc(cc1"
# (agent, round) -> index of the proposal swapped for INVALID, then repaired
REPAIRED = {("okafor_n", 1): (1, POOL[45])}
# (agent, round) -> (index of own proposal, replacement)
REPLACED = {("chen_l", 1): (1, POOL[46])}
# (agent, round) -> proposal index -> SMILES proposed by someone earlier
DUPLICATE = {("varga_e", 2): (2, POOL[0])}
# voters whose first ballot is unusable; a second miss means abstaining
BAD_BALLOT = {("ruiz_m", 2): 1, ("sato_k", 3): 2}

entries = []


def add(agent, rnd, phase, response):
    entries.append({"agent": agent, "round": rnd, "phase": phase, "response": response})


def fenced(v):
    return "```json\n" + json.dumps(v, indent=1) + "\n```"


def score(agent, smiles, rnd, salt):
    h = 0
    for ch in f"{agent}|{smiles}|{rnd}|{salt}":
        h = (h * 131 + ord(ch)) % 1000003
    return round((h % 1000) / 1000, 3)


active = []
for rnd in range(1, ROUNDS + 1):
    proposed = {}
    for i, agent in enumerate(AGENTS):
        mine = [POOL[(rnd - 1) * 15 + i * K + j] for j in range(K)]
        if (agent, rnd) in DUPLICATE:
            j, dup = DUPLICATE[(agent, rnd)]
            mine[j] = dup
        shown = list(mine)
        if (agent, rnd) in REPAIRED:
            j, fix = REPAIRED[(agent, rnd)]
            shown[j] = INVALID
            mine[j] = fix
        add(agent, rnd, "proposal", fenced([
            {"smiles": s, "rationale": f"{agent} motif {n + 1}, round {rnd}"} for n, s in enumerate(shown)
        ]))
        if (agent, rnd) in REPAIRED:
            add(agent, rnd, "proposal_repair", fenced([
                {"smiles": REPAIRED[(agent, rnd)][1], "rationale": "closed the ring"}
            ]))
        proposed[agent] = mine
    new = []
    for agent in AGENTS:
        for s in proposed[agent]:
            if s not in active and s not in new:
                new.append(s)
    active.extend(new)

    for agent in AGENTS:
        items = []
        for n, s in enumerate(proposed[agent]):
            rep = None
            if (agent, rnd) in REPLACED and REPLACED[(agent, rnd)][0] == n:
                rep = REPLACED[(agent, rnd)][1]
            items.append({"smiles": s, "critique": f"hinge contact {'weak' if rep else 'fine'}", "replacement": rep})
        add(agent, rnd, "critique_self", fenced(items))
    for (agent, r), (n, rep) in REPLACED.items():
        if r == rnd:
            active.remove(proposed[agent][n])
            active.append(rep)

    for i, agent in enumerate(AGENTS):
        peer = AGENTS[(i + 1) % len(AGENTS)]
        targets = [s for s in proposed[peer] if s in active][:2]
        items = [{"smiles": targets[0], "critique": "solubility risk", "suggestion": None}]
        if len(targets) > 1:
            sug = INVALID if (i + rnd) % 4 == 0 else POOL[47 + (i + rnd) % 4]
            items.append({"smiles": targets[1], "critique": "add a polar group", "suggestion": sug})
        add(agent, rnd, "critique_cross", fenced(items))

    for agent in AGENTS:
        ballot = {
            s: {
                "task_relevance": score(agent, s, rnd, "r"),
                "synthetic_feasibility": score(agent, s, rnd, "f"),
                "novelty": score(agent, s, rnd, "n"),
            }
            for s in active
        }
        misses = BAD_BALLOT.get((agent, rnd), 0)
        if misses:
            add(agent, rnd, "voting", "All of these look promising to me.")
            add(agent, rnd, "voting_repair", "Sorry, still thinking." if misses > 1 else fenced(ballot))
        else:
            add(agent, rnd, "voting", fenced(ballot))

with open(HERE / "script.jsonl", "w") as f:
    for e in entries:
        f.write(json.dumps(e) + "\n")
print(len(entries), "entries,", len(active), "active candidates")
