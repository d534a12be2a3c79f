"""Regenerates verdicts.jsonl: 50 programs x 3 mutation types, two models.

Per-type positive counts match the target rates; which program gets
which label, the failure-mode tags and the bug flags are synthetic.
"""
import json
import random
from pathlib import Path

POSITIVES = {
    "gpt-4": {"statement": 23, "decision": 22, "value": 29},
    "gpt-5.2": {"statement": 38, "decision": 44, "value": 46},
}
BUGS = {"gpt-4": 11, "gpt-5.2": 62}
PROGRAMS = [f"lbpp-{i:02d}" for i in range(1, 51)]
SHORT = {"statement": "stmt", "decision": "desc", "value": "val"}


def main():
    rng = random.Random(2025)
    rows = []
    for model, per_type in POSITIVES.items():
        model_rows = []
        for mtype, k in per_type.items():
            order = PROGRAMS[:]
            rng.shuffle(order)
            hits = set(order[:k])
            for i, prog in enumerate(PROGRAMS):
                row = {
                    "mutant_id": f"{prog}/{SHORT[mtype]}",
                    "model": model,
                    "mutation_type": mtype,
                    "label": "positive" if prog in hits else "negative",
                }
                if prog not in hits:
                    row["failure_mode"] = "too-abstract" if i % 2 else "describes-original"
                model_rows.append(row)
        positives = [r for r in model_rows if r["label"] == "positive"]
        for r in rng.sample(positives, BUGS[model]):
            r["recognized_as_bug"] = True
        rows.extend(model_rows)
    out = Path(__file__).with_name("verdicts.jsonl")
    out.write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in rows))


if __name__ == "__main__":
    main()
