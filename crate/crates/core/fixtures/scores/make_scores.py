"""Writes per-question score fixtures whose means equal published aggregates.

Scores are integers in units of 1e-4 so every fixture's mean is exact.
Run from this directory: python3 make_scores.py
"""

import json
import random

# (file, question count, conversation length, {approach: (cosine, bert_f1)})
TABLES = [
    ("text_qa.json", 179, 5,
     {"query_fusion": (0.826, 0.751), "query_rewrite": (0.859, 0.828)}),
    ("vis_long.json", 794, 10,
     {"query_fusion": (0.820, 0.773), "query_rewrite": (0.760, 0.734)}),
    ("vis_short.json", 171, 2,
     {"query_fusion": (0.925, 0.856), "query_rewrite": (0.857, 0.837)}),
    ("text_qa_gated.json", 179, 5,
     {"query_rewrite+gate": (0.871, 0.859)}),
    ("vis_long_gated.json", 794, 10,
     {"query_rewrite+gate": (0.769, 0.740)}),
]

UNIT = 10_000


def column(rng, n, mean, spread):
    target = round(mean * UNIT) * n
    lo, hi = 0, UNIT
    vals = [min(hi, max(lo, round(rng.gauss(mean, spread) * UNIT))) for _ in range(n)]
    diff = target - sum(vals)
    i = 0
    while diff != 0:
        step = 1 if diff > 0 else -1
        j = i % n
        if lo <= vals[j] + step <= hi:
            vals[j] += step
            diff -= step
        i += 1
    assert sum(vals) == target
    return vals


def main():
    for seed, (name, n, conv_len, approaches) in enumerate(TABLES):
        rng = random.Random(1000 + seed)
        ids = [f"c{q // conv_len + 1:03d}#{q % conv_len + 1}" for q in range(n)]
        rows = []
        for approach, (cos, f1) in approaches.items():
            cos_vals = column(rng, n, cos, 0.08)
            f1_vals = column(rng, n, f1, 0.09)
            for qid, c, f in zip(ids, cos_vals, f1_vals):
                rows.append({
                    "question_id": qid,
                    "approach_id": approach,
                    "cosine": c / UNIT,
                    "bert_f1": f / UNIT,
                })
        with open(name, "w") as fh:
            json.dump(rows, fh, indent=1)
            fh.write("\n")


if __name__ == "__main__":
    main()
