"""Preprocessing growth measurements written as CSV plus a log-log plot."""

from __future__ import annotations

import csv
import io
import os
import time
from typing import Dict, List

from .corpus import g1, g2, split_grammar
from .enumerator import preprocess
from .grammar import to_2nf

FIELDS = ["grammar", "n", "products", "nodes", "d_copies", "seconds"]


def workloads(quick: bool = False):
    """(name, grammar, input builder, sizes) for every measured family."""
    rigid = [16, 32, 64, 128] if quick else [64, 128, 256, 512]
    general = [16, 32, 64] if quick else [32, 64, 128, 256]
    return [
        ("g1", g1(), lambda n: "a" * n, rigid),
        ("g2", g2(), lambda n: "()" * (n // 2), rigid),
        ("split", split_grammar(), lambda n: "a" * n, general),
    ]


def measure(quick: bool = False) -> List[Dict]:
    rows = []
    for name, g, build, sizes in workloads(quick):
        normal = to_2nf(g)
        for n in sizes:
            started = time.perf_counter()
            res = preprocess(normal, build(n))
            rows.append({
                "grammar": name,
                "n": n,
                "products": res.counters.product_combinations,
                "nodes": res.store.node_count(),
                "d_copies": res.counters.d_copies,
                "seconds": round(time.perf_counter() - started, 4),
            })
    return rows


def rows_to_csv(rows: List[Dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def plot(rows: List[Dict], path: str):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4.5))
    for name in sorted({r["grammar"] for r in rows}):
        pts = [r for r in rows if r["grammar"] == name]
        ax.plot([r["n"] for r in pts], [r["products"] for r in pts], marker="o", label=name)
    ns = sorted({r["n"] for r in rows})
    lo = min(r["products"] for r in rows if r["n"] == ns[0]) or 1
    for power, style in ((2, ":"), (3, "--")):
        ax.plot(ns, [lo * (n / ns[0]) ** power for n in ns], style, color="grey",
                label=f"n^{power}")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("input length n")
    ax.set_ylabel("product combinations")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def scaling_report(out_dir: str, quick: bool = False) -> List[Dict]:
    os.makedirs(out_dir, exist_ok=True)
    rows = measure(quick)
    text = rows_to_csv(rows)
    with open(os.path.join(out_dir, "scaling.csv"), "w", encoding="utf-8") as fh:
        fh.write(text)
    plot(rows, os.path.join(out_dir, "scaling.png"))
    print(text, end="")
    return rows
