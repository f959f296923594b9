"""Serialisation of posets and oracle reports: DOT, JSON, TSV, and figures.

Figure rendering uses the Agg backend and is opt-in from the CLI; every
figure is written next to (or instead of) the delimited output, never shown
interactively.
"""

from __future__ import annotations

import json

import numpy as np

POSET_SCHEMA = 1


def _word_str(word) -> str:
    return "".join(str(i) for i in word) if word else "e"


def poset_to_dict(poset, meta: dict) -> dict:
    out = {
        "schema": POSET_SCHEMA,
        "kind": "strata_poset",
        **meta,
        "labels": [list(w.reduced_word()) for w in poset.labels],
        "lengths": list(poset.dims),
        "leq": [[int(v) for v in row] for row in poset.leq],
        "hasse": [[i, j] for i, j in poset.hasse],
    }
    return out


def poset_from_json(text: str) -> dict:
    data = json.loads(text)
    if data.get("schema") != POSET_SCHEMA:
        raise ValueError(f"unsupported poset schema {data.get('schema')!r}")
    data["leq"] = np.array(data["leq"], dtype=bool)
    data["labels"] = [tuple(w) for w in data["labels"]]
    return data


def poset_to_dot(poset, title: str = "zipstrata") -> str:
    names = [_word_str(w.reduced_word()) for w in poset.labels]
    lines = [f'digraph "{title}" {{', "  rankdir=BT;"]
    for name, dim in zip(names, poset.dims):
        lines.append(f'  "{name}" [label="{name} (len {dim})"];')
    for i, j in sorted(poset.hasse):
        lines.append(f'  "{names[i]}" -> "{names[j]}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def poset_to_tsv(poset) -> str:
    names = [_word_str(w.reduced_word()) for w in poset.labels]
    covers = {i: [] for i in range(len(names))}
    for i, j in poset.hasse:
        covers[i].append(names[j])
    rows = ["label\tlength\tcovered_by"]
    for i, (name, dim) in enumerate(zip(names, poset.dims)):
        rows.append(f"{name}\t{dim}\t{' '.join(sorted(covers[i]))}")
    return "\n".join(rows) + "\n"


def rows_to_tsv(header, rows) -> str:
    out = ["\t".join(header)]
    for row in rows:
        out.append("\t".join(str(x) for x in row))
    return "\n".join(out) + "\n"


# -- figures -------------------------------------------------------------------


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_poset_figure(poset, path: str, title: str) -> None:
    """Layered Hasse diagram: height = length, covers drawn as segments."""
    plt = _pyplot()
    names = [_word_str(w.reduced_word()) for w in poset.labels]
    by_level: dict[int, list[int]] = {}
    for i, dim in enumerate(poset.dims):
        by_level.setdefault(dim, []).append(i)
    pos = {}
    for dim, members in by_level.items():
        for k, i in enumerate(members):
            pos[i] = (k - (len(members) - 1) / 2.0, dim)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for i, j in poset.hasse:
        (x1, y1), (x2, y2) = pos[i], pos[j]
        ax.plot([x1, x2], [y1, y2], color="0.55", lw=1.0, zorder=1)
    xs = [pos[i][0] for i in range(len(names))]
    ys = [pos[i][1] for i in range(len(names))]
    ax.scatter(xs, ys, s=260, color="#dce6f2", edgecolor="#27496d", zorder=2)
    for i, name in enumerate(names):
        ax.annotate(name, pos[i], ha="center", va="center", fontsize=8, zorder=3)
    ax.set_yticks(sorted(by_level))
    ax.set_ylabel("length = stratum dimension")
    ax.set_xticks([])
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_merge_figure(report, path: str) -> None:
    """Accumulated merged orbit count along the tower, with the expected line."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.5, 4))
    xs = list(range(len(report.levels)))
    ax.plot(xs, report.merged_counts, marker="o", color="#27496d", label="merged count")
    ax.axhline(report.expected, color="#b0413e", ls="--", label="|{}^I W|")
    ax.set_xticks(xs)
    ax.set_xticklabels([f"F_{report.spec.field.q ** lv}" for lv in report.levels])
    ax.set_ylabel("orbit classes")
    ax.set_title(
        f"{report.spec.label()} {report.flavor} orbit merge"
        f" ({'stable' if report.stable else 'not stable'})"
    )
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_strata_figure(reports, path: str) -> None:
    """Per-label stratum point counts against the extension degree, log_q scale."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4.5))
    q = reports[0].spec.field.q
    ms = [r.m for r in reports]
    labels = reports[0].labels
    for word in labels:
        counts = [r.counts[word] for r in reports]
        length = reports[0].lengths[word]
        ys = [np.log(c) / np.log(q) if c > 0 else np.nan for c in counts]
        ax.plot(ms, ys, marker="o", label=f"{_word_str(word)} (len {length})")
        ax.plot(
            ms,
            [length * m + (ys[-1] - length * ms[-1] if not np.isnan(ys[-1]) else 0) for m in ms],
            ls=":",
            color="0.7",
        )
    ax.set_xlabel("extension degree m")
    ax.set_ylabel(f"log_{q} of point count")
    ax.set_xticks(ms)
    ax.set_title(f"{reports[0].spec.label()} fine DL stratum growth")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_verify_figure(results, path: str) -> None:
    """Pass/fail heatmap: rows = (type, I), columns = checks."""
    plt = _pyplot()
    checks = sorted({r["check"] for r in results})
    cases = sorted({(r["type"], r["I"]) for r in results})
    grid = np.full((len(cases), len(checks)), np.nan)
    for r in results:
        i = cases.index((r["type"], r["I"]))
        j = checks.index(r["check"])
        grid[i, j] = 1.0 if r["ok"] else 0.0
    fig, ax = plt.subplots(figsize=(1.2 + 0.7 * len(checks), 1.0 + 0.22 * len(cases)))
    ax.imshow(grid, cmap="RdYlGn", vmin=0, vmax=1, aspect="auto")
    ax.set_xticks(range(len(checks)))
    ax.set_xticklabels(checks, rotation=35, ha="right", fontsize=7)
    ax.set_yticks(range(len(cases)))
    ax.set_yticklabels([f"{t} I={i}" for t, i in cases], fontsize=6)
    ax.set_title("verification matrix")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
