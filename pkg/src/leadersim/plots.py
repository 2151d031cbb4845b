"""Figure rendering for run and sweep reports.

Everything draws through the Agg backend and writes straight to files;
nothing here opens a window.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .metrics import GroundTruth
from .sim import SimResult
from .sweeps import SweepResult

_DPI = 150

_METRIC_LABELS = {
    "accuracy": "Accuracy",
    "fpr": "False positive rate",
    "fnr": "False negative rate",
    "detection_latency": "Detection latency (s)",
    "pdr": "Packet delivery ratio",
    "total_energy_mj": "Total energy (mJ)",
}

_VARIABLE_LABELS = {
    "malicious_fraction": "Malicious node fraction",
    "attacker_hop_distance": "Attacker distance from sink (hops)",
    "node_count": "Network size (nodes)",
}


def _fallback_positions(result: SimResult) -> dict[int, tuple[float, float]]:
    """Layered layout from the final parent tree, for runs without coordinates."""
    sink = result.scenario.sink

    def depth_of(node: int) -> int:
        hops, cur, seen = 0, node, set()
        while cur != sink:
            state = result.states.get(cur)
            if state is None or state.preferred_parent is None or cur in seen:
                return -1
            seen.add(cur)
            cur = state.preferred_parent
            hops += 1
        return hops

    depths = {n: depth_of(n) for n in result.states}
    deepest = max((d for d in depths.values() if d >= 0), default=0)
    rows: dict[int, list[int]] = {}
    for node in sorted(depths):
        d = depths[node] if depths[node] >= 0 else deepest + 1
        rows.setdefault(d, []).append(node)
    positions: dict[int, tuple[float, float]] = {}
    for d, nodes in rows.items():
        for i, node in enumerate(nodes):
            positions[node] = (float(i) - (len(nodes) - 1) / 2.0, -float(d))
    return positions


def _node_color(node: int, result: SimResult, truth: GroundTruth) -> str:
    detected = node in result.detector.malicious
    attacker = node in truth.attackers
    if attacker and detected:
        return "tab:red"
    if attacker:
        return "tab:orange"
    if detected:
        return "tab:purple"
    if node == result.scenario.sink:
        return "tab:green"
    return "tab:blue"


def save_topology(result: SimResult, path: str | Path) -> Path:
    """Final parent tree over node positions, attackers and flags marked."""
    truth = GroundTruth.from_result(result)
    positions = result.positions or _fallback_positions(result)
    metric_axes = result.positions is not None
    fig, ax = plt.subplots(figsize=(7, 6))
    for node, state in result.states.items():
        if state.preferred_parent is None:
            continue
        x0, y0 = positions[node]
        x1, y1 = positions[state.preferred_parent]
        ax.plot([x0, x1], [y0, y1], color="0.75", linewidth=0.8, zorder=1)
    for node, (x, y) in sorted(positions.items()):
        ax.scatter([x], [y], s=60, color=_node_color(node, result, truth),
                   zorder=2, edgecolors="black", linewidths=0.4)
        ax.annotate(str(node), (x, y), textcoords="offset points",
                    xytext=(4, 4), fontsize=7)
    handles = [
        plt.Line2D([], [], marker="o", linestyle="", color=c, label=l)
        for c, l in [("tab:green", "sink"), ("tab:blue", "honest"),
                     ("tab:red", "attacker, flagged"),
                     ("tab:orange", "attacker, missed"),
                     ("tab:purple", "false positive")]
    ]
    ax.legend(handles=handles, fontsize=7, loc="best")
    if metric_axes:
        ax.set_xlabel("x (m)")
        ax.set_ylabel("y (m)")
        ax.set_aspect("equal", adjustable="datalim")
    else:
        ax.set_xticks([])
        ax.set_yticks([])
    ax.set_title("Routing tree at end of run")
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=_DPI)
    plt.close(fig)
    return out


def save_energy(result: SimResult, path: str | Path) -> Path:
    """Per-node energy split into radio and crypto shares."""
    nodes = sorted(result.ledger.tx_bytes.keys() | result.ledger.rx_bytes.keys()
                   | result.ledger.cycles.keys())
    tx = [float(result.ledger.tx_energy_mj(n)) for n in nodes]
    rx = [float(result.ledger.rx_energy_mj(n)) for n in nodes]
    cpu = [float(result.ledger.cycle_energy_mj(n)) for n in nodes]
    fig, ax = plt.subplots(figsize=(max(6, 0.18 * len(nodes)), 4))
    ax.bar(nodes, tx, label="transmit")
    ax.bar(nodes, rx, bottom=tx, label="receive")
    ax.bar(nodes, cpu, bottom=[a + b for a, b in zip(tx, rx)], label="crypto")
    ax.set_xlabel("node")
    ax.set_ylabel("energy (mJ)")
    ax.set_title("Energy per node")
    ax.legend(fontsize=8)
    fig.tight_layout()
    out = Path(path)
    fig.savefig(out, dpi=_DPI)
    plt.close(fig)
    return out


def save_sweep_curves(result: SweepResult, out_dir: str | Path) -> list[Path]:
    """One figure per metric: mean curve plus the individual run scatter."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    xlabel = _VARIABLE_LABELS.get(result.spec.variable, result.spec.variable)
    written: list[Path] = []
    for metric, label in _METRIC_LABELS.items():
        means = result.means(metric)
        if all(m is None for m in means):
            continue
        fig, ax = plt.subplots(figsize=(6, 4))
        for i, x in enumerate(result.spec.values):
            ys = [v for v in result.runs[metric][i] if v is not None]
            ax.scatter([x] * len(ys), ys, s=12, color="tab:blue", alpha=0.35,
                       zorder=1)
        xs = [x for x, m in zip(result.spec.values, means) if m is not None]
        ys = [m for m in means if m is not None]
        ax.plot(xs, ys, marker="o", color="tab:red", zorder=2, label="mean")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(label)
        ax.set_title(f"{label} vs {xlabel.lower()}")
        ax.legend(fontsize=8)
        fig.tight_layout()
        out = out_dir / f"{metric}.png"
        fig.savefig(out, dpi=_DPI)
        plt.close(fig)
        written.append(out)
    return written
