"""Structured reports and static plots for the command line."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Any

from . import __version__
from .presentation import PresentationAtScale
from .tower import ScaleAnalysis, ScaleTower, UniversalityVerdict, space_digest


def dumps(doc: Any) -> str:
    """Canonical JSON text: fixed key order from construction, trailing newline."""
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def load_schema(name: str) -> dict:
    """The shipped JSON Schema for ``ec-space/1``, ``ec-cert/1`` or ``ec-tower/1``."""
    fname = name.replace("/", "-") + ".json"
    return json.loads(resources.files("ecover").joinpath("schemas", fname).read_text())


def write_json(doc: Any, path: str | Path) -> None:
    Path(path).write_text(dumps(doc))


def presentation_report(pres: PresentationAtScale) -> dict:
    return {
        "scale": pres.graph.scale,
        "basepoint": pres.basepoint,
        "generators": [list(e) for e in pres.generators],
        "relators": [list(r) for r in pres.relators],
        "rank_upper": pres.rank_upper(),
    }


def analysis_report(analysis: ScaleAnalysis, verdict: UniversalityVerdict) -> dict:
    simp = analysis.simplification
    return {
        "version": __version__,
        "space": space_digest(analysis.graph.space),
        "scale": analysis.scale,
        "chain_connected": analysis.connected,
        "points_in_component": len(analysis.pres.component),
        "edges": int(len(analysis.graph.edges)),
        "triangles": int(len(analysis.graph.triangles)),
        "presentation": {
            "generators": analysis.pres.ngens,
            "relators": len(analysis.pres.relators),
            "rank_upper": analysis.pres.rank_upper(),
        },
        "simplified": {
            "generators": simp.group.ngens,
            "relators": [list(r) for r in simp.group.relators],
            "certified": simp.flag.value,
        },
        "invariants": analysis.invariants.to_json(),
        "universal_at_scale": {
            "verdict": verdict.verdict.value,
            "witness_loop": list(verdict.witness) if verdict.witness else None,
        },
    }


def tower_report(tower: ScaleTower) -> dict:
    doc = tower.to_json()
    doc["version"] = __version__
    return doc


def tower_svg(tower: ScaleTower, path: str | Path) -> None:
    """Step plot of betti number against scale (log axis), critical scales dashed."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "ecover", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6, 3.5))
        scales = list(tower.schedule)
        betti = [a.invariants.betti for a in tower.analyses]
        ax.step(scales, betti, where="post", marker="o", color="black")
        for lo, hi in tower.critical:
            ax.axvline(hi, color="tab:red", linestyle="--", linewidth=0.8)
        if len(scales) > 1 or scales[0] > 0:
            ax.set_xscale("log")
        ax.invert_xaxis()
        ax.set_xlabel("scale")
        ax.set_ylabel("betti")
        ax.set_title("deck group rank along the tower")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
