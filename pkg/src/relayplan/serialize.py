"""JSON encodings: plan documents and scenario inputs.

Plan documents round-trip losslessly: coordinates are emitted with Python's
shortest float representation, so loading a dumped plan reproduces it
bit-for-bit.
"""

from __future__ import annotations

import json
from typing import Any

from .geometry import Point, polyline
from .model import Demand, PlacementPlan, PlannedPath, RadioConfig

SCHEMA_VERSION = 1


def plan_to_document(plan: PlacementPlan, violations: list | None = None) -> dict:
    """Serializable view of a plan; ``violations`` must be empty for a certified plan."""
    assignment = plan.slot_assignment()
    links = sorted(
        ({"tx": l.tx, "rx": l.rx, "slot": s} for l, s in assignment.items()),
        key=lambda d: (d["slot"], d["tx"], d["rx"]),
    )
    return {
        "schema_version": SCHEMA_VERSION,
        "config": {
            "r": plan.config.r,
            "R": plan.config.R,
            "f": plan.config.f,
            "C": plan.config.C,
        },
        "demands": [
            {
                "id": d.id,
                "src": [d.src.x, d.src.y],
                "dest": [d.dest.x, d.dest.y],
                "required_flow": d.required_flow,
            }
            for d in plan.demands
        ],
        "nodes": [[p.x, p.y] for p in plan.nodes],
        "endpoints": {d: list(ids) for d, ids in plan.endpoints.items()},
        "relay_nodes": sorted(plan.relay_ids()),
        "paths": {
            d.id: [
                {
                    "index": p.index,
                    "nodes": list(p.node_ids),
                    "slots": list(p.slots) if p.slots else [],
                    "achieved_flow": p.achieved_flow,
                }
                for p in plan.paths[d.id]
            ]
            for d in plan.demands
        },
        "links": links,
        "period": max(assignment.values()) if assignment else 0,
        "achieved": {d.id: plan.achieved.get(d.id) for d in plan.demands},
        "analytic": plan.analytic,
        "violations": [
            {
                "slot": v.slot,
                "links": [
                    {"tx": v.links[0].tx, "rx": v.links[0].rx},
                    {"tx": v.links[1].tx, "rx": v.links[1].rx},
                ],
                "distance": v.distance,
            }
            for v in (violations or [])
        ],
    }


def document_to_plan(doc: dict) -> PlacementPlan:
    """Rebuild a plan from its JSON document."""
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported plan schema version {doc.get('schema_version')!r}")
    cfg = doc["config"]
    config = RadioConfig(r=cfg["r"], R=cfg["R"], f=cfg["f"], C=cfg["C"])
    demands = [
        Demand(
            id=d["id"],
            src=Point(*d["src"]),
            dest=Point(*d["dest"]),
            required_flow=d.get("required_flow"),
        )
        for d in doc["demands"]
    ]
    nodes = [Point(*xy) for xy in doc["nodes"]]
    endpoints = {d: (ids[0], ids[1]) for d, ids in doc["endpoints"].items()}
    paths: dict[str, list[PlannedPath]] = {}
    for demand_id, plist in doc["paths"].items():
        paths[demand_id] = [
            PlannedPath(
                demand_id=demand_id,
                index=p["index"],
                node_ids=tuple(p["nodes"]),
                geometry=polyline([nodes[i] for i in p["nodes"]]),
                slots=list(p["slots"]) if p["slots"] else None,
                achieved_flow=p.get("achieved_flow"),
            )
            for p in plist
        ]
    plan = PlacementPlan(
        config=config,
        demands=demands,
        nodes=nodes,
        endpoints=endpoints,
        paths=paths,
        achieved={k: v for k, v in doc.get("achieved", {}).items() if v is not None},
        analytic=doc.get("analytic", {}),
    )
    return plan


def dump_document(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_scenario_input(
    doc: dict, defaults: dict[str, Any]
) -> tuple[RadioConfig, dict[str, Any]]:
    """Split a scenario JSON into a radio config and generation/demand fields.

    The document either carries explicit demands ({"demands": [...]}) or
    generator fields ({"kind", "area", "m", "flow_low", "flow_high",
    "seed"}).  Radio fields r, R, f, C override the provided defaults.
    """
    config = RadioConfig(
        r=doc.get("r", defaults["r"]),
        R=doc.get("R", defaults["R"]),
        f=doc.get("f", defaults["f"]),
        C=doc.get("C", defaults["C"]),
    )
    if "demands" in doc:
        demands = []
        for i, d in enumerate(doc["demands"]):
            demands.append(
                Demand(
                    id=d.get("id", f"d{i + 1:04d}"),
                    src=Point(*d["src"]),
                    dest=Point(*d["dest"]),
                    required_flow=d.get("required_flow"),
                )
            )
        return config, {"demands": demands}
    fields = {
        "kind": doc.get("kind", defaults["kind"]),
        "area": doc.get("area", defaults["area"]),
        "m": doc.get("m", defaults["m"]),
        "flow_low": doc.get("flow_low"),
        "flow_high": doc.get("flow_high"),
        "seed": doc.get("seed", defaults["seed"]),
    }
    return config, fields
