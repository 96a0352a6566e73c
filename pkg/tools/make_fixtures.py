"""Regenerate the bundled model documents under src/pilotcheck/fixtures."""
import json
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "pilotcheck" / "fixtures"

ONTOLOGY = {
    "entities": {"elements": ["subject", "controller"], "order": []},
    "datatypes": {"elements": ["t"], "order": []},
    "purposes": {"elements": [], "order": []},
}
ORDER = {"policies": {"p1": "t", "p2": "t", "p3": "t"}, "order": [["p1", "p2"]]}
POOL = ["p1", "p2", "p3"]


def three_policy(kind, repo=False, mutant=None):
    devices = {
        "DS": {"entity": "subject", "role": "ds"},
        "DC1": {"entity": "controller", "role": "dc"},
        "DC2": {"entity": "controller", "role": "dc"},
    }
    if repo:
        devices["Repo"] = {"entity": "controller", "role": "repository"}
    system = {"kind": kind, "mode": "async"}
    if mutant:
        system["mutant"] = mutant
    return {
        "ontology": ONTOLOGY,
        "devices": devices,
        "items": {"i": {"type": "t", "owner": "DS", "values": [1]}},
        "policy_order": ORDER,
        "initial_policies": {"DS": POOL, "DC1": POOL, "DC2": POOL},
        "system": system,
        "config": {"always_active": True, "policy_mode": "abstract", "bound": 1000000},
    }


def dcr(entity, purposes, retention):
    return {"condition": "tt", "entity": entity,
            "dur": {"purposes": purposes, "retention": retention}}


XMAS, APRIL = 20241221, 20240419

TABLE1 = {
    "ontology": {
        "entities": {"elements": ["user", "flights.com", "hotels.com"], "order": []},
        "datatypes": {"elements": ["cookie"], "order": []},
        "purposes": {"elements": ["special_offers", "hotel_ads"], "order": []},
    },
    "devices": {
        "user": {"entity": "user", "role": "ds"},
        "flights": {"entity": "flights.com", "role": "dc"},
        "hotels": {"entity": "hotels.com", "role": "dc"},
    },
    "items": {"c": {"type": "cookie", "owner": "user", "values": [1]}},
    "policies": {
        "option1": "bottom",
        "option2": {"datatype": "cookie", "dcr": dcr("flights.com", ["special_offers"], XMAS),
                    "transfers": []},
        "option3": {"datatype": "cookie", "dcr": dcr("flights.com", ["special_offers"], XMAS),
                    "transfers": [dcr("hotels.com", ["hotel_ads"], APRIL)]},
        "option4": {"datatype": "cookie", "dcr": dcr("flights.com", [], 0),
                    "transfers": [dcr("hotels.com", ["hotel_ads"], APRIL)]},
        "hotel_ads": {"datatype": "cookie", "dcr": dcr("hotels.com", ["hotel_ads"], APRIL),
                      "transfers": []},
    },
    "initial_policies": {
        "user": ["option1", "option2", "option3", "option4"],
        "flights": ["option2", "option3", "option4"],
        "hotels": ["hotel_ads"],
    },
    "system": {"kind": "abstract"},
    "config": {"always_active": True, "policy_mode": "structural"},
}


def main():
    docs = {
        "three_policy_abstract.cfg": three_policy("abstract"),
        "three_policy_direct.cfg": three_policy("direct"),
        "three_policy_indirect.cfg": three_policy("indirect", repo=True),
        "direct_mutant.cfg": three_policy("direct", mutant="ds_guard"),
        "indirect_mutant.cfg": three_policy("indirect", repo=True, mutant="dc_guard"),
        "cookie_banner.cfg": TABLE1,
    }
    OUT.mkdir(parents=True, exist_ok=True)
    for name, doc in docs.items():
        (OUT / name).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
