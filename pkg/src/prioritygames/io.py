"""JSON documents for instances, profiles and analysis reports."""

from __future__ import annotations

import hashlib
import json
import re
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Any, Iterable, Mapping

import jsonschema
from jsonschema.exceptions import best_match

from .equilibria import DynamicsTrace, NashCheck
from .metrics import BoundVerdict, InefficiencyReport, NoNE
from .model import (
    BasesMatroid,
    CongestionInstance,
    CostPolynomial,
    GameInstance,
    Instance,
    Job,
    Machine,
    PartitionMatroid,
    Player,
    PriorityList,
    Profile,
    Resource,
    UniformMatroid,
    ValidationError,
    as_rational,
)

SCHEMA_FILE = "instance.schema.json"
_UNIFORM = re.compile(r"^uniform\((\d+)\)$")


@lru_cache(maxsize=1)
def instance_schema() -> dict:
    with resources.files(__package__).joinpath(SCHEMA_FILE).open("r", encoding="utf-8") as fh:
        return json.load(fh)


def _json_path(parts: Iterable[Any]) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def validate_document(doc: Any) -> None:
    """Raise :class:`ValidationError` naming the offending path."""
    validator = jsonschema.Draft202012Validator(instance_schema())
    error = best_match(validator.iter_errors(doc))
    if error is not None:
        raise ValidationError(error.message, _json_path(error.absolute_path) or "$")


def rational_text(value: Any) -> str:
    """``Fraction(74, 8)`` -> ``"37/4"``; integers carry no denominator."""
    return str(Fraction(value))


def _load_json(text: str | bytes, what: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed {what} JSON: {exc.msg} (line {exc.lineno})", "$") from None


# ---------------------------------------------------------------------------
# instances


def _matroid_from_doc(desc: Any):
    if isinstance(desc, str):
        return UniformMatroid(int(_UNIFORM.match(desc).group(1)))
    kind = desc["matroid"]
    if kind == "uniform":
        return UniformMatroid(desc["k"], tuple(desc["ground"]))
    if kind == "partition":
        return PartitionMatroid(tuple(tuple(b) for b in desc["blocks"]), tuple(desc["quotas"]))
    return BasesMatroid(tuple(frozenset(b) for b in desc["bases"]))


def instance_from_document(doc: Any) -> Instance:
    validate_document(doc)
    if doc["kind"] == "scheduling":
        jobs = tuple(Job(j["id"], as_rational(j["weight"], f"jobs[{k}].weight")) for k, j in enumerate(doc["jobs"]))
        machines = tuple(
            Machine(m["id"], as_rational(m["delay"], f"machines[{k}].delay"), PriorityList(tuple(m["priority"])))
            for k, m in enumerate(doc["machines"])
        )
        table = None
        if "unrelated_weights" in doc:
            table = {
                (jid, mid): as_rational(w, f"unrelated_weights.{jid}.{mid}")
                for jid, row in doc["unrelated_weights"].items()
                for mid, w in row.items()
            }
        return GameInstance(jobs, machines, table)
    players = []
    for k, p in enumerate(doc["players"]):
        raw = p["strategies"]
        if isinstance(raw, list):
            strategies: Any = [frozenset(s) for s in raw]
        else:
            try:
                strategies = _matroid_from_doc(raw)
            except ValidationError as exc:
                raise ValidationError(str(exc), f"players[{k}].strategies") from None
        players.append(Player(p["id"], as_rational(p["weight"], f"players[{k}].weight"), strategies))
    res = []
    for k, r in enumerate(doc["resources"]):
        try:
            cost = CostPolynomial(tuple(as_rational(c) for c in r["cost"]))
        except ValidationError as exc:
            raise ValidationError(str(exc), f"resources[{k}].cost") from None
        res.append(Resource(r["id"], cost, PriorityList(tuple(r["priority"]))))
    return CongestionInstance(tuple(players), tuple(res))


def parse_instance(text: str | bytes) -> Instance:
    return instance_from_document(_load_json(text, "instance"))


def _ordered(ids: Iterable[str], order: Mapping[str, int]) -> list[str]:
    return sorted(ids, key=order.__getitem__)


def _matroid_to_doc(mat: Any, rids: tuple[str, ...]) -> Any:
    if isinstance(mat, UniformMatroid):
        if tuple(mat.ground) == rids:
            return f"uniform({mat.k})"
        return {"matroid": "uniform", "k": mat.k, "ground": list(mat.ground)}
    if isinstance(mat, PartitionMatroid):
        return {"matroid": "partition", "blocks": [list(b) for b in mat.blocks], "quotas": list(mat.quotas)}
    rorder = {r: k for k, r in enumerate(rids)}
    return {"matroid": "bases", "bases": [_ordered(b, rorder) for b in mat.basis_list]}


def instance_to_document(instance: Instance) -> dict:
    """Canonical document: declaration order, rationals in lowest terms."""
    if isinstance(instance, GameInstance):
        doc: dict[str, Any] = {
            "kind": "scheduling",
            "jobs": [{"id": j.id, "weight": rational_text(j.weight)} for j in instance.jobs],
            "machines": [
                {"id": m.id, "delay": rational_text(m.delay), "priority": list(m.priority.order)}
                for m in instance.machines
            ],
        }
        if instance.unrelated_weights is not None:
            doc["unrelated_weights"] = {
                j.id: {m.id: rational_text(instance.unrelated_weights[(j.id, m.id)]) for m in instance.machines}
                for j in instance.jobs
            }
        return doc
    rids = tuple(r.id for r in instance.resources)
    rorder = {r: k for k, r in enumerate(rids)}
    players = []
    for p in instance.players:
        if p.matroid is not None:
            strategies: Any = _matroid_to_doc(p.matroid, rids)
        else:
            strategies = [_ordered(s, rorder) for s in p.strategies]
        players.append({"id": p.id, "weight": rational_text(p.weight), "strategies": strategies})
    return {
        "kind": "congestion",
        "players": players,
        "resources": [
            {
                "id": r.id,
                "cost": [rational_text(c) for c in r.cost.coefficients],
                "priority": list(r.priority.order),
            }
            for r in instance.resources
        ],
    }


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def serialize_instance(instance: Instance) -> str:
    return dumps(instance_to_document(instance))


def instance_digest(instance: Instance) -> str:
    return "sha256:" + hashlib.sha256(serialize_instance(instance).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# profiles


def strategy_to_doc(instance: Instance, strategy: Any) -> Any:
    if isinstance(instance, GameInstance):
        return strategy
    order = {r.id: k for k, r in enumerate(instance.resources)}
    return _ordered(strategy, order)


def profile_to_document(instance: Instance, profile: Profile) -> dict:
    return {"profile": {p: strategy_to_doc(instance, s) for p, s in zip(profile.players, profile.choices)}}


def profile_from_document(instance: Instance, doc: Any) -> Profile:
    """Accepts ``{"profile": {...}}`` or a bare player-to-strategy mapping."""
    if isinstance(doc, dict) and isinstance(doc.get("profile"), dict):
        doc = doc["profile"]
    if not isinstance(doc, dict):
        raise ValidationError("a profile is an object mapping player ids to strategies", "profile")
    return instance.profile(doc)


def parse_profile(instance: Instance, text: str | bytes) -> Profile:
    return profile_from_document(instance, _load_json(text, "profile"))


# ---------------------------------------------------------------------------
# reports


def _num(value: Any) -> str | None:
    return None if value is None else rational_text(value)


def nash_check_to_doc(instance: Instance, check: NashCheck, alpha: Any = 1) -> dict:
    doc: dict[str, Any] = {"alpha": rational_text(alpha), "stable": bool(check), "witness": None}
    w = check.witness
    if w is not None:
        doc["witness"] = {
            "player": w.player,
            "strategy": strategy_to_doc(instance, w.strategy),
            "current_cost": rational_text(w.current_cost),
            "deviation_cost": rational_text(w.deviation_cost),
        }
    return doc


def inefficiency_to_doc(instance: Instance, report: InefficiencyReport | NoNE) -> dict:
    if isinstance(report, NoNE):
        return {
            "objective": report.objective.value,
            "ne_count": 0,
            "profiles_checked": report.profiles_checked,
        }
    prof = lambda p: profile_to_document(instance, p)["profile"]  # noqa: E731
    return {
        "objective": report.objective.value,
        "ne_count": report.ne_count,
        "opt_value": rational_text(report.opt_value),
        "best_ne_value": rational_text(report.best_ne_value),
        "worst_ne_value": rational_text(report.worst_ne_value),
        "pos": rational_text(report.pos),
        "poa": rational_text(report.poa),
        "opt_profile": prof(report.opt_profile),
        "best_witness": prof(report.best_witness),
        "worst_witness": prof(report.worst_witness),
    }


def trace_to_doc(instance: Instance, trace: DynamicsTrace, policy: str | None = None) -> dict:
    doc: dict[str, Any] = {}
    if policy is not None:
        doc["policy"] = policy
    doc.update(
        {
            "status": trace.status.value,
            "steps": len(trace.moves),
            "cycle_start": trace.cycle_start,
            "initial": profile_to_document(instance, trace.initial)["profile"],
            "final": profile_to_document(instance, trace.final)["profile"],
            "moves": [
                {
                    "player": m.player,
                    "from": strategy_to_doc(instance, m.old),
                    "to": strategy_to_doc(instance, m.new),
                    "old_cost": rational_text(m.old_cost),
                    "new_cost": rational_text(m.new_cost),
                }
                for m in trace.moves
            ],
        }
    )
    return doc


def bound_to_doc(verdict: BoundVerdict) -> dict:
    return {
        "bound": verdict.bound,
        "holds": verdict.holds,
        "exact": verdict.exact,
        "limit": rational_text(verdict.limit),
        "poa": _num(verdict.poa),
    }


def build_report(
    instance: Instance,
    reports: Iterable[InefficiencyReport | NoNE],
    ne_cap: int = 0,
    traces: Iterable[tuple[str, DynamicsTrace]] = (),
    bounds: Iterable[BoundVerdict] = (),
) -> dict:
    """Report document with a fixed key order.

    Equilibria kept by the first objective's report are listed, at most
    ``ne_cap`` of them; ``equilibria_truncated`` says whether more exist.
    """
    reports = list(reports)
    first = reports[0] if reports else None
    count = None if first is None else (0 if isinstance(first, NoNE) else first.ne_count)
    listed = [] if first is None or isinstance(first, NoNE) else list(first.equilibria[:ne_cap])
    return {
        "instance_digest": instance_digest(instance),
        "kind": instance.kind,
        "players": instance.n,
        "profiles": instance.profile_count(),
        "ne_count": count,
        "objectives": [inefficiency_to_doc(instance, r) for r in reports],
        "equilibria": [profile_to_document(instance, p)["profile"] for p in listed],
        "equilibria_truncated": count is not None and count > len(listed),
        "dynamics": [trace_to_doc(instance, t, name) for name, t in traces],
        "bounds": [bound_to_doc(b) for b in bounds],
    }


TABLE_COLUMNS = ("objective", "ne_count", "opt", "best_ne", "worst_ne", "pos", "poa")


def report_table(doc: Mapping[str, Any]) -> str:
    """One row per objective; cells padded so columns line up, tab separated."""
    rows = [list(TABLE_COLUMNS)]
    for obj in doc["objectives"]:
        rows.append(
            [
                obj["objective"],
                str(obj["ne_count"]),
                obj.get("opt_value", "-"),
                obj.get("best_ne_value", "-"),
                obj.get("worst_ne_value", "-"),
                obj.get("pos", "-"),
                obj.get("poa", "-"),
            ]
        )
    widths = [max(len(r[c]) for r in rows) for c in range(len(TABLE_COLUMNS))]
    lines = ["\t".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    return "\n".join(lines) + "\n"
