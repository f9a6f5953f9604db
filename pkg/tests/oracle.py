"""Brute-force diagnostics for generated models.

Works on the generator's plain data rather than on parsed models, and uses
deliberately naive algorithms (transitive closure for cycles, character scans
for numbers) so it shares no logic with the package's validator.
"""
from __future__ import annotations

from collections import Counter
from fractions import Fraction

from generators import GOAL_FOR, SECTION_KINDS, GActivity, GMethod

RESOLUTION_CODES = {"R001", "R002", "R003", "R006"}


def declarations(m: GMethod) -> list[tuple[str, str, str]]:
    """(id, family, kind) for every declaration in source order."""
    out = [(t["id"], "technique", None) for t in m.techniques]
    out += [(r["id"], "role", r["kind"]) for r in m.roles]
    out += [(r["id"], "resource", r["kind"]) for r in m.resources]
    out += [(a["id"], "artifact", a["kind"]) for a in m.artifacts]

    def visit(act: GActivity):
        out.append((act.id, "activity", act.kind))
        out.extend((g["id"], "goal", g["kind"]) for g in act.goals)
        out.extend((r["id"], "requirement", r["kind"]) for r in act.requirements)
        out.extend((c["id"], "criterion", c["kind"]) for c in act.criteria)
        if act.monitoring:
            out.extend((f["id"], "flaw", None) for f in act.monitoring["flaws"])
            out.extend((x["id"], "metric", None) for x in act.monitoring["metrics"])
        for child in act.children:
            visit(child)

    for top in m.activities:
        visit(top)
    return out


def _references(m: GMethod):
    """(ref, family, allowed kinds or None, wrong-family code)."""
    for r in m.roles:
        for t in r.get("expertIn") or []:
            yield t, "technique", None, "R003"
    for res in m.resources:
        for q in res.get("requires") or []:
            yield q, "requirement", None, "R003"
    for a in m.artifacts:
        if a.get("template"):
            yield a["template"], "resource", {"Template"}, "R003"
        for s in a.get("collectedFrom") or []:
            yield s, "resource", {"DataSource"}, "R003"
        if a.get("derivedFrom"):
            yield a["derivedFrom"], "artifact", {"Data"}, "R003"
    containers = [(None, m.activities, m.flows)]
    for act in m.all_activities():
        containers.append((act.id, act.children, act.flows))
        for ref in act.inputs + act.outputs:
            yield ref, "artifact", None, "R003"
        for ref in act.uses:
            yield ref, "resource", None, "R003"
        for ref in act.applies:
            yield ref, "technique", None, "R003"
        for role, _ in act.participants:
            yield role, "role", None, "R006"
        for c in act.criteria:
            if c["kind"] in GOAL_FOR:
                yield c["evaluates"], "goal", {GOAL_FOR[c["kind"]]}, "R003"
        if act.deployment:
            if act.deployment.get("platform"):
                yield act.deployment["platform"], "resource", {"Platform"}, "R003"
            for s in act.deployment.get("scripts") or []:
                yield s, "resource", {"Script"}, "R003"
        if act.monitoring:
            for f in act.monitoring["flaws"]:
                if f.get("relatedTo"):
                    yield f["relatedTo"], "requirement", None, "R003"
    for _, _, flows in containers:
        for s, t in flows:
            yield s, "activity", None, "R003"
            yield t, "activity", None, "R003"


def resolution_problems(m: GMethod) -> list[tuple[str, tuple]]:
    found = []
    first: dict[str, tuple[str, str]] = {}
    for ident, family, kind in declarations(m):
        if ident in first:
            found.append(("R001", (ident,)))
        else:
            first[ident] = (family, kind)
    for a in m.artifacts:
        for group in ("attributes", "hyperparameters"):
            names = [x["name"] for x in a[group]]
            for i, name in enumerate(names):
                if name in names[:i]:
                    found.append(("R001", (a["id"], name)))
        names = [x["name"] for x in a["attributes"]]
        for attr in a["attributes"]:
            for ref in attr["correlatedTo"]:
                if ref not in names:
                    found.append(("R002", (ref,)))
                elif ref == attr["name"]:
                    found.append(("R003", (ref,)))
    for ref, family, kinds, wrong in _references(m):
        if ref not in first:
            found.append(("R002", (ref,)))
            continue
        got_family, got_kind = first[ref]
        if got_family != family or (kinds is not None and got_kind not in kinds):
            found.append((wrong, (ref,)))
    return found


def _is_decimal(text: str) -> bool:
    body = text[1:] if text[:1] in ("+", "-") else text
    whole, dot, frac = body.partition(".")
    digits = "0123456789"
    if not whole or any(ch not in digits for ch in whole):
        return False
    if dot and (not frac or any(ch not in digits for ch in frac)):
        return False
    return True


def _reaches(edges: set, a: str, b: str) -> bool:
    seen, todo = set(), [a]
    while todo:
        node = todo.pop()
        for s, t in edges:
            if s == node and t not in seen:
                if t == b:
                    return True
                seen.add(t)
                todo.append(t)
    return False


def rule_problems(m: GMethod) -> list[tuple[str, tuple]]:
    found = []
    acts = m.all_activities()
    kind_of = {x[0]: x[2] for x in declarations(m)}

    for _, kids, flows in m.containers():
        child_ids = [k.id for k in kids]
        unique = list(dict.fromkeys(flows))
        inside = set()
        for s, t in unique:
            if s in child_ids and t in child_ids:
                inside.add((s, t))
            else:
                found.append(("R004", (s, t)))
        grouped: set[str] = set()
        for a in child_ids:
            if a in grouped or not _reaches(inside, a, a):
                continue
            comp = [b for b in child_ids if b == a or (_reaches(inside, a, b)
                                                      and _reaches(inside, b, a))]
            grouped.update(comp)
            found.append(("R005", tuple(comp)))

    for act in acts:
        for c in act.criteria:
            if c["kind"] not in GOAL_FOR or c["dataType"] == "Text":
                continue
            bad = False
            for value in (c["baseline"], c["target"]):
                if not _is_decimal(value):
                    bad = True
                elif c["dataType"] == "Percentage" and not 0 <= Fraction(value) <= 100:
                    bad = True
            if bad:
                found.append(("R007", (c["id"],)))
        if act.monitoring:
            for x in act.monitoring["metrics"]:
                if Fraction(x["min"]) > Fraction(x["max"]):
                    found.append(("R008", (x["id"],)))
            for f in act.monitoring["flaws"]:
                if f.get("relatedTo") and kind_of[f["relatedTo"]] != "AIModelRequirement":
                    found.append(("R010", (f["id"],)))
        present = {
            "goals": bool(act.goals),
            "criteria": any(c["kind"] in GOAL_FOR for c in act.criteria),
            "requirements": bool(act.requirements),
            "performance_criteria": any(c["kind"] not in GOAL_FOR for c in act.criteria),
            "deployment": act.deployment is not None,
            "monitoring": act.monitoring is not None,
        }
        for section, on in present.items():
            if on and act.kind not in SECTION_KINDS[section]:
                found.append(("R009", (act.id, section)))

        if act.requires_all and not act.children:
            found.append(("R011", (act.id,)))
        if act.kind == "DataIdentificationActivity":
            if not any(r["id"] in act.uses and r["kind"] == "DataSource" and r.get("selected")
                       for r in m.resources):
                found.append(("R012", (act.id,)))
        if act.kind == "AIModelEvaluationActivity":
            if not any(a["id"] in act.inputs and a["kind"] == "AIModelDataset"
                       and a.get("dataset") == "Test" for a in m.artifacts):
                found.append(("R013", (act.id,)))

    for art in m.artifacts:
        producers = [a for a in acts if art["id"] in a.outputs]
        if len(producers) == 1 and producers[0].optional:
            if any(art["id"] in a.inputs and not a.optional for a in acts):
                found.append(("R014", (producers[0].id, art["id"])))
    return found


def expected_diagnostics(m: GMethod) -> Counter:
    """Multiset of (code, subjects) the toolchain should report for ``m``."""
    problems = resolution_problems(m)
    if not problems:
        problems = rule_problems(m)
    return Counter(problems)
