"""Well-formedness rules R004-R014 over a resolved method.

| code | severity | rule |
|------|----------|------|
| R004 | error    | flow endpoints are not children of the flow's container |
| R005 | error    | flows within one container form a cycle |
| R007 | error    | criterion baseline/target do not fit its dataType |
| R008 | error    | metric minThreshold > maxThreshold |
| R009 | error    | kind-specific section on an activity of another kind |
| R010 | error    | flaw relatedTo names a requirement that is not an AIModelRequirement |
| R011 | warning  | requiresAll true on a leaf activity |
| R012 | warning  | data identification uses no selected data source |
| R013 | warning  | model evaluation has no Test dataset among its inputs |
| R014 | warning  | optional activity is the sole producer of an artifact a mandatory one consumes |

R006 (participant naming a non-role) is raised during resolution, since a
resolved model cannot hold such a reference.
"""
from __future__ import annotations

import re
from decimal import Decimal
from typing import Iterator, Union

from .. import metamodel as mm
from ..diagnostics import Diagnostic

DECIMAL_RE = re.compile(r"[+-]?[0-9]+(\.[0-9]+)?")

Container = Union[mm.Method, mm.Activity]


def _containers(model: mm.Method) -> Iterator[Container]:
    yield model
    yield from model.iter_activities()


def _children(container: Container) -> tuple[mm.Activity, ...]:
    return container.activities if isinstance(container, mm.Method) else container.sub_activities


def _check_flows(model: mm.Method) -> Iterator[Diagnostic]:
    for container in _containers(model):
        child_ids = [a.id for a in _children(container)]
        siblings = set(child_ids)
        succ: dict[str, list[str]] = {c: [] for c in child_ids}
        first_span = {}
        where = "the method" if isinstance(container, mm.Method) else f"'{container.id}'"
        for edge in container.flows:
            if edge.source in siblings and edge.target in siblings:
                succ[edge.source].append(edge.target)
                first_span.setdefault(edge.source, edge.span)
                continue
            outsider = edge.source if edge.source not in siblings else edge.target
            yield Diagnostic.error(
                "R004", f"flow {edge.source} -> {edge.target} leaves {where}: '{outsider}' is "
                "not a direct child", edge.span, (edge.source, edge.target))
        for comp in mm.cyclic_components(child_ids, succ):
            span = next((first_span[n] for n in comp if n in first_span), None)
            yield Diagnostic.error("R005", f"flow cycle in {where} among "
                                   + ", ".join(comp), span, comp)


def is_decimal(text: str) -> bool:
    return DECIMAL_RE.fullmatch(text) is not None


def criterion_problems(criterion: mm.SuccessCriterion) -> list[str]:
    problems = []
    if criterion.data_type is mm.DataType.TEXT:
        return problems
    for label, value in (("baseline", criterion.baseline), ("target", criterion.target)):
        if not is_decimal(value):
            problems.append(f"{label} {value!r} is not a decimal number")
        elif criterion.data_type is mm.DataType.PERCENTAGE and \
                not Decimal(0) <= Decimal(value) <= Decimal(100):
            problems.append(f"{label} {value} is outside 0..100")
    return problems


def _check_values(model: mm.Method) -> Iterator[Diagnostic]:
    for act in model.iter_activities():
        for crit in act.criteria:
            problems = criterion_problems(crit)
            if problems:
                yield Diagnostic.error("R007", f"criterion '{crit.id}' ({crit.data_type.value}): "
                                       + "; ".join(problems), crit.span, (crit.id,))
        if act.monitoring is None:
            continue
        for metric in act.monitoring.metrics:
            if metric.min_threshold > metric.max_threshold:
                yield Diagnostic.error(
                    "R008", f"metric '{metric.id}' has min {metric.min_threshold} above max "
                    f"{metric.max_threshold}", metric.span, (metric.id,))
        for flaw in act.monitoring.flaws:
            if flaw.related_to is None:
                continue
            req = model.lookup(flaw.related_to)
            if req.kind is not mm.RequirementKind.AI_MODEL:
                yield Diagnostic.error(
                    "R010", f"flaw '{flaw.id}' is related to '{req.id}', a {req.kind.value} "
                    "rather than an AIModelRequirement", flaw.span, (flaw.id,))


def _check_payloads(model: mm.Method) -> Iterator[Diagnostic]:
    for act in model.iter_activities():
        for section in act.payload_sections():
            allowed = mm.PAYLOAD_KINDS[section]
            if act.kind not in allowed:
                kinds = "/".join(sorted(k.value for k in allowed))
                yield Diagnostic.error(
                    "R009", f"'{section}' on {act.kind.value} '{act.id}' belongs on {kinds}",
                    act.span, (act.id, section))


def _check_warnings(model: mm.Method) -> Iterator[Diagnostic]:
    for act in model.iter_activities():
        if act.requires_all_subactivities and act.is_leaf:
            yield Diagnostic.warning("R011", f"'{act.id}' sets requiresAll but has no "
                                     "sub-activities", act.span, (act.id,))
        if act.kind is mm.ActivityKind.DATA_IDENTIFICATION:
            selected = [r for r in act.resources
                        if isinstance(model.lookup(r).detail, mm.DataSourceDetail)
                        and model.lookup(r).detail.selected]
            if not selected:
                yield Diagnostic.warning("R012", f"data identification '{act.id}' selects no "
                                         "data source", act.span, (act.id,))
        if act.kind is mm.ActivityKind.AI_MODEL_EVALUATION:
            tests = [a for a in act.inputs
                     if isinstance(model.lookup(a).detail, mm.DatasetDetail)
                     and model.lookup(a).detail.dataset_kind is mm.DatasetKind.TEST]
            if not tests:
                yield Diagnostic.warning("R013", f"model evaluation '{act.id}' has no Test "
                                         "dataset among its inputs", act.span, (act.id,))

    activities = list(model.iter_activities())
    for artifact in model.artifacts:
        producers = [a for a in activities if artifact.id in a.outputs]
        if len(producers) != 1 or not producers[0].is_optional:
            continue
        consumers = [a.id for a in activities if artifact.id in a.inputs and not a.is_optional]
        if consumers:
            producer = producers[0]
            yield Diagnostic.warning(
                "R014", f"optional '{producer.id}' is the only producer of '{artifact.id}', "
                f"which mandatory {', '.join(consumers)} consume(s)", producer.span,
                (producer.id, artifact.id))


def _sort_key(d: Diagnostic):
    return (d.code, d.span.start if d.span else -1, d.subjects)


def validate(model: mm.Method) -> list[Diagnostic]:
    """All rule violations, ordered by code then source position."""
    found = [*_check_flows(model), *_check_values(model), *_check_payloads(model),
             *_check_warnings(model)]
    return sorted(found, key=_sort_key)
