"""BPMN 2.0 XML export.

Composite activities become ``subProcess`` elements and leaves become
``userTask``. Every container gets a synthesized ``startEvent`` and
``endEvent``. Flow sources hang off the start event and sinks lead to the
end event. Roles are emitted as definitions-level ``resource`` elements
referenced from ``potentialOwner``. Inputs, applied techniques and used
resources turn into ``dataInputAssociation`` elements; outputs turn into
``dataOutputAssociation``. No diagram interchange section is produced.
"""
from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from typing import Optional, Union

from . import metamodel as mm
from .diagnostics import MlprocError, has_errors
from .semantics import validate

BPMN_NS = "http://www.omg.org/spec/BPMN/20100524/MODEL"
MAX_SUFFIX = 10 ** 6

_NON_NCNAME = re.compile(r"[^a-z0-9_.\-]")


@dataclass(frozen=True)
class ExportOptions:
    target_namespace: str = "http://mlproc.example/process"
    emit_data_associations: bool = True
    emit_performers: bool = True
    insert_gateways: bool = True

    def __post_init__(self) -> None:
        if not self.target_namespace:
            raise ValueError("target_namespace must not be empty")


class BpmnIdMap:
    """Allocates unique NCName ids and remembers model id -> XML id."""

    def __init__(self) -> None:
        self.mapping: dict[str, str] = {}
        self.taken: set[str] = set()
        self.collisions = 0

    @staticmethod
    def sanitize(text: str) -> str:
        out = _NON_NCNAME.sub("_", text.lower())
        if not out or not (out[0] == "_" or out[0].isalpha()):
            out = "_" + out
        return out

    def allocate(self, desired: str) -> str:
        base = self.sanitize(desired)
        candidate = base
        suffix = 1
        while candidate in self.taken:
            suffix += 1
            self.collisions += 1
            if suffix > MAX_SUFFIX:
                raise MlprocError("E002", f"cannot find a free id for {desired!r}")
            candidate = f"{base}_{suffix}"
        self.taken.add(candidate)
        return candidate

    def bind(self, model_id: str, desired: Optional[str] = None) -> str:
        if model_id not in self.mapping:
            self.mapping[model_id] = self.allocate(desired or model_id)
        return self.mapping[model_id]

    def __getitem__(self, model_id: str) -> str:
        return self.mapping[model_id]


def _sub(parent: ET.Element, tag: str, **attrs: str) -> ET.Element:
    # keyword order is preserved, which keeps ``id`` first in the output
    return ET.SubElement(parent, tag, {k: v for k, v in attrs.items() if v is not None})


def _fmt(value) -> str:
    return format(value, "f") if hasattr(value, "as_tuple") else str(value)


def documentation_lines(activity: mm.Activity) -> list[str]:
    """Text carried in ``<documentation>``: description, optionality, payload."""
    lines = []
    if activity.description:
        lines.append(activity.description)
    if activity.is_optional:
        lines.append("optional: true")
    for goal in activity.goals:
        lines.append(f"goal {goal.id} ({goal.kind.value}): {goal.statement}")
    for crit in activity.criteria:
        lines.append(f"criterion {crit.id} ({crit.kind.value}): evaluates {crit.evaluates}, "
                     f"baseline {crit.baseline}, target {crit.target}, "
                     f"dataType {crit.data_type.value}")
    for req in activity.requirements:
        lines.append(f"requirement {req.id} ({req.kind.value}): {req.statement}")
    for perf in activity.performance_criteria:
        lines.append(f"performanceCriterion {perf.id}: {perf.metric_name} "
                     f"{perf.direction.value} threshold {_fmt(perf.threshold)}")
    if activity.deployment is not None:
        dep = activity.deployment
        text = (f"deployment: pattern {dep.pattern.value}, strategy {dep.strategy.value}, "
                f"inference {dep.inference_mode.value}")
        if dep.platform:
            text += f", platform {dep.platform}"
        if dep.scripts:
            text += ", scripts " + " ".join(dep.scripts)
        lines.append(text)
    if activity.monitoring is not None:
        for flaw in activity.monitoring.flaws:
            related = f" (relatedTo {flaw.related_to})" if flaw.related_to else ""
            lines.append(f"flaw {flaw.id}: {flaw.description}{related}")
        for metric in activity.monitoring.metrics:
            unit = f" {metric.unit}" if metric.unit else ""
            lines.append(f"metric {metric.id} ({metric.name}): min {_fmt(metric.min_threshold)}, "
                         f"max {_fmt(metric.max_threshold)}{unit}")
    return lines


def input_elements(activity: mm.Activity) -> list[str]:
    """inputs, then techniques, then resources, without repeats."""
    return list(dict.fromkeys([*activity.inputs, *activity.techniques, *activity.resources]))


Container = Union[mm.Method, mm.Activity]


class BpmnExporter:
    def __init__(self, model: mm.Method, options: ExportOptions = ExportOptions()):
        self.model = model
        self.options = options
        self.ids = BpmnIdMap()
        self.definitions_id = self.ids.allocate("definitions")
        self.process_id = self.ids.allocate("process")
        for act in model.iter_activities():
            self.ids.bind(act.id)
        for role in model.roles:
            self.ids.bind(role.id)
        for element in (*model.artifacts, *model.resources, *model.techniques):
            self.ids.bind(element.id, f"do_{element.id}")
        self._flow_counter = 0
        # (container xml id, element id) -> dataObjectReference id, in creation order
        self._refs: dict[str, dict[str, str]] = {}

    # naming -------------------------------------------------------------------

    def _container_id(self, container: Container) -> str:
        return self.process_id if isinstance(container, mm.Method) else self.ids[container.id]

    def _next_flow_id(self) -> str:
        self._flow_counter += 1
        return self.ids.allocate(f"flow_{self._flow_counter}")

    def _data_ref(self, container_xml_id: str, element_id: str) -> str:
        refs = self._refs.setdefault(container_xml_id, {})
        if element_id not in refs:
            refs[element_id] = self.ids.allocate(f"ref_{container_xml_id}_{element_id}")
        return refs[element_id]

    # activities ---------------------------------------------------------------

    def map_activity(self, activity: mm.Activity, container_xml_id: Optional[str] = None
                     ) -> ET.Element:
        """One ``userTask`` or ``subProcess`` element, children included."""
        if container_xml_id is None:
            parent = self.model.parent_of(activity.id)
            container_xml_id = self._container_id(parent or self.model)
        tag = "userTask" if activity.is_leaf else "subProcess"
        elem = ET.Element(tag, {"id": self.ids[activity.id], "name": activity.display_name})
        lines = documentation_lines(activity)
        if lines:
            _sub(elem, "documentation").text = "\n".join(lines)
        if self.options.emit_data_associations:
            for fragment in self.map_data_associations(activity, container_xml_id):
                elem.append(fragment)
        if self.options.emit_performers:
            for i, participant in enumerate(activity.participants, 1):
                owner = _sub(elem, "potentialOwner",
                             id=self.ids.allocate(f"owner_{self.ids[activity.id]}_{i}"),
                             name=participant.responsibility.value)
                _sub(owner, "resourceRef").text = self.ids[participant.role]
        if not activity.is_leaf:
            self._fill_container(elem, activity)
        return elem

    def map_data_associations(self, activity: mm.Activity, container_xml_id: str
                              ) -> list[ET.Element]:
        """``property`` placeholder plus one association per input and output element."""
        fragments: list[ET.Element] = []
        task_id = self.ids[activity.id]
        inputs = input_elements(activity)
        if inputs:
            prop_id = self.ids.allocate(f"prop_{task_id}")
            fragments.append(ET.Element("property", {"id": prop_id,
                                                     "name": "__targetRef_placeholder"}))
            for element_id in inputs:
                assoc = ET.Element("dataInputAssociation", {
                    "id": self.ids.allocate(f"input_{task_id}_{element_id}")})
                _sub(assoc, "sourceRef").text = self._data_ref(container_xml_id, element_id)
                _sub(assoc, "targetRef").text = prop_id
                fragments.append(assoc)
        for element_id in dict.fromkeys(activity.outputs):
            assoc = ET.Element("dataOutputAssociation", {
                "id": self.ids.allocate(f"output_{task_id}_{element_id}")})
            _sub(assoc, "targetRef").text = self._data_ref(container_xml_id, element_id)
            fragments.append(assoc)
        return fragments

    # flow ---------------------------------------------------------------------

    def synthesize_flow(self, container: Container) -> list[ET.Element]:
        """Start/end events, gateways and sequence flows for ``container``.

        Returned in document order: start event, gateways, end event, then
        the sequence flows.
        """
        cid = self._container_id(container)
        children = [self.ids[a.id] for a in self.model.children_of(container)]
        start = self.ids.allocate(f"start_{cid}")
        end = self.ids.allocate(f"end_{cid}")
        succ: dict[str, list[str]] = {n: [] for n in [start, *children, end]}
        pred: dict[str, list[str]] = {n: [] for n in succ}
        edges: list[tuple[str, str]] = []

        def link(a: str, b: str) -> None:
            if b not in succ[a]:
                succ[a].append(b)
                pred[b].append(a)
                edges.append((a, b))

        for edge in container.flows:
            link(self.ids[edge.source], self.ids[edge.target])
        for n in children:
            if not pred[n]:
                link(start, n)
        for n in children:
            if not succ[n]:
                link(n, end)
        if not children:
            link(start, end)

        elements = [ET.Element("startEvent", {"id": start})]
        gateways: list[ET.Element] = []
        split: dict[str, str] = {}
        join: dict[str, str] = {}
        flows: list[tuple[str, str]] = []
        if self.options.insert_gateways:
            for n in succ:
                if len(succ[n]) > 1:
                    split[n] = self.ids.allocate(f"split_{n}")
                    gateways.append(ET.Element("parallelGateway", {
                        "id": split[n], "gatewayDirection": "Diverging"}))
                    flows.append((n, split[n]))
                if len(pred[n]) > 1:
                    join[n] = self.ids.allocate(f"join_{n}")
                    gateways.append(ET.Element("parallelGateway", {
                        "id": join[n], "gatewayDirection": "Converging"}))
        for a, b in edges:
            flows.append((split.get(a, a), join.get(b, b)))
        for n, gw in join.items():
            flows.append((gw, n))
        elements.extend(gateways)
        elements.append(ET.Element("endEvent", {"id": end}))
        for a, b in flows:
            elements.append(ET.Element("sequenceFlow", {
                "id": self._next_flow_id(), "sourceRef": a, "targetRef": b}))
        return elements

    def _fill_container(self, parent: ET.Element, container: Container) -> None:
        cid = self._container_id(container)
        flow_elements = self.synthesize_flow(container)
        parent.append(flow_elements[0])
        for act in self.model.children_of(container):
            parent.append(self.map_activity(act, cid))
        for elem in flow_elements[1:]:
            parent.append(elem)
        for element_id, ref_id in self._refs.get(cid, {}).items():
            _sub(parent, "dataObjectReference", id=ref_id,
                 name=self.model.lookup(element_id).display_name,
                 dataObjectRef=self.ids[element_id])

    # document -----------------------------------------------------------------

    def build(self) -> ET.Element:
        model = self.model
        root = ET.Element("definitions", {
            "id": self.definitions_id,
            "name": model.name,
            "targetNamespace": self.options.target_namespace,
            "xmlns": BPMN_NS,
        })
        if self.options.emit_performers:
            for role in model.roles:
                _sub(root, "resource", id=self.ids[role.id], name=role.display_name)
        process = _sub(root, "process", id=self.process_id, name=model.name,
                       isExecutable="true")
        if model.description:
            _sub(process, "documentation").text = model.description
        used: set[str] = set()
        if self.options.emit_data_associations:
            for act in model.iter_activities():
                used.update(input_elements(act))
                used.update(act.outputs)
        for element in (*model.artifacts, *model.resources, *model.techniques):
            if element.id in used:
                _sub(process, "dataObject", id=self.ids[element.id], name=element.display_name)
        self._fill_container(process, model)
        return root


def export_bpmn(model: mm.Method, options: ExportOptions = ExportOptions()) -> str:
    """Serialize ``model`` as a BPMN 2.0 document.

    Raises :class:`MlprocError` with code E001 when the model has validation
    errors, and E002 if id sanitization runs out of suffixes.
    """
    diagnostics = validate(model)
    if has_errors(diagnostics):
        raise MlprocError("E001", "model has validation errors", diagnostics)
    root = BpmnExporter(model, options).build()
    ET.indent(root, "  ")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"
