"""Name resolution: syntax tree to :class:`~mlproc.metamodel.Method`."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .. import metamodel as mm
from ..diagnostics import Diagnostic, SourceSpan, has_errors
from ..syntax.ast import DECLARING_TAGS, Node


@dataclass
class ResolutionResult:
    model: Optional[mm.Method]
    diagnostics: list[Diagnostic] = field(default_factory=list)


@dataclass(frozen=True)
class RefRule:
    tag: str
    attr: str
    family: str
    kinds: Optional[frozenset[str]] = None
    wrong_family_code: str = "R003"


REF_RULES = (
    RefRule("role", "expertIn", "technique"),
    RefRule("artifact", "template", "resource", frozenset({"Template"})),
    RefRule("artifact", "collectedFrom", "resource", frozenset({"DataSource"})),
    RefRule("artifact", "derivedFrom", "artifact", frozenset({"Data"})),
    RefRule("resource", "requires", "requirement"),
    RefRule("activity", "input", "artifact"),
    RefRule("activity", "output", "artifact"),
    RefRule("activity", "uses", "resource"),
    RefRule("activity", "applies", "technique"),
    RefRule("participant", "role", "role", wrong_family_code="R006"),
    RefRule("flow", "source", "activity"),
    RefRule("flow", "target", "activity"),
    RefRule("deployment", "platform", "resource", frozenset({"Platform"})),
    RefRule("deployment", "scripts", "resource", frozenset({"Script"})),
    RefRule("flaw", "relatedTo", "requirement"),
)

# success criterion kind -> goal kind it may evaluate
GOAL_FOR_CRITERION = {
    "BusinessSuccessCriterion": "BusinessGoal",
    "AIModelSuccessCriterion": "AIModelGoal",
}


def _describe(node: Node) -> str:
    return f"{node.tag} '{node.id}'" + (f" ({node.kind})" if node.kind else "")


class _Resolver:
    def __init__(self, ast: Node):
        self.ast = ast
        self.decls: dict[str, Node] = {}
        self.diagnostics: list[Diagnostic] = []

    def error(self, code: str, message: str, span: Optional[SourceSpan], *subjects: str):
        self.diagnostics.append(Diagnostic.error(code, message, span, subjects))

    def collect(self) -> None:
        for node in self.ast.walk():
            if node.tag not in DECLARING_TAGS or node.id is None:
                continue
            first = self.decls.get(node.id)
            if first is not None:
                line = first.span.line if first.span else "?"
                self.error("R001", f"duplicate identifier '{node.id}' (first declared on "
                           f"line {line})", node.span, node.id)
            else:
                self.decls[node.id] = node
            if node.tag == "artifact":
                for tag in ("attribute", "hyperparameter"):
                    names: set[str] = set()
                    for child in node.by_tag(tag):
                        if child.id in names:
                            self.error("R001", f"duplicate {tag} '{child.id}' in artifact "
                                       f"'{node.id}'", child.span, node.id, child.id)
                        names.add(child.id)

    def check_references(self) -> None:
        rules: dict[str, list[RefRule]] = {}
        for rule in REF_RULES:
            rules.setdefault(rule.tag, []).append(rule)
        for node in self.ast.walk():
            for rule in rules.get(node.tag, ()):
                self._check(node, rule)
            if node.tag == "criterion" and "evaluates" in node.attrs:
                self._check_evaluates(node)
            if node.tag == "artifact":
                self._check_correlations(node)

    def _refs(self, node: Node, attr: str):
        value = node.attrs.get(attr)
        if value is None:
            return []
        values = value if isinstance(value, tuple) else (value,)
        spans = node.ref_spans.get(attr, ())
        return [(v, spans[i] if i < len(spans) else node.span) for i, v in enumerate(values)]

    def _check(self, node: Node, rule: RefRule) -> None:
        for ref, span in self._refs(node, rule.attr):
            target = self.decls.get(ref)
            if target is None:
                self.error("R002", f"unresolved reference '{ref}' in '{rule.attr}'", span, ref)
            elif target.tag != rule.family or (rule.kinds and target.kind not in rule.kinds):
                wanted = rule.family if not rule.kinds else \
                    f"{rule.family} of kind {'/'.join(sorted(rule.kinds))}"
                self.error(rule.wrong_family_code, f"'{rule.attr}' expects a {wanted}, but "
                           f"'{ref}' is a {_describe(target)}", span, ref)

    def _check_evaluates(self, node: Node) -> None:
        ref = node.attrs["evaluates"]
        span = node.ref_spans.get("evaluates", (node.span,))[0]
        target = self.decls.get(ref)
        wanted = GOAL_FOR_CRITERION.get(node.kind or "")
        if target is None:
            self.error("R002", f"unresolved reference '{ref}' in 'evaluates'", span, ref)
        elif target.tag != "goal" or (wanted and target.kind != wanted):
            self.error("R003", f"'evaluates' expects a {wanted or 'goal'}, but '{ref}' is a "
                       f"{_describe(target)}", span, ref)

    def _check_correlations(self, node: Node) -> None:
        names = {c.id for c in node.by_tag("attribute")}
        for attr in node.by_tag("attribute"):
            for ref, span in self._refs(attr, "correlatedTo"):
                if ref not in names:
                    self.error("R002", f"attribute '{attr.id}' correlates with unknown "
                               f"attribute '{ref}' of '{node.id}'", span, ref)
                elif ref == attr.id:
                    self.error("R003", f"attribute '{attr.id}' cannot correlate with itself",
                               span, ref)


# --- model construction --------------------------------------------------------

def _dedupe(values) -> tuple[str, ...]:
    return tuple(dict.fromkeys(values or ()))


def _opt(node: Node, attr: str):
    return node.attrs.get(attr)


def _build_artifact(node: Node) -> mm.Artifact:
    kind = mm.ArtifactKind(node.kind)
    detail: mm.ArtifactDetail
    if kind is mm.ArtifactKind.DOCUMENT:
        detail = mm.DocumentDetail(_opt(node, "template"))
    elif kind is mm.ArtifactKind.DATA:
        attrs = node.by_tag("attribute")
        order = {a.id: i for i, a in enumerate(attrs)}
        corr: dict[str, set[str]] = {a.id: set() for a in attrs}
        for a in attrs:
            for other in a.attrs.get("correlatedTo", ()):
                corr[a.id].add(other)
                corr[other].add(a.id)
        detail = mm.DataDetail(
            tuple(mm.DataAttribute(a.id, _opt(a, "type"), bool(a.attrs.get("feature", False)),
                                   tuple(sorted(corr[a.id], key=order.__getitem__)))
                  for a in attrs),
            _dedupe(_opt(node, "collectedFrom")))
    elif kind is mm.ArtifactKind.AI_MODEL:
        detail = mm.AIModelDetail(
            tuple(mm.Hyperparameter(h.id, _opt(h, "searchSpace"), _opt(h, "optimal"))
                  for h in node.by_tag("hyperparameter")),
            _opt(node, "ranking"))
    else:
        detail = mm.DatasetDetail(mm.DatasetKind(node.attrs["dataset"]),
                                  _opt(node, "derivedFrom"))
    return mm.Artifact(node.id, node.display or node.id, kind, detail,
                       _opt(node, "description"), _opt(node, "location"), span=node.span)


def _build_resource(node: Node) -> mm.Resource:
    kind = mm.ResourceKind(node.kind)
    detail = None
    if kind is mm.ResourceKind.DATA_SOURCE:
        detail = mm.DataSourceDetail(bool(node.attrs.get("external", False)),
                                     bool(node.attrs.get("selected", False)),
                                     _dedupe(_opt(node, "requires")))
    elif kind is mm.ResourceKind.SCRIPT:
        detail = mm.ScriptDetail(_opt(node, "interpreter"))
    return mm.Resource(node.id, node.display or node.id, kind, detail,
                       _opt(node, "description"), _opt(node, "location"), span=node.span)


def _build_flows(container: Node) -> tuple[mm.FlowEdge, ...]:
    flows: dict[tuple[str, str], mm.FlowEdge] = {}
    for f in container.by_tag("flow"):
        key = (f.attrs["source"], f.attrs["target"])
        flows.setdefault(key, mm.FlowEdge(*key, span=f.span))
    return tuple(flows.values())


def _build_activity(node: Node) -> mm.Activity:
    goals, criteria, requirements, performance = [], [], [], []
    deployment = monitoring = None
    for child in node.children:
        if child.tag == "goal":
            goals.append(mm.Goal(child.id, mm.GoalKind(child.kind), child.attrs["statement"],
                                 span=child.span))
        elif child.tag == "requirement":
            requirements.append(mm.Requirement(child.id, mm.RequirementKind(child.kind),
                                               child.attrs["statement"], span=child.span))
        elif child.tag == "criterion":
            kind = mm.CriterionKind(child.kind)
            if kind is mm.CriterionKind.PERFORMANCE:
                performance.append(mm.PerformanceCriterion(
                    child.id, child.attrs["measure"], child.attrs["threshold"],
                    mm.Direction(child.attrs["direction"]), _opt(child, "description"),
                    span=child.span))
            else:
                criteria.append(mm.SuccessCriterion(
                    child.id, kind, child.attrs["evaluates"], child.attrs["baseline"],
                    child.attrs["target"], mm.DataType(child.attrs["dataType"]),
                    _opt(child, "description"), span=child.span))
        elif child.tag == "deployment":
            deployment = mm.DeploymentSpec(
                mm.DeploymentPattern(child.attrs["pattern"]),
                mm.DeploymentStrategy(child.attrs["strategy"]),
                mm.InferenceMode(child.attrs["inference"]),
                _opt(child, "platform"), _dedupe(_opt(child, "scripts")), span=child.span)
        elif child.tag == "monitoring":
            monitoring = mm.MonitoringSpec(
                tuple(mm.AIModelFlaw(f.id, f.attrs["description"], _opt(f, "relatedTo"),
                                     span=f.span) for f in child.by_tag("flaw")),
                tuple(mm.PerformanceMetric(m.id, m.display or m.id, m.attrs["min"],
                                           m.attrs["max"], _opt(m, "unit"), span=m.span)
                      for m in child.by_tag("metric")),
                span=child.span)
    return mm.Activity(
        id=node.id,
        display_name=node.display or node.id,
        kind=mm.ActivityKind(node.kind),
        description=_opt(node, "description"),
        is_optional=bool(node.attrs.get("optional", False)),
        requires_all_subactivities=bool(node.attrs.get("requiresAll", False)),
        sub_activities=tuple(_build_activity(c) for c in node.by_tag("activity")),
        flows=_build_flows(node),
        inputs=_dedupe(_opt(node, "input")),
        outputs=_dedupe(_opt(node, "output")),
        resources=_dedupe(_opt(node, "uses")),
        techniques=_dedupe(_opt(node, "applies")),
        participants=tuple(
            mm.Participant(p.attrs["role"], mm.ResponsibilityKind(p.attrs["responsibility"]),
                           span=p.span) for p in node.by_tag("participant")),
        goals=tuple(goals),
        criteria=tuple(criteria),
        requirements=tuple(requirements),
        performance_criteria=tuple(performance),
        deployment=deployment,
        monitoring=monitoring,
        span=node.span,
    )


def build_method(ast: Node) -> mm.Method:
    return mm.Method(
        name=ast.display or "",
        description=_opt(ast, "description"),
        roles=tuple(mm.Role(r.id, r.display or r.id, mm.RoleKind(r.kind), _opt(r, "description"),
                            _dedupe(_opt(r, "expertIn")), r.label, span=r.span)
                    for r in ast.by_tag("role")),
        techniques=tuple(mm.Technique(t.id, t.display or t.id, _opt(t, "description"),
                                      span=t.span) for t in ast.by_tag("technique")),
        artifacts=tuple(_build_artifact(a) for a in ast.by_tag("artifact")),
        resources=tuple(_build_resource(r) for r in ast.by_tag("resource")),
        activities=tuple(_build_activity(a) for a in ast.by_tag("activity")),
        flows=_build_flows(ast),
        span=ast.span,
    )


def resolve(ast: Node) -> ResolutionResult:
    """Check every declaration and reference; build the model if all resolve."""
    resolver = _Resolver(ast)
    resolver.collect()
    resolver.check_references()
    diagnostics = resolver.diagnostics
    if has_errors(diagnostics) or ast.has_error_nodes():
        return ResolutionResult(None, diagnostics)
    try:
        model = build_method(ast)
    except (KeyError, ValueError, TypeError):
        # only reachable when the tree still carries parse errors
        return ResolutionResult(None, diagnostics)
    return ResolutionResult(model, diagnostics)
