"""Unresolved syntax tree and the block grammar that shapes it.

Every declaration parses into a :class:`Node`. Which header form a keyword
takes, which attributes its block accepts and which declarations may nest
inside it are all listed in :data:`BLOCKS`; the parser and the canonical
printer are both driven from that table, so they cannot drift apart.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from typing import Any, Iterator, Optional, Union

from .. import metamodel as mm
from ..diagnostics import SourceSpan

AttrValue = Union[str, bool, Decimal, int, tuple[str, ...]]


@dataclass
class Node:
    """One declaration. Spans are ignored by ``==``."""

    tag: str
    id: Optional[str] = None
    # method name, display name, or metric name depending on ``tag``
    display: Optional[str] = None
    kind: Optional[str] = None
    # free-form label of a Custom role
    label: Optional[str] = None
    attrs: dict[str, AttrValue] = field(default_factory=dict)
    children: list["Node"] = field(default_factory=list)
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)
    # use-site spans of references, keyed by attribute name
    ref_spans: dict[str, tuple[SourceSpan, ...]] = field(
        default_factory=dict, compare=False, repr=False)

    @property
    def is_error(self) -> bool:
        return self.tag == "error"

    def walk(self) -> Iterator["Node"]:
        yield self
        for child in self.children:
            yield from child.walk()

    def has_error_nodes(self) -> bool:
        return any(n.is_error for n in self.walk())

    def by_tag(self, tag: str) -> list["Node"]:
        return [c for c in self.children if c.tag == tag]


def error_node(span: Optional[SourceSpan]) -> Node:
    return Node("error", span=span)


def _values(enum_cls) -> tuple[str, ...]:
    return tuple(e.value for e in enum_cls)


@dataclass(frozen=True)
class Attr:
    name: str
    # str | nonempty | bool | num | posint | ref | refs | enum
    type: str
    choices: tuple[str, ...] = ()
    # kinds the attribute applies to; None means every kind
    kinds: Optional[frozenset[str]] = None
    # True: always required; a frozenset: required for those kinds only
    required: Union[bool, frozenset[str]] = False

    def applies_to(self, kind: Optional[str]) -> bool:
        return self.kinds is None or kind in self.kinds

    def required_for(self, kind: Optional[str]) -> bool:
        if isinstance(self.required, frozenset):
            return kind in self.required
        return self.required


@dataclass(frozen=True)
class Block:
    tag: str
    # method | named | typed | bare | participant | flow | anonymous
    header: str
    kinds: tuple[str, ...] = ()
    attrs: tuple[Attr, ...] = ()
    children: tuple[str, ...] = ()
    # restricts a child tag to certain kinds of this block
    child_kinds: dict[str, frozenset[str]] = field(default_factory=dict)
    # child tags that may appear at most once
    unique_children: frozenset[str] = frozenset()

    def attr(self, name: str) -> Optional[Attr]:
        for a in self.attrs:
            if a.name == name:
                return a
        return None


def _k(*names: str) -> frozenset[str]:
    return frozenset(names)


DESCRIPTION = Attr("description", "str")
LOCATION = Attr("location", "str")
SUCCESS = _k(mm.CriterionKind.BUSINESS_SUCCESS.value, mm.CriterionKind.AI_MODEL_SUCCESS.value)
PERFORMANCE = _k(mm.CriterionKind.PERFORMANCE.value)

BLOCKS: dict[str, Block] = {b.tag: b for b in [
    Block("method", "method", attrs=(DESCRIPTION,),
          children=("technique", "role", "resource", "artifact", "activity", "flow")),
    Block("technique", "named", attrs=(DESCRIPTION,)),
    Block("role", "typed", kinds=_values(mm.RoleKind),
          attrs=(DESCRIPTION, Attr("expertIn", "refs"))),
    Block("resource", "typed", kinds=_values(mm.ResourceKind), attrs=(
        DESCRIPTION, LOCATION,
        Attr("external", "bool", kinds=_k("DataSource")),
        Attr("selected", "bool", kinds=_k("DataSource")),
        Attr("requires", "refs", kinds=_k("DataSource")),
        Attr("interpreter", "str", kinds=_k("Script")),
    )),
    Block("artifact", "typed", kinds=_values(mm.ArtifactKind), attrs=(
        DESCRIPTION, LOCATION,
        Attr("template", "ref", kinds=_k("Document")),
        Attr("collectedFrom", "refs", kinds=_k("Data")),
        Attr("ranking", "posint", kinds=_k("AIModel")),
        Attr("dataset", "enum", _values(mm.DatasetKind), kinds=_k("AIModelDataset"),
             required=_k("AIModelDataset")),
        Attr("derivedFrom", "ref", kinds=_k("AIModelDataset")),
    ), children=("attribute", "hyperparameter"),
        child_kinds={"attribute": _k("Data"), "hyperparameter": _k("AIModel")}),
    Block("attribute", "bare", attrs=(
        Attr("type", "str"), Attr("feature", "bool"), Attr("correlatedTo", "refs"))),
    Block("hyperparameter", "bare", attrs=(Attr("searchSpace", "str"), Attr("optimal", "str"))),
    Block("activity", "typed", kinds=_values(mm.ActivityKind), attrs=(
        DESCRIPTION,
        Attr("optional", "bool"),
        Attr("requiresAll", "bool"),
        Attr("input", "refs"),
        Attr("output", "refs"),
        Attr("uses", "refs"),
        Attr("applies", "refs"),
    ), children=("participant", "goal", "requirement", "criterion", "deployment",
                 "monitoring", "activity", "flow"),
        unique_children=_k("deployment", "monitoring")),
    Block("participant", "participant"),
    Block("flow", "flow"),
    Block("goal", "typed", kinds=_values(mm.GoalKind),
          attrs=(Attr("statement", "nonempty", required=True),)),
    Block("requirement", "typed", kinds=_values(mm.RequirementKind),
          attrs=(Attr("statement", "nonempty", required=True),)),
    Block("criterion", "typed", kinds=_values(mm.CriterionKind), attrs=(
        DESCRIPTION,
        Attr("evaluates", "ref", kinds=SUCCESS, required=SUCCESS),
        Attr("baseline", "str", kinds=SUCCESS, required=SUCCESS),
        Attr("target", "str", kinds=SUCCESS, required=SUCCESS),
        Attr("dataType", "enum", _values(mm.DataType), kinds=SUCCESS, required=SUCCESS),
        Attr("measure", "nonempty", kinds=PERFORMANCE, required=PERFORMANCE),
        Attr("threshold", "num", kinds=PERFORMANCE, required=PERFORMANCE),
        Attr("direction", "enum", _values(mm.Direction), kinds=PERFORMANCE,
             required=PERFORMANCE),
    )),
    Block("deployment", "anonymous", attrs=(
        Attr("pattern", "enum", _values(mm.DeploymentPattern), required=True),
        Attr("strategy", "enum", _values(mm.DeploymentStrategy), required=True),
        Attr("inference", "enum", _values(mm.InferenceMode), required=True),
        Attr("platform", "ref"),
        Attr("scripts", "refs"),
    )),
    Block("monitoring", "anonymous", children=("flaw", "metric")),
    Block("flaw", "bare", attrs=(
        Attr("description", "str", required=True), Attr("relatedTo", "ref"))),
    Block("metric", "named", attrs=(
        Attr("min", "num", required=True), Attr("max", "num", required=True),
        Attr("unit", "str"))),
]}

# declarations whose id enters the global namespace
DECLARING_TAGS = frozenset({"technique", "role", "resource", "artifact", "activity", "goal",
                            "requirement", "criterion", "flaw", "metric"})
