"""Static HTML documentation for a process model.

The page opens with an overview of roles, techniques, resources grouped by
kind, artifacts grouped by kind, and the activity tree. One section per
activity follows. Each section links to the activity's inputs, outputs,
resources, participants, parent, flow predecessors and successors, and
sub-activities. Output is plain HTML5 with an embedded stylesheet and no
script; it is also well-formed XML.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from html import escape
from typing import Optional

from . import metamodel as mm
from .diagnostics import MlprocError, has_errors
from .semantics import validate

STYLE = """
body { font-family: sans-serif; max-width: 60em; margin: 0 auto; padding: 1em; color: #222; }
nav ul, section ul { padding-left: 1.2em; }
section.activity { border-top: 1px solid #ccc; margin-top: 2em; }
.kind { color: #666; font-size: 0.9em; }
.empty { color: #999; font-style: italic; }
dt { font-weight: bold; margin-top: 0.5em; }
table { border-collapse: collapse; }
td, th { border: 1px solid #ccc; padding: 0.2em 0.5em; }
""".strip()

RESOURCE_GROUPS = (
    (mm.ResourceKind.TEMPLATE, "Templates"),
    (mm.ResourceKind.DATA_SOURCE, "Data sources"),
    (mm.ResourceKind.SCRIPT, "Scripts"),
    (mm.ResourceKind.GUIDELINE, "Guidelines"),
    (mm.ResourceKind.PLATFORM, "Platforms"),
)
ARTIFACT_GROUPS = (
    (mm.ArtifactKind.DOCUMENT, "Documents"),
    (mm.ArtifactKind.DATA, "Data"),
    (mm.ArtifactKind.AI_MODEL, "AI models"),
    (mm.ArtifactKind.AI_MODEL_DATASET, "AI model datasets"),
)

INDEX = "index.html"
_UNSAFE = re.compile(r"[^a-z0-9_\-]")


@dataclass(frozen=True)
class DocPage:
    relative_path: str
    title: str
    body: str


def anchor_id(element_id: str) -> str:
    """HTML-id-safe form of an element id.

    Identifiers are ASCII by construction, so in practice this lowercases.
    Generated section ids contain a hyphen and so never clash with it.
    """
    return _UNSAFE.sub("_", element_id.lower())


def anchor_map(model: mm.Method) -> dict[str, str]:
    """Element id -> unique anchor; case-only clashes get a ``-n`` suffix."""
    anchors: dict[str, str] = {}
    taken: set[str] = set()
    for element in model.iter_elements():
        base = anchor_id(element.id)
        candidate, n = base, 1
        while candidate in taken:
            n += 1
            candidate = f"{base}-{n}"
        taken.add(candidate)
        anchors[element.id] = candidate
    return anchors


def _e(text) -> str:
    return escape(str(text), quote=True)


class _Renderer:
    def __init__(self, model: mm.Method, single_file: bool):
        self.model = model
        self.single_file = single_file
        self.anchors = anchor_map(model)
        # anchor -> page that defines it
        self.page_of: dict[str, str] = {}
        for element in model.iter_elements():
            self.page_of[self.anchors[element.id]] = self._home(element.id)
        self.current_page = INDEX

    def _home(self, element_id: str) -> str:
        """Page that holds the anchor of ``element_id``."""
        if self.single_file:
            return INDEX
        element = self.model.lookup(element_id)
        if isinstance(element, mm.Activity):
            return self.activity_page(element)
        if isinstance(element, (mm.Role, mm.Technique, mm.Artifact, mm.Resource)):
            return INDEX
        owner = next(a for a in self.model.iter_activities() if element in _payload_elements(a))
        return self.activity_page(owner)

    def activity_page(self, activity: mm.Activity) -> str:
        return f"activity-{self.anchors[activity.id]}.html"

    def href(self, element_id: str) -> str:
        anchor = self.anchors[element_id]
        page = self.page_of[anchor]
        return f"#{anchor}" if page == self.current_page else f"{page}#{anchor}"

    def link(self, element_id: str) -> str:
        element = self.model.lookup(element_id)
        name = getattr(element, "display_name", None) or element_id
        return f'<a href="{_e(self.href(element_id))}">{_e(name)}</a>'

    def links(self, ids, css: str) -> str:
        if not ids:
            return f'<p class="{css} empty">None.</p>'
        items = "".join(f"<li>{self.link(i)}</li>" for i in ids)
        return f'<ul class="{css}">{items}</ul>'

    # overview -----------------------------------------------------------------

    def location(self, location: Optional[str]) -> str:
        if not location:
            return ""
        return f' <a class="external" href="{_e(location)}">{_e(location)}</a>'

    def overview(self) -> str:
        m = self.model
        out = ['<section id="sec-overview">', "<h2>Process overview</h2>"]

        out.append('<section id="sec-roles"><h3>Roles</h3>')
        out.append(self._dl([self._role(r) for r in m.roles]))
        out.append("</section>")

        out.append('<section id="sec-techniques"><h3>Techniques</h3>')
        out.append(self._dl([(t.id, t.display_name, _e(t.description or ""))
                             for t in m.techniques]))
        out.append("</section>")

        out.append('<section id="sec-resources"><h3>Resources</h3>')
        for kind, title in RESOURCE_GROUPS:
            out.append(f'<h4 id="sec-resources-{kind.value.lower()}">{title}</h4>')
            out.append(self._dl([self._resource(r) for r in m.resources if r.kind is kind]))
        out.append("</section>")

        out.append('<section id="sec-artifacts"><h3>Artifacts</h3>')
        for kind, title in ARTIFACT_GROUPS:
            out.append(f'<h4 id="sec-artifacts-{kind.value.lower()}">{title}</h4>')
            out.append(self._dl([self._artifact(a) for a in m.artifacts if a.kind is kind]))
        out.append("</section>")

        out.append('<section id="sec-activities"><h3>Activities</h3>')
        out.append(self._tree(m.activities) if m.activities else '<p class="empty">None.</p>')
        out.append("</section>")
        out.append("</section>")
        return "\n".join(out)

    def _dl(self, entries) -> str:
        if not entries:
            return '<p class="empty">None.</p>'
        rows = [f'<dt id="{self.anchors[eid]}">{_e(name)}</dt><dd>{body}</dd>'
                for eid, name, body in entries]
        return "<dl>" + "\n".join(rows) + "</dl>"

    def _role(self, role: mm.Role):
        kind = role.kind.value
        if role.kind is mm.RoleKind.CUSTOM and role.custom_label:
            kind = f"Custom: {role.custom_label}"
        body = f'<span class="kind">{_e(kind)}</span>'
        if role.description:
            body += f"<p>{_e(role.description)}</p>"
        if role.expert_in:
            body += "<p>Expert in:</p>" + self.links(role.expert_in, "expert-in")
        return role.id, role.display_name, body

    def _resource(self, res: mm.Resource):
        body = f'<span class="kind">{_e(res.kind.value)}</span>{self.location(res.location)}'
        if res.description:
            body += f"<p>{_e(res.description)}</p>"
        if isinstance(res.detail, mm.DataSourceDetail):
            d = res.detail
            body += (f"<p>{'External' if d.is_external else 'Internal'} source; "
                     f"{'selected' if d.selected else 'not selected'}.</p>")
            if d.requirements:
                body += "<p>Constrained by:</p>" + self.links(d.requirements, "requirements")
        elif isinstance(res.detail, mm.ScriptDetail) and res.detail.interpreter_hint:
            body += f"<p>Interpreter: {_e(res.detail.interpreter_hint)}</p>"
        return res.id, res.display_name, body

    def _artifact(self, art: mm.Artifact):
        body = f'<span class="kind">{_e(art.kind.value)}</span>{self.location(art.location)}'
        if art.description:
            body += f"<p>{_e(art.description)}</p>"
        d = art.detail
        if isinstance(d, mm.DocumentDetail) and d.template:
            body += f"<p>Template: {self.link(d.template)}</p>"
        elif isinstance(d, mm.DataDetail):
            if d.collected_from:
                body += "<p>Collected from:</p>" + self.links(d.collected_from, "collected-from")
            if d.attributes:
                rows = "".join(
                    f"<tr><td>{_e(a.name)}</td><td>{_e(a.semantic_type or '')}</td>"
                    f"<td>{'yes' if a.is_feature else 'no'}</td>"
                    f"<td>{_e(', '.join(a.correlated_to))}</td></tr>" for a in d.attributes)
                body += ("<table><tr><th>Attribute</th><th>Type</th><th>Feature</th>"
                         f"<th>Correlated to</th></tr>{rows}</table>")
        elif isinstance(d, mm.AIModelDetail):
            if d.ranking is not None:
                body += f"<p>Ranking: {d.ranking}</p>"
            if d.hyperparameters:
                rows = "".join(
                    f"<tr><td>{_e(h.name)}</td><td>{_e(h.search_space or '')}</td>"
                    f"<td>{_e(h.optimal_value or '')}</td></tr>" for h in d.hyperparameters)
                body += ("<table><tr><th>Hyperparameter</th><th>Search space</th>"
                         f"<th>Optimal value</th></tr>{rows}</table>")
        elif isinstance(d, mm.DatasetDetail):
            body += f"<p>{_e(d.dataset_kind.value)} dataset"
            if d.derived_from:
                body += f" derived from {self.link(d.derived_from)}"
            body += ".</p>"
        return art.id, art.display_name, body

    def _tree(self, activities) -> str:
        items = []
        for act in activities:
            sub = self._tree(act.sub_activities) if act.sub_activities else ""
            items.append(f"<li>{self.link(act.id)}{sub}</li>")
        return "<ul>" + "".join(items) + "</ul>"

    # activities ---------------------------------------------------------------

    def activity_section(self, act: mm.Activity) -> str:
        m = self.model
        out = [f'<section class="activity" id="{self.anchors[act.id]}">',
               f"<h2>{_e(act.display_name)}</h2>",
               f'<p class="kind">{_e(act.kind.value)}'
               + (" (optional)" if act.is_optional else "") + "</p>"]
        if act.description:
            out.append(f'<p class="rationale">{_e(act.description)}</p>')
        parent = m.parent_of(act.id)
        if parent is not None:
            out.append(f'<p class="parent">Part of {self.link(parent.id)}</p>')
        out.append("<h3>Previous</h3>" + self.links(m.predecessors(act.id), "previous"))
        out.append("<h3>Next</h3>" + self.links(m.successors(act.id), "next"))
        out.append("<h3>Inputs</h3>" + self.links(act.inputs, "inputs"))
        out.append("<h3>Outputs</h3>" + self.links(act.outputs, "outputs"))
        out.append("<h3>Resources</h3>" + self.links(act.resources, "resources"))
        out.append("<h3>Techniques</h3>" + self.links(act.techniques, "techniques"))
        out.append("<h3>Participants</h3>")
        if act.participants:
            items = "".join(f"<li>{self.link(p.role)} ({_e(p.responsibility.value)})</li>"
                            for p in act.participants)
            out.append(f'<ul class="participants">{items}</ul>')
        else:
            out.append('<p class="participants empty">None.</p>')
        out.append("<h3>Sub-activities</h3>"
                   + self.links([c.id for c in act.sub_activities], "sub-activities"))
        out.extend(self._payload(act))
        out.append("</section>")
        return "\n".join(out)

    def _item(self, element_id: str, text: str) -> str:
        return f'<li id="{self.anchors[element_id]}">{text}</li>'

    def _payload(self, act: mm.Activity) -> list[str]:
        out = []
        if act.goals:
            out.append("<h3>Goals</h3><ul>" + "".join(
                self._item(g.id, f"<strong>{_e(g.id)}</strong> ({_e(g.kind.value)}): "
                           f"{_e(g.statement)}") for g in act.goals) + "</ul>")
        if act.criteria:
            out.append("<h3>Success criteria</h3><ul>" + "".join(
                self._item(c.id, f"<strong>{_e(c.id)}</strong> ({_e(c.kind.value)}) evaluates "
                           f"{self._plain_link(c.evaluates)}: from {_e(c.baseline)} to "
                           f"{_e(c.target)} ({_e(c.data_type.value)})"
                           + (f" {_e(c.description)}" if c.description else ""))
                for c in act.criteria) + "</ul>")
        if act.requirements:
            out.append("<h3>Requirements</h3><ul>" + "".join(
                self._item(r.id, f"<strong>{_e(r.id)}</strong> ({_e(r.kind.value)}): "
                           f"{_e(r.statement)}") for r in act.requirements) + "</ul>")
        if act.performance_criteria:
            out.append("<h3>Performance criteria</h3><ul>" + "".join(
                self._item(p.id, f"<strong>{_e(p.id)}</strong>: {_e(p.direction.value)} "
                           f"{_e(p.metric_name)}, threshold {format(p.threshold, 'f')}")
                for p in act.performance_criteria) + "</ul>")
        if act.deployment is not None:
            d = act.deployment
            text = (f"<p>Pattern {_e(d.pattern.value)}, strategy {_e(d.strategy.value)}, "
                    f"inference {_e(d.inference_mode.value)}.</p>")
            if d.platform:
                text += f"<p>Platform: {self.link(d.platform)}</p>"
            if d.scripts:
                text += "<p>Scripts:</p>" + self.links(d.scripts, "scripts")
            out.append('<h3>Deployment</h3><div class="deployment">' + text + "</div>")
        if act.monitoring is not None:
            mon = act.monitoring
            if mon.flaws:
                out.append("<h3>Model flaws</h3><ul>" + "".join(
                    self._item(f.id, f"<strong>{_e(f.id)}</strong>: {_e(f.description)}"
                               + (f" (related to {self._plain_link(f.related_to)})"
                                  if f.related_to else "")) for f in mon.flaws) + "</ul>")
            if mon.metrics:
                out.append("<h3>Performance metrics</h3><ul>" + "".join(
                    self._item(x.id, f"<strong>{_e(x.name)}</strong>: between "
                               f"{format(x.min_threshold, 'f')} and "
                               f"{format(x.max_threshold, 'f')}"
                               + (f" {_e(x.unit)}" if x.unit else "")) for x in mon.metrics)
                    + "</ul>")
        return out

    def _plain_link(self, element_id: str) -> str:
        return f'<a href="{_e(self.href(element_id))}">{_e(element_id)}</a>'

    # pages --------------------------------------------------------------------

    def page(self, title: str, body: str) -> str:
        return ("<!DOCTYPE html>\n"
                '<html lang="en">\n<head>\n<meta charset="utf-8" />\n'
                f"<title>{_e(title)}</title>\n<style>\n{STYLE}\n</style>\n</head>\n"
                f"<body>\n{body}\n</body>\n</html>\n")

    def header(self) -> str:
        m = self.model
        out = [f'<header id="sec-method"><h1>{_e(m.name)}</h1>']
        if m.description:
            out.append(f"<p>{_e(m.description)}</p>")
        out.append("</header>")
        out.append('<nav id="sec-contents"><h2>Contents</h2><ul>'
                   '<li><a href="#sec-roles">Roles</a></li>'
                   '<li><a href="#sec-techniques">Techniques</a></li>'
                   '<li><a href="#sec-resources">Resources</a></li>'
                   '<li><a href="#sec-artifacts">Artifacts</a></li>'
                   '<li><a href="#sec-activities">Activities</a></li></ul></nav>')
        return "\n".join(out)

    def render(self) -> list[DocPage]:
        m = self.model
        if self.single_file:
            sections = [self.activity_section(a) for a in m.iter_activities()]
            body = "\n".join([self.header(), "<main>", self.overview(), *sections, "</main>"])
            return [DocPage(INDEX, m.name, self.page(m.name, body))]
        body = "\n".join([self.header(), "<main>", self.overview(), "</main>"])
        pages = [DocPage(INDEX, m.name, self.page(m.name, body))]
        for act in m.iter_activities():
            self.current_page = self.activity_page(act)
            nav = f'<nav><a href="{INDEX}">{_e(m.name)}</a></nav>'
            body = "\n".join([nav, "<main>", self.activity_section(act), "</main>"])
            title = f"{act.display_name} | {m.name}"
            pages.append(DocPage(self.current_page, title, self.page(title, body)))
        self.current_page = INDEX
        return pages


def _payload_elements(act: mm.Activity) -> list:
    items = [*act.goals, *act.criteria, *act.requirements, *act.performance_criteria]
    if act.monitoring is not None:
        items += [*act.monitoring.flaws, *act.monitoring.metrics]
    return items


def generate_html(model: mm.Method, single_file: bool = True) -> list[DocPage]:
    """Render documentation pages; raises MlprocError D001 on an invalid model."""
    diagnostics = validate(model)
    if has_errors(diagnostics):
        raise MlprocError("D001", "model has validation errors", diagnostics)
    return _Renderer(model, single_file).render()


def activity_section(model: mm.Method, activity: mm.Activity) -> str:
    """Single-file HTML fragment documenting ``activity``."""
    return _Renderer(model, True).activity_section(activity)
