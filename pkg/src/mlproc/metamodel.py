"""Resolved, immutable in-memory representation of an ML engineering process.

A :class:`Method` is produced by :func:`mlproc.semantics.resolve`; every id
it mentions is guaranteed to name a declared element of the right family.
References are kept as id strings and followed through :meth:`Method.lookup`.
"""
from __future__ import annotations

import enum
import heapq
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterator, Optional, Union

from .diagnostics import MlprocError, SourceSpan


class ActivityKind(enum.Enum):
    GENERIC = "Generic"
    BUSINESS = "BusinessActivity"
    REQUIREMENTS_ENGINEERING = "RequirementsEngineeringActivity"
    DATA_IDENTIFICATION = "DataIdentificationActivity"
    DATA_PREPARATION = "DataPreparationActivity"
    DATA_COLLECTION = "DataCollectionActivity"
    DATA_PROCESSING = "DataProcessingActivity"
    FEATURE_ENGINEERING = "FeatureEngineeringActivity"
    AI_MODELING = "AIModelingActivity"
    AI_MODEL_TRAINING = "AIModelTrainingActivity"
    AI_MODEL_EVALUATION = "AIModelEvaluationActivity"
    OPERATIONS = "OperationsActivity"
    AI_MODEL_DEPLOYMENT = "AIModelDeploymentActivity"
    AI_MODEL_MONITORING = "AIModelMonitoringActivity"


class RoleKind(enum.Enum):
    GROUP_MANAGER = "GroupManager"
    TEAM_LEAD = "TeamLead"
    PROJECT_LEAD = "ProjectLead"
    DATA_CONSUMER = "DataConsumer"
    BUSINESS_USER = "BusinessUser"
    BUSINESS_ANALYST = "BusinessAnalyst"
    DATA_ENGINEER = "DataEngineer"
    DATA_STEWARD = "DataSteward"
    DATA_PROVIDER = "DataProvider"
    DATA_ANNOTATOR = "DataAnnotator"
    DATA_SCIENTIST = "DataScientist"
    ARCHITECT = "Architect"
    SOFTWARE_ENGINEER = "SoftwareEngineer"
    MODEL_OPERATOR = "ModelOperator"
    CUSTOM = "Custom"


ROLE_GROUPS: dict[str, tuple[RoleKind, ...]] = {
    "Management": (RoleKind.GROUP_MANAGER, RoleKind.TEAM_LEAD, RoleKind.PROJECT_LEAD),
    "Domain": (RoleKind.DATA_CONSUMER, RoleKind.BUSINESS_USER, RoleKind.BUSINESS_ANALYST),
    "Data": (RoleKind.DATA_ENGINEER, RoleKind.DATA_STEWARD, RoleKind.DATA_PROVIDER,
             RoleKind.DATA_ANNOTATOR, RoleKind.DATA_SCIENTIST),
    "AI model serving": (RoleKind.ARCHITECT, RoleKind.SOFTWARE_ENGINEER, RoleKind.MODEL_OPERATOR),
}


class ResponsibilityKind(enum.Enum):
    RESPONSIBLE = "Responsible"
    ACCOUNTABLE = "Accountable"
    CONSULTED = "Consulted"
    INFORMED = "Informed"


class ArtifactKind(enum.Enum):
    DOCUMENT = "Document"
    DATA = "Data"
    AI_MODEL = "AIModel"
    AI_MODEL_DATASET = "AIModelDataset"


class DatasetKind(enum.Enum):
    TRAINING = "Training"
    VALIDATION = "Validation"
    TEST = "Test"


class ResourceKind(enum.Enum):
    TEMPLATE = "Template"
    DATA_SOURCE = "DataSource"
    SCRIPT = "Script"
    GUIDELINE = "Guideline"
    PLATFORM = "Platform"


class GoalKind(enum.Enum):
    BUSINESS = "BusinessGoal"
    AI_MODEL = "AIModelGoal"


class CriterionKind(enum.Enum):
    BUSINESS_SUCCESS = "BusinessSuccessCriterion"
    AI_MODEL_SUCCESS = "AIModelSuccessCriterion"
    PERFORMANCE = "PerformanceCriterion"


class DataType(enum.Enum):
    NUMBER = "Number"
    PERCENTAGE = "Percentage"
    TEXT = "Text"


class RequirementKind(enum.Enum):
    GENERIC = "Generic"
    AI_MODEL = "AIModelRequirement"
    DATA = "DataRequirement"
    DATA_SOURCE = "DataSourceRequirement"


class Direction(enum.Enum):
    MAXIMIZE = "Maximize"
    MINIMIZE = "Minimize"


class DeploymentPattern(enum.Enum):
    STATIC = "Static"
    DYNAMIC_ON_DEVICE = "DynamicOnDevice"
    DYNAMIC_ON_SERVER = "DynamicOnServer"
    STREAMING = "Streaming"


class DeploymentStrategy(enum.Enum):
    SINGLE = "Single"
    SILENT = "Silent"
    CANARY = "Canary"
    MULTI_ARMED_BANDIT = "MultiArmedBandit"


class InferenceMode(enum.Enum):
    BATCH = "Batch"
    ON_DEMAND = "OnDemand"


ALL_ENUMS: tuple[type[enum.Enum], ...] = (
    ActivityKind, RoleKind, ResponsibilityKind, ArtifactKind, DatasetKind, ResourceKind,
    GoalKind, CriterionKind, DataType, RequirementKind, Direction, DeploymentPattern,
    DeploymentStrategy, InferenceMode,
)

_span = field(default=None, compare=False, repr=False)


# --- supporting elements -------------------------------------------------------

@dataclass(frozen=True)
class Technique:
    id: str
    display_name: str
    description: Optional[str] = None
    span: Optional[SourceSpan] = _span


@dataclass(frozen=True)
class Role:
    id: str
    display_name: str
    kind: RoleKind
    description: Optional[str] = None
    expert_in: tuple[str, ...] = ()
    custom_label: Optional[str] = None
    span: Optional[SourceSpan] = _span


@dataclass(frozen=True)
class Participant:
    role: str
    responsibility: ResponsibilityKind
    span: Optional[SourceSpan] = _span


@dataclass(frozen=True)
class DataAttribute:
    name: str
    semantic_type: Optional[str] = None
    is_feature: bool = False
    # symmetric after resolution
    correlated_to: tuple[str, ...] = ()


@dataclass(frozen=True)
class Hyperparameter:
    name: str
    search_space: Optional[str] = None
    optimal_value: Optional[str] = None


@dataclass(frozen=True)
class DocumentDetail:
    template: Optional[str] = None


@dataclass(frozen=True)
class DataDetail:
    attributes: tuple[DataAttribute, ...] = ()
    collected_from: tuple[str, ...] = ()


@dataclass(frozen=True)
class AIModelDetail:
    hyperparameters: tuple[Hyperparameter, ...] = ()
    ranking: Optional[int] = None


@dataclass(frozen=True)
class DatasetDetail:
    dataset_kind: DatasetKind
    derived_from: Optional[str] = None


ArtifactDetail = Union[DocumentDetail, DataDetail, AIModelDetail, DatasetDetail]


@dataclass(frozen=True)
class Artifact:
    id: str
    display_name: str
    kind: ArtifactKind
    detail: ArtifactDetail
    description: Optional[str] = None
    location: Optional[str] = None
    span: Optional[SourceSpan] = _span


@dataclass(frozen=True)
class DataSourceDetail:
    is_external: bool = False
    selected: bool = False
    requirements: tuple[str, ...] = ()


@dataclass(frozen=True)
class ScriptDetail:
    interpreter_hint: Optional[str] = None


@dataclass(frozen=True)
class Resource:
    id: str
    display_name: str
    kind: ResourceKind
    detail: Union[DataSourceDetail, ScriptDetail, None] = None
    description: Optional[str] = None
    location: Optional[str] = None
    span: Optional[SourceSpan] = _span


# --- activity payloads ---------------------------------------------------------

@dataclass(frozen=True)
class Goal:
    id: str
    kind: GoalKind
    statement: str
    span: Optional[SourceSpan] = _span


@dataclass(frozen=True)
class SuccessCriterion:
    id: str
    kind: CriterionKind
    evaluates: str
    baseline: str
    target: str
    data_type: DataType
    description: Optional[str] = None
    span: Optional[SourceSpan] = _span


@dataclass(frozen=True)
class Requirement:
    id: str
    kind: RequirementKind
    statement: str
    span: Optional[SourceSpan] = _span


@dataclass(frozen=True)
class PerformanceCriterion:
    id: str
    metric_name: str
    threshold: Decimal
    direction: Direction
    description: Optional[str] = None
    span: Optional[SourceSpan] = _span


@dataclass(frozen=True)
class DeploymentSpec:
    pattern: DeploymentPattern
    strategy: DeploymentStrategy
    inference_mode: InferenceMode
    platform: Optional[str] = None
    scripts: tuple[str, ...] = ()
    span: Optional[SourceSpan] = _span


@dataclass(frozen=True)
class AIModelFlaw:
    id: str
    description: str
    related_to: Optional[str] = None
    span: Optional[SourceSpan] = _span


@dataclass(frozen=True)
class PerformanceMetric:
    id: str
    name: str
    min_threshold: Decimal
    max_threshold: Decimal
    unit: Optional[str] = None
    span: Optional[SourceSpan] = _span


@dataclass(frozen=True)
class MonitoringSpec:
    flaws: tuple[AIModelFlaw, ...] = ()
    metrics: tuple[PerformanceMetric, ...] = ()
    span: Optional[SourceSpan] = _span


@dataclass(frozen=True)
class RequirementsSpec:
    goals: tuple[Goal, ...] = ()
    criteria: tuple[SuccessCriterion, ...] = ()
    requirements: tuple[Requirement, ...] = ()


@dataclass(frozen=True)
class TrainingSpec:
    performance_criteria: tuple[PerformanceCriterion, ...] = ()


Payload = Union[RequirementsSpec, TrainingSpec, DeploymentSpec, MonitoringSpec]

# activity kinds that may carry each payload section
PAYLOAD_KINDS: dict[str, frozenset[ActivityKind]] = {
    "goals": frozenset({ActivityKind.REQUIREMENTS_ENGINEERING}),
    "criteria": frozenset({ActivityKind.REQUIREMENTS_ENGINEERING}),
    "requirements": frozenset({ActivityKind.REQUIREMENTS_ENGINEERING,
                               ActivityKind.DATA_IDENTIFICATION}),
    "performance_criteria": frozenset({ActivityKind.AI_MODEL_TRAINING}),
    "deployment": frozenset({ActivityKind.AI_MODEL_DEPLOYMENT}),
    "monitoring": frozenset({ActivityKind.AI_MODEL_MONITORING}),
}


# --- activities and the method root -------------------------------------------

@dataclass(frozen=True)
class FlowEdge:
    source: str
    target: str
    span: Optional[SourceSpan] = _span


@dataclass(frozen=True)
class Activity:
    id: str
    display_name: str
    kind: ActivityKind
    description: Optional[str] = None
    is_optional: bool = False
    requires_all_subactivities: bool = False
    sub_activities: tuple["Activity", ...] = ()
    flows: tuple[FlowEdge, ...] = ()
    inputs: tuple[str, ...] = ()
    outputs: tuple[str, ...] = ()
    resources: tuple[str, ...] = ()
    techniques: tuple[str, ...] = ()
    participants: tuple[Participant, ...] = ()
    goals: tuple[Goal, ...] = ()
    criteria: tuple[SuccessCriterion, ...] = ()
    requirements: tuple[Requirement, ...] = ()
    performance_criteria: tuple[PerformanceCriterion, ...] = ()
    deployment: Optional[DeploymentSpec] = None
    monitoring: Optional[MonitoringSpec] = None
    span: Optional[SourceSpan] = _span

    @property
    def is_leaf(self) -> bool:
        return not self.sub_activities

    def payload_sections(self) -> list[str]:
        """Names of the kind-specific sections this activity carries."""
        present = []
        for name in PAYLOAD_KINDS:
            value = getattr(self, name)
            if value:
                present.append(name)
        return present

    @property
    def payload(self) -> Optional[Payload]:
        if self.deployment is not None:
            return self.deployment
        if self.monitoring is not None:
            return self.monitoring
        if self.performance_criteria:
            return TrainingSpec(self.performance_criteria)
        if self.goals or self.criteria or self.requirements:
            return RequirementsSpec(self.goals, self.criteria, self.requirements)
        return None


Element = Union[Role, Technique, Artifact, Resource, Activity, Goal, SuccessCriterion,
                Requirement, PerformanceCriterion, AIModelFlaw, PerformanceMetric]


class CycleError(MlprocError):
    def __init__(self, nodes: list[str]):
        super().__init__("R005", "flow cycle among " + ", ".join(nodes))
        self.nodes = nodes


@dataclass(frozen=True)
class Method:
    name: str
    description: Optional[str] = None
    roles: tuple[Role, ...] = ()
    techniques: tuple[Technique, ...] = ()
    artifacts: tuple[Artifact, ...] = ()
    resources: tuple[Resource, ...] = ()
    activities: tuple[Activity, ...] = ()
    flows: tuple[FlowEdge, ...] = ()
    span: Optional[SourceSpan] = _span
    _index: dict = field(default_factory=dict, init=False, compare=False, repr=False)
    _parents: dict = field(default_factory=dict, init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        index: dict[str, Element] = {}
        parents: dict[str, Optional[str]] = {}
        for element in self.iter_elements():
            index.setdefault(element.id, element)
        for parent, act in self._walk(self.activities, None):
            parents[act.id] = parent.id if parent else None
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_parents", parents)

    # traversal ----------------------------------------------------------------

    @staticmethod
    def _walk(acts, parent) -> Iterator[tuple[Optional[Activity], Activity]]:
        for act in acts:
            yield parent, act
            yield from Method._walk(act.sub_activities, act)

    def iter_activities(self) -> Iterator[Activity]:
        """All activities, depth-first pre-order in declaration order."""
        for _, act in self._walk(self.activities, None):
            yield act

    def iter_elements(self) -> Iterator[Element]:
        """Every element carrying an id, in a stable order."""
        yield from self.roles
        yield from self.techniques
        yield from self.artifacts
        yield from self.resources
        for act in self.iter_activities():
            yield act
            yield from act.goals
            yield from act.criteria
            yield from act.requirements
            yield from act.performance_criteria
            if act.monitoring is not None:
                yield from act.monitoring.flaws
                yield from act.monitoring.metrics

    # queries ------------------------------------------------------------------

    def lookup(self, element_id: str) -> Optional[Element]:
        return self._index.get(element_id)

    def activity(self, activity_id: str) -> Activity:
        element = self._index.get(activity_id)
        if not isinstance(element, Activity):
            raise KeyError(f"no activity named {activity_id!r}")
        return element

    def parent_of(self, activity_id: str) -> Optional[Activity]:
        if activity_id not in self._parents:
            raise KeyError(f"no activity named {activity_id!r}")
        parent = self._parents[activity_id]
        return None if parent is None else self._index[parent]

    def children_of(self, container: Union["Method", Activity]) -> tuple[Activity, ...]:
        return container.activities if isinstance(container, Method) else container.sub_activities

    def predecessors(self, activity_id: str) -> list[str]:
        container = self.parent_of(activity_id) or self
        return [f.source for f in container.flows if f.target == activity_id]

    def successors(self, activity_id: str) -> list[str]:
        container = self.parent_of(activity_id) or self
        return [f.target for f in container.flows if f.source == activity_id]

    def ancestors(self, activity_id: str) -> list[str]:
        chain = []
        parent = self._parents[activity_id]
        while parent is not None:
            chain.append(parent)
            parent = self._parents[parent]
        return chain


def lookup(method: Method, element_id: str) -> Optional[Element]:
    return method.lookup(element_id)


def parent_of(method: Method, activity_id: str) -> Optional[Activity]:
    return method.parent_of(activity_id)


def topological_order(container: Union[Method, Activity]) -> list[str]:
    """Child activity ids of ``container`` ordered consistently with its flows.

    Ties are broken by declaration order. Edges whose endpoints are not both
    children of the container are ignored. Raises :class:`CycleError` naming
    the activities left unordered when the flow graph is cyclic.
    """
    children = container.activities if isinstance(container, Method) else container.sub_activities
    position = {a.id: i for i, a in enumerate(children)}
    succ: dict[str, list[str]] = {a.id: [] for a in children}
    indegree = dict.fromkeys(position, 0)
    for edge in container.flows:
        if edge.source in position and edge.target in position:
            succ[edge.source].append(edge.target)
            indegree[edge.target] += 1
    heap = [position[n] for n, d in indegree.items() if d == 0]
    heapq.heapify(heap)
    order: list[str] = []
    while heap:
        node = children[heapq.heappop(heap)].id
        order.append(node)
        for nxt in succ[node]:
            indegree[nxt] -= 1
            if indegree[nxt] == 0:
                heapq.heappush(heap, position[nxt])
    if len(order) != len(children):
        cyclic = [n for comp in cyclic_components([a.id for a in children], succ) for n in comp]
        raise CycleError(cyclic)
    return order


def cyclic_components(nodes: list[str], succ: dict[str, list[str]]) -> list[list[str]]:
    """Strongly connected components that contain a cycle (Tarjan).

    Each component lists its nodes in the order of ``nodes``; components are
    ordered by their earliest node.
    """
    position = {n: i for i, n in enumerate(nodes)}
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    comps: list[list[str]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in position:
                    continue
                if nxt not in index:
                    index[nxt] = low[nxt] = counter
                    counter += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(succ.get(nxt, ()))))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    top = stack.pop()
                    on_stack.discard(top)
                    comp.append(top)
                    if top == node:
                        break
                if len(comp) > 1 or node in succ.get(node, ()):
                    comps.append(sorted(comp, key=position.__getitem__))
    comps.sort(key=lambda c: position[c[0]])
    return comps
