"""Step-by-step execution of a process model.

An instance tracks one lifecycle state per activity and an append-only event
log. Activities move NotReady -> Ready -> Running -> Completed; optional ones
may be skipped while Ready or Running. Completing a composite whose
``requiresAll`` is false skips whatever is left underneath it, and skipping
a composite skips its whole subtree.

An activity is Ready once its parent is Running (top-level activities have
no parent to wait for) and every flow predecessor is Completed or Skipped.

Each operation logs its primary event first, then the descendants it
skipped, then activities that became Ready (flow order, then declaration
order), then ``InstanceCompleted`` when every top-level activity is done.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Optional

from . import metamodel as mm
from .diagnostics import MlprocError, has_errors
from .semantics import validate


class ActivityState(enum.Enum):
    NOT_READY = "NotReady"
    READY = "Ready"
    RUNNING = "Running"
    COMPLETED = "Completed"
    SKIPPED = "Skipped"

    @property
    def terminal(self) -> bool:
        return self in (ActivityState.COMPLETED, ActivityState.SKIPPED)


class EventKind(enum.Enum):
    INSTANCE_CREATED = "InstanceCreated"
    ACTIVITY_READY = "ActivityReady"
    ACTIVITY_STARTED = "ActivityStarted"
    ACTIVITY_COMPLETED = "ActivityCompleted"
    ACTIVITY_SKIPPED = "ActivitySkipped"
    INSTANCE_COMPLETED = "InstanceCompleted"


# state an event leaves its activity in
_EVENT_STATE = {
    EventKind.ACTIVITY_READY: ActivityState.READY,
    EventKind.ACTIVITY_STARTED: ActivityState.RUNNING,
    EventKind.ACTIVITY_COMPLETED: ActivityState.COMPLETED,
    EventKind.ACTIVITY_SKIPPED: ActivityState.SKIPPED,
}
_INSTANCE_EVENTS = (EventKind.INSTANCE_CREATED, EventKind.INSTANCE_COMPLETED)


@dataclass(frozen=True)
class Event:
    seq: int
    kind: EventKind
    activity_id: Optional[str] = None

    def render(self) -> str:
        if self.activity_id is None:
            return f"{self.seq} {self.kind.value}"
        return f"{self.seq} {self.kind.value} {self.activity_id}"


def format_log(events: Iterable[Event]) -> str:
    return "".join(e.render() + "\n" for e in events)


def parse_log(text: str) -> list[Event]:
    """Inverse of :func:`format_log`. Blank lines are ignored."""
    kinds = {k.value: k for k in EventKind}
    events = []
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts:
            continue
        bad = MlprocError("N007", f"line {lineno}: cannot parse event {line.strip()!r}")
        if len(parts) not in (2, 3) or not parts[0].isdigit() or parts[1] not in kinds:
            raise bad
        kind = kinds[parts[1]]
        if (kind in _INSTANCE_EVENTS) != (len(parts) == 2):
            raise bad
        events.append(Event(int(parts[0]), kind, parts[2] if len(parts) == 3 else None))
    return events


def execution_order(model: mm.Method) -> list[str]:
    """Pre-order over the activity tree with siblings in flow order."""
    order: list[str] = []

    def visit(container) -> None:
        for aid in mm.topological_order(container):
            order.append(aid)
            visit(model.activity(aid))

    visit(model)
    return order


@dataclass
class Instance:
    model: mm.Method
    states: dict[str, ActivityState] = field(default_factory=dict)
    log: list[Event] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._order = execution_order(self.model)
        self._rank = {aid: i for i, aid in enumerate(self._order)}
        if not self.states:
            self.states = dict.fromkeys(self._order, ActivityState.NOT_READY)

    # queries ------------------------------------------------------------------

    @property
    def completed(self) -> bool:
        return bool(self.log) and self.log[-1].kind is EventKind.INSTANCE_COMPLETED

    def state(self, activity_id: str) -> ActivityState:
        if activity_id not in self.states:
            raise MlprocError("N008", f"no activity named {activity_id!r}")
        return self.states[activity_id]

    def ready(self) -> list[str]:
        return [a for a in self._order if self.states[a] is ActivityState.READY]

    def running(self) -> list[str]:
        return [a for a in self._order if self.states[a] is ActivityState.RUNNING]

    # internals ----------------------------------------------------------------

    def _emit(self, kind: EventKind, activity_id: Optional[str] = None) -> None:
        self.log.append(Event(len(self.log) + 1, kind, activity_id))
        if activity_id is not None:
            self.states[activity_id] = _EVENT_STATE[kind]

    def _eligible(self, activity_id: str) -> bool:
        parent = self.model.parent_of(activity_id)
        if parent is not None and self.states[parent.id] is not ActivityState.RUNNING:
            return False
        return all(self.states[p].terminal for p in self.model.predecessors(activity_id))

    def _promote(self) -> None:
        for aid in self._order:
            if self.states[aid] is ActivityState.NOT_READY and self._eligible(aid):
                self._emit(EventKind.ACTIVITY_READY, aid)

    def _skip_descendants(self, activity: mm.Activity) -> None:
        for child in self._subtree(activity):
            if not self.states[child].terminal:
                self._emit(EventKind.ACTIVITY_SKIPPED, child)

    def _subtree(self, activity: mm.Activity) -> list[str]:
        ids = []
        for child in activity.sub_activities:
            ids.append(child.id)
            ids.extend(self._subtree(child))
        return sorted(ids, key=self._rank.__getitem__)

    def _finish_step(self) -> None:
        self._promote()
        if not self.completed and all(self.states[a.id].terminal for a in self.model.activities):
            self._emit(EventKind.INSTANCE_COMPLETED)

    # operations ---------------------------------------------------------------

    def start(self, activity_id: str) -> "Instance":
        current = self.state(activity_id)
        if current is not ActivityState.READY:
            raise MlprocError("N002", f"cannot start '{activity_id}': it is {current.value}, "
                              "not Ready")
        self._emit(EventKind.ACTIVITY_STARTED, activity_id)
        self._promote()
        return self

    def complete(self, activity_id: str) -> "Instance":
        current = self.state(activity_id)
        if current is not ActivityState.RUNNING:
            raise MlprocError("N003", f"cannot complete '{activity_id}': it is "
                              f"{current.value}, not Running")
        activity = self.model.activity(activity_id)
        if activity.requires_all_subactivities:
            pending = [c.id for c in activity.sub_activities if not self.states[c.id].terminal]
            if pending:
                raise MlprocError("N004", f"cannot complete '{activity_id}': requiresAll is "
                                  "set and these sub-activities are unfinished: "
                                  + ", ".join(pending))
        self._emit(EventKind.ACTIVITY_COMPLETED, activity_id)
        self._skip_descendants(activity)
        self._finish_step()
        return self

    def skip(self, activity_id: str) -> "Instance":
        current = self.state(activity_id)
        activity = self.model.activity(activity_id)
        if not activity.is_optional:
            raise MlprocError("N005", f"cannot skip '{activity_id}': it is mandatory")
        if current not in (ActivityState.READY, ActivityState.RUNNING):
            raise MlprocError("N006", f"cannot skip '{activity_id}' while it is {current.value}")
        self._emit(EventKind.ACTIVITY_SKIPPED, activity_id)
        self._skip_descendants(activity)
        self._finish_step()
        return self


def create_instance(model: mm.Method) -> Instance:
    """New instance with top-level flow sources Ready; raises N001 on an invalid model."""
    diagnostics = validate(model)
    if has_errors(diagnostics):
        raise MlprocError("N001", "model has validation errors", diagnostics)
    instance = Instance(model)
    instance._emit(EventKind.INSTANCE_CREATED)
    instance._finish_step()
    return instance


def start(instance: Instance, activity_id: str) -> Instance:
    return instance.start(activity_id)


def complete(instance: Instance, activity_id: str) -> Instance:
    return instance.complete(activity_id)


def skip(instance: Instance, activity_id: str) -> Instance:
    return instance.skip(activity_id)


def status(instance: Instance) -> str:
    """Plain-text report: one block per top-level activity, then the Ready set."""
    model = instance.model
    overall = "Completed" if instance.completed else "Running"
    lines = [f"{model.name}: {overall}"]

    def visit(activity: mm.Activity, depth: int) -> None:
        lines.append(f"{'  ' * depth}{activity.display_name}: "
                     f"{instance.states[activity.id].value}")
        for cid in mm.topological_order(activity):
            visit(model.activity(cid), depth + 1)

    for aid in mm.topological_order(model):
        lines.append("")
        visit(model.activity(aid), 0)
    ready = instance.ready()
    lines.append("")
    lines.append("Ready: " + (", ".join(ready) if ready else "none"))
    return "\n".join(lines) + "\n"


def fold_log(model: mm.Method, events: Iterable[Event]) -> dict[str, ActivityState]:
    """States implied by a log, without checking that the log is legal."""
    states = dict.fromkeys(execution_order(model), ActivityState.NOT_READY)
    for event in events:
        if event.kind in _EVENT_STATE:
            if event.activity_id not in states:
                raise MlprocError("N008", f"seq {event.seq}: no activity named "
                                  f"{event.activity_id!r}")
            states[event.activity_id] = _EVENT_STATE[event.kind]
    return states


class ReplayError(MlprocError):
    def __init__(self, seq: int, message: str):
        super().__init__("N007", f"seq {seq}: {message}")
        self.seq = seq


_COMMANDS = {
    EventKind.ACTIVITY_STARTED: Instance.start,
    EventKind.ACTIVITY_COMPLETED: Instance.complete,
    EventKind.ACTIVITY_SKIPPED: Instance.skip,
}


def replay(model: mm.Method, events: list[Event]) -> Instance:
    """Re-drive a fresh instance through ``events``.

    Every event must either be what the engine itself logs as a consequence
    of the previous command, or a legal start/complete/skip command. Raises
    :class:`ReplayError` carrying the seq of the first offending event.
    """
    instance = create_instance(model)
    for i, event in enumerate(events):
        if event.seq != i + 1:
            raise ReplayError(i + 1, f"entry carries seq {event.seq}")
        if i < len(instance.log):
            expected = instance.log[i]
            if expected != event:
                raise ReplayError(event.seq, f"expected '{expected.render()}', "
                                  f"found '{event.render()}'")
            continue
        command = _COMMANDS.get(event.kind)
        if command is None or event.activity_id is None:
            raise ReplayError(event.seq, f"'{event.render()}' is not a command event here")
        try:
            command(instance, event.activity_id)
        except MlprocError as err:
            raise ReplayError(event.seq, err.message) from err
    if len(instance.log) > len(events):
        missing = instance.log[len(events)]
        raise ReplayError(missing.seq, f"log ends before '{missing.render()}'")
    return instance


def greedy_step(instance: Instance) -> bool:
    """Advance by one command; False once nothing is left to do.

    Running activities whose children are all finished complete first,
    deepest first; otherwise the first Ready activity starts.
    """
    if instance.completed:
        return False
    model = instance.model
    done = [a for a in instance.running()
            if all(instance.states[c.id].terminal for c in model.activity(a).sub_activities)]
    if done:
        target = max(done, key=lambda a: (len(model.ancestors(a)), -instance._rank[a]))
        instance.complete(target)
        return True
    ready = instance.ready()
    if ready:
        instance.start(ready[0])
        return True
    raise RuntimeError("enactment is stuck: nothing Ready and nothing completable")


def run_greedy(instance: Instance, until=None) -> Instance:
    """Apply :func:`greedy_step` until completion or until ``until(instance)`` holds."""
    while not (until and until(instance)) and greedy_step(instance):
        pass
    return instance
