"""Class membership over a snapshot ontology, and edit-to-mention resolution.

Membership follows ``instanceOf`` once and then ``subclassOf`` zero or more
times. ``subclassOf`` cycles are tolerated: every member of a cycle shares
one closure set.
"""
from __future__ import annotations

import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, MutableMapping

from .observations import Mention

log = logging.getLogger(__name__)

INSTANCE_OF = "instanceOf"
SUBCLASS_OF = "subclassOf"
_RELATION_ALIASES = {
    "instanceof": INSTANCE_OF,
    "p31": INSTANCE_OF,
    "subclassof": SUBCLASS_OF,
    "p279": SUBCLASS_OF,
}
DEFAULT_ENTITY_PATTERN = r"Q[0-9]+"


def _strongly_connected(graph: Mapping[str, Iterable[str]], nodes: Iterable[str]):
    """Tarjan's algorithm, iterative. Components come out in reverse topological order."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(graph.get(root, ())))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, children = work[-1]
            advanced = False
            for child in children:
                if child not in index:
                    index[child] = low[child] = counter
                    counter += 1
                    stack.append(child)
                    on_stack.add(child)
                    work.append((child, iter(graph.get(child, ()))))
                    advanced = True
                    break
                if child in on_stack:
                    low[node] = min(low[node], index[child])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                yield component


@dataclass
class OntologyIndex:
    instance_of: dict[str, set[str]] = field(default_factory=dict)
    subclass_of: dict[str, set[str]] = field(default_factory=dict)
    closure: dict[str, frozenset[str]] = field(default_factory=dict)

    def superclasses(self, class_id: str) -> frozenset[str]:
        """Reflexive, transitive superclasses of ``class_id``."""
        found = self.closure.get(class_id)
        return found if found is not None else frozenset((class_id,))

    def classes_of(self, entity: str) -> frozenset[str]:
        direct = self.instance_of.get(entity)
        if not direct:
            return frozenset()
        out: set[str] = set()
        for c in direct:
            out |= self.superclasses(c)
        return frozenset(out)

    def compute_closure(self):
        classes = set(self.subclass_of)
        for parents in self.subclass_of.values():
            classes |= parents
        for direct in self.instance_of.values():
            classes |= direct
        closure: dict[str, frozenset[str]] = {}
        for component in _strongly_connected(self.subclass_of, sorted(classes)):
            members = set(component)
            acc = set(members)
            for c in component:
                for parent in self.subclass_of.get(c, ()):
                    if parent not in members:
                        acc |= closure[parent]
            frozen = frozenset(acc)
            for c in component:
                closure[c] = frozen
        self.closure = closure


def build_index(
    statements: Iterable[tuple[str, str, str]],
    counters: MutableMapping[str, int] | None = None,
) -> OntologyIndex:
    """Build an index from ``(entity, relation, target)`` statements.

    Unknown relations are skipped and counted under ``unknown_relation``.
    """
    index = OntologyIndex()
    unknown = 0
    for entity, relation, target in statements:
        rel = _RELATION_ALIASES.get(relation.strip().lower())
        if rel is None or not entity or not target:
            unknown += 1
            continue
        table = index.instance_of if rel == INSTANCE_OF else index.subclass_of
        table.setdefault(entity, set()).add(target)
    if unknown:
        log.warning("skipped %d ontology statement(s) with unknown relation", unknown)
    if counters is not None:
        counters["unknown_relation"] = counters.get("unknown_relation", 0) + unknown
    index.compute_closure()
    return index


def classes_of(index: OntologyIndex, entity: str) -> frozenset[str]:
    return index.classes_of(entity)


@dataclass(frozen=True)
class CompositeClassSpec:
    """A class restricted to instances carrying given ``(property, target)`` edges."""

    base_class: str
    filters: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "filters", tuple((p, v) for p, v in self.filters))

    @property
    def token(self) -> str:
        """Class token used in mention files, e.g. ``Q515|P17=Q142``."""
        if not self.filters:
            return self.base_class
        return "|".join([self.base_class] + [f"{p}={v}" for p, v in self.filters])

    @classmethod
    def parse(cls, token: str) -> "CompositeClassSpec":
        base, *rest = token.split("|")
        filters = []
        for part in rest:
            prop, sep, target = part.partition("=")
            if not sep or not prop or not target:
                raise ValueError(f"malformed composite filter {part!r} in {token!r}")
            filters.append((prop, target))
        if not base:
            raise ValueError(f"missing base class in {token!r}")
        return cls(base, tuple(filters))


PropertyGraph = Mapping[tuple[str, str], set[str]]


def build_property_graph(triples: Iterable[tuple[str, str, str]]) -> dict[tuple[str, str], set[str]]:
    graph: dict[tuple[str, str], set[str]] = {}
    for entity, prop, target in triples:
        graph.setdefault((entity, prop), set()).add(target)
    return graph


def members_of_composite(
    index: OntologyIndex, spec: CompositeClassSpec, property_graph: PropertyGraph
) -> set[str]:
    members = set()
    for entity in index.instance_of:
        if spec.base_class not in index.classes_of(entity):
            continue
        if all(v in property_graph.get((entity, p), ()) for p, v in spec.filters):
            members.add(entity)
    return members


@dataclass(frozen=True, slots=True)
class EditRecord:
    subject: str
    property: str
    object: str
    timestamp: int
    user: str = ""

    def __post_init__(self):
        if not self.subject or not self.property:
            raise ValueError("subject and property must be non-empty")


class MembershipResolver:
    """Maps an entity to the class tokens it contributes mentions to.

    Without a class filter every class in the entity's closure counts. With
    a filter, plain class ids are intersected with the closure and
    composite specs are evaluated against ``property_graph``.
    """

    def __init__(
        self,
        index: OntologyIndex,
        class_filter: Iterable[str | CompositeClassSpec] | None = None,
        property_graph: PropertyGraph | None = None,
    ):
        self.index = index
        self._cache: dict[str, tuple[str, ...]] = {}
        self.plain: set[str] | None = None
        self.composite: dict[str, set[str]] = {}
        if class_filter is not None:
            self.plain = set()
            for item in class_filter:
                spec = CompositeClassSpec.parse(item) if isinstance(item, str) else item
                if spec.filters:
                    self.composite[spec.token] = members_of_composite(
                        index, spec, property_graph or {}
                    )
                else:
                    self.plain.add(spec.base_class)

    def __call__(self, entity: str) -> tuple[str, ...]:
        found = self._cache.get(entity)
        if found is None:
            found = self._cache[entity] = self._resolve(entity)
        return found

    def _resolve(self, entity: str) -> tuple[str, ...]:
        classes = self.index.classes_of(entity)
        if self.plain is None:
            return tuple(sorted(classes))
        out = set(classes & self.plain)
        out.update(tok for tok, members in self.composite.items() if entity in members)
        return tuple(sorted(out))


def resolve_edits(
    edits: Iterable[EditRecord],
    index: OntologyIndex,
    class_filter: Iterable[str | CompositeClassSpec] | None = None,
    property_graph: PropertyGraph | None = None,
    entity_pattern: str = DEFAULT_ENTITY_PATTERN,
    counters: MutableMapping[str, int] | None = None,
) -> Iterator[Mention]:
    """Emit one mention per (edit side, class) pair.

    The subject always counts as an entity. The object counts only when it
    matches ``entity_pattern``; anything else is a literal. A self-loop edit
    yields one mention per position.
    """
    resolver = MembershipResolver(index, class_filter, property_graph)
    is_entity = re.compile(entity_pattern).fullmatch
    stats = Counter()
    for edit in edits:
        stats["edits_read"] += 1
        emitted = 0
        sides = [edit.subject]
        if edit.object and is_entity(edit.object):
            sides.append(edit.object)
        for entity in sides:
            for class_id in resolver(entity):
                emitted += 1
                yield Mention(entity, class_id, edit.timestamp)
        stats["mentions_emitted"] += emitted
        stats["edits_contributing" if emitted else "edits_unmatched"] += 1
    if counters is not None:
        for key, value in stats.items():
            counters[key] = counters.get(key, 0) + value
