"""Arc-eager transition system over EDU spans.

A span is any ordered sequence of EDU ids: a sentence's contiguous ids
for intra-sentential parsing, or the (possibly gapped) sequence of
sentence-root ids for inter-sentential parsing.  Projectivity is always
meant with respect to the span order.

The parser maintains a stack, a queue and an arc set.  Shift pushes the
queue front; LeftArc attaches the stack top to the queue front and pops
it; RightArc attaches the queue front to the stack top and pushes it;
Reduce pops an already-attached stack top.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Callable, Mapping, Sequence


class TransitionError(ValueError):
    """Raised when an action is applied in a state that forbids it."""


class Action(IntEnum):
    Shift = 0
    LeftArc = 1
    RightArc = 2
    Reduce = 3


ACTIONS = tuple(Action)


@dataclass(frozen=True)
class ParserState:
    stack: tuple[int, ...]
    queue: tuple[int, ...]
    arcs: frozenset[tuple[int, int]]
    span: tuple[int, ...]

    def head_of(self, edu_id: int) -> int | None:
        for h, d in self.arcs:
            if d == edu_id:
                return h
        return None

    def has_head(self, edu_id: int) -> bool:
        return self.head_of(edu_id) is not None


def initial_state(span: Sequence[int]) -> ParserState:
    if not span:
        raise TransitionError("cannot initialize a parser on an empty span")
    return ParserState(stack=(), queue=tuple(span), arcs=frozenset(), span=tuple(span))


def legal_actions(state: ParserState) -> set[Action]:
    legal = set()
    if state.queue:
        legal.add(Action.Shift)
        if state.stack:
            legal.add(Action.RightArc)
            if not state.has_head(state.stack[-1]):
                legal.add(Action.LeftArc)
    if state.stack and state.has_head(state.stack[-1]):
        legal.add(Action.Reduce)
    return legal


def apply(state: ParserState, action: Action) -> ParserState:
    """Apply one action, returning the successor state.

    The input state is never mutated.  Illegal actions raise
    TransitionError naming the violated precondition.
    """
    if action == Action.Shift:
        if not state.queue:
            raise TransitionError("Shift requires a non-empty queue")
        return ParserState(state.stack + (state.queue[0],), state.queue[1:],
                           state.arcs, state.span)
    if action == Action.LeftArc:
        if not state.queue or not state.stack:
            raise TransitionError("LeftArc requires a non-empty queue and stack")
        top = state.stack[-1]
        if state.has_head(top):
            raise TransitionError(f"LeftArc target {top} already has a head")
        arc = (state.queue[0], top)
        return ParserState(state.stack[:-1], state.queue,
                           state.arcs | {arc}, state.span)
    if action == Action.RightArc:
        if not state.queue or not state.stack:
            raise TransitionError("RightArc requires a non-empty queue and stack")
        front = state.queue[0]
        arc = (state.stack[-1], front)
        return ParserState(state.stack + (front,), state.queue[1:],
                           state.arcs | {arc}, state.span)
    if action == Action.Reduce:
        if not state.stack:
            raise TransitionError("Reduce requires a non-empty stack")
        if not state.has_head(state.stack[-1]):
            raise TransitionError(f"Reduce target {state.stack[-1]} has no head")
        return ParserState(state.stack[:-1], state.queue, state.arcs, state.span)
    raise TransitionError(f"unknown action {action!r}")


def is_terminal(state: ParserState) -> bool:
    """True once the queue is drained and only the span root lacks a head."""
    if state.queue:
        return False
    headless = [i for i in state.stack if not state.has_head(i)]
    return len(headless) == 1


def oracle_actions(span: Sequence[int], gold: Mapping[int, int]) -> list[Action]:
    """Static oracle: the canonical action sequence deriving a gold tree.

    `gold` maps every span id to its head id, with 0 marking the span
    root.  The rule order is: LeftArc when the stack top's gold head is
    the queue front; RightArc when the queue front's gold head is the
    stack top; Reduce when the stack top is attached and has no gold
    dependents left in the queue; Shift otherwise.
    """
    span = tuple(span)
    _check_span_tree(span, gold)
    state = initial_state(span)
    actions: list[Action] = []
    while state.queue:
        front = state.queue[0]
        if state.stack:
            top = state.stack[-1]
            if gold[top] == front:
                action = Action.LeftArc
            elif gold.get(front) == top:
                action = Action.RightArc
            elif state.has_head(top) and all(gold[q] != top for q in state.queue):
                action = Action.Reduce
            else:
                action = Action.Shift
        else:
            action = Action.Shift
        actions.append(action)
        state = apply(state, action)
    return actions


def replay(span: Sequence[int], actions: Sequence[Action]) -> ParserState:
    state = initial_state(span)
    for action in actions:
        state = apply(state, action)
    return state


ScoreFn = Callable[[ParserState], Sequence[float]]


def decode(span: Sequence[int], score_fn: ScoreFn) -> dict[int, int]:
    """Greedy decoding; returns a head map over the span (root head = 0).

    The highest-scoring legal action is taken until the queue empties
    (ties broken by the lowest action index).  The stack is then drained
    with Reduce where legal, and any headless survivors other than the
    bottom-most one are attached to it; that EDU becomes the span root.
    The result is always a valid projective single-rooted span tree.
    """
    span = tuple(span)
    state = initial_state(span)
    if len(span) == 1:
        return {span[0]: 0}
    while state.queue:
        legal = legal_actions(state)
        scores = score_fn(state)
        best = max(
            (a for a in ACTIONS if a in legal),
            key=lambda a: (scores[a.value], -a.value),
        )
        state = apply(state, best)
    while len(state.stack) > 1 and state.has_head(state.stack[-1]):
        state = apply(state, Action.Reduce)

    heads = {d: h for h, d in state.arcs}
    headless = [i for i in state.stack if i not in heads]
    root = headless[0]
    for straggler in headless[1:]:
        heads[straggler] = root
    heads[root] = 0
    return heads


def span_heads_from_tree(span: Sequence[int], tree_heads: Mapping[int, int]) -> dict[int, int]:
    """Restrict a head map to a span, re-rooting heads that fall outside it."""
    span_set = set(span)
    return {i: (tree_heads[i] if tree_heads[i] in span_set else 0) for i in span}


def is_valid_span_tree(span: Sequence[int], gold: Mapping[int, int]) -> bool:
    """True when the head map is a single-rooted projective tree over the span."""
    try:
        _check_span_tree(tuple(span), gold)
    except TransitionError:
        return False
    return True


def _check_span_tree(span: tuple[int, ...], gold: Mapping[int, int]) -> None:
    from . import corpus

    pos = {edu_id: i + 1 for i, edu_id in enumerate(span)}
    try:
        heads = tuple(pos[gold[i]] if gold[i] != 0 else 0 for i in span)
    except KeyError as exc:
        raise TransitionError(f"gold head {exc} outside span") from None
    report = corpus.validate_tree(len(span), corpus.DependencyTree(heads, ("ROOT",) * len(span)))
    if not report.ok:
        raise TransitionError(f"gold span tree invalid: {report}")
