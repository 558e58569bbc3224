"""Language-generic reduction: list ddmin, per-level tree sweeps, and
grammar-aware node deletion/replacement.

Every candidate produced here is grammatical by construction; an
instrumented re-parse guards that assumption and aborts loudly if it is
ever violated.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from . import tree as T
from .errors import InternalReducerError
from .program import SourceProgram


def ddmin(items, test):
    """Zeller-style minimization of ``items`` under ``test``.

    ``test(items)`` must hold on entry. The result R satisfies ``test(R)``
    and is 1-minimal: removing any single element makes the test fail.
    Exceptions raised by ``test`` propagate.
    """
    if not test(items):
        raise ValueError("test fails on the initial input")
    if test([]):
        return []
    current = list(items)
    granularity = 2
    while len(current) >= 2:
        chunks = _split(current, granularity)
        reduced = False
        # Try each chunk alone.
        for chunk in chunks:
            if len(chunk) < len(current) and test(chunk):
                current = chunk
                granularity = 2
                reduced = True
                break
        if not reduced:
            # Try each complement.
            for i in range(len(chunks)):
                complement = [x for j, c in enumerate(chunks) if j != i for x in c]
                if len(complement) < len(current) and test(complement):
                    current = complement
                    granularity = max(granularity - 1, 2)
                    reduced = True
                    break
        if not reduced:
            if granularity >= len(current):
                break
            granularity = min(granularity * 2, len(current))
    return current


def _split(items, n):
    chunks = []
    start = 0
    for i in range(n):
        end = start + (len(items) - start) // (n - i)
        if end > start:
            chunks.append(items[start:end])
        start = end
    return chunks


@dataclass
class ReductionConfig:
    max_passes: int = 20
    enable_subtree_replacement: bool = True

    def __post_init__(self):
        if self.max_passes < 1:
            raise ValueError("max_passes must be >= 1")


@dataclass
class ReductionOutcome:
    program: SourceProgram
    oracle_queries: int
    wall_time: float
    size_before: int
    size_after: int
    invalid_candidates: int = 0


def _deletable_paths(root):
    """Paths of nodes sitting in a deletable grammar position: children of
    star/optional quantifiers, or of plus quantifiers that keep >= 1 child."""
    out = []
    for path, node in T.iter_paths(root):
        if not isinstance(node, T.QuantNode):
            continue
        if node.op in ("*", "?") or (node.op == "+" and len(node.children) > 1):
            for i in range(len(node.children)):
                out.append(path + (i,))
    return out


def _check_tree(root, oracle, grammar, stats):
    text = T.serialize(root)
    try:
        T.parse(text, grammar)
    except Exception as exc:
        stats["invalid"] += 1
        raise InternalReducerError(
            f"generated an unparseable candidate: {exc}") from exc
    return oracle.check(SourceProgram(text, grammar))


def hdd_reduce(parse_tree: T.ParseTree, oracle) -> T.ParseTree:
    """Per-level sweep: at each tree depth, ddmin the set of deletable
    nodes of that depth against the oracle."""
    grammar = parse_tree.grammar
    root = parse_tree.root
    if not oracle.check(SourceProgram(T.serialize(root), grammar)):
        raise ValueError("oracle fails on the initial tree")
    stats = {"invalid": 0}
    depth = 0
    while True:
        level = [p for p in _deletable_paths(root) if len(p) == depth]
        if depth > _max_depth(root):
            break
        if level:
            def test(kept, _root=root, _level=level):
                kept_set = set(map(tuple, kept))
                candidate = _delete_many(_root, [p for p in _level if p not in kept_set])
                if candidate is None:
                    return False
                return _check_tree(candidate, oracle, grammar, stats)

            kept = ddmin(level, test)
            root = _delete_many(root, [p for p in level if p not in set(kept)])
        depth += 1
    return T.ParseTree(root, grammar)


def _max_depth(root):
    best = 0
    for path, _ in T.iter_paths(root):
        best = max(best, len(path))
    return best


def _delete_many(root, paths):
    """Delete several nodes; paths are removed deepest/right-most first so
    earlier deletions do not shift later indices."""
    for path in sorted(paths, key=lambda p: (len(p), p), reverse=True):
        parent = T.node_at(root, path[:-1])
        if isinstance(parent, T.QuantNode) and parent.op == "+" and len(parent.children) <= 1:
            return None  # would empty a plus-quantified slot
        root = T.replace_at(root, path, None)
    return root


def _replacement_candidates(root, path):
    """Same-kind descendant subtrees usable as replacements, smallest first."""
    node = T.node_at(root, path)
    if not isinstance(node, T.RuleNode):
        return []
    found = []
    for sub_path, sub in T.iter_paths(node):
        if sub_path and isinstance(sub, T.RuleNode) and sub.name == node.name:
            found.append(sub)
    found.sort(key=T.token_count)
    return found


def perses_reduce(parse_tree: T.ParseTree, oracle,
                  cfg: ReductionConfig | None = None) -> ReductionOutcome:
    """Priority-driven reduction: visit nodes heaviest-first, attempting
    deletion at quantified positions and same-kind subtree replacement.
    Repeats passes until a pass makes no progress or max_passes is hit."""
    cfg = cfg or ReductionConfig()
    grammar = parse_tree.grammar
    root = parse_tree.root
    size_before = T.token_count(root)
    start = time.monotonic()
    queries_before = oracle.counters.queries_total
    if not oracle.check(SourceProgram(T.serialize(root), grammar)):
        raise ValueError("oracle fails on the initial program")
    stats = {"invalid": 0}

    def attempt_scan(root):
        """One scan over the current tree, heaviest subtree first; returns
        the new root after the first accepted edit, or None."""
        worklist = sorted(
            ((T.token_count(node), path) for path, node in T.iter_paths(root)),
            key=lambda pair: (-pair[0], pair[1]))
        for _, path in worklist:
            node = T.node_at(root, path)
            parent = T.node_at(root, path[:-1]) if path else None
            if isinstance(parent, T.QuantNode) and (
                    parent.op in ("*", "?")
                    or (parent.op == "+" and len(parent.children) > 1)):
                candidate = T.replace_at(root, path, None)
                if _check_tree(candidate, oracle, grammar, stats):
                    return candidate
            if cfg.enable_subtree_replacement:
                for replacement in _replacement_candidates(root, path):
                    if T.token_count(replacement) >= T.token_count(node):
                        break  # sorted ascending: no smaller ones left
                    candidate = T.replace_at(root, path, replacement)
                    if _check_tree(candidate, oracle, grammar, stats):
                        return candidate
        return None

    for _ in range(cfg.max_passes):
        changed = False
        while True:
            # Re-scan from the top after every accepted edit; the oracle
            # cache absorbs the repeated failing probes.
            new_root = attempt_scan(root)
            if new_root is None:
                break
            root = new_root
            changed = True
        if not changed:
            break

    program = SourceProgram(T.serialize(root), grammar)
    return ReductionOutcome(
        program=program,
        oracle_queries=oracle.counters.queries_total - queries_before,
        wall_time=time.monotonic() - start,
        size_before=size_before,
        size_after=program.token_count,
        invalid_candidates=stats["invalid"],
    )
