"""Independent oracles and fixture builders for the test suite.

The brute-force routines here deliberately re-derive results from first
principles (subset enumeration, breadth-first search over edits) so they
never share logic with the code paths they check.
"""

from __future__ import annotations

import itertools
from collections import deque

from codetrim import tree as T


def norm(text: str) -> str:
    return "".join(text.split())


def brute_force_min_subset(items, test):
    """Smallest passing subset size by exhaustive enumeration (|items| <= ~14)."""
    for size in range(len(items) + 1):
        for combo in itertools.combinations(items, size):
            if test(list(combo)):
                return list(combo)
    raise AssertionError("no passing subset, not even the full list")


def _bf_deletions(root):
    """All single-node deletions allowed by the grammar shape: children of
    star/optional quantifiers, children of plus quantifiers keeping >= 1."""
    for path, node in T.iter_paths(root):
        if isinstance(node, T.QuantNode):
            if node.op in ("*", "?") or (node.op == "+" and len(node.children) > 1):
                for i in range(len(node.children)):
                    yield T.replace_at(root, path + (i,), None)


def _bf_replacements(root):
    """All single replacements of a rule node by a same-named descendant."""
    for path, node in T.iter_paths(root):
        if not isinstance(node, T.RuleNode):
            continue
        for sub_path, sub in T.iter_paths(node):
            if sub_path and isinstance(sub, T.RuleNode) and sub.name == node.name:
                yield T.replace_at(root, path, sub)


def exhaustive_edit_minimum(root, predicate, allow_replacement=True) -> int:
    """Minimal token count reachable from ``root`` through any sequence of
    single grammar-shaped edits whose every intermediate step keeps
    ``predicate`` true. BFS over serialized texts."""
    start_text = T.serialize(root)
    assert predicate(start_text)
    seen = {start_text}
    queue = deque([root])
    best = T.token_count(root)
    while queue:
        node = queue.popleft()
        edits = itertools.chain(
            _bf_deletions(node),
            _bf_replacements(node) if allow_replacement else ())
        for candidate in edits:
            text = T.serialize(candidate)
            if text in seen or not predicate(text):
                continue
            seen.add(text)
            best = min(best, T.token_count(candidate))
            queue.append(candidate)
    return best
