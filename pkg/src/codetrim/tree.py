"""Parse trees, PEG parsing, and token-level re-serialization."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParseError
from .grammar import (
    Choice, Grammar, Group, Literal, Quantified, RuleRef, Token, TokenRef,
)


@dataclass
class TokenNode:
    kind: str
    text: str
    children: tuple = ()


@dataclass
class RuleNode:
    name: str
    children: tuple


@dataclass
class QuantNode:
    op: str  # * + ?
    children: tuple


@dataclass
class GroupNode:
    children: tuple


def leaves(node):
    if isinstance(node, TokenNode):
        yield node
        return
    for child in node.children:
        yield from leaves(child)


def token_count(node) -> int:
    return sum(1 for _ in leaves(node))


def iter_paths(node, path=()):
    """Yield (path, node) pairs in document (pre)order."""
    yield path, node
    for i, child in enumerate(node.children):
        yield from iter_paths(child, path + (i,))


def node_at(root, path):
    for i in path:
        root = root.children[i]
    return root


def replace_at(root, path, new_node):
    """Return a new tree with the node at ``path`` replaced (or deleted
    when ``new_node`` is None)."""
    if not path:
        if new_node is None:
            raise ValueError("cannot delete the root")
        return new_node
    i = path[0]
    child = replace_at(root.children[i], path[1:], new_node) if len(path) > 1 else new_node
    kids = list(root.children)
    if child is None:
        del kids[i]
    else:
        kids[i] = child
    kids = tuple(kids)
    if isinstance(root, RuleNode):
        return RuleNode(root.name, kids)
    if isinstance(root, QuantNode):
        return QuantNode(root.op, kids)
    if isinstance(root, GroupNode):
        return GroupNode(kids)
    raise TypeError(f"cannot rebuild {type(root).__name__}")


@dataclass
class ParseTree:
    root: RuleNode
    grammar: Grammar

    @property
    def token_count(self) -> int:
        return token_count(self.root)

    def leaves(self):
        return list(leaves(self.root))


# Tokens after which serialization emits a newline instead of a space.
_BREAK_AFTER = {";", "}"}


def serialize(tree) -> str:
    """Canonical text: single spaces between tokens, newline after ';'/'}'."""
    root = tree.root if isinstance(tree, ParseTree) else tree
    parts = []
    for leaf in leaves(root):
        parts.append(leaf.text)
        parts.append("\n" if leaf.text in _BREAK_AFTER else " ")
    return "".join(parts[:-1]) if parts else ""


class _Parser:
    """Backtracking PEG interpreter over a token list."""

    def __init__(self, grammar: Grammar, tokens: list[Token], text_len: int):
        self.grammar = grammar
        self.tokens = tokens
        self.text_len = text_len
        self.fail_pos = 0
        self.fail_expected: set[str] = set()

    def _note_failure(self, pos, expected):
        if pos > self.fail_pos:
            self.fail_pos = pos
            self.fail_expected = {expected}
        elif pos == self.fail_pos:
            self.fail_expected.add(expected)

    def match_rule(self, name, pos):
        for alt in self.grammar.productions[name]:
            got = self.match_seq(alt, pos)
            if got is not None:
                children, new_pos = got
                return RuleNode(name, tuple(children)), new_pos
        return None

    def match_seq(self, items, pos):
        children = []
        for item in items:
            got = self.match_item(item, pos)
            if got is None:
                return None
            node, pos = got
            if node is not None:
                children.append(node)
        return children, pos

    def match_item(self, item, pos):
        if isinstance(item, TokenRef):
            if pos < len(self.tokens) and self.tokens[pos].kind == item.kind:
                tok = self.tokens[pos]
                return TokenNode(tok.kind, tok.text), pos + 1
            self._note_failure(pos, item.kind)
            return None
        if isinstance(item, Literal):
            if pos < len(self.tokens) and self.tokens[pos].text == item.text:
                tok = self.tokens[pos]
                return TokenNode(tok.kind, tok.text), pos + 1
            self._note_failure(pos, repr(item.text))
            return None
        if isinstance(item, RuleRef):
            return self.match_rule(item.name, pos)
        if isinstance(item, Group):
            got = self.match_seq(item.items, pos)
            if got is None:
                return None
            children, new_pos = got
            return GroupNode(tuple(children)), new_pos
        if isinstance(item, Choice):
            for alt in item.alternatives:
                got = self.match_seq(alt, pos)
                if got is not None:
                    children, new_pos = got
                    return GroupNode(tuple(children)), new_pos
            return None
        if isinstance(item, Quantified):
            reps = []
            if item.op == "?":
                got = self.match_item(item.item, pos)
                if got is not None and got[0] is not None:
                    reps.append(got[0])
                    pos = got[1]
                return QuantNode("?", tuple(reps)), pos
            while True:
                got = self.match_item(item.item, pos)
                if got is None or got[1] == pos:
                    break
                reps.append(got[0])
                pos = got[1]
            if item.op == "+" and not reps:
                return None
            return QuantNode(item.op, tuple(reps)), pos
        raise TypeError(f"unknown grammar item {item!r}")


def parse(text: str, grammar: Grammar) -> ParseTree:
    """Parse ``text`` into a ParseTree. Lexes first; raises LexError or
    ParseError."""
    tokens = grammar.lex(text)
    parser = _Parser(grammar, tokens, len(text))
    got = parser.match_rule(grammar.start_rule, 0)
    if got is not None and got[1] == len(tokens):
        return ParseTree(got[0], grammar)
    if got is not None:
        # Matched a prefix only.
        offset = tokens[got[1]].offset
        raise ParseError(offset, ["end of input"])
    pos = parser.fail_pos
    offset = tokens[pos].offset if pos < len(tokens) else len(text)
    raise ParseError(offset, parser.fail_expected or ["?"])
