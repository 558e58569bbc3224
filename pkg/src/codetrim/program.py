"""Source program value type: text plus its token-level size."""

from __future__ import annotations

from dataclasses import dataclass, field

from . import tree
from .grammar import Grammar


@dataclass(frozen=True)
class SourceProgram:
    text: str
    grammar: Grammar

    @property
    def language_id(self) -> str:
        return self.grammar.language_id

    @property
    def token_count(self) -> int:
        # Stable: lexing is a pure function of (text, grammar).
        cached = self.__dict__.get("_token_count")
        if cached is None:
            cached = len(self.grammar.lex(self.text))
            object.__setattr__(self, "_token_count", cached)
        return cached

    def parse(self) -> tree.ParseTree:
        return tree.parse(self.text, self.grammar)

    @classmethod
    def from_tree(cls, parsed: tree.ParseTree) -> "SourceProgram":
        return cls(tree.serialize(parsed), parsed.grammar)
