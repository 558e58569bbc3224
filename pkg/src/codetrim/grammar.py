"""Grammar definitions: lexer rules plus EBNF productions.

Grammar files are plain text:

    %language c
    %skip    WS      /[ \\t\\r\\n]+/
    %token   NUMBER  /[0-9]+/
    program: statement* ;
    statement: NUMBER ';' | '{' statement* '}' ;

Lexing is maximal munch; ties between rules of equal match length are broken
by file order.  ``%skip`` rules are matched but never emitted (whitespace,
comments).  Productions are EBNF with ``*``, ``+``, ``?``, parenthesised
groups, ordered alternatives (PEG semantics: first alternative that matches
wins), quoted literals matching token text, and UPPERCASE references matching
token kinds.  The first production is the start rule.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources

from .errors import GrammarError, LexError


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


@dataclass(frozen=True)
class LexRule:
    name: str
    pattern: re.Pattern
    skip: bool = False


# Production items.
@dataclass(frozen=True)
class TokenRef:
    kind: str


@dataclass(frozen=True)
class Literal:
    text: str


@dataclass(frozen=True)
class RuleRef:
    name: str


@dataclass(frozen=True)
class Group:
    items: tuple


@dataclass(frozen=True)
class Quantified:
    item: object
    op: str  # one of * + ?


@dataclass
class Grammar:
    language_id: str
    lex_rules: list[LexRule]
    productions: dict[str, list[tuple]] = field(default_factory=dict)

    @property
    def start_rule(self) -> str:
        return next(iter(self.productions))

    def lex(self, text: str) -> list[Token]:
        """Tokenize ``text``; skip rules are dropped. Raises LexError."""
        tokens = []
        pos = 0
        n = len(text)
        while pos < n:
            best = None
            best_len = 0
            for rule in self.lex_rules:
                m = rule.pattern.match(text, pos)
                if m and len(m.group(0)) > best_len:
                    best = rule
                    best_len = len(m.group(0))
            if best is None or best_len == 0:
                raise LexError(pos)
            if not best.skip:
                tokens.append(Token(best.name, text[pos:pos + best_len], pos))
            pos += best_len
        return tokens

    def validate(self):
        kinds = {r.name for r in self.lex_rules if not r.skip}

        def walk(item):
            if isinstance(item, TokenRef):
                if item.kind not in kinds:
                    raise GrammarError(f"unknown token kind {item.kind!r}")
            elif isinstance(item, RuleRef):
                if item.name not in self.productions:
                    raise GrammarError(f"unknown rule {item.name!r}")
            elif isinstance(item, Group):
                for sub in item.items:
                    walk(sub)
            elif isinstance(item, Choice):
                for alt in item.alternatives:
                    for sub in alt:
                        walk(sub)
            elif isinstance(item, Quantified):
                walk(item.item)

        if not self.productions:
            raise GrammarError("grammar has no productions")
        for alts in self.productions.values():
            for alt in alts:
                for item in alt:
                    walk(item)


_DIRECTIVE_RE = re.compile(r"^%(language|token|skip)\s+(.*)$")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def _parse_regex_field(rest: str, lineno: int) -> tuple[str, str]:
    """Split ``NAME /pattern/`` taking ``\\/`` escapes into account."""
    m = _NAME_RE.match(rest)
    if not m:
        raise GrammarError(f"line {lineno}: expected rule name")
    name = m.group(0)
    rest = rest[m.end():].strip()
    if not rest.startswith("/"):
        raise GrammarError(f"line {lineno}: expected /pattern/")
    out = []
    i = 1
    while i < len(rest):
        c = rest[i]
        if c == "\\" and i + 1 < len(rest) and rest[i + 1] == "/":
            out.append("/")
            i += 2
            continue
        if c == "/":
            return name, "".join(out)
        out.append(c)
        i += 1
    raise GrammarError(f"line {lineno}: unterminated /pattern/")


_PROD_TOKEN_RE = re.compile(
    r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<lit>'(?:[^'\\]|\\.)*')"
    r"|(?P<punct>[()|*+?:;]))"
)


def _tokenize_production(text: str, lineno: int):
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _PROD_TOKEN_RE.match(text, pos)
        if not m:
            raise GrammarError(f"line {lineno}: bad production syntax near {text[pos:pos+10]!r}")
        if m.group("name"):
            toks.append(("name", m.group("name")))
        elif m.group("lit"):
            raw = m.group("lit")[1:-1]
            toks.append(("lit", raw.replace("\\'", "'").replace("\\\\", "\\")))
        else:
            toks.append((m.group("punct"), m.group("punct")))
        pos = m.end()
    return toks


def _parse_alternatives(toks, lineno):
    """Parse ``alt ('|' alt)*`` from the token list."""
    pos = 0

    def parse_seq():
        nonlocal pos
        items = []
        while pos < len(toks) and toks[pos][0] not in ("|", ")", ";"):
            items.append(parse_item())
        return tuple(items)

    def parse_item():
        nonlocal pos
        kind, value = toks[pos]
        if kind == "name":
            item = TokenRef(value) if value.isupper() else RuleRef(value)
            pos += 1
        elif kind == "lit":
            item = Literal(value)
            pos += 1
        elif kind == "(":
            pos += 1
            alts = parse_alts()
            if pos >= len(toks) or toks[pos][0] != ")":
                raise GrammarError(f"line {lineno}: unbalanced parentheses")
            pos += 1
            if len(alts) == 1:
                item = Group(alts[0])
            else:
                # A group with alternatives is modelled as a group of one
                # synthetic choice; represent as tuple of alternatives.
                item = Group((Choice(tuple(alts)),))
        else:
            raise GrammarError(f"line {lineno}: unexpected {value!r}")
        while pos < len(toks) and toks[pos][0] in ("*", "+", "?"):
            item = Quantified(item, toks[pos][0])
            pos += 1
        return item

    def parse_alts():
        nonlocal pos
        alts = [parse_seq()]
        while pos < len(toks) and toks[pos][0] == "|":
            pos += 1
            alts.append(parse_seq())
        return alts

    alts = parse_alts()
    if pos != len(toks):
        raise GrammarError(f"line {lineno}: trailing tokens in production")
    return alts


@dataclass(frozen=True)
class Choice:
    alternatives: tuple  # tuple of item tuples


def loads(text: str) -> Grammar:
    """Parse a grammar definition from a string."""
    language = None
    lex_rules = []
    productions: dict[str, list[tuple]] = {}
    pending = None  # (name, body, lineno) accumulating until ';'

    for lineno, raw in enumerate(text.splitlines(), start=1):
        # whole-line comments only; inline '#' would be ambiguous with regexes
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        line = raw.rstrip()
        m = _DIRECTIVE_RE.match(line.strip())
        if m and pending is None:
            kind, rest = m.groups()
            if kind == "language":
                language = rest.strip()
            else:
                name, pattern = _parse_regex_field(rest.strip(), lineno)
                try:
                    compiled = re.compile(pattern)
                except re.error as exc:
                    raise GrammarError(f"line {lineno}: bad regex: {exc}") from exc
                lex_rules.append(LexRule(name, compiled, skip=(kind == "skip")))
            continue
        if pending is None:
            if ":" not in line:
                raise GrammarError(f"line {lineno}: expected production")
            name, body = line.split(":", 1)
            name = name.strip()
            if not _NAME_RE.fullmatch(name):
                raise GrammarError(f"line {lineno}: bad rule name {name!r}")
            pending = [name, body, lineno]
        else:
            pending[1] += " " + line
        if pending and pending[1].rstrip().endswith(";"):
            name, body, start_line = pending
            body = body.rstrip()[:-1]
            if name in productions:
                raise GrammarError(f"line {start_line}: duplicate rule {name!r}")
            productions[name] = _parse_alternatives(
                _tokenize_production(body, start_line), start_line)
            pending = None

    if pending is not None:
        raise GrammarError(f"line {pending[2]}: unterminated production (missing ';')")
    if language is None:
        raise GrammarError("missing %language directive")
    grammar = Grammar(language, lex_rules, productions)
    grammar.validate()
    return grammar


def load_file(path) -> Grammar:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


_BUILTIN_FILES = {"c": "c_mini.grammar", "js": "js_mini.grammar"}
_cache: dict[str, Grammar] = {}


def builtin(language_id: str) -> Grammar:
    """Return a bundled desk-scale grammar ('c' or 'js')."""
    if language_id not in _BUILTIN_FILES:
        raise GrammarError(
            f"no built-in grammar for {language_id!r}; pass a grammar file")
    if language_id not in _cache:
        data = (resources.files("codetrim.data") / _BUILTIN_FILES[language_id]).read_text()
        _cache[language_id] = loads(data)
    return _cache[language_id]
