"""Transformation definitions: prompt-template pairs plus instantiation.

Built-ins live in ``data/builtin_transforms.toml``; user files use the same
format and can append to or replace the built-in list via ``mode``.
"""

from __future__ import annotations

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import MissingHole, SchemaError

PROGRAM_HOLE = "{PROGRAM}"
TARGET_HOLE = "{TARGET}"

BUILTIN_ORDER = (
    "FunctionInlining",
    "LoopUnrolling",
    "DataTypeElimination",
    "DataTypeSimplification",
    "VariableElimination",
)


@dataclass(frozen=True)
class TransformationSpec:
    name: str
    primary_question: str
    followup_question: str
    single_level_question: str

    def __post_init__(self):
        if self.primary_question.count(PROGRAM_HOLE) != 1:
            raise SchemaError(
                f"{self.name}: primary question needs exactly one {PROGRAM_HOLE}")
        if PROGRAM_HOLE not in self.followup_question \
                or TARGET_HOLE not in self.followup_question:
            raise SchemaError(
                f"{self.name}: follow-up question needs {PROGRAM_HOLE} and {TARGET_HOLE}")
        if PROGRAM_HOLE not in self.single_level_question:
            raise SchemaError(
                f"{self.name}: single-level question needs {PROGRAM_HOLE}")


def instantiate(template: str, program: str, target: str | None = None) -> str:
    """Substitute the {PROGRAM} (and optionally {TARGET}) holes verbatim."""
    if PROGRAM_HOLE not in template:
        raise MissingHole(f"template lacks {PROGRAM_HOLE}")
    out = template.replace(PROGRAM_HOLE, program)
    if target is not None:
        if TARGET_HOLE not in template:
            raise MissingHole(f"template lacks {TARGET_HOLE}")
        out = out.replace(TARGET_HOLE, target)
    return out


def _specs_from_toml(data: dict, source: str) -> list[TransformationSpec]:
    specs = []
    for name, fields in data.items():
        if name == "mode":
            continue
        if not isinstance(fields, dict):
            raise SchemaError(f"{source}: entry {name!r} is not a table")
        missing = {"primary", "followup", "single_level"} - set(fields)
        if missing:
            raise SchemaError(f"{source}: {name} is missing {sorted(missing)}")
        specs.append(TransformationSpec(
            name=name,
            primary_question=fields["primary"],
            followup_question=fields["followup"],
            single_level_question=fields["single_level"],
        ))
    return specs


_builtin_cache: list[TransformationSpec] | None = None


def builtin_transformations() -> list[TransformationSpec]:
    """The five built-in transformations, in their canonical order."""
    global _builtin_cache
    if _builtin_cache is None:
        raw = (resources.files("codetrim.data") / "builtin_transforms.toml").read_bytes()
        specs = _specs_from_toml(tomllib.loads(raw.decode()), "builtin")
        by_name = {s.name: s for s in specs}
        _builtin_cache = [by_name[name] for name in BUILTIN_ORDER]
    return list(_builtin_cache)


def load_custom(path) -> list[TransformationSpec]:
    """Load a transformation file; ``mode = "replace"`` drops the built-ins,
    the default appends to them."""
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise SchemaError(f"{path}: {exc}") from exc
    custom = _specs_from_toml(data, str(path))
    if not custom:
        raise SchemaError(f"{path}: no transformations defined")
    mode = data.get("mode", "append")
    if mode not in ("append", "replace"):
        raise SchemaError(f"{path}: mode must be 'append' or 'replace'")
    specs = custom if mode == "replace" else builtin_transformations() + custom
    names = [s.name for s in specs]
    if len(names) != len(set(names)):
        dup = sorted({n for n in names if names.count(n) > 1})
        raise SchemaError(f"{path}: duplicate transformation names {dup}")
    return specs
