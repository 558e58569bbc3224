"""codetrim: grammar-driven program reduction with LLM-assisted transformations."""

from .grammar import Grammar
from .program import SourceProgram
from .tree import ParseTree, parse, serialize

__all__ = ["Grammar", "SourceProgram", "ParseTree", "parse", "serialize"]
__version__ = "0.1.0"
