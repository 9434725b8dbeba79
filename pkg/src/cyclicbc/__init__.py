"""Cyclic proofs for safe recursion: checking, evaluation, translation to a
function algebra, and circuit families as advice oracles."""

from .checker import classify
from .evaluator import evaluate
from .prooffmt import load_proof, parse_proof, serialize_proof
from .translator import translate

__all__ = ["classify", "evaluate", "load_proof", "parse_proof", "serialize_proof", "translate"]
