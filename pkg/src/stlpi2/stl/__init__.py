"""Signal temporal logic: formulas, predicates, parsing and robustness."""
from .formula import (
    Always, And, Eventually, Formula, Not, Pred, Trajectory, TrueF, Until, conjuncts,
)
from .parser import StlSyntaxError, parse_formula, to_text
from .predicates import (
    PREDICATE_KINDS, BallInside, BallOutside, FunctionPredicate, MidpointBall,
    PairDistanceMax, PairDistanceMin, Predicate,
)
from .robustness import (
    FragmentError, WindowError, robustness, robustness_batch, robustness_signal,
    satisfied, smooth_robustness,
)

__all__ = [
    "Always", "And", "Eventually", "Formula", "Not", "Pred", "Trajectory", "TrueF",
    "Until", "conjuncts", "StlSyntaxError", "parse_formula", "to_text",
    "PREDICATE_KINDS", "BallInside", "BallOutside", "FunctionPredicate",
    "MidpointBall", "PairDistanceMax", "PairDistanceMin", "Predicate",
    "FragmentError", "WindowError", "robustness", "robustness_batch",
    "robustness_signal", "satisfied", "smooth_robustness",
]
