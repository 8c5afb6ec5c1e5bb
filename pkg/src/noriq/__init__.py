"""noriq-workbench public package interface."""

from .cli import run_cli
from .noriquiver import QuiverRep, commutant
from .presentation import quotient_presentation, sub_presentation
from .rewrites import normalize

__all__ = ["run_cli", "QuiverRep", "commutant", "normalize", "quotient_presentation", "sub_presentation"]
