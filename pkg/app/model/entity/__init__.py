from .atoms import Affine, Quadratic, NormAffine, MaxAffine, Const, Sum, SumTerm, ConvexAtom, ATOM_ADAPTER
from .feasible import Box, NormBall, Halfspaces, Hyperplanes, EpigraphLink, FeasibleSet
from .weights import Weights
from .bounds import SBounds
from .problem import SmcProblem, Selection, WeightedSubproblem
