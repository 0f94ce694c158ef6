from app.services.subsolve.lp import LpSolver, ModelSolution
from app.services.subsolve.model import Expr, ModelBuilder, StandardModel, lower
from app.services.subsolve.qp import ActiveSetQpSolver
from app.services.subsolve.barrier import BarrierSolver
from app.services.subsolve.fallback import SubgradientSolver, project
from app.services.subsolve.solver import (
    ConvexSolver,
    ReferenceBackend,
    SolverBackend,
    find_feasible_point,
    minimize_quadratic_on_ball,
    solve_convex,
)
