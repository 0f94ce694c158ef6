from app.model.dto.solver import SolverConfig
from app.services.subsolve import ConvexSolver
from app.utils.logger import get_logger


class BaseService:
    def __init__(self, cfg: SolverConfig | None = None, solver: ConvexSolver | None = None):
        self.solver = solver or ConvexSolver(cfg)
        self.cfg = self.solver.cfg
        self.logger = get_logger(self.__class__.__name__)
