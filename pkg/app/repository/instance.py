from pathlib import Path

from app.model.entity.bounds import SBounds
from app.model.entity.problem import SmcProblem
from .base import BaseMapper


class InstanceMapper(BaseMapper):
    """SmcProblem / SBounds 的 JSON 存取, 字段见 docs/schema.md"""

    def load(self, path: Path | str) -> SmcProblem:
        problem = SmcProblem.model_validate(self.read_json(path))
        self.logger.info(f"载入实例 {problem.name}: d = {problem.dim}, N = {problem.N}, n = {problem.sizes}")
        return problem

    def save(self, problem: SmcProblem, path: Path | str) -> Path:
        return self.write_json(path, problem)

    def load_bounds(self, path: Path | str) -> SBounds:
        return SBounds.model_validate(self.read_json(path))


_instance_mapper = InstanceMapper()

def get_instance_mapper() -> InstanceMapper:
    return _instance_mapper
