from enum import Enum
# ==================== 枚举定义 ====================

class NormKind(str, Enum):
    L1 = "1"
    L2 = "2"
    LINF = "inf"

class SolveMethod(str, Enum):
    AUTO = "auto"
    LP = "lp"
    QP = "qp"
    BARRIER = "barrier"
    SUBGRADIENT = "subgradient"

class CandidateKind(str, Enum):
    NONE = "none"
    BB = "bb"
    SM = "sm"
    MM = "mm"

class EpsilonRule(str, Enum):
    ZERO = "zero"
    ONE = "one"
    DECREASE = "decrease"
    ALTERNATE = "alternate"

class KappaRule(str, Enum):
    CONSTANT = "constant"
    SOFTMIN_GROWTH = "softmin_growth"
    POWER = "power"

class CRule(str, Enum):
    DEFAULT = "default"
    CONSTANT = "constant"

class MethodName(str, Enum):
    AM = "am"
    BB = "bb"
    SM = "sm"
    MM = "mm"
    ALTER = "alter"
    DCA = "dca"

class Termination(str, Enum):
    DELTA = "delta"
    K_MAX = "k_max"
    SOLVER_ERROR = "solver_error"

class CriticalityStatus(str, Enum):
    CRITICAL = "critical"
    UNKNOWN = "unknown"

class MicpStatus(str, Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    NO_SOLUTION = "no_solution"

class CertifyStatus(str, Enum):
    CERTIFIED = "certified_local_min"
    IMPROVED = "improved"
    INCONCLUSIVE = "inconclusive"

class LocalStrategy(str, Enum):
    ENUMERATION = "enumeration"
    MICP = "micp"

class ClusterConstraint(str, Enum):
    HULL = "hull"
    ORDER = "order"
    COVERAGE = "coverage"

class InstanceSource(str, Enum):
    BUILTIN = "builtin"
    JSON = "json"
    PLR = "plr"
    RFL = "rfl"
    FULLY_ACTIVE = "fully_active"
