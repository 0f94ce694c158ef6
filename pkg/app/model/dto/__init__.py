from .solver import SolverConfig, Budget
from .schedule import Schedule
from .problem_spec import PlrSpec, RflSpec
from .bench import (
    InstanceSpec,
    MethodSpec,
    BenchConfig,
    NeighbourhoodSpec,
    CertifyConfig,
    ScanConfig,
    EnumerateConfig,
    BoundsConfig,
)
