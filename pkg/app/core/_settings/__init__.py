from .log_setting import LogSettings
from .solver_setting import SolverSettings
from .local_setting import LocalSettings
from .micp_setting import MicpSettings
from .bench_setting import BenchSettings
from .base_setting import BaseAppSettings
