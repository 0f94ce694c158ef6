from .trace import IterRecord, RunTrace, TRACE_SCHEMA_VERSION
from .verdict import (
    CriticalityVerdict,
    EnumerationResult,
    NodeRecord,
    MicpResult,
    ModelStats,
    CertifyVerdict,
    RestartReport,
)
