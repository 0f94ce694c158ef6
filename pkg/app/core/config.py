from pydantic import Field
from ._settings import (
    BenchSettings,
    LocalSettings,
    LogSettings,
    MicpSettings,
    SolverSettings,
    BaseAppSettings
)



class Settings(BaseAppSettings):
    log: LogSettings = Field(default_factory=LogSettings)
    solver: SolverSettings = Field(default_factory=SolverSettings)
    local: LocalSettings = Field(default_factory=LocalSettings)
    micp: MicpSettings = Field(default_factory=MicpSettings)
    bench: BenchSettings = Field(default_factory=BenchSettings)

settings = Settings()
