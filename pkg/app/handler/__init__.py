from .exception_handlers import (
    SmcException,
    InfeasibleException,
    UnboundedException,
    IterationLimitException,
    UnsupportedAtomException,
    CapExceededException,
    BadDimsException,
    DimensionMismatchException,
    ShapeMismatchException,
    MissingBoundsException,
    ConfigException,
    cli_exception_handler,
)
