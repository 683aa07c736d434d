from .result import (
    BytesResult,
    ErrorType,
    Failure,
    OperationError,
    Result,
    ResultError,
    Success,
)
