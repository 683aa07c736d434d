"""
Result pattern for operations that fail as part of normal protocol flow.

Decryption with the wrong key, a ballot on a closed proposal or a refused
join are expected outcomes, not crashes: they come back as Failure values
carrying an OperationError. Exceptions remain for integrity faults.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum, auto
from typing import Any, Callable, Dict, Generic, List, Optional, TypeVar, cast

T = TypeVar("T")  # Success type
E = TypeVar("E")  # Error type
U = TypeVar("U")  # New success type for mapping


class ResultError(Exception):
    """Exception raised for Result pattern errors."""

    pass


class Result(Generic[T, E], ABC):
    """
    Either a successful value of type T or an error of type E.
    """

    @abstractmethod
    def is_success(self) -> bool:
        pass

    @abstractmethod
    def is_failure(self) -> bool:
        pass

    @abstractmethod
    def unwrap(self) -> T:
        """
        Get the success value.

        Raises:
            ResultError: If this is a failure result
        """
        pass

    @abstractmethod
    def unwrap_or(self, default: T) -> T:
        pass

    @abstractmethod
    def map(self, func: Callable[[T], U]) -> Result[U, E]:
        pass

    @abstractmethod
    def and_then(self, func: Callable[[T], Result[U, E]]) -> Result[U, E]:
        """
        Chain a function that returns a result.

        Args:
            func: Function to apply to the success value

        Returns:
            Result of the chained function or the original failure
        """
        pass

    @abstractmethod
    def error(self) -> E:
        """
        Get the error value.

        Raises:
            ResultError: If this is a success result
        """
        pass

    @staticmethod
    def success(value: T) -> Result[T, Any]:
        return Success(value)

    @staticmethod
    def failure(error: E) -> Result[Any, E]:
        return Failure(error)

    @staticmethod
    def collect(results: List[Result[T, E]]) -> Result[List[T], List[E]]:
        """
        Collect a list of results into a single result.

        Returns:
            Success with all values, or failure with every error encountered
        """
        values = []
        errors = []
        for result in results:
            if result.is_success():
                values.append(result.unwrap())
            else:
                errors.append(result.error())
        if errors:
            return Result.failure(errors)
        return Result.success(values)


class Success(Result[T, Any]):
    """Success variant of Result, containing a value."""

    def __init__(self, value: T):
        self._value = value

    def is_success(self) -> bool:
        return True

    def is_failure(self) -> bool:
        return False

    def unwrap(self) -> T:
        return self._value

    def unwrap_or(self, default: T) -> T:
        return self._value

    def map(self, func: Callable[[T], U]) -> Result[U, Any]:
        return Success(func(self._value))

    def and_then(self, func: Callable[[T], Result[U, Any]]) -> Result[U, Any]:
        return func(self._value)

    def error(self) -> Any:
        raise ResultError("Cannot get error from success result")

    def __repr__(self) -> str:
        return f"Success({self._value!r})"


class Failure(Result[Any, E]):
    """Failure variant of Result, containing an error."""

    def __init__(self, error: E):
        self._error = error

    def is_success(self) -> bool:
        return False

    def is_failure(self) -> bool:
        return True

    def unwrap(self) -> Any:
        if isinstance(self._error, Exception):
            raise ResultError(
                f"Unwrapped failure result: {self._error}"
            ) from self._error
        raise ResultError(f"Unwrapped failure result: {self._error}")

    def unwrap_or(self, default: T) -> T:
        return default

    def map(self, func: Callable[[Any], U]) -> Result[U, E]:
        return cast(Result[U, E], self)

    def and_then(self, func: Callable[[Any], Result[U, E]]) -> Result[U, E]:
        return cast(Result[U, E], self)

    def error(self) -> E:
        return self._error

    def __repr__(self) -> str:
        return f"Failure({self._error!r})"


class ErrorType(Enum):
    """Kinds of expected failures surfaced through Result values."""

    DECRYPTION_FAILED = auto()
    BAD_SIGNATURE = auto()
    UNKNOWN_MEMBER = auto()
    UNKNOWN_PROPOSAL = auto()
    PROPOSAL_CLOSED = auto()
    DUPLICATE_BALLOT = auto()
    NOT_PRIMARY = auto()
    SERVICE_NOT_OPEN = auto()
    RECONFIGURATION_PENDING = auto()
    INVALID_ARGUMENT = auto()
    ACTION_FAILED = auto()
    SHARE_REJECTED = auto()
    JOIN_REFUSED = auto()
    UNKNOWN = auto()


@dataclass
class OperationError:
    """
    Structured error information for protocol operations.
    """

    type: ErrorType
    message: str
    source_exception: Optional[Exception] = None
    details: Optional[Dict[str, Any]] = None

    def __str__(self) -> str:
        return f"{self.type.name}: {self.message}"

    @staticmethod
    def from_exception(
        exception: Exception, error_type: ErrorType = ErrorType.UNKNOWN
    ) -> "OperationError":
        return OperationError(
            type=error_type,
            message=str(exception),
            source_exception=exception,
            details={"exception_type": type(exception).__name__},
        )


BytesResult = Result[bytes, OperationError]
