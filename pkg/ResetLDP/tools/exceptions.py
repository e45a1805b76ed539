from typing import Any, Dict, Optional


class ResetLdpException(Exception):
    def __init__(self, message: str = "", details: Optional[str] = None) -> None:
        super().__init__(message)
        self.message = message
        self.details = details if details is not None else message


class ResetLdpDomainException(ResetLdpException):
    pass


class ResetLdpNumericException(ResetLdpException):
    def __init__(
        self,
        message: str,
        diagnostics: Optional[Dict[str, Any]] = None,
        details: Optional[str] = None,
    ) -> None:
        self.diagnostics: Dict[str, Any] = dict(diagnostics or {})
        if details is None and self.diagnostics:
            details = ", ".join(f"{k}={v!r}" for k, v in self.diagnostics.items())
        super().__init__(message, details)


class ResetLdpOracleRequiredException(ResetLdpException):
    pass


class ResetLdpUsageException(ResetLdpException):
    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field


class ResetLdpAcceptanceException(ResetLdpException):
    pass


class ResetLdpNotImplementedException(ResetLdpException):
    pass
