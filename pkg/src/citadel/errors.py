"""Error taxonomy shared by the service layer, the store, and the HTTP API.

Every error carries a stable machine-readable ``code`` drawn from the closed
list below, plus the HTTP status the API layer should map it to.
"""

from __future__ import annotations

# Closed set of machine codes the API may emit. The API refuses to serialize
# anything outside this list, so new codes must be registered here.
ERROR_CODES: dict[str, int] = {
    "bad_request": 400,
    "invalid": 400,
    "invalid_spec": 400,
    "invalid_entry": 400,
    "too_long": 400,
    "answer_shape_mismatch": 400,
    "out_of_range": 400,
    "weak_new": 400,
    "unknown_field": 400,
    "unknown_fixture": 400,
    "unauthenticated": 401,
    "denied": 401,
    "bad_old": 403,
    "forbidden": 403,
    "forbidden_recipient": 403,
    "forbidden_scope": 403,
    "forbidden_room": 403,
    "not_enrolled": 403,
    "not_found": 404,
    "unknown_route": 404,
    "constraint_violation": 409,
    "referential_violation": 409,
    "duplicate_book": 409,
    "already_attempted": 409,
    "already_submitted": 409,
    "already_bootstrapped": 409,
    "window_closed": 409,
    "window_not_open": 409,
    "deadline_passed": 409,
    "ca_budget_exceeded": 409,
    "rate_limited": 429,
    "too_large": 413,
    "internal": 500,
}


class CitadelError(Exception):
    """Base for all service-level failures.

    ``code`` must be a key of ERROR_CODES; ``details`` holds machine-readable
    context (e.g. the violated key name) and is safe to expose to clients.
    """

    def __init__(self, code: str, message: str = "", **details):
        if code not in ERROR_CODES:
            raise ValueError(f"unregistered error code: {code}")
        super().__init__(message or code)
        self.code = code
        self.message = message or code
        self.details = details

    @property
    def status(self) -> int:
        return ERROR_CODES[self.code]


class Forbidden(CitadelError):
    def __init__(self, message: str = "operation not permitted", code: str = "forbidden", **details):
        super().__init__(code, message, **details)


class Unauthenticated(CitadelError):
    def __init__(self, message: str = "authentication required"):
        super().__init__("unauthenticated", message)


class NotFound(CitadelError):
    def __init__(self, message: str = "no such resource", **details):
        super().__init__("not_found", message, **details)


class ConstraintViolation(CitadelError):
    def __init__(self, key_name: str, message: str = ""):
        super().__init__(
            "constraint_violation",
            message or f"unique key violated: {key_name}",
            key_name=key_name,
        )


class ReferentialViolation(CitadelError):
    def __init__(self, missing_ref: str, message: str = ""):
        super().__init__(
            "referential_violation",
            message or f"missing reference: {missing_ref}",
            missing_ref=missing_ref,
        )


class Invalid(CitadelError):
    """Validation failure with a specific reason code where one exists."""

    def __init__(self, message: str, code: str = "invalid", **details):
        super().__init__(code, message, **details)
