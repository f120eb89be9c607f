"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the operation's domain (bad index, bad partition, ...)."""


class SizeError(ValueError):
    """A construction would exceed a configured size cap."""


class InvalidTransformError(ValueError):
    """A block transform is singular over the field."""


class RowCapExceeded(SizeError):
    """Raised instead of materializing an SPDP matrix with too many rows."""

    def __init__(self, would_be_rows: int, cap: int):
        self.would_be_rows = would_be_rows
        self.cap = cap
        super().__init__(f"SPDP matrix would have {would_be_rows} rows (cap {cap})")


class InvarianceViolation(AssertionError):
    """A rank-monotone pipeline step changed rank illegally. Always an implementation bug."""

    def __init__(self, step_index: int, step: object, before: int, after: int):
        self.step_index = step_index
        self.step = step
        self.before = before
        self.after = after
        super().__init__(f"step {step_index} ({step!r}): gamma {before} -> {after}")


class CertificateInvalid(AssertionError):
    """A certificate failed its own verification."""


class CertificateMismatch(LookupError):
    """A certificate row or column does not exist in the target matrix."""
