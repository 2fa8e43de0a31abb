"""Exception types shared across the toolkit."""


class CablekitError(Exception):
    pass


class GraphValidationError(CablekitError, ValueError):
    """Raised when an operation receives a graph that fails validation.

    The full list of violations is kept on ``report``.
    """

    def __init__(self, report, what="graph"):
        self.report = list(report)
        lines = "; ".join(str(v) for v in self.report[:5])
        more = f" (+{len(self.report) - 5} more)" if len(self.report) > 5 else ""
        super().__init__(f"invalid {what}: {lines}{more}")


class IntrinsicWeightError(CablekitError, ValueError):
    def __init__(self, vertex, deficit):
        self.vertex = vertex
        self.deficit = deficit
        super().__init__(
            f"weight violates the intrinsic inequality at vertex {vertex!r} "
            f"(deficit {deficit:.6g})"
        )


class CapacityError(CablekitError, RuntimeError):
    """Problem size exceeds a configured cap (dofs, group elements)."""


class TruncationError(CablekitError, RuntimeError):
    """Probability mass or a ball reached the boundary of a finite truncation."""
