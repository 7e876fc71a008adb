"""Exception hierarchy shared by every stage of the pipeline."""


class GLPError(Exception):
    """Base class for all package errors (data or numeric failures)."""


class DataError(GLPError):
    pass


class ParseError(DataError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class DegenerateGroupError(DataError):
    pass


class SingleGroupError(DataError):
    pass


class DegenerateColumnError(GLPError):
    """Raised when a column has a single distinct value (zero tie factor)."""


class EmptyFeatureMapError(GLPError):
    """Every column was excluded at the requested LP order."""


class IsolatedVertexError(GLPError):
    def __init__(self, row):
        super().__init__(f"vertex {row} has zero degree; cannot normalize")
        self.row = row


class EmptyClusterError(GLPError):
    pass


class DegenerateLabelError(GLPError):
    pass


class ChartError(GLPError):
    pass


class ConfigError(Exception):
    """Invalid user configuration. The CLI maps this to exit status 2."""
