"""Common exception base for the toolkit.

Every module-specific error derives from ToolkitError so callers (and the
CLI) can catch one type for "a pipeline input was bad" without swallowing
programming errors.
"""


class ToolkitError(Exception):
    pass
