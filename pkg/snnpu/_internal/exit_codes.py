"""
Deterministic Exit Codes

  0 → success
  1 → runtime failure (an SnnpuError surfaced while running)
  2 → usage error (bad arguments, missing input files)
"""

EXIT_OK: int = 0
EXIT_RUNTIME_ERROR: int = 1
EXIT_USAGE_ERROR: int = 2


def resolve_exit_code(exc: BaseException | None) -> int:
    """
    Map an exception (or its absence) to an exit code.

    Pure function. No side effects.
    """
    if exc is None:
        return EXIT_OK
    if isinstance(exc, (FileNotFoundError, IsADirectoryError)):
        return EXIT_USAGE_ERROR
    return EXIT_RUNTIME_ERROR
