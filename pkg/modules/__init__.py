"""One module per retrolift command; each exposes ``app(args) -> int``."""

EXIT_CLEAN = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
