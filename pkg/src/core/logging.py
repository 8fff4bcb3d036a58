import logging
from typing import Optional


def setup_logging(level: int = logging.INFO, use_rich: Optional[bool] = None) -> None:
    """Configure logging for the ``ctdiff.*`` loggers.

    - If `rich` is installed and `use_rich` is True (or None and rich is present), uses
      `rich.logging.RichHandler` for console output and rich tracebacks.
    - Otherwise falls back to standard library `logging` with a plain format.
    """
    if use_rich is None:
        try:
            import rich  # type: ignore  # noqa: F401

            use_rich = True
        except Exception:
            use_rich = False

    if use_rich:
        try:
            from rich.logging import RichHandler  # type: ignore
            from rich.traceback import install as _install_tb  # type: ignore

            _install_tb(show_locals=False)
            handler = RichHandler(rich_tracebacks=True, show_path=False)
            _install(handler, level)
        except Exception:
            _std_setup(level)
    else:
        _std_setup(level)


def _install(handler: logging.Handler, level: int) -> None:
    root = logging.getLogger()
    # remove existing handlers to avoid duplicate logs
    for h in list(root.handlers):
        root.removeHandler(h)
    root.addHandler(handler)
    root.setLevel(level)
    logging.getLogger("ctdiff").setLevel(level)


def _std_setup(level: int) -> None:
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter("%(levelname)s:%(name)s: %(message)s"))
    _install(handler, level)
