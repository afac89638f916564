import logging
import typing

import numpy as np

logger = logging.getLogger(__name__)

# arrays larger than this are summarised instead of printed
ARRAY_REPR_LIMIT = 16


def default_repr(value) -> str:
    """
    Repr that keeps grids and density matrices readable in logs and exception notes.
    """
    if isinstance(value, np.ndarray):
        if value.size > ARRAY_REPR_LIMIT:
            return f"<array shape={value.shape} dtype={value.dtype}>"
        return np.array2string(value, precision=6, separator=", ")
    if isinstance(value, complex):
        return f"({value.real:.6g}{value.imag:+.6g}j)"
    return repr(value)


_repr_function = default_repr


def value_repr(value) -> str:
    try:
        return _repr_function(value)
    except Exception as ex:
        logger.exception("Can not repr object: %s", ex)
        return "<can't repr>"


def log_value_repr(value, level, log: logging.Logger) -> str:
    if log.isEnabledFor(level):
        return value_repr(value)
    return "-"


def set_value_repr(repr_function: typing.Callable[[typing.Any], str] | None = None):
    """
    Use provided function to repr values in exception notes and logs.

    :param repr_function: custom repr function, `None` restores the default one
    """
    global _repr_function
    _repr_function = repr_function if repr_function is not None else default_repr


def type_str(type_descr) -> str:
    """
    Get string representation of given type or type hints.

    :param type_descr: type description as class or type hints
    :return: str
    """
    if type_descr is None or type_descr is type(None):
        return "None"
    if isinstance(type_descr, type):
        return type_descr.__name__
    return str(type_descr).replace("typing.", "")
