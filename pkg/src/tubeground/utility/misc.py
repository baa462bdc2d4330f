"""Miscellaneous utility methods."""
from datetime import timedelta
from importlib import import_module
from types import ModuleType
from typing import Any, Optional, Type, Union


def get_by_full_name(
    name: str,
    default_module: Union[str, ModuleType] = None,
    subclass_of: Optional[Type[Any]] = None,
) -> Any:
    """Resolve a name such as ``'package.module.Member'`` by importing the module and getting the member.

    Args:
        name: A name or fully qualified name.
        default_module: Module used for names without any ``'.'``-characters.
        subclass_of: If given, the resolved object must be a subclass of this type.

    Returns:
        The object `name` refers to.

    Raises:
        ValueError: If `name` is not qualified and ``default_module=None``.
        TypeError: If the object is not a subclass of `subclass_of`.

    Examples:
        >>> from tubeground.utility.misc import get_by_full_name
        >>> get_by_full_name("math.sqrt")(4.0)
        2.0
        >>> get_by_full_name("OrderedDict", default_module="collections", subclass_of=dict).__name__
        'OrderedDict'
    """
    module_name, _, member = name.rpartition(".")
    if module_name:
        module = import_module(module_name)
    elif default_module:
        module = import_module(default_module) if isinstance(default_module, str) else default_module
    else:
        raise ValueError(f"Cannot resolve {name=}: not fully qualified and no default module given.")

    obj = getattr(module, member)
    if subclass_of is not None and not (isinstance(obj, type) and issubclass(obj, subclass_of)):
        raise TypeError(f"Expected {name!r} to be a subclass of {subclass_of.__name__}, but got {obj!r}.")
    return obj


def tname(arg: Any) -> str:
    """Get the name of a type, function or method, or of the type of an instance.

    Args:
        arg: Something to get a name for.

    Returns:
        A name.
    """
    if arg is None:
        return "None"
    if isinstance(arg, type) or (callable(arg) and hasattr(arg, "__name__")):
        return arg.__name__
    return type(arg).__name__


def format_seconds(t: float) -> str:
    """Format a duration for log output.

    Durations shorter than two minutes keep their precision, whereas longer durations use ``H:MM:SS``.

    Args:
        t: Time in seconds.

    Returns:
        A formatted duration.

    Examples:
        >>> from tubeground.utility.misc import format_seconds
        >>> format_seconds(3131)
        '0:52:11'
        >>> format_seconds(0.154)
        '0.154 sec'
    """
    if t < 1.0:
        return f"{t:.6g} sec"
    if t < 120.0:
        return f"{t:.2f} sec"
    return str(timedelta(seconds=round(t)))
