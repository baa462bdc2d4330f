"""Dict utility functions."""

from typing import Any, Callable, Dict


def flatten_dict(
    d: Dict[str, Any],
    join_string: str = ".",
    filter_predicate: Callable[[str, Any], bool] = None,
) -> Dict[str, Any]:
    """Flatten a nested dictionary.

    Args:
        d: A dict to flatten. Keys must be strings.
        join_string: Joiner for nested keys.
        filter_predicate: A callable which takes a key and value, returning ``True`` if the entry should be kept.

    Returns:
        A flattened version of `d`.

    Examples:
        Flattening a config-like dict.

        >>> from tubeground.utility.collections.dicts import flatten_dict
        >>> flatten_dict({"model": {"dim": 64, "cqg": True}, "seed": 0})
        {'model.dim': 64, 'model.cqg': True, 'seed': 0}
    """
    flat: Dict[str, Any] = {}

    def visit(prefix: str, node: Dict[str, Any]) -> None:
        for key, value in node.items():
            if filter_predicate is not None and not filter_predicate(key, value):
                continue
            if isinstance(value, dict):
                visit(prefix + key + join_string, value)
            else:
                flat[prefix + key] = value

    visit("", d)
    return flat


def unflatten_dict(d: Dict[str, Any], join_string: str = ".") -> Dict[str, Any]:
    """Inverse of :func:`flatten_dict`.

    Args:
        d: A flat dict with `join_string`-separated keys.
        join_string: Separator for nested keys.

    Returns:
        A nested dict.

    Raises:
        ValueError: If a key is used both as a leaf and as a parent.

    Examples:
        >>> from tubeground.utility.collections.dicts import unflatten_dict
        >>> unflatten_dict({"model.dim": 64, "model.cqg": False})
        {'model': {'dim': 64, 'cqg': False}}
    """
    ans: Dict[str, Any] = {}
    for flat_key, value in d.items():
        *parents, leaf = flat_key.split(join_string)
        node = ans
        for p in parents:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ValueError(f"Key {flat_key!r} conflicts with leaf {p!r}.")
        if isinstance(node.get(leaf), dict):
            raise ValueError(f"Key {flat_key!r} conflicts with section {leaf!r}.")
        node[leaf] = value
    return ans
