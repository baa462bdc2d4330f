"""Action level enumeration types."""
import logging
import warnings
from enum import Enum as _Enum
from typing import Literal, Type, Union


class ActionLevel(_Enum):
    """Action level enumeration type for recoverable events, such as degenerate boxes."""

    _ignore_ = ["ParseType"]

    ParseType = Union[str, "ActionLevel"]  # Type checking
    """Types that may be interpreted as an ``ActionLevel``."""

    RAISE = "raise"
    """Raise an error."""
    WARN = "warn"
    """Raise a warning."""
    IGNORE = "ignore"
    """Ignore the event."""

    @classmethod
    def verify(cls, action: ParseType, purpose: str = None) -> "ActionLevel":
        """Verify an action level.

        Args:
            action: The value to verify.
            purpose: Additional information to add if an exception is raised.

        Returns:
            A valid action level.

        Raises:
            BadActionLevelError: If `action` is not in ('ignore', 'warn', 'raise').

        Examples:
            >>> from tubeground.utility.action_level import ActionLevel
            >>> ActionLevel.verify("WARN")
            <ActionLevel.WARN: 'warn'>
        """
        if isinstance(action, ActionLevel):
            return action

        try:
            return ActionLevel[action.upper()]
        except (KeyError, AttributeError):
            raise BadActionLevelError(action, purpose)

    def act(
        self,
        msg: str,
        logger: logging.Logger,
        error_type: Type[Exception] = ValueError,
        warning_type: Type[Warning] = UserWarning,
    ) -> None:
        """Handle an event according to this level.

        Args:
            msg: Event description.
            logger: Logger to report the event with.
            error_type: Exception type raised for :attr:`RAISE`.
            warning_type: Warning category emitted for :attr:`WARN`.

        Raises:
            Exception: An instance of `error_type` if ``self`` is :attr:`RAISE`.
        """
        if self is ActionLevel.RAISE:
            logger.error(msg)
            raise error_type(msg)
        elif self is ActionLevel.WARN:
            logger.warning(msg)
            warnings.warn(msg, warning_type, stacklevel=3)
        else:
            logger.debug(msg)


ActionLevel.ParseType = Union[Literal["ignore", "warn", "raise", "IGNORE", "WARN", "RAISE"], ActionLevel]


class BadActionLevelError(ValueError):
    """Error raised for unknown action arguments."""

    def __init__(self, action: ActionLevel.ParseType, purpose: str = None) -> None:
        extra = f" for {purpose}" if purpose else ""
        accepted = tuple(a.value for a in ActionLevel)
        super().__init__(f"Permitted choices{extra} are {accepted}, but got {action=}.")
