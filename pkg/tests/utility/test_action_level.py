import logging

import pytest

from tubeground.utility.action_level import ActionLevel, BadActionLevelError

LOGGER = logging.getLogger(__name__)


@pytest.mark.parametrize(
    "action, expected",
    [
        (ActionLevel.IGNORE, ActionLevel.IGNORE),
        (ActionLevel.IGNORE.value, ActionLevel.IGNORE),
        (ActionLevel.IGNORE.name, ActionLevel.IGNORE),
        ("Warn", ActionLevel.WARN),
        ("raise", ActionLevel.RAISE),
    ],
)
def test_verify(action, expected):
    assert ActionLevel.verify(action) is expected


@pytest.mark.parametrize("action", ["ignored", 0, None])
def test_bad_action(action):
    purpose = "degenerate boxes"
    with pytest.raises(BadActionLevelError) as ec:
        ActionLevel.verify(action, purpose)
    assert purpose in str(ec.value)
    assert "('raise', 'warn', 'ignore')" in str(ec.value)


def test_act(caplog):
    with pytest.raises(KeyError, match="boom"):
        ActionLevel.RAISE.act("boom", LOGGER, error_type=KeyError)

    with pytest.warns(RuntimeWarning, match="careful"):
        ActionLevel.WARN.act("careful", LOGGER, warning_type=RuntimeWarning)

    with caplog.at_level(logging.DEBUG, logger=__name__):
        ActionLevel.IGNORE.act("quiet", LOGGER)
    assert [(r.levelno, r.message) for r in caplog.records if r.message == "quiet"] == [(logging.DEBUG, "quiet")]
