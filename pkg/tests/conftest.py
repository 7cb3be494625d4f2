import pytest

from relab.problems import parse_problem

BMM_TEXT = """\
delta: 3
white:
M O^2
P^3
black:
M [OP]^2
O^3
"""


def sinkless_text(delta: int) -> str:
    return (
        f"delta: {delta}\n"
        f"white:\nB [AB]^{delta - 1}\n"
        f"black:\nA [AB]^{delta - 1}\n"
    )


@pytest.fixture
def bmm():
    return parse_problem(BMM_TEXT)


@pytest.fixture
def sinkless():
    return parse_problem(sinkless_text(3))
