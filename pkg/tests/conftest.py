import pytest

# Worked four-firm example, kept verbatim as a frozen fixture.  Firm ids are
# 0-based; firms 0, 2, 3 discover their ideas, firm 1 does not.
FIG1 = """\
FIRMS 4
DISCOVERED
0
2
3
DIRECT
0 1
0 2
2 0
2 3
INDIRECT
0 1
2 0
"""

# Same network, except firm 0 also relays through firm 2.
FIG2 = FIG1 + "0 2\n"


@pytest.fixture
def fig1_text():
    return FIG1


@pytest.fixture
def fig2_text():
    return FIG2
