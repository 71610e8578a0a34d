import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for the oracles module

from imgmine.segment import Transaction, TransactionDB

# Seven-transaction mining fixture. Transaction 002 deliberately includes the
# two-digit item 11; item codes are just positive integers to the miner.
SEVEN_TX_ROWS = {
    "001": (111, 121, 211, 221),
    "002": (11, 211, 222, 323),
    "003": (112, 122, 221, 421),
    "004": (111, 121, 421),
    "005": (111, 122, 211, 221, 413),
    "006": (211, 323, 524, 413),
    "007": (323, 524, 713),
}


@pytest.fixture
def seven_tx_db():
    return TransactionDB(
        transactions=[Transaction(tid=k, items=v) for k, v in SEVEN_TX_ROWS.items()]
    )


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS):
            terminalreporter.write_line(line)
