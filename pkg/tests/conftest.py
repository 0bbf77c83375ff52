import math

import numpy as np
import pytest

from mlccf.modulation import Constellation, make_qpsk_gray

ACCEPTANCE_LINES = []


def record_criterion(number, title, passed, detail=""):
    status = "PASS" if passed else "FAIL"
    ACCEPTANCE_LINES.append(f"[{status}] criterion {number}: {title}" + (f" ({detail})" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_8psk_gray():
    gray = [0b000, 0b001, 0b011, 0b010, 0b110, 0b111, 0b101, 0b100]
    entries = {format(lab, "03b"): np.exp(1j * math.pi / 4 * k) for k, lab in enumerate(gray)}
    return Constellation.from_labeled(3, entries, name="8psk-gray")


@pytest.fixture(scope="session")
def qpsk():
    return make_qpsk_gray()


@pytest.fixture(scope="session")
def psk8():
    return make_8psk_gray()
