import numpy as np
import pytest

from nkic.netmodel import ChannelRealization

_ACCEPTANCE = {}


def make_channel(gains, gamma=None):
    """Realization from an (n, n) scalar gain matrix or an (n, n, N, N) tensor."""
    g = np.asarray(gains, dtype=complex)
    if g.ndim == 2:
        g = g[:, :, None, None]
    n = g.shape[0]
    return ChannelRealization(g, np.ones((n, n)) if gamma is None else np.asarray(gamma, dtype=float))


@pytest.fixture
def record():
    """Register the verdict of an acceptance criterion for the summary lines."""

    def _record(key, ok, detail):
        _ACCEPTANCE[key] = (bool(ok), detail)
        print(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {detail}")

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: int(k.split()[0])):
        ok, detail = _ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}: {detail}")
