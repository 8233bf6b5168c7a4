import math
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from fraccp import ProcessSpec

DATA = Path(__file__).parent / "data"

FAMILIES = {
    "pa": lambda nu, eta=1.0: ProcessSpec.polya_aeppli(0.5, 1.0, nu, eta),
    "pig": lambda nu, eta=1.0: ProcessSpec.pig(1.0, 1.0, nu, eta),
    "nb": lambda nu, eta=1.0: ProcessSpec.negative_binomial(0.5, nu, eta),
}


@pytest.fixture(params=sorted(FAMILIES))
def family(request):
    return request.param, FAMILIES[request.param]


def z_score(samples, exact):
    samples = np.asarray(samples, dtype=float)
    se = samples.std(ddof=1) / math.sqrt(samples.size)
    return (samples.mean() - exact) / se


def binomial_z(hits: int, n: int, p: float) -> float:
    return (hits - n * p) / math.sqrt(n * p * (1 - p))


def chi2_pvalue(draws, pmf, min_expected: float = 5.0) -> float:
    """Goodness of fit of integer draws to ``pmf[0..K]`` plus a pooled tail bucket.

    Buckets with expected count below ``min_expected`` are merged into one.
    """
    draws = np.asarray(draws)
    n, K = draws.size, len(pmf) - 1
    expected = np.append(pmf, max(1.0 - float(np.sum(pmf)), 0.0)) * n
    observed = np.bincount(np.minimum(draws, K + 1), minlength=K + 2).astype(float)
    keep = expected >= min_expected
    o = np.append(observed[keep], observed[~keep].sum())
    e = np.append(expected[keep], expected[~keep].sum())
    if e[-1] == 0:
        o, e = o[:-1], e[:-1]
    e *= o.sum() / e.sum()
    return float(stats.chisquare(o, e).pvalue)


_ACCEPTANCE_LINES = pytest.StashKey[list]()


@pytest.fixture
def record_criterion(request, capsys):
    """Print one PASS/FAIL line for an acceptance criterion and keep it for the summary."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_LINES, [])

    def record(number: int, title: str, passed: bool, detail: str) -> None:
        line = f"criterion {number} {'PASS' if passed else 'FAIL'}: {title} | {detail}"
        lines.append(line)
        with capsys.disabled():
            print("\n" + line)

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
