from __future__ import annotations

import random
from fractions import Fraction

import pytest

from repelsys.document import load_document

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def preset():
    return load_document


def random_rational_matrix(rng: random.Random, n: int, max_den: int = 6, density: float = 0.6,
                           max_num: int = 6) -> list[list[Fraction]]:
    return [
        [Fraction(rng.randint(0, max_num), rng.randint(1, max_den)) if rng.random() < density else Fraction(0)
         for _ in range(n)]
        for _ in range(n)
    ]


def random_projected(rng: random.Random, n: int, max_den: int = 6):
    """A matrix with a projected block decomposition, its partition and block matrix."""
    idx = list(range(n))
    rng.shuffle(idx)
    k = rng.randint(1, n)
    cuts = sorted(rng.sample(range(1, n), k - 1)) if k > 1 else []
    blocks = [sorted(idx[a:b]) for a, b in zip([0] + cuts, cuts + [n])]
    b = [[Fraction(rng.randint(0, 4), rng.randint(1, max_den)) if rng.random() < 0.7 else Fraction(0)
          for _ in blocks] for _ in blocks]
    a = [[Fraction(0)] * n for _ in range(n)]
    for i, bi in enumerate(blocks):
        for j, bj in enumerate(blocks):
            for c in bj:
                w = [rng.randint(0, 3) for _ in bi]
                if sum(w) == 0:
                    w[rng.randrange(len(w))] = 1
                tot = sum(w)
                for r, x in zip(bi, w):
                    a[r][c] = b[i][j] * Fraction(x, tot)
    return a, blocks, b


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_table(rng: random.Random, n: int, max_deg: int = 4, prefix: str = "c"):
    """Closed pullback table on ``n`` curves with no class information."""
    from repelsys.curve_dynamics import NULL, PERIPHERAL, Preimage, PullbackTable

    ids = [f"{prefix}{i}" for i in range(n)]
    rows = {}
    for c in ids:
        recs = []
        for _ in range(rng.randint(0, 3)):
            target = rng.choice(ids + [NULL, PERIPHERAL]) if rng.random() < 0.9 else NULL
            recs.append(Preimage(target, rng.randint(1, max_deg)))
        rows[c] = tuple(recs)
    return PullbackTable(tuple(ids), rows)
