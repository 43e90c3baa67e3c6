import random

import pytest
from hypothesis import strategies as st

from cpsm.data import SequenceDB, parse_plain

TOY = "A C B\nB A A C\n"


@pytest.fixture
def toy():
    return parse_plain(TOY)


def random_db(rng: random.Random, max_symbols=5, max_n=15, max_len=8) -> SequenceDB:
    sigma = rng.randint(1, max_symbols)
    n = rng.randint(1, max_n)
    rows = [[f"s{rng.randrange(sigma)}" for _ in range(rng.randint(1, max_len))] for _ in range(n)]
    return SequenceDB.from_tokens(rows)


@st.composite
def databases(draw, max_symbols=4, max_n=6, max_len=6):
    sigma = draw(st.integers(1, max_symbols))
    row = st.lists(st.integers(0, sigma - 1), min_size=1, max_size=max_len)
    rows = draw(st.lists(row, min_size=1, max_size=max_n))
    return SequenceDB.from_tokens([[f"s{v}" for v in r] for r in rows])
