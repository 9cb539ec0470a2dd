import random

import pytest

from sharp3.g0_instance import builtin_pgl2_f8, builtin_s3
from sharp3.group_core import FreeLetter, parse_word


@pytest.fixture(scope="session")
def s3():
    return builtin_s3()


@pytest.fixture(scope="session")
def pgl():
    return builtin_pgl2_f8()


@pytest.fixture
def W(s3):
    return lambda text: parse_word(text, s3)


def random_word(rng: random.Random, g0, max_len=12, gens_per_class=3):
    n = rng.randint(0, max_len)
    out = []
    for _ in range(n):
        if rng.random() < 0.35:
            out.append(rng.randrange(1, g0.order))
        else:
            out.append(FreeLetter(rng.choice("RSU"), rng.randrange(gens_per_class), rng.choice((1, -1))))
    return tuple(out)
