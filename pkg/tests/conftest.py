import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

import rkfd


@pytest.fixture
def tab4():
    return rkfd.builtin_rkfd4_corrected()


@pytest.fixture
def tab4p():
    return rkfd.builtin_rkfd4_printed()


@pytest.fixture
def tab5():
    return rkfd.builtin_rkfd5()


@pytest.fixture
def rk4():
    return rkfd.builtin_rk4()


@pytest.fixture
def p1():
    return rkfd.problem_1()


@pytest.fixture
def p2():
    return rkfd.problem_2()


@pytest.fixture
def p3():
    return rkfd.problem_3()


@pytest.fixture
def p4():
    return rkfd.problem_4()


@pytest.fixture
def p5():
    return rkfd.problem_5()


@pytest.fixture
def all_problems(p1, p2, p3, p4, p5):
    return [p1, p2, p3, p4, p5]
