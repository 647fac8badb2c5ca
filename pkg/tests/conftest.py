import pytest

from adev import corpus
from adev.compiler import compile_program
from adev.seed import Seed

TWO_BRANCH_ENUM = (r"\theta : I. E (do { b <- flip_enum theta; "
                   r"if b then return 0 else return (0 - theta / 2) })")
TWO_BRANCH_REINFORCE = TWO_BRANCH_ENUM.replace("flip_enum", "flip_reinforce")


def draws(program, theta, n, seed=0):
    """n dual samples of a program's translated estimator at theta."""
    c = program if hasattr(program, "estimator") else compile_program(program)
    est = c.estimator(theta)
    root = Seed.from_int(seed)
    return [est.draw(root.child(i)) for i in range(n)]


@pytest.fixture
def two_branch_enum():
    return compile_program(TWO_BRANCH_ENUM, "two_branch_enum")


@pytest.fixture
def two_branch_reinforce():
    return compile_program(TWO_BRANCH_REINFORCE, "two_branch_reinforce")


def corpus_program(name):
    return corpus.load(name)
