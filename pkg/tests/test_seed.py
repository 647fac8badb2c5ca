import math

from adev import seed as rng
from adev.seed import PinnedSeed, Seed


def test_same_seed_same_stream():
    a, b = Seed.from_int(7), Seed.from_int(7)
    assert a.uniform() == b.uniform()
    assert a.split() == b.split()
    assert a.child(3).uniform() == b.child(3).uniform()


def test_uniform_is_strictly_inside_unit_interval():
    root = Seed.from_int(0)
    us = [root.child(i).uniform() for i in range(10_000)]
    assert all(0.0 < u < 1.0 for u in us)
    assert abs(math.fsum(us) / len(us) - 0.5) < 4 * math.sqrt(1 / 12 / len(us))


def test_split_halves_are_uncorrelated():
    root = Seed.from_int(1)
    pairs = [root.child(i).split() for i in range(10_000)]
    xs = [a.uniform() for a, _ in pairs]
    ys = [b.uniform() for _, b in pairs]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    vx = sum((x - mx) ** 2 for x in xs)
    vy = sum((y - my) ** 2 for y in ys)
    assert abs(cov / math.sqrt(vx * vy)) < 0.05


def test_children_differ_from_each_other_and_from_split():
    root = Seed.from_int(2)
    values = {root.child(i).uniform() for i in range(1000)}
    assert len(values) == 1000
    assert root.split()[0].uniform() not in values


def test_as_real_is_logit_of_uniform():
    s = Seed.from_int(3)
    u = s.uniform()
    assert s.as_real() == math.log(u) - math.log1p(-u)


def test_pinned_seed():
    s = PinnedSeed(0.25, (PinnedSeed(1.0), PinnedSeed(-1.0)))
    assert s.as_real() == 0.25
    assert s.split()[1].as_real() == -1.0
    assert PinnedSeed(0.0).uniform() == 0.5


def test_discrete_draws():
    root = Seed.from_int(4)
    assert all(1 <= rng.uniform_index(root.child(i), 3) <= 3 for i in range(1000))
    assert rng.geometric(root, 1.0) == 0
    n = 20_000
    mean = sum(rng.poisson(root.child(i), 2.0) for i in range(n)) / n
    assert abs(mean - 2.0) < 4 * math.sqrt(2.0 / n)
    mean = sum(rng.geometric(root.child(i), 0.5) for i in range(n)) / n
    assert abs(mean - 1.0) < 4 * math.sqrt(2.0 / n)
