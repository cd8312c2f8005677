from src import calc


def test_add():
    assert calc.add(2, 3) == 5


def test_sub():
    assert calc.sub(2, 3) == -1


def test_scale():
    assert calc.scale([1, 2], 3) == [3, 6]


def test_mean():
    assert calc.mean([1, 2, 3, 6]) == 3


def test_clamp_inside():
    assert calc.clamp(5, 0, 10) == 5


def test_clamp_below():
    assert calc.clamp(-3, 0, 10) == 0


def test_clamp_degenerate():
    assert calc.clamp(7, 2, 2) == 2


def test_clamp_mean():
    assert calc.clamp(calc.mean([1, 2, 3]), 0, 5) == 2


def test_clamp_above():
    assert calc.clamp(15, 0, 10) == 10


def test_clamp_scaled_above():
    assert calc.clamp(calc.scale([4], 3)[0], 0, 10) == 10
