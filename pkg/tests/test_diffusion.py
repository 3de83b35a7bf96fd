import math

import numpy as np
import pytest

from ipsdual.diffusion import (
    BracoParams,
    FellerParams,
    SdeRun,
    feller_laplace_closed_form,
    pure_death_solution,
    simulate_braco,
    simulate_logistic_feller,
    simulate_resem,
    simulate_resem_pair,
)
from ipsdual.streams import stream


def rk4(f, y0, t, steps=4000):
    h, y = t / steps, y0
    for _ in range(steps):
        k1 = f(y)
        k2 = f(y + h / 2 * k1)
        k3 = f(y + h / 2 * k2)
        k4 = f(y + h * k3)
        y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def test_pure_death_solution():
    assert pure_death_solution(1.0, 1.0, 1.0) == pytest.approx(0.5)
    assert pure_death_solution(0.7, 2.0, 0.0) == 0.7
    assert pure_death_solution(0.0, 2.0, 5.0) == 0.0
    for y0, beta, t in [(1.0, 1.0, 1.0), (3.0, 0.4, 2.5), (0.2, 5.0, 0.7)]:
        ode = rk4(lambda y: -beta * y * y, y0, t)
        assert pure_death_solution(y0, beta, t) == pytest.approx(ode, abs=1e-10)


def test_feller_laplace_closed_form():
    assert feller_laplace_closed_form(0.0, 2.0, 1.0, 1.0) == 1.0
    assert feller_laplace_closed_form(1.5, 2.0, 1.0, 0.0) == pytest.approx(math.exp(-3.0))
    assert feller_laplace_closed_form(1.0, 1.0, 1.0, 1.0) == pytest.approx(math.exp(-0.5))


def test_braco_trivial():
    g = stream(1)
    assert simulate_braco(BracoParams(1, 1, 1), 0, 5.0, g) == 0
    assert simulate_braco(BracoParams(0, 0, 0), 7, 5.0, g) == 7
    assert np.all(simulate_braco(BracoParams(0, 0, 0), 7, 5.0, g, size=50) == 7)


def test_braco_yule_mean():
    xs = simulate_braco(BracoParams(b=1.0, c=0.0, d=0.0), 1, 1.0, stream(2), size=100_000)
    se = xs.std(ddof=1) / math.sqrt(xs.size)
    assert abs(xs.mean() - math.e) <= 3 * se


def test_braco_range_and_absorption():
    xs = simulate_braco(BracoParams(0.5, 0.3, 2.0), 4, 3.0, stream(3), size=5000)
    assert xs.dtype.kind == "i" and xs.min() >= 0
    assert np.any(xs == 0)


@pytest.mark.slow
def test_braco_comes_down_from_large_start():
    xs = simulate_braco(BracoParams(1.0, 1.0, 0.5), 10_000, 1.0, stream(4), size=100_000)
    assert xs.min() >= 0 and xs.max() < 100


def test_resem_deterministic_case():
    y = simulate_resem(BracoParams(1.0, 0.0, 1.0), 1.0, SdeRun(1.0, 1e-4), stream(5))
    assert y == pytest.approx(0.5, abs=1e-4)


def test_resem_boundaries():
    g = stream(6)
    assert np.all(simulate_resem(BracoParams(2, 3, 1), 0.0, SdeRun(1.0, 1e-2), g, size=100) == 0)
    ys = simulate_resem(BracoParams(0, 5.0, 0), 1.0, SdeRun(1.0, 1e-2), g, size=1000)
    assert np.all((ys >= 0) & (ys <= 1))
    ys = simulate_resem(BracoParams(1, 2.0, 0.5), 0.5, SdeRun(2.0, 1e-2), g, size=2000)
    assert np.all((ys >= 0) & (ys <= 1))
    with pytest.raises(ValueError):
        simulate_resem(BracoParams(1, 1, 1), 1.5, SdeRun(1.0), g)


def test_feller_trivial():
    g = stream(7)
    assert simulate_logistic_feller(FellerParams(1, 1, 1), 0.0, SdeRun(1.0, 1e-2), g) == 0.0
    x = simulate_logistic_feller(FellerParams(1, 0, 0), 1.0, SdeRun(1.0, 1e-4), g)
    assert x == pytest.approx(math.e, abs=5e-4)
    xs = simulate_logistic_feller(FellerParams(-1, 2, 3), 0.3, SdeRun(1.0, 1e-2), g, size=2000)
    assert xs.min() >= 0
    with pytest.raises(ValueError):
        simulate_logistic_feller(FellerParams(1, 1, 1), -1.0, SdeRun(1.0), g)


def test_feller_martingale():
    xs = simulate_logistic_feller(FellerParams(0, 0, 1), 1.0, SdeRun(1.0, 1e-3), stream(8), size=100_000)
    se = xs.std(ddof=1) / math.sqrt(xs.size)
    assert abs(xs.mean() - 1.0) <= 3 * se


def test_euler_weak_order_one():
    # deterministic logistic ODE with known solution
    exact = 1 / (1 + math.exp(-1.0))
    errs = []
    for dt in (1e-2, 5e-3, 2.5e-3):
        x = simulate_logistic_feller(FellerParams(1, 1, 0), 0.5, SdeRun(1.0, dt), stream(9))
        errs.append(abs(x - exact))
    for a, b in zip(errs, errs[1:]):
        assert 1.6 < a / b < 2.4


def test_pair_coarse_matches_single_run_law():
    run = SdeRun(1.0, 1e-2)
    coarse, fine = simulate_resem_pair(BracoParams(1, 1, 0.5), 0.3, run, stream(10), 20_000)
    assert abs(coarse.mean() - fine.mean()) < 0.01
    assert np.all((coarse >= 0) & (coarse <= 1) & (fine >= 0) & (fine <= 1))


def test_sderun_validation():
    assert SdeRun(1.0, 1e-3).steps == 1000
    assert SdeRun(0.0).steps == 0
    with pytest.raises(ValueError):
        SdeRun(1e-4, 1e-3)
    with pytest.raises(ValueError):
        SdeRun(1.0, 0.0)


def test_params_validation():
    with pytest.raises(ValueError):
        BracoParams(-1, 0, 0)
    with pytest.raises(ValueError):
        FellerParams(0, -1, 0)
    assert FellerParams(1, 2, 3).dual(2.0) == FellerParams(1, 6, 1.0)
