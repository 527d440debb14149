import math

import numpy as np
import pytest

from cuspwave.kernel import KernelSpec, kernel_eval_many
from cuspwave.spectral import (
    CosineSeries,
    Grid,
    SymbolSpec,
    analyze,
    apply_symbol,
    symbol_value,
    synthesize,
    synthesize_odd,
    zygmund_norm,
)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(96)  # not a power of two
    with pytest.raises(ValueError):
        Grid(2)
    g = Grid(8)
    assert g.nodes[0] == pytest.approx(-math.pi)
    assert g.nodes[4] == pytest.approx(0.0)


def test_synthesize_single_mode():
    grid = Grid(64)
    series = CosineSeries([0.0, 1.0])  # cos(2x)
    assert np.allclose(synthesize(series, grid), np.cos(2.0 * grid.nodes), atol=1e-14)


def test_round_trip_randomized():
    rng = np.random.default_rng(7)
    grid = Grid(128)
    for _ in range(100):
        M = int(rng.integers(1, 33))
        coeffs = rng.standard_normal(M)
        series = CosineSeries(coeffs)
        back = analyze(synthesize(series, grid), grid, M)
        assert np.allclose(back.coeffs, coeffs, atol=1e-13)


def test_antisymmetric_shift_identity():
    # odd-frequency series satisfy phi(x + pi) = -phi(x)
    grid = Grid(128)
    series = CosineSeries([1.0, 0.3, -0.5, 0.2], antisymmetric=True)
    assert np.all(series.coeffs[1::2] == 0.0)
    values = synthesize(series, grid)
    assert np.allclose(values, -np.roll(values, grid.N // 2), atol=1e-14)


def test_analyze_warns_on_asymmetric_input():
    grid = Grid(64)
    values = np.sin(grid.nodes) + 0.1  # odd plus a mean
    with pytest.warns(UserWarning, match="deviates"):
        analyze(values, grid, 4)


def test_synthesize_odd_matches_sine():
    grid = Grid(64)
    values = synthesize_odd(np.array([1.0, -0.5]), grid)
    assert np.allclose(
        values, np.sin(grid.nodes) - 0.5 * np.sin(2.0 * grid.nodes), atol=1e-14
    )


def test_symbol_families():
    k = np.array([1.0, 2.0, 4.0])
    neg = SymbolSpec("neg_order", 0.5)
    assert np.allclose(symbol_value(neg, k), k**-0.5)
    whit = SymbolSpec("whitham_power", 0.5)
    assert np.allclose(symbol_value(whit, k), (np.tanh(k) / k) ** 0.5)
    bes = SymbolSpec("bessel", 2.0)
    assert np.allclose(symbol_value(bes, k), 1.0 / (1.0 + k**2))
    with pytest.raises(ValueError):
        SymbolSpec("unknown", 0.5)
    with pytest.raises(ValueError):
        SymbolSpec("neg_order", 0.0)


def test_apply_symbol_is_diagonal():
    symbol = SymbolSpec("neg_order", 0.5)
    series = CosineSeries([2.0, 0.0, 3.0])
    out = apply_symbol(series, symbol)
    assert out.coeffs == pytest.approx([2.0, 0.0, 3.0 * 3.0**-0.5])


def test_apply_symbol_matches_convolution_oracle():
    # (K * phi)(x) computed by quadrature with singularity subtraction
    # (using that K has zero mean):
    #   int_0^pi K(y) [phi(x - y) + phi(x + y) - 2 phi(x)] dy
    alpha = 0.5
    symbol = SymbolSpec("neg_order", alpha)
    spec = KernelSpec(alpha)
    series = CosineSeries([1.0, -0.4, 0.15])

    def phi(x):
        return sum(c * np.cos((k + 1) * x) for k, c in enumerate(series.coeffs))

    # dyadic panels toward the singularity, Gauss-Legendre on each
    edges = [0.0] + [math.pi * 2.0**-m for m in reversed(range(0, 40))]
    t, w = np.polynomial.legendre.leggauss(32)
    for x in (0.3, 1.1, 2.5):
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            y = 0.5 * (b - a) * t + 0.5 * (a + b)
            f = phi(x - y) + phi(x + y) - 2.0 * phi(x)
            total += 0.5 * (b - a) * np.dot(w, kernel_eval_many(spec, y) * f)
        expected = sum(
            c * (k + 1.0) ** -alpha * np.cos((k + 1) * x)
            for k, c in enumerate(series.coeffs)
        )
        assert total == pytest.approx(expected, abs=1e-6)


def test_zygmund_norm_zero_and_pure_mode():
    assert zygmund_norm(CosineSeries(np.zeros(4)), 0.5) == 0.0
    # a pure mode at k = 2^j sits entirely in block j with weight 1
    coeffs = np.zeros(8)
    coeffs[7] = 1.0  # cos(8x), block j = 3
    assert zygmund_norm(CosineSeries(coeffs), 0.5) == pytest.approx(
        2.0 ** (3 * 0.5), rel=1e-12
    )
    with pytest.raises(ValueError):
        zygmund_norm(CosineSeries(coeffs), -1.0)


def test_zygmund_norm_homogeneity():
    rng = np.random.default_rng(3)
    series = CosineSeries(rng.standard_normal(16))
    assert zygmund_norm(3.0 * series, 0.7) == pytest.approx(
        3.0 * zygmund_norm(series, 0.7), rel=1e-12
    )


def test_zygmund_norm_detects_smoothness():
    # coefficients k^-(s+1) lie in the Zygmund space of order s: the weighted
    # block norms stay bounded as resolution grows, while for s' > s they blow up
    s = 0.5
    norms = []
    for M in (64, 256, 1024):
        k = np.arange(1, M + 1)
        series = CosineSeries(k ** -(s + 1.0))
        norms.append(zygmund_norm(series, s))
    assert norms[2] < 1.5 * norms[0]
    rough = [
        zygmund_norm(CosineSeries(np.arange(1, M + 1) ** -(s + 1.0)), s + 0.4)
        for M in (64, 1024)
    ]
    assert rough[1] > 2.0 * rough[0]


def test_series_arithmetic_and_aliasing_guard():
    a = CosineSeries([1.0, 2.0])
    b = CosineSeries([0.5])
    c = a + b
    assert c.coeffs == pytest.approx([1.5, 2.0])
    assert (2.0 * a).coeffs == pytest.approx([2.0, 4.0])
    with pytest.raises(ValueError):
        synthesize(CosineSeries(np.ones(40)), Grid(64))
