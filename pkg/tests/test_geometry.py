import csv
import json
import math

import numpy as np
import pytest

from gnbergman.curves import CurveSpec
from gnbergman.geometry import (
    ResidualResult,
    bergman_metric_at,
    centered_potential,
    diastasis_eval,
    disc_grid,
    gn_membership,
    is_hermitian,
    is_positive_definite,
    log_kernel,
    max_root_modulus,
    metric_finite_difference,
    potential_eval,
    pullback_residual,
)
from gnbergman.kernel import OutOfDomainError, kernel_formula_eval, rationalize_kernel
from gnbergman.sampling import sample_points
from gnbergman.symfun import symmetrize_point


# --- membership ---------------------------------------------------------------------

def test_membership_examples():
    assert gn_membership([0, 0, 0])
    assert not gn_membership([2, 1])
    assert max_root_modulus([2, 1]) == pytest.approx(1.0)
    assert gn_membership([1, 0.25])


def test_membership_from_roots():
    rng = np.random.default_rng(2)
    for _ in range(50):
        n = int(rng.integers(1, 5))
        theta = rng.random(n) * 2 * np.pi
        inner = 0.99 * np.sqrt(rng.random(n)) * np.exp(1j * theta)
        assert gn_membership(symmetrize_point(inner))
        outer = inner.copy()
        outer[0] = 1.01 * np.exp(1j * theta[0])
        assert not gn_membership(symmetrize_point(outer))


# --- metric -------------------------------------------------------------------------

def test_metric_n1_examples():
    f = rationalize_kernel(1)
    assert bergman_metric_at(f, [0]) == pytest.approx(np.array([[2.0]]))
    assert bergman_metric_at(f, [0.5])[0, 0] == pytest.approx(32 / 9, rel=1e-14)


def test_metric_n1_closed_form():
    f = rationalize_kernel(1)
    for z in (0.3j, -0.7 + 0.1j, 0.79):
        assert bergman_metric_at(f, [z])[0, 0].real == pytest.approx(2 / (1 - abs(z) ** 2) ** 2, rel=1e-12)


def test_metric_n2_origin():
    f = rationalize_kernel(2)
    g = bergman_metric_at(f, [0, 0])
    assert np.allclose(g, np.diag([1.5, 5.0]), rtol=0, atol=1e-14)
    fd = metric_finite_difference(f, [0, 0])
    assert np.max(np.abs(g - fd)) <= 1e-6 * np.abs(g).max()


@pytest.mark.parametrize("n", [2, 3])
def test_metric_matches_finite_differences(formulas, n):
    f = formulas(n)
    for lam in sample_points(30 + n, n, 4):
        xi = symmetrize_point(lam)
        g = bergman_metric_at(f, xi, dps=30)
        fd = metric_finite_difference(f, xi, dps=40)
        assert np.max(np.abs(g - fd)) <= 1e-6 * np.abs(g).max()
        assert is_hermitian(g, 1e-10)
        assert is_positive_definite(g)


def test_metric_rejects_outside():
    f = rationalize_kernel(2)
    with pytest.raises(OutOfDomainError):
        bergman_metric_at(f, [2, 1])
    with pytest.raises(ValueError):
        bergman_metric_at(f, [0.1])


def test_matrix_helpers():
    assert is_hermitian(np.array([[1, 1j], [-1j, 2]]))
    assert not is_hermitian(np.array([[1, 1j], [1j, 2]]))
    assert not is_positive_definite(np.array([[1, 0], [0, -1]]))


# --- diastasis and potentials ---------------------------------------------------------

def test_diastasis_basic(formulas):
    f = formulas(2)
    for lam, mu in zip(sample_points(5, 2, 20), sample_points(6, 2, 20)):
        x, e = symmetrize_point(lam), symmetrize_point(mu)
        assert abs(diastasis_eval(f, x, x)) < 1e-12
        d = diastasis_eval(f, x, e)
        assert d == pytest.approx(diastasis_eval(f, e, x), rel=1e-12, abs=1e-14)
        assert d >= 0


def test_diastasis_disc():
    f = rationalize_kernel(1)
    for z in (0.2, 0.5j, -0.6 + 0.3j):
        assert diastasis_eval(f, [z], [0]) == pytest.approx(-2 * math.log(1 - abs(z) ** 2), rel=1e-12)


def test_diastasis_outside():
    with pytest.raises(OutOfDomainError):
        diastasis_eval(rationalize_kernel(2), [2, 1], [0, 0])


def test_potential_constant_curve():
    f = rationalize_kernel(2)
    c = [0.1 + 0.1j, 0.05]
    G = CurveSpec([[c[0]], [c[1]]])
    want = log_kernel(f, c, c)
    for z, w in ((0, 0), (0.3, -0.2j), (0.5j, 0.1)):
        assert potential_eval(f, G, z, w) == pytest.approx(want, rel=1e-13)


def test_potential_diagonal_is_real():
    f = rationalize_kernel(2)
    G = CurveSpec.parse("0.1,0.5;0,0,0.2")
    v = potential_eval(f, G, 0.3 + 0.2j, 0.3 + 0.2j)
    gz = G(0.3 + 0.2j)
    assert v.imag == 0
    assert v.real == pytest.approx(math.log(kernel_formula_eval(f, gz, gz).real), rel=1e-14)


def test_potential_is_holomorphic_continuation():
    f = rationalize_kernel(2)
    G = CurveSpec.parse("0,0.8;0,0,0.3")
    z, w = 0.4, -0.5 + 0.3j
    v = potential_eval(f, G, z, w)
    assert np.exp(v) == pytest.approx(kernel_formula_eval(f, G(z), G(w)), rel=1e-12)


def test_centered_potential_origin():
    f = rationalize_kernel(2)
    G = CurveSpec.parse("0.1,0.5;0,0,0.2")
    assert abs(centered_potential(f, G, 0.0, 0.0)) < 1e-15


def test_potential_dimension_mismatch():
    with pytest.raises(ValueError):
        potential_eval(rationalize_kernel(2), CurveSpec.parse("0,1"), 0, 0)


# --- residual -----------------------------------------------------------------------

def test_disc_grid():
    g = disc_grid(0.4, 21)
    assert np.all(np.abs(g) <= 0.4 + 1e-12)
    assert 0 in g and g.size == 317
    with pytest.raises(ValueError):
        disc_grid(0.4, 1)


def test_residual_constant_curves():
    f = rationalize_kernel(2)
    F = CurveSpec([[0.3], [1j]], "euclidean")
    G = CurveSpec([[0.1], [0.02]])
    res = pullback_residual(F, G, f, disc_grid(0.5, 9))
    assert res.sup_norm <= 1e-12 and res.excluded == 0


def test_residual_pinned_pair():
    f = rationalize_kernel(2)
    F = CurveSpec.parse("0,1", "euclidean")
    G = CurveSpec.parse("0,1;0")
    grid = disc_grid(0.4, 11)
    sym = pullback_residual(F, G, f, grid)
    assert sym.sup_norm > 1e-3
    # at the origin the metric is diag(1.5, 5), so r(0) = 1 - 1.5
    assert sym.residual[np.argmin(np.abs(sym.z))] == pytest.approx(-0.5, abs=1e-12)
    fd = pullback_residual(F, G, f, grid, method="fd")
    assert np.max(np.abs(sym.residual - fd.residual)) < 1e-5


def test_residual_euclidean_part():
    f = rationalize_kernel(1)
    F = CurveSpec.parse("0,1;0,0,1", "euclidean")
    G = CurveSpec([[0.2]])
    res = pullback_residual(F, G, f, np.array([0.0, 0.3, 0.2 - 0.4j]))
    assert res.residual == pytest.approx(1 + 4 * np.abs(res.z) ** 2, rel=1e-13)


def test_residual_excludes_points_outside():
    f = rationalize_kernel(1)
    F = CurveSpec.parse("0", "euclidean")
    G = CurveSpec.parse("0,2")
    res = pullback_residual(F, G, f, disc_grid(0.9, 9))
    assert res.excluded > 0 and res.excluded == len(res.excluded_points)
    assert np.all(np.abs(res.z) < 0.5)


def test_residual_argument_errors():
    f = rationalize_kernel(2)
    F = CurveSpec.parse("0,1", "euclidean")
    G = CurveSpec.parse("0,1;0")
    with pytest.raises(ValueError):
        pullback_residual(G, G, f, disc_grid(0.4, 5))
    with pytest.raises(ValueError):
        pullback_residual(F, CurveSpec.parse("0,1"), f, disc_grid(0.4, 5))
    with pytest.raises(ValueError):
        pullback_residual(F, G, f, disc_grid(0.4, 5), method="exact")
    with pytest.raises(OutOfDomainError):
        pullback_residual(F, CurveSpec.parse("3;0"), f, disc_grid(0.4, 5))


def test_residual_outputs(tmp_path):
    res = ResidualResult(np.array([0j, 0.1 + 0.2j]), np.array([0.5, -1.25]), 3)
    res.write_csv(tmp_path / "r.csv")
    rows = list(csv.reader(open(tmp_path / "r.csv")))
    assert rows[0] == ["re(z)", "im(z)", "residual"]
    assert rows[2] == ["0.1", "0.2", "-1.25"]
    res.write_summary(tmp_path / "s.json")
    summary = json.loads((tmp_path / "s.json").read_text())
    assert summary == {"sup_norm": 1.25, "mean": -0.375, "points": 2, "excluded": 3, "method": "symbolic"}
