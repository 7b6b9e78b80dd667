import numpy as np
import pytest
import scipy.sparse as sp

from affinebody.grids import GridSpec, dirichlet_second_difference, weighted_divergence_block
from affinebody.models import InertialParams, ModelKind, ReducedAmplitude, SectorLabel
from affinebody.planar import PlanarSector, planar_quantum_operators, x_continuum_threshold
from affinebody.solver import (
    convergence_study,
    richardson,
    solve_lowest,
    weighted_inner_product,
)


def test_dirichlet_laplacian_sine_spectrum():
    n = 2048
    h = np.pi / (n + 1)
    op = dirichlet_second_difference(n, h)
    spec = solve_lowest(op, 3, tol=1e-9, seed=0)
    assert spec.meta["method"] == "tridiagonal"
    assert np.max(np.abs(spec.eigenvalues - [1.0, 4.0, 9.0]) / [1, 4, 9]) <= 1e-4


def test_legendre_weighted_operator():
    n = 2048
    h = np.pi / n
    nodes = (np.arange(n) + 0.5) * h
    op = weighted_divergence_block(nodes, h, lambda x: np.abs(np.sin(x)), 1.0)
    spec = solve_lowest(op, 4, tol=1e-9, seed=0)
    assert np.max(np.abs(spec.eigenvalues - [0.0, 2.0, 6.0, 12.0])) <= 1e-3 * 12


def test_iterative_matches_dense_500():
    rng = np.random.default_rng(42)
    n = 500
    dense = rng.standard_normal((n, n))
    dense = 0.5 * (dense + dense.T) + np.diag(np.linspace(0.0, 50.0, n))
    vals_d = solve_lowest(dense, 5, method="dense").eigenvalues
    vals_l = solve_lowest(dense, 5, method="lanczos", tol=1e-11, seed=2).eigenvalues
    assert np.max(np.abs(vals_d - vals_l)) <= 1e-9


def test_determinism_and_residual_contract():
    rng = np.random.default_rng(1)
    mat = sp.random(800, 800, density=0.01, random_state=7)
    mat = (mat + mat.T) + sp.diags(np.linspace(1.0, 9.0, 800))
    a = solve_lowest(mat.tocsr(), 4, method="lanczos", tol=1e-9, seed=5)
    b = solve_lowest(mat.tocsr(), 4, method="lanczos", tol=1e-9, seed=5)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.vectors, b.vectors)
    scale = np.maximum(1.0, np.abs(a.eigenvalues))
    assert np.all(a.residuals <= 1e-9 * scale)
    assert a.converged


def test_nonconvergence_flagged():
    rng = np.random.default_rng(3)
    dense = rng.standard_normal((400, 400))
    dense = 0.5 * (dense + dense.T)
    spec = solve_lowest(dense, 3, method="lanczos", tol=1e-14, maxiter=25, seed=0)
    assert not spec.converged


def test_weighted_inner_product_orthonormality():
    params = InertialParams(A=1.0, B=0.5, n=2)
    xg = GridSpec(axes=((0.4, 12.0, 400),))
    _, x_op = planar_quantum_operators(ModelKind.AffAff, params, PlanarSector(1, 2),
                                       GridSpec(axes=((-1, 1, 8),)), xg, x_form="flat")
    spec = solve_lowest(x_op, 3, method="dense")
    # convert rescaled eigenvectors back to amplitudes; with the weight in the
    # product they are orthonormal up to quadrature error
    amps = []
    for i in range(3):
        g = spec.vectors[:, i] / np.sqrt(xg.spacing(0))  # L2-normalize on the line
        f = (g / np.sqrt(x_op.weight)).reshape(400, 1, 1)
        amps.append(ReducedAmplitude(SectorLabel.fourier(1, 2), xg, f))
    for i in range(3):
        for j in range(3):
            val = weighted_inner_product(amps[i], amps[j], weight=x_op.weight)
            assert abs(val - (1.0 if i == j else 0.0)) <= 1e-8


def test_weighted_inner_product_validation():
    grid = GridSpec(axes=((0.0, 1.0, 5),))
    a = ReducedAmplitude(SectorLabel.fourier(0, 0), grid, np.ones((5, 1, 1), complex))
    b = ReducedAmplitude(SectorLabel.fourier(1, 1), grid, np.ones((5, 1, 1), complex))
    with pytest.raises(ValueError):
        weighted_inner_product(a, b)


def test_convergence_study_harmonic_order_two():
    def factory(res, box):
        n = int(res)
        h = 2.0 * box / (n + 1)
        nodes = -box + (np.arange(n) + 1) * h
        return dirichlet_second_difference(n, h) + sp.diags(0.25 * nodes**2)

    report = convergence_study(factory, [128, 256, 512], boxes=12.0, count=3, tol=1e-10)
    assert np.all((1.5 <= report.observed_order) & (report.observed_order <= 2.5))
    assert np.allclose(report.extrapolated, [0.5, 1.5, 2.5], atol=1e-5)
    # variational monotonicity: the last two refinements approach the limit
    # from the same side with shrinking error
    e1 = report.estimates[-2] - report.extrapolated
    e2 = report.estimates[-1] - report.extrapolated
    assert np.all(np.abs(e2) < np.abs(e1)) and np.all(e1 * e2 > 0)


def test_box_scaling_of_bound_and_continuum_sectors():
    params = InertialParams(A=1.0, B=0.5, n=2)
    from scipy.linalg import eigh_tridiagonal

    def lowest(sector, box):
        n = int(round(2 * box / 0.025)) - 1
        xg = GridSpec(axes=((-box, box, n),), offset=0.5)
        _, x_op = planar_quantum_operators(ModelKind.AffAff, params, sector,
                                           GridSpec(axes=((-1, 1, 8),)), xg, x_form="flat")
        vals, _ = eigh_tridiagonal(x_op.matrix.diagonal(), x_op.matrix.diagonal(1),
                                   select="i", select_range=(0, 0))
        return vals[0]

    bound = [lowest(PlanarSector(1, 2), box) for box in (15.0, 30.0)]
    assert abs(bound[1] - bound[0]) <= 1e-6  # genuine bound state, box-independent
    thr = x_continuum_threshold(ModelKind.AffAff, params, PlanarSector(-1, 2))
    cont = [lowest(PlanarSector(-1, 2), box) for box in (10.0, 20.0, 40.0)]
    gaps = [c - thr for c in cont]
    assert all(g > 0 for g in gaps) and gaps[0] > gaps[1] > gaps[2]


def test_richardson_helper():
    # synthetic sequence e(h) = L + c h^2 at h = 1, 1/2, 1/4
    levels = np.array([[3.0 + 0.4], [3.0 + 0.1], [3.0 + 0.025]])
    order, limit = richardson(levels, 2.0)
    assert order[0] == pytest.approx(2.0)
    assert limit[0] == pytest.approx(3.0)
