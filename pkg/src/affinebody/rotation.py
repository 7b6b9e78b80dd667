"""Rotation-vector geometry of SO(3) and SU(2).

Closed-form exponential maps, the 2:1 covering projection, the bi-invariant
metric normalized to delta at the identity, the Haar measure and a
Gauss-Legendre quadrature for it, and the first-order generator fields of the
left/right translation actions.

Generator sign convention: ``generator_coefficients`` returns the coefficient
matrices of the operators Lambda_a, Upsilon_a that satisfy, with the standard
spin matrices S^s_a and the homomorphic representation matrices D^s,

    (1/i) Lambda_a D^s = S^s_a D^s        (left action),
    (1/i) Upsilon_a D^s = D^s S^s_a       (right action),

i.e. they generate the unitary translation actions with the physicist's sign.
Their difference Lambda_a - Upsilon_a rotates the rotation vector itself; its
coefficient matrix is returned by :func:`conjugation_coefficients`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spin import (
    TWO_PI,
    SpinLabel,
    build_spin_matrices,
    check_su2,
    pauli_matrices,
    su2_from_rotation_vector,
    rotation_vector_from_su2,
    wigner_d_from_rotation_vector,
    random_rotation_vectors,
)

__all__ = [
    "so3_from_rotation_vector",
    "rotation_vector_from_so3",
    "rotation_series_apply",
    "covering_projection",
    "killing_metric",
    "haar_weight",
    "conformal_coordinates",
    "conformal_factor",
    "conformal_residual",
    "GeneratorCoefficients",
    "generator_coefficients",
    "conjugation_coefficients",
    "radial_casimir_apply",
    "character",
    "HaarQuadrature",
    "su2_haar_quadrature",
    "geometry_checks",
]


def _cross_matrix(k: np.ndarray) -> np.ndarray:
    return np.array(
        [
            [0.0, -k[2], k[1]],
            [k[2], 0.0, -k[0]],
            [-k[1], k[0], 0.0],
        ]
    )


def so3_from_rotation_vector(k) -> np.ndarray:
    """Rotation matrix cos(k) I + (1-cos k) khat khat^T + sin(k) [k]_x / k.

    Requires |k| <= pi (the closed fundamental ball of SO(3)); regular at 0.
    """
    k = np.asarray(k, dtype=float)
    mag = np.linalg.norm(k)
    if mag > np.pi + 1e-12:
        raise ValueError(f"|k| = {mag:.6g} exceeds pi, outside the SO(3) ball")
    # sin(k)/k and (1-cos k)/k^2 via sinc for the regular limit
    sinc = np.sinc(mag / np.pi)
    half_sinc_sq = 0.5 * np.sinc(mag / TWO_PI) ** 2  # (1-cos k)/k^2
    return np.cos(mag) * np.eye(3) + half_sinc_sq * np.outer(k, k) + sinc * _cross_matrix(k)


def rotation_vector_from_so3(r, tol: float = 1e-9) -> np.ndarray:
    """Rotation vector with |k| in [0, pi] for a proper rotation matrix."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3) or np.linalg.norm(r.T @ r - np.eye(3)) > tol or np.linalg.det(r) < 0:
        raise ValueError("input is not a proper rotation matrix")
    cos_k = np.clip(0.5 * (np.trace(r) - 1.0), -1.0, 1.0)
    mag = np.arccos(cos_k)
    if mag < 1e-8:
        return np.zeros(3)
    if np.pi - mag > 1e-7:
        axis = np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]])
        axis /= np.linalg.norm(axis)
    else:
        # half turn: axis from the dominant column of R + I
        m = r + np.eye(3)
        axis = m[:, int(np.argmax(np.diag(m)))]
        axis /= np.linalg.norm(axis)
        # fix a deterministic sign (first nonzero component positive)
        for comp in axis:
            if abs(comp) > 1e-12:
                if comp < 0:
                    axis = -axis
                break
    return mag * axis


def rotation_series_apply(k, u, terms: int) -> np.ndarray:
    """Partial sum u + k x u + (1/2) k x (k x u) + ... with ``terms`` summands.

    With enough terms this converges to so3_from_rotation_vector(k) @ u.
    """
    if terms < 1:
        raise ValueError("terms must be >= 1")
    k = np.asarray(k, dtype=float)
    out = np.asarray(u, dtype=float).copy()
    cur = out.copy()
    for m in range(1, terms + 1):
        cur = np.cross(k, cur) / m
        out = out + cur
    return out


def covering_projection(u) -> np.ndarray:
    """SO(3) image of an SU(2) element: R_ab = Re tr(sigma_a u sigma_b u^+)/2.

    The kernel is {I, -I}; both lifts of a rotation project to the same matrix.
    """
    u = check_su2(u)
    sigmas = pauli_matrices()
    udag = u.conj().T
    r = np.empty((3, 3))
    for b in range(3):
        m = u @ sigmas[b] @ udag
        for a in range(3):
            r[a, b] = 0.5 * np.real(np.trace(sigmas[a] @ m))
    return r


def haar_weight(k) -> np.ndarray:
    """Invariant-measure weight (4/k^2) sin^2(k/2), normalized to 1 at k = 0.

    Accepts a 3-vector or an array of magnitudes.
    """
    k = np.asarray(k, dtype=float)
    mag = np.linalg.norm(k) if k.shape == (3,) else k
    return np.sinc(mag / TWO_PI) ** 2


def killing_metric(k) -> np.ndarray:
    """Metric w(k) delta_ab + (1 - w(k)) k_a k_b / k^2 with w = (4/k^2)sin^2(k/2).

    Normalized to delta at the identity; positive definite for |k| < 2*pi and
    degenerate on the covering sphere |k| = 2*pi, which is rejected.
    """
    k = np.asarray(k, dtype=float)
    mag = np.linalg.norm(k)
    if mag >= TWO_PI - 1e-12:
        raise ValueError("metric is degenerate at |k| = 2*pi")
    if mag < 1e-14:
        return np.eye(3)
    w = float(haar_weight(mag))
    khat = k / mag
    return w * np.eye(3) + (1.0 - w) * np.outer(khat, khat)


def conformal_coordinates(k, a: float) -> np.ndarray:
    """Conformally flat coordinates r = (a/k) tan(k/4) k, defined for |k| < 2*pi."""
    if a <= 0:
        raise ValueError("scale a must be positive")
    k = np.asarray(k, dtype=float)
    mag = np.linalg.norm(k)
    if mag >= TWO_PI - 1e-12:
        raise ValueError("conformal map is singular at |k| = 2*pi")
    if mag < 1e-14:
        return 0.25 * a * k
    return (a * np.tan(0.25 * mag) / mag) * k


def conformal_factor(r_mag, a: float):
    """Factor F with ds^2 = F(r) (dr^2 + r^2 dOmega^2): F = 16 a^2/(a^2+r^2)^2.

    (Fixes the obvious misprint of the linear-denominator form, which fails
    the small-k limit F -> 16/a^2.)
    """
    r_mag = np.asarray(r_mag, dtype=float)
    return 16.0 * a**2 / (a**2 + r_mag**2) ** 2


def conformal_residual(k, a: float, step: float = 1e-5) -> float:
    """Finite-difference pullback check of the conformal-factor identity.

    Computes the Jacobian J of k -> r by central differences and returns
    || J^T F(r) J - Gamma(k) ||_F, which vanishes when the conformal factor is
    exact.
    """
    k = np.asarray(k, dtype=float)
    jac = np.empty((3, 3))
    for b in range(3):
        dk = np.zeros(3)
        dk[b] = step
        jac[:, b] = (conformal_coordinates(k + dk, a) - conformal_coordinates(k - dk, a)) / (2 * step)
    r = conformal_coordinates(k, a)
    pulled = float(conformal_factor(np.linalg.norm(r), a)) * jac.T @ jac
    return float(np.linalg.norm(pulled - killing_metric(k)))


def _radial_coefficient(mag: float) -> float:
    """(k/2) ctg(k/2) with its removable singularity at k = 0."""
    if mag < 1e-6:
        x2 = 0.25 * mag * mag
        return 1.0 - x2 / 3.0 - x2 * x2 / 45.0
    return 0.5 * mag / np.tan(0.5 * mag)


@dataclass(frozen=True)
class GeneratorCoefficients:
    """Coefficient matrices of Lambda_a and Upsilon_a in the d/dk^b basis.

    Row a of ``lam`` (resp. ``ups``) holds the coefficients of d/dk^b in
    Lambda_a (resp. Upsilon_a); ``lam - ups`` is the coefficient matrix of the
    rotation-vector rotation generators (see :func:`conjugation_coefficients`).
    """

    point: np.ndarray
    lam: np.ndarray
    ups: np.ndarray


def generator_coefficients(k) -> GeneratorCoefficients:
    """Left/right translation generators at the point ``k``; see module docstring.

    Rejects |k| >= 2*pi where the coefficient functions blow up.  At k -> 0
    both matrices tend to -delta_ab (the sign that makes the spin matrices act
    with the standard sign, (1/i) Lambda_a D^s = S^s_a D^s).
    """
    k = np.asarray(k, dtype=float)
    mag = np.linalg.norm(k)
    if mag >= TWO_PI - 1e-12:
        raise ValueError("generator coefficients are singular at |k| = 2*pi")
    c = _radial_coefficient(mag)
    if mag < 1e-14:
        radial = c * np.eye(3)
    else:
        khat = k / mag
        radial = c * np.eye(3) + (1.0 - c) * np.outer(khat, khat)
    spin_part = 0.5 * _cross_matrix(k)
    lam = -(radial + spin_part)
    ups = -(radial - spin_part)
    return GeneratorCoefficients(point=k.copy(), lam=lam, ups=ups)


def conjugation_coefficients(k) -> np.ndarray:
    """Coefficient matrix of D_a := Lambda_a - Upsilon_a (rotates kbar itself)."""
    k = np.asarray(k, dtype=float)
    return -_cross_matrix(k)


def radial_casimir_apply(k: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Apply d^2/dk^2 + ctg(k/2) d/dk to samples of a class function.

    ``k`` must be a uniform grid inside (0, 2*pi) with at least 5 points.
    Central second-order differences in the interior, one-sided second-order
    stencils at the two end points.
    """
    k = np.asarray(k, dtype=float)
    f = np.asarray(f, dtype=float)
    if k.ndim != 1 or k.size < 5:
        raise ValueError("need at least 5 grid points")
    if k[0] <= 0.0 or k[-1] >= TWO_PI:
        raise ValueError("grid must lie inside (0, 2*pi)")
    h = k[1] - k[0]
    if np.max(np.abs(np.diff(k) - h)) > 1e-10 * h:
        raise ValueError("grid must be uniform")
    d1 = np.empty_like(f)
    d2 = np.empty_like(f)
    d1[1:-1] = (f[2:] - f[:-2]) / (2 * h)
    d2[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2
    d1[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
    d1[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
    d2[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h**2
    d2[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / h**2
    return d2 + d1 / np.tan(0.5 * k)


def character(label: SpinLabel, k) -> np.ndarray:
    """Class function chi_s(k) = sin((2s+1)k/2)/sin(k/2) of the s-representation."""
    if not isinstance(label, SpinLabel):
        label = SpinLabel.from_spin(label)
    k = np.asarray(k, dtype=float)
    n = label.dim
    return np.where(
        np.abs(np.sin(0.5 * k)) < 1e-12,
        float(n) * np.cos(0.5 * n * k) / np.cos(0.5 * k),  # limit via l'Hopital
        np.sin(0.5 * n * k) / np.sin(0.5 * k),
    )


@dataclass(frozen=True)
class HaarQuadrature:
    """Quadrature nodes (rotation vectors) and positive weights summing to 1."""

    nodes: np.ndarray  # (M, 3)
    weights: np.ndarray  # (M,)

    def integrate(self, values: np.ndarray) -> complex:
        """Weighted sum of per-node ``values`` (leading axis = node index)."""
        return np.tensordot(self.weights, values, axes=(0, 0))


def su2_haar_quadrature(level: int) -> HaarQuadrature:
    """Tensor Gauss-Legendre rule for the normalized invariant measure on SU(2).

    ``level`` nodes per axis in spherical coordinates (k, theta, phi) over
    (0, 2*pi) x (0, pi) x (0, 2*pi) with density 4 sin^2(k/2) sin(theta);
    weights are normalized to total 1.
    """
    if level < 2:
        raise ValueError("level must be >= 2")
    x, w = np.polynomial.legendre.leggauss(level)
    k = np.pi * (x + 1.0)
    wk = np.pi * w * 4.0 * np.sin(0.5 * k) ** 2
    th = 0.5 * np.pi * (x + 1.0)
    wth = 0.5 * np.pi * w * np.sin(th)
    ph = np.pi * (x + 1.0)
    wph = np.pi * w
    kk, tt, pp = np.meshgrid(k, th, ph, indexing="ij")
    ww = (wk[:, None, None] * wth[None, :, None] * wph[None, None, :]).ravel()
    nodes = np.stack(
        [
            (kk * np.sin(tt) * np.cos(pp)).ravel(),
            (kk * np.sin(tt) * np.sin(pp)).ravel(),
            (kk * np.cos(tt)).ravel(),
        ],
        axis=1,
    )
    return HaarQuadrature(nodes=nodes, weights=ww / ww.sum())


# ---------------------------------------------------------------------------
# invariant suite (used by the geometry-check CLI subcommand)
# ---------------------------------------------------------------------------


def _check(name: str, residual: float, tolerance: float) -> dict:
    return {
        "check": name,
        "residual": float(residual),
        "tolerance": float(tolerance),
        "pass": bool(residual <= tolerance),
    }


def geometry_checks(seed: int = 2024, samples: int = 60) -> list[dict]:
    """Run the geometry invariant suite; returns one record per check."""
    rng = np.random.default_rng(seed)
    out = []

    ks = random_rotation_vectors(rng, samples, 0.1, TWO_PI - 0.1)
    res = max(
        abs(np.sqrt(np.linalg.det(killing_metric(k))) - haar_weight(k)) for k in ks
    )
    out.append(_check("sqrt(det metric) equals measure weight", res, 1e-10))

    res = 0.0
    for _ in range(samples):
        u = su2_from_rotation_vector(random_rotation_vectors(rng, 1)[0])
        v = su2_from_rotation_vector(random_rotation_vectors(rng, 1)[0])
        res = max(
            res,
            np.linalg.norm(
                covering_projection(u @ v) - covering_projection(u) @ covering_projection(v)
            ),
        )
    out.append(_check("covering projection is a homomorphism", res, 1e-10))

    res = 0.0
    for _ in range(samples):
        u = su2_from_rotation_vector(random_rotation_vectors(rng, 1)[0])
        res = max(res, np.linalg.norm(covering_projection(u) - covering_projection(-u)))
    out.append(_check("projection identifies u and -u", res, 1e-12))

    res = 0.0
    for k in random_rotation_vectors(rng, samples, 0.05, TWO_PI - 0.05):
        u = su2_from_rotation_vector(k)
        res = max(res, np.linalg.norm(su2_from_rotation_vector(rotation_vector_from_su2(u)) - u))
    out.append(_check("rotation-vector round trip", res, 1e-12))

    res = 0.0
    for _ in range(samples):
        k = random_rotation_vectors(rng, 1, 0.05, 0.8)[0]  # inside injectivity radius
        v = su2_from_rotation_vector(random_rotation_vectors(rng, 1)[0])
        u = su2_from_rotation_vector(k)
        lhs = covering_projection(v) @ k
        rhs = rotation_vector_from_su2(v @ u @ v.conj().T)
        res = max(res, np.linalg.norm(lhs - rhs))
    out.append(_check("inner automorphism rotates the rotation vector", res, 1e-8))

    res = 0.0
    for k in random_rotation_vectors(rng, samples, 0.05, np.pi - 0.05):
        w_closed = so3_from_rotation_vector(k)
        uvec = rng.standard_normal(3)
        res = max(res, np.linalg.norm(w_closed @ uvec - rotation_series_apply(k, uvec, 40)))
    out.append(_check("iterated-cross-product series matches closed form", res, 1e-12))

    res = 0.0
    for k in random_rotation_vectors(rng, samples, 0.05, np.pi - 0.05):
        res = max(
            res,
            np.linalg.norm(covering_projection(su2_from_rotation_vector(k)) - so3_from_rotation_vector(k)),
        )
    out.append(_check("projection consistent with SO(3) exponential", res, 1e-12))

    res = max(conformal_residual(k, 2.0) for k in random_rotation_vectors(rng, samples, 0.1, TWO_PI - 0.3))
    out.append(_check("conformal-factor pullback residual", res, 1e-8))

    res = generator_relation_residual(rng, samples=min(samples, 30), max_twice=4)
    out.append(_check("translation generators act as spin matrices", res, 1e-6))

    quad = su2_haar_quadrature(24)
    out.append(_check("quadrature normalization", abs(quad.weights.sum() - 1.0), 1e-12))
    res = abs(quad.integrate(character(SpinLabel(1), np.linalg.norm(quad.nodes, axis=1))))
    out.append(_check("character integrates to zero", res, 1e-8))

    return out


def generator_relation_residual(
    rng: np.random.Generator, samples: int = 30, max_twice: int = 4, step: float = 1e-4
) -> float:
    """Max residual of (1/i) Lambda_a D^s - S^s_a D^s over random points, s <= max_twice/2.

    Central differences with the given step; also checks the right-action
    relation (1/i) Upsilon_a D^s = D^s S^s_a.
    """
    worst = 0.0
    labels = [SpinLabel(t) for t in range(max_twice + 1)]
    points = random_rotation_vectors(rng, samples, 0.2, TWO_PI - 0.3)
    for label in labels:
        spin = build_spin_matrices(label)
        for k in points:
            coeffs = generator_coefficients(k)
            grads = []
            for b in range(3):
                dk = np.zeros(3)
                dk[b] = step
                grads.append(
                    (
                        wigner_d_from_rotation_vector(label, k + dk)
                        - wigner_d_from_rotation_vector(label, k - dk)
                    )
                    / (2 * step)
                )
            d = wigner_d_from_rotation_vector(label, k)
            for a in range(3):
                lam_d = sum(coeffs.lam[a, b] * grads[b] for b in range(3))
                ups_d = sum(coeffs.ups[a, b] * grads[b] for b in range(3))
                worst = max(worst, np.linalg.norm(lam_d / 1j - spin.stack[a] @ d))
                worst = max(worst, np.linalg.norm(ups_d / 1j - d @ spin.stack[a]))
    return worst
