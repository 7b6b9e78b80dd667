"""The fully separable planar (n = 2) theory.

Fourier-reduced quantum operators for the hyperbolic and trigonometric
families, the classical reduced Hamiltonians used as cross-checks, the
coordinate systems on the invariant plane, and the spectral discreteness
criterion.

The shear operators exist in two symmetric discretizations (see
``models.shear_block_1d``): the flat sqrt(P)-rescaled form and the weighted
divergence form.  On a full shear line the flat form keeps the even
bound state that the wall-Dirichlet divergence form removes, which is why the
discreteness test runs the flat form across x = 0; on chamber boxes away from
the weight zeros both forms converge to the same spectra.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .grids import GridSpec, dirichlet_second_difference, weighted_divergence_block
from .models import (
    AssemblyError,
    InertialParams,
    ModelKind,
    ReducedOperator,
    SectorLabel,
    casimir_constant,
    dilatation_mass_coefficient,
    shear_block_1d,
    shear_mass_coefficient,
)


@dataclass(frozen=True)
class PlanarSector:
    """Fourier labels (m, n) of the two rotation angles."""

    m: int
    n: int

    def to_sector(self) -> SectorLabel:
        return SectorLabel.fourier(self.m, self.n)

    @property
    def single_valued(self) -> bool:
        """Whether the sector survives the half-turn identification.

        Rotating both angle factors by pi leaves every configuration fixed, so
        amplitudes with odd m + n cancel identically; only same-parity (m, n)
        carry states of the planar body.
        """
        return (self.m + self.n) % 2 == 0


@dataclass(frozen=True)
class PlanarState:
    """Classical phase-space point in separated coordinates."""

    q: float
    x: float
    p: float = 0.0
    p_x: float = 0.0
    p_alpha: float = 0.0
    p_beta: float = 0.0


def planar_coordinates(q1, q2):
    """(q, x) = ((q1+q2)/2, q2-q1)."""
    q1, q2 = np.asarray(q1, float), np.asarray(q2, float)
    return 0.5 * (q1 + q2), q2 - q1


def planar_coordinates_inverse(q, x):
    q, x = np.asarray(q, float), np.asarray(x, float)
    return q - 0.5 * x, q + 0.5 * x


def planar_momenta(p1, p2):
    """Conjugate momenta of (q, x): p = p1 + p2, p_x = (p2 - p1)/2."""
    p1, p2 = np.asarray(p1, float), np.asarray(p2, float)
    return p1 + p2, 0.5 * (p2 - p1)


def planar_momenta_inverse(p, p_x):
    p, p_x = np.asarray(p, float), np.asarray(p_x, float)
    return 0.5 * p - p_x, 0.5 * p + p_x


def classical_kinetic(kind: ModelKind, params: InertialParams, state: PlanarState) -> float:
    """Classical reduced kinetic energy in separated coordinates.

    The shear-angle couplings are (p_alpha - p_beta)^2 / (16 c sh^2(x/2)) -
    (p_alpha + p_beta)^2 / (16 c ch^2(x/2)) with c = A for the fully affine
    kind and c = I + A for the mixed kinds, which add their rotational
    constant I p_alpha^2/(I^2 - A^2) resp. I p_beta^2/(I^2 - A^2).
    """
    if not isinstance(kind, ModelKind):
        kind = ModelKind(kind)
    if not kind.hyperbolic:
        raise AssemblyError("classical planar form implemented for the hyperbolic kinds")
    spin_momenta = state.p_alpha != 0.0 or state.p_beta != 0.0
    if state.x == 0.0 and spin_momenta:
        raise ValueError("x = 0 is singular for nonzero angle momenta")
    c = params.A if kind is ModelKind.AffAff else params.alpha
    if kind is ModelKind.AffAff:
        out = state.p**2 / (4.0 * (params.A + 2.0 * params.B))
    else:
        out = state.p**2 / (4.0 * (params.I + params.A + 2.0 * params.B))
    out += state.p_x**2 / c
    if spin_momenta:
        out += (state.p_alpha - state.p_beta) ** 2 / (16.0 * c * np.sinh(0.5 * state.x) ** 2)
        out -= (state.p_alpha + state.p_beta) ** 2 / (16.0 * c * np.cosh(0.5 * state.x) ** 2)
    if kind is ModelKind.MetAff:
        out += params.I * state.p_alpha**2 / (params.I**2 - params.A**2)
    elif kind is ModelKind.AffMet:
        out += params.I * state.p_beta**2 / (params.I**2 - params.A**2)
    return float(out)


def _one_axis_operator(kind, params, sector, grid, matrix, weight, role) -> ReducedOperator:
    return ReducedOperator(
        kind=kind,
        params=params,
        sector=sector,
        grid=grid,
        matrix=matrix.tocsr(),
        weight=weight,
        meta={"coordinates": "split", "role": role},
    )


def planar_quantum_operators(
    kind: ModelKind,
    params: InertialParams,
    sector: PlanarSector,
    qgrid: GridSpec,
    xgrid: GridSpec,
    v_dil=None,
    v_sh=None,
    x_form: str = "auto",
) -> tuple[ReducedOperator, ReducedOperator]:
    """The two independent 1-D operators of a separable planar model.

    The dilatation operator is -c_q d^2/dq^2 + V_dil; the shear operator is
    the weighted -c_x D_x plus the sector couplings, the kind's additive
    constant and V_sh.  ``x_form`` picks the shear discretization: "flat",
    "divergence", or "auto" (flat for the hyperbolic kinds, divergence for the
    trigonometric one, whose flat form is non-convergent at the critical
    -1/(4 sin^2) wall strength).
    """
    if not isinstance(kind, ModelKind):
        kind = ModelKind(kind)
    if kind is ModelKind.DAlembert:
        raise AssemblyError("use dalembert_planar for the rational kind")
    if qgrid.ndim != 1 or xgrid.ndim != 1:
        raise AssemblyError("qgrid and xgrid must be one-axis grids")
    params.validate(kind)
    label = sector.to_sector()
    if x_form == "auto":
        x_form = "divergence" if kind is ModelKind.UnitaryGroup else "flat"

    qn = qgrid.nodes(0)
    bq = dilatation_mass_coefficient(kind, params) * dirichlet_second_difference(
        len(qn), qgrid.spacing(0)
    )
    if v_dil is not None:
        bq = bq + sp.diags(np.asarray(v_dil(qn), dtype=float))
    q_op = _one_axis_operator(kind, params, label, qgrid, bq, np.ones(len(qn)), "dilatation")

    if x_form == "divergence":
        # half-offset wall-to-wall layout: the boundary half-points coincide
        # with the box ends, so a vanishing weight there yields the natural
        # (no-flux) condition instead of an artificial Dirichlet wall
        lo, hi, npts = xgrid.axes[0]
        hx = (hi - lo) / npts
        xn = lo + (np.arange(npts) + 0.5) * hx
    else:
        xn, hx = xgrid.nodes(0), xgrid.spacing(0)
    extra = np.asarray(v_sh(xn), dtype=float) if v_sh is not None else None
    bx = shear_block_1d(kind, params, label, xn, hx, form=x_form, extra_potential=extra)
    if kind.hyperbolic:
        xw = np.abs(np.sinh(xn))
    else:
        xw = np.abs(np.sin(xn))
    x_op = _one_axis_operator(kind, params, label, xgrid, bx, xw, "shear")
    x_op.meta["form"] = x_form
    x_op.meta["nodes"] = xn
    return q_op, x_op


def x_continuum_threshold(kind: ModelKind, params: InertialParams, sector: PlanarSector) -> float:
    """Bottom of the essential spectrum of the geodetic hyperbolic shear operator.

    The sqrt(P)-rescaled form tends to c_x/4 at large |x| (plus the kind's
    additive rotational constant); bound states are the levels below this
    threshold.
    """
    if not isinstance(kind, ModelKind):
        kind = ModelKind(kind)
    if not kind.hyperbolic:
        raise AssemblyError("threshold defined for the non-compact hyperbolic kinds")
    return 0.25 * shear_mass_coefficient(kind, params) + casimir_constant(
        kind, sector.to_sector(), params
    )


class SpectrumClass(enum.Enum):
    Discrete = "discrete"
    Continuous = "continuous"
    Marginal = "marginal"


def discreteness_criterion(sector: PlanarSector) -> SpectrumClass:
    """Geodetic shear spectrum class: the ch^-2 attraction carries (n+m)^2 and
    the sh^-2 repulsion (n-m)^2, so |n+m| > |n-m| binds, < scatters."""
    attract, repel = abs(sector.n + sector.m), abs(sector.n - sector.m)
    if attract > repel:
        return SpectrumClass.Discrete
    if attract < repel:
        return SpectrumClass.Continuous
    return SpectrumClass.Marginal


# ---------------------------------------------------------------------------
# rational (flat-measure) planar model
# ---------------------------------------------------------------------------


def _radial_axis_block(coupling_sq: int, inertia: float, nodes, h, v_diag) -> sp.csr_matrix:
    """1-D block -c (d^2 + (1/r) d) + c (coupling_sq/4)/r^2 + V, c = 1/(2 I).

    Even couplings use the half-point weighted divergence form (natural wall
    behaviour, amplitude smooth in r); odd couplings use the flat rescaled
    form, whose wall potential c (coupling_sq - 1)/(4 r^2) is regular or
    repulsive and whose rescaled amplitude is smooth.
    """
    c = 0.5 / inertia
    if coupling_sq % 2 == 0:
        block = weighted_divergence_block(nodes, h, np.abs, c)
        diag = c * (coupling_sq / 4.0) / nodes**2 + v_diag
    else:
        block = c * dirichlet_second_difference(len(nodes), h)
        diag = c * (coupling_sq - 1.0) / (4.0 * nodes**2) + v_diag
    return (block + sp.diags(diag)).tocsr()


def dalembert_planar(
    params: InertialParams,
    sector: PlanarSector,
    qgrid: GridSpec,
    potential=None,
) -> ReducedOperator:
    """Reduced planar operator of the flat-measure model with weight |Q1^2 - Q2^2|.

    The grid axes parameterize the (pi/4)-rotated invariants
    Qp = (Q1+Q2)/sqrt(2) and Qm = (Q1-Q2)/sqrt(2), in which the chamber
    Q1 > Q2, Q1 > -Q2 is the positive quadrant, the two singular lines are the
    coordinate walls, and the operator splits into two radial-type axes with
    couplings (n+m)^2 on the Qp axis and (n-m)^2 on the Qm axis.  ``potential``
    is called with raw invariant points (Q1, Q2) of shape (npoints, 2).
    Depends on the labels only through (n-m)^2 and (n+m)^2, hence is invariant
    under (m, n) -> (-m, -n).
    """
    params.validate(ModelKind.DAlembert)
    if qgrid.ndim != 2:
        raise AssemblyError("need a two-axis grid for the rotated invariants")
    for lo, _, _ in qgrid.axes:
        if lo < 0.0:
            raise AssemblyError("rotated-invariant axes must lie in the positive quadrant")
    label = sector.to_sector()

    axes_nodes = []
    for axis, csq in ((0, (sector.n + sector.m) ** 2), (1, (sector.n - sector.m) ** 2)):
        lo, hi, npts = qgrid.axes[axis]
        if csq % 2 == 0:
            h = (hi - lo) / npts
            nodes = lo + (np.arange(npts) + 0.5) * h
        else:
            h = (hi - lo) / (npts + 1)
            nodes = lo + (np.arange(npts) + 1.0) * h
        axes_nodes.append((nodes, h, csq))

    qp, qm = np.meshgrid(axes_nodes[0][0], axes_nodes[1][0], indexing="ij")
    q1 = (qp + qm) / np.sqrt(2.0)
    q2 = (qp - qm) / np.sqrt(2.0)
    vgrid = np.zeros(qp.size)
    if potential is not None:
        vgrid = np.asarray(
            potential(np.stack([q1.ravel(), q2.ravel()], axis=1)), dtype=float
        ).ravel()

    # split V across the two axes only if it separates exactly; otherwise keep
    # the kron-sum kinetic part and add the sampled potential diagonally.
    blocks = []
    for nodes, h, csq in axes_nodes:
        blocks.append(_radial_axis_block(csq, params.I, nodes, h, np.zeros(len(nodes))))
    h_mat = sp.kron(blocks[0], sp.identity(len(axes_nodes[1][0])), format="csr") + sp.kron(
        sp.identity(len(axes_nodes[0][0])), blocks[1], format="csr"
    )
    h_mat = (h_mat + sp.diags(vgrid)).tocsr()

    weight = 2.0 * np.abs(qp.ravel() * qm.ravel())
    op = ReducedOperator(
        kind=ModelKind.DAlembert,
        params=params,
        sector=label,
        grid=qgrid,
        matrix=h_mat,
        weight=weight,
        meta={
            "coordinates": "rotated",
            "axis_nodes": [axes_nodes[0][0], axes_nodes[1][0]],
        },
    )
    return op


# ---------------------------------------------------------------------------
# coordinate systems on the invariant plane
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PlanarCoordinates:
    """One invariant point in the rotated, polar and elliptic systems."""

    rotated: tuple[float, float]  # (Qp, Qm)
    polar: tuple[float, float]  # (r, phi), phi in [0, 2*pi)
    elliptic: tuple[float, float]  # (rho, lam), rho >= 0, lam in [0, 2*pi)


def coordinate_transforms(q1: float, q2: float) -> PlanarCoordinates:
    """Rotated, polar and elliptic coordinates of the invariant point (Q1, Q2).

    Rotated: Qp = (Q1+Q2)/sqrt(2), Qm = (Q1-Q2)/sqrt(2).  Polar on the rotated
    plane.  Elliptic: Qp = ch(rho) cos(lam), Qm = sh(rho) sin(lam) with foci
    (+-1, 0), branch rho >= 0, lam in [0, 2*pi).
    """
    qp = (q1 + q2) / np.sqrt(2.0)
    qm = (q1 - q2) / np.sqrt(2.0)
    r = float(np.hypot(qp, qm))
    if r == 0.0:
        raise ValueError("polar coordinates undefined at the origin")
    phi = float(np.arctan2(qm, qp) % (2.0 * np.pi))
    d1 = np.hypot(qp + 1.0, qm)
    d2 = np.hypot(qp - 1.0, qm)
    ch_rho = max(0.5 * (d1 + d2), 1.0)
    rho = float(np.arccosh(ch_rho))
    cos_lam = float(np.clip(0.5 * (d1 - d2), -1.0, 1.0))
    sh_rho = np.sinh(rho)
    if sh_rho > 1e-12:
        sin_lam = qm / sh_rho
    else:
        sin_lam = np.sqrt(max(0.0, 1.0 - cos_lam**2))
    lam = float(np.arctan2(sin_lam, cos_lam) % (2.0 * np.pi))
    return PlanarCoordinates(rotated=(float(qp), float(qm)), polar=(r, phi), elliptic=(rho, lam))


def from_rotated(qp: float, qm: float) -> tuple[float, float]:
    return float((qp + qm) / np.sqrt(2.0)), float((qp - qm) / np.sqrt(2.0))


def from_polar(r: float, phi: float) -> tuple[float, float]:
    return from_rotated(r * np.cos(phi), r * np.sin(phi))


def from_elliptic(rho: float, lam: float) -> tuple[float, float]:
    return from_rotated(np.cosh(rho) * np.cos(lam), np.sinh(rho) * np.sin(lam))
