"""Wave-function synthesis and the multi-valuedness constraints.

Wave functions of the three-dimensional body are synthesized from reduced
amplitudes as D^s(u) f(q) D^j(v^-1) over SU(2) x invariants x SU(2); the
class structure (integer versus half-integer labels), the constraints at a
totally degenerate invariant spectrum, the discrete exchange-symmetry
conditions, and a Monte-Carlo full-group scalar product used as the oracle for
the reduced one live here too.
"""

from __future__ import annotations

import itertools
import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .grids import GridSpec
from .models import ModelKind, ReducedAmplitude, SectorLabel, weight_factor
from .rotation import rotation_vector_from_so3
from .spin import (
    TWO_PI,
    SpinLabel,
    check_su2,
    rotation_vector_from_su2,
    su2_from_rotation_vector,
    wigner_d,
    wigner_d_stack,
)

__all__ = [
    "SuperselectionReport",
    "halfness_validate",
    "synthesize",
    "synthesize_component",
    "make_component_synthesizer",
    "degenerate_constraint_check",
    "exchange_symmetry_check",
    "k_plus_elements",
    "sample_haar_rotation_vectors",
    "montecarlo_full_product",
    "reduced_scalar_product",
    "write_amplitude",
    "read_amplitude",
]


# ---------------------------------------------------------------------------
# superselection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SuperselectionReport:
    """Class content of a sector list and whether |Psi|^2 projects down."""

    classes: frozenset
    projectable: bool
    violations: tuple = field(default_factory=tuple)


def halfness_validate(sectors) -> SuperselectionReport:
    """Classify sectors into bosonic/fermionic and flag inadmissible mixing.

    Sectors whose two labels differ by a half-integer cannot carry an
    amplitude at all and are reported as violations; the remaining ones are
    bosonic (integer labels) or fermionic (half-integer).  |Psi|^2 is a
    function of the body configuration itself only when a single class is
    present.
    """
    classes = set()
    violations = []
    for sec in sectors:
        if not sec.halfness_ok:
            violations.append(f"sector {sec}: labels differ by a half-integer, amplitude vanishes")
            continue
        classes.add("fermionic" if sec.fermionic else "bosonic")
    projectable = len(classes) == 1 and not violations
    return SuperselectionReport(
        classes=frozenset(classes), projectable=projectable, violations=tuple(violations)
    )


# ---------------------------------------------------------------------------
# synthesis
# ---------------------------------------------------------------------------


def _interpolator(amp: ReducedAmplitude) -> RegularGridInterpolator:
    axes = [amp.grid.nodes(a) for a in range(amp.grid.ndim)]
    return RegularGridInterpolator(
        axes, amp.values, method="linear", bounds_error=False, fill_value=None
    )


def amplitude_mc_box(amp: ReducedAmplitude) -> list[tuple[float, float]]:
    """Half-cell-padded node span, the region the Riemann-sum quadrature covers."""
    box = []
    for a in range(amp.grid.ndim):
        nodes = amp.grid.nodes(a)
        h = amp.grid.spacing(a)
        box.append((float(nodes[0] - 0.5 * h), float(nodes[-1] + 0.5 * h)))
    return box


def synthesize(amplitudes, u, q, v) -> dict:
    """Per-sector matrices D^s(u) f(q) D^j(v^-1) at one configuration.

    ``q`` is interpolated multilinearly on each amplitude's grid; the result
    maps each sector to its (2s+1) x (2j+1) matrix.  Only n = 3 amplitudes
    participate (the two arguments are SU(2) elements).
    """
    u = check_su2(u)
    v = check_su2(v)
    q = np.asarray(q, dtype=float)
    out = {}
    for amp in amplitudes:
        if amp.sector.n != 3:
            raise ValueError("synthesis acts on n = 3 amplitudes")
        du = wigner_d(SpinLabel(amp.sector.left), u)
        dv_inv = wigner_d(SpinLabel(amp.sector.right), v).conj().T
        fq = _interpolator(amp)(q)[0]
        out[amp.sector] = du @ fq @ dv_inv
    return out


def synthesize_component(amplitudes, u, q, v, row: int = 0, col: int = 0) -> complex:
    """Sum of the (row, col) entries of the per-sector synthesized matrices.

    Entries outside a sector's fiber shape do not contribute.  Row/column are
    ladder-basis indices (row 0 holds the highest weight).
    """
    total = 0.0 + 0.0j
    for sector, mat in synthesize(amplitudes, u, q, v).items():
        dl, dr = sector.fiber_shape
        if row < dl and col < dr:
            total += mat[row, col]
    return total


def make_component_synthesizer(amplitudes, row: int = 0, col: int = 0):
    """Batched scalar synthesizer psi(us, qs, vs) -> complex array.

    ``us``/``vs`` are stacks of SU(2) elements (batch, 2, 2), ``qs`` invariant
    points (batch, 3); used by the Monte-Carlo scalar product.
    """
    amps = list(amplitudes)
    interps = [_interpolator(a) for a in amps]

    def psi(us: np.ndarray, qs: np.ndarray, vs: np.ndarray) -> np.ndarray:
        ku = np.array([rotation_vector_from_su2(u) for u in us])
        kv = np.array([rotation_vector_from_su2(v) for v in vs])
        out = np.zeros(len(us), dtype=complex)
        for amp, interp in zip(amps, interps):
            dl, dr = amp.sector.fiber_shape
            if row >= dl or col >= dr:
                continue
            du = wigner_d_stack(SpinLabel(amp.sector.left), ku)
            dv = wigner_d_stack(SpinLabel(amp.sector.right), kv)
            fq = interp(qs)
            dv_inv = np.swapaxes(dv.conj(), -1, -2)
            out += np.einsum("nb,nbc,nc->n", du[:, row, :], fq, dv_inv[:, :, col])
        return out

    return psi


# ---------------------------------------------------------------------------
# degenerate-spectrum and exchange constraints
# ---------------------------------------------------------------------------


def degenerate_constraint_check(amp: ReducedAmplitude, c: float) -> float:
    """Violation magnitude of the total-degeneracy constraint at q^a = c.

    The amplitude is extrapolated to the fully degenerate point from the three
    grid nodes nearest to it (quadratic fit in the radial distance).  Sectors
    with distinct labels must vanish there; equal-label sectors must be
    proportional to the identity, and the returned value is the distance from
    that set.
    """
    pts = amp.grid.points()
    target = np.full(pts.shape[1], float(c))
    dist = np.linalg.norm(pts - target, axis=1)
    order = np.argsort(dist)
    flat = amp.flat()
    # three nearest *distinct* radial distances; nodes tied at the same
    # distance are averaged so the quadratic fit stays well posed
    rs: list[float] = []
    vals: list[np.ndarray] = []
    i = 0
    while i < len(order) and len(rs) < 3:
        r = dist[order[i]]
        tied = [order[i]]
        i += 1
        while i < len(order) and dist[order[i]] - r < 1e-9 * max(r, 1.0):
            tied.append(order[i])
            i += 1
        rs.append(r)
        vals.append(flat[tied].mean(axis=0))
    if len(rs) < 3:
        raise ValueError("grid too degenerate for radial extrapolation")
    vander = np.vander(np.array(rs), 3, increasing=True)  # columns 1, r, r^2
    coeff = np.linalg.solve(vander, np.stack([v.ravel() for v in vals]))
    f0 = coeff[0].reshape(amp.sector.fiber_shape)
    if amp.sector.left != amp.sector.right:
        return float(np.linalg.norm(f0))
    dim = amp.sector.fiber_shape[0]
    return float(np.linalg.norm(f0 - (np.trace(f0) / dim) * np.eye(dim)))


def k_plus_elements(n: int) -> list[np.ndarray]:
    """Determinant-one signed permutation matrices (4 for n = 2, 24 for n = 3)."""
    out = []
    for perm in itertools.permutations(range(n)):
        base = np.zeros((n, n))
        for i, j in enumerate(perm):
            base[i, j] = 1.0
        for signs in itertools.product((1.0, -1.0), repeat=n):
            mat = base * np.array(signs)[:, None]
            if round(np.linalg.det(mat)) == 1:
                out.append(mat)
    return out


def _signed_permutation_parts(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    n = w.shape[0]
    absw = np.abs(w)
    if not np.allclose(absw @ absw.T, np.eye(n), atol=1e-12) or not np.allclose(
        np.abs(np.linalg.det(w)), 1.0, atol=1e-12
    ):
        raise ValueError("not a signed permutation matrix")
    perm = np.argmax(absw, axis=1)
    return perm


def _lifted_representations(sector: SectorLabel, w: np.ndarray):
    """Candidate (D^left(W), D^right(W)) through the covering; both lifts for
    half-integer labels since the amplitude relation allows either sheet."""
    if sector.n == 2:
        theta = float(np.arctan2(w[1, 0], w[0, 0]))
        dl = np.array([[np.exp(1j * sector.left * theta)]])
        dr = np.array([[np.exp(1j * sector.right * theta)]])
        return [(dl, dr)]
    k = rotation_vector_from_so3(w)
    u = su2_from_rotation_vector(k)
    lifts = [u] if not (sector.fermionic) else [u, -u]
    out = []
    for lift in lifts:
        out.append(
            (
                wigner_d(SpinLabel(sector.left), lift),
                wigner_d(SpinLabel(sector.right), lift),
            )
        )
    return out


def exchange_symmetry_check(amp: ReducedAmplitude, w: np.ndarray) -> float:
    """Max violation over the grid of the exchange constraint under W.

    Checks f(q_perm) = D^l(W^-1) f(q) D^r(W) with the permutation read off the
    absolute-value pattern of the signed permutation matrix W.  Requires all
    grid axes identical (so that permuted nodes are again nodes).  For
    half-integer sectors both covering lifts are tried and the smaller
    violation is reported (for admissible same-parity sectors the two lifts
    give identical relations, which is exactly why such sectors are
    well-defined).  For n = 2 the right label pairs with the inverse right
    rotation factor, the same convention as :func:`synthesize`; the half-turn
    consequence (amplitudes with odd label sum vanish) holds in any
    convention.
    """
    perm = _signed_permutation_parts(w)
    axes0 = amp.grid.axes[0]
    for ax in amp.grid.axes:
        if ax != axes0:
            raise ValueError("exchange check needs identical axis boxes")
    n = amp.grid.ndim
    # (W q)_i = q_{perm[i]}; realize the substitution as an axis transpose
    values = amp.values
    permuted = np.transpose(values, axes=list(perm) + [n, n + 1])
    best = np.inf
    for dl, dr in _lifted_representations(amp.sector, w):
        rhs = np.einsum("ab,...bc,cd->...ad", dl.conj().T, values, dr)
        best = min(best, float(np.max(np.abs(permuted - rhs))))
    return best


# ---------------------------------------------------------------------------
# Monte-Carlo full-group scalar product
# ---------------------------------------------------------------------------


def sample_haar_rotation_vectors(rng: np.random.Generator, count: int) -> np.ndarray:
    """Rotation vectors distributed by the normalized invariant measure.

    Magnitude density sin^2(k/2) * 2/(2*pi) on (0, 2*pi) inverted by bisection
    of the monotone distribution function (k - sin k)/(2*pi); directions
    uniform on the sphere.
    """
    targets = rng.uniform(0.0, 1.0, size=count)
    lo = np.zeros(count)
    hi = np.full(count, TWO_PI)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        below = (mid - np.sin(mid)) / TWO_PI < targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    mags = 0.5 * (lo + hi)
    z = rng.uniform(-1.0, 1.0, size=count)
    phi = rng.uniform(0.0, TWO_PI, size=count)
    sq = np.sqrt(1.0 - z * z)
    axes = np.stack([sq * np.cos(phi), sq * np.sin(phi), z], axis=1)
    return axes * mags[:, None]


def montecarlo_full_product(
    psi1,
    psi2,
    qbox,
    samples: int,
    seed: int = 0,
    kind: ModelKind = ModelKind.AffAff,
    batch: int = 20000,
) -> tuple[complex, float]:
    """Monte-Carlo estimate of the full-group scalar product <psi1|psi2>.

    Both arguments are batched scalar synthesizers (see
    :func:`make_component_synthesizer`).  Group factors are Haar-sampled, the
    invariants uniformly over ``qbox`` (list of (lo, hi) per axis) with the
    weight P carried by the integrand.  Returns (estimate, standard error).
    """
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    rng = np.random.default_rng(seed)
    qbox = [(float(lo), float(hi)) for lo, hi in qbox]
    volume = float(np.prod([hi - lo for lo, hi in qbox]))
    total = 0.0 + 0.0j
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(batch, samples - done)
        ku = sample_haar_rotation_vectors(rng, m)
        kv = sample_haar_rotation_vectors(rng, m)
        us = np.array([su2_from_rotation_vector(k) for k in ku])
        vs = np.array([su2_from_rotation_vector(k) for k in kv])
        qs = np.stack(
            [rng.uniform(lo, hi, size=m) for lo, hi in qbox], axis=1
        )
        vals = np.conj(psi1(us, qs, vs)) * psi2(us, qs, vs)
        vals = vals * weight_factor(qs, kind) * volume
        total += vals.sum()
        total_sq += float(np.sum(np.abs(vals) ** 2))
        done += m
    mean = total / samples
    var = total_sq / samples - abs(mean) ** 2
    stderr = float(np.sqrt(max(var, 0.0) / samples))
    return complex(mean), stderr


def reduced_scalar_product(amp1: ReducedAmplitude, amp2: ReducedAmplitude,
                           kind: ModelKind = ModelKind.AffAff) -> complex:
    """Reduced-formula scalar product Tr(f1^+ f2) P summed over the grid / N N.

    Amplitudes in different sectors are orthogonal by the matrix-element
    orthogonality of the group factors, so the cross product is exactly zero.
    """
    from .solver import weighted_inner_product

    if amp1.sector != amp2.sector:
        return 0.0 + 0.0j
    weight = weight_factor(amp1.grid.points(), kind)
    return weighted_inner_product(amp1, amp2, weight=weight)


# ---------------------------------------------------------------------------
# amplitude binary format
# ---------------------------------------------------------------------------

_MAGIC = b"RAMP"
_VERSION = 1


def write_amplitude(path, amp: ReducedAmplitude) -> None:
    """Binary layout: magic 'RAMP', uint32 version, int32 n/left/right/naxes,
    per axis (float64 lo, float64 hi, int32 points), float64 offset, then the
    complex128 values little-endian, node-major then row-major fiber."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", _VERSION))
        fh.write(struct.pack("<iii", amp.sector.n, amp.sector.left, amp.sector.right))
        fh.write(struct.pack("<i", amp.grid.ndim))
        for lo, hi, pts in amp.grid.axes:
            fh.write(struct.pack("<ddi", lo, hi, pts))
        fh.write(struct.pack("<d", amp.grid.offset))
        fh.write(np.ascontiguousarray(amp.values, dtype="<c16").tobytes())


def read_amplitude(path) -> ReducedAmplitude:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError("not an amplitude file (bad magic)")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != _VERSION:
            raise ValueError(f"unsupported amplitude format version {version}")
        n, left, right = struct.unpack("<iii", fh.read(12))
        (naxes,) = struct.unpack("<i", fh.read(4))
        axes = []
        for _ in range(naxes):
            lo, hi, pts = struct.unpack("<ddi", fh.read(20))
            axes.append((lo, hi, pts))
        (offset,) = struct.unpack("<d", fh.read(8))
        grid = GridSpec(axes=tuple(axes), offset=offset)
        sector = SectorLabel(n, left, right)
        count = grid.size * sector.fiber_dim
        values = np.frombuffer(fh.read(16 * count), dtype="<c16").reshape(
            grid.shape + sector.fiber_shape
        )
    return ReducedAmplitude(sector, grid, values.copy())
