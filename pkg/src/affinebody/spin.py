"""Angular momentum matrices and SU(2) representation matrices.

Group elements are plain numpy arrays: an SU(2) element is a complex (2, 2)
unitary matrix with unit determinant, a rotation vector is a real 3-vector
whose magnitude is the rotation angle (range [0, 2*pi] on SU(2)).  Spin labels
are stored exactly through the doubled integer 2s, so half-integer tests never
touch floating point.

hbar = 1; spin matrices carry it implicitly.

Sign conventions.  The spin matrices are the standard ladder-basis ones
(S3 = diag(s, s-1, ..., -s), commutators [S_a, S_b] = i eps_abc S_c).  The
representation matrix of u(kbar) = cos(k/2) I - i sin(k/2) (khat . sigma) is

    D^s(u(kbar)) = exp(-i k^a S^s_a),

which makes D a genuine homomorphism, D(uv) = D(u) D(v), and reduces to the
defining representation at s = 1/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

TWO_PI = 2.0 * np.pi

#: tolerance for "is this matrix actually in SU(2)" input checks
_GROUP_TOL = 1e-9


@dataclass(frozen=True)
class SpinLabel:
    """Representation label; ``twice`` holds the exact integer 2s >= 0."""

    twice: int

    def __post_init__(self) -> None:
        if int(self.twice) != self.twice or self.twice < 0:
            raise ValueError(f"2s must be a non-negative integer, got {self.twice!r}")
        object.__setattr__(self, "twice", int(self.twice))

    @classmethod
    def from_spin(cls, s) -> "SpinLabel":
        """Build from s itself (int, float or string like '3/2'); must be exact."""
        if isinstance(s, str):
            twice = 2 * Fraction(s)
        else:
            twice = 2 * Fraction(s).limit_denominator(2)
            if abs(float(twice) - 2.0 * float(s)) > 1e-12:
                raise ValueError(f"spin must be integer or half-integer, got {s!r}")
        if twice.denominator != 1:
            raise ValueError(f"spin must be integer or half-integer, got {s!r}")
        return cls(int(twice))

    @property
    def s(self) -> float:
        return 0.5 * self.twice

    @property
    def dim(self) -> int:
        """Dimension N(s) = 2s + 1 of the representation."""
        return self.twice + 1

    @property
    def half_integer(self) -> bool:
        return self.twice % 2 == 1

    def casimir(self) -> float:
        """s(s+1), the eigenvalue of S^2 in units hbar^2."""
        return 0.25 * self.twice * (self.twice + 2)

    def __str__(self) -> str:
        return f"{self.twice}/2" if self.half_integer else str(self.twice // 2)


@dataclass(frozen=True)
class SpinMatrices:
    """Hermitian generator triple (S1, S2, S3) in the ladder basis m = s..-s."""

    label: SpinLabel
    stack: np.ndarray  # (3, N, N) complex

    @property
    def s1(self) -> np.ndarray:
        return self.stack[0]

    @property
    def s2(self) -> np.ndarray:
        return self.stack[1]

    @property
    def s3(self) -> np.ndarray:
        return self.stack[2]


def build_spin_matrices(label: SpinLabel) -> SpinMatrices:
    """Standard ladder-basis angular momentum matrices for the given label.

    S3 is diagonal with entries m = s, s-1, ..., -s; the raising operator has
    entries sqrt(s(s+1) - m(m+1)).  All three are Hermitian, satisfy
    [S_a, S_b] = i eps_abc S_c and sum_a S_a^2 = s(s+1) I.
    """
    if not isinstance(label, SpinLabel):
        label = SpinLabel.from_spin(label)
    n = label.dim
    s = label.s
    m = s - np.arange(n)  # row i holds m = s - i
    plus = np.zeros((n, n))
    for i in range(n - 1):
        mm = m[i + 1]  # S+ acts on |m>, lands on row i
        plus[i, i + 1] = np.sqrt(s * (s + 1) - mm * (mm + 1))
    s1 = (plus + plus.T) / 2.0
    s2 = (plus - plus.T) / 2j
    s3 = np.diag(m).astype(complex)
    return SpinMatrices(label, np.stack([s1.astype(complex), s2, s3]))


def pauli_matrices() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The three Pauli matrices (exact integer entries)."""
    s1 = np.array([[0, 1], [1, 0]], dtype=complex)
    s2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
    s3 = np.array([[1, 0], [0, -1]], dtype=complex)
    return s1, s2, s3


def _magnitude(k: np.ndarray) -> float:
    k = np.asarray(k, dtype=float)
    if k.shape != (3,):
        raise ValueError(f"rotation vector must have shape (3,), got {k.shape}")
    return float(np.linalg.norm(k))


def su2_from_rotation_vector(k) -> np.ndarray:
    """SU(2) element cos(k/2) I - i (sin(k/2)/k) k^a sigma_a; regular at k = 0.

    The magnitude must lie in [0, 2*pi]; the sphere k = 2*pi maps to -I for
    every direction.
    """
    k = np.asarray(k, dtype=float)
    mag = _magnitude(k)
    if mag > TWO_PI + 1e-12:
        raise ValueError(f"|k| = {mag:.6g} exceeds 2*pi, outside the SU(2) ball")
    # sin(k/2)/k = 0.5*sinc(k/(2*pi)) handles the k -> 0 limit exactly
    half_sinc = 0.5 * np.sinc(mag / TWO_PI)
    s1, s2, s3 = pauli_matrices()
    u = np.cos(0.5 * mag) * np.eye(2, dtype=complex)
    u -= 1j * half_sinc * (k[0] * s1 + k[1] * s2 + k[2] * s3)
    return u


def check_su2(u, tol: float = _GROUP_TOL) -> np.ndarray:
    """Validate that ``u`` is a 2x2 special unitary matrix; return it as array."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError(f"SU(2) element must be 2x2, got shape {u.shape}")
    if np.linalg.norm(u.conj().T @ u - np.eye(2)) > tol:
        raise ValueError("matrix is not unitary within tolerance")
    if abs(np.linalg.det(u) - 1.0) > tol:
        raise ValueError("matrix determinant is not 1 within tolerance")
    return u


def rotation_vector_from_su2(u) -> np.ndarray:
    """Inverse of :func:`su2_from_rotation_vector`, with |k| in [0, 2*pi].

    At u = -I every axis is equivalent; the convention (0, 0, 2*pi) is
    returned.  Non-unitary or det != 1 input is rejected.
    """
    u = check_su2(u)
    # u = a I - i b.sigma with a = Re tr(u)/2, b = sin(k/2) khat
    a = float(np.clip(0.5 * np.real(u[0, 0] + u[1, 1]), -1.0, 1.0))
    mag = 2.0 * np.arccos(a)
    b = np.array(
        [
            -0.5 * np.imag(u[0, 1] + u[1, 0]),
            0.5 * np.real(u[1, 0] - u[0, 1]),
            0.5 * np.imag(u[1, 1] - u[0, 0]),
        ]
    )
    norm_b = np.linalg.norm(b)
    if norm_b < 1e-13:
        if a > 0.0:  # identity neighbourhood
            return np.zeros(3)
        return np.array([0.0, 0.0, TWO_PI])  # -I, conventional axis e3
    return mag * b / norm_b


def wigner_d_from_rotation_vector(label: SpinLabel, k) -> np.ndarray:
    """D^s(u(kbar)) = exp(-i k^a S_a) by unitary diagonalization."""
    spin = build_spin_matrices(label)
    k = np.asarray(k, dtype=float)
    h = np.tensordot(k, spin.stack, axes=(0, 0))
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w)) @ v.conj().T


def wigner_d_stack(label: SpinLabel, ks: np.ndarray) -> np.ndarray:
    """Batched D^s for rotation vectors ``ks`` of shape (..., 3)."""
    spin = build_spin_matrices(label)
    ks = np.asarray(ks, dtype=float)
    h = np.tensordot(ks, spin.stack, axes=(-1, 0))  # (..., N, N)
    w, v = np.linalg.eigh(h)
    phases = np.exp(-1j * w)[..., None, :]
    return (v * phases) @ np.swapaxes(v.conj(), -1, -2)


def wigner_d(label: SpinLabel, u) -> np.ndarray:
    """Unitary representation matrix of the SU(2) element ``u`` for ``label``.

    Satisfies D(uv) = D(u)D(v) and D(-u) = (-1)^{2s} D(u); at s = 1/2 it
    returns u itself.
    """
    if not isinstance(label, SpinLabel):
        label = SpinLabel.from_spin(label)
    k = rotation_vector_from_su2(u)
    return wigner_d_from_rotation_vector(label, k)


def parity_factor(label: SpinLabel, u, tol: float = 1e-10) -> int:
    """Verified scalar rho with D(-u) = rho D(u); +1 for integer s, -1 else.

    Raises ArithmeticError if no scalar relation holds numerically or if the
    scalar disagrees with (-1)^{2s} (an internal-consistency failure).
    """
    if not isinstance(label, SpinLabel):
        label = SpinLabel.from_spin(label)
    d_plus = wigner_d(label, u)
    d_minus = wigner_d(label, -np.asarray(u, dtype=complex))
    # scalar estimate from the Frobenius pairing; D is unitary so |.|_F = sqrt(N)
    rho = np.vdot(d_plus, d_minus) / label.dim
    scale = np.linalg.norm(d_plus)
    if np.linalg.norm(d_minus - rho * d_plus) > tol * scale:
        raise ArithmeticError("no scalar relation between D(u) and D(-u)")
    sign = -1 if label.half_integer else 1
    if abs(rho - sign) > 1e-6:
        raise ArithmeticError(
            f"parity scalar {rho:.3g} disagrees with (-1)^(2s) = {sign}"
        )
    return sign


def random_su2(rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random SU(2) element (uniform axis, uniform angle density in k)."""
    k = random_rotation_vectors(rng, 1)[0]
    return su2_from_rotation_vector(k)


def random_rotation_vectors(rng: np.random.Generator, count: int,
                            kmin: float = 0.05, kmax: float = TWO_PI - 0.05) -> np.ndarray:
    """Random rotation vectors with magnitudes in (kmin, kmax), shape (count, 3)."""
    mags = rng.uniform(kmin, kmax, size=count)
    z = rng.uniform(-1.0, 1.0, size=count)
    phi = rng.uniform(0.0, TWO_PI, size=count)
    sq = np.sqrt(1.0 - z * z)
    axes = np.stack([sq * np.cos(phi), sq * np.sin(phi), z], axis=1)
    return axes * mags[:, None]
