"""Built-in example systems and their closed-form oracles.

Three models of increasing size: a driven qubit with balanced raising and
lowering channels, a pair of exchange-coupled qubits with eight single-flip
channels, and a periodic chain of N spins with local x/y flip channels. Each
has a known SCGF in closed form plus explicit eigenmatrix and Doob-operator
formulas used as regression oracles.

Matrix conventions: the qubit basis is ordered (excited, ground), so
sigma_z = diag(1, -1), sigma_plus = [[0, 1], [0, 0]]; the two-qubit basis is
(dd, du, ud, uu) in the order the jump operators are labeled; spin-chain site
0 is the first tensor factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfValidityDomainError
from .lindblad import CountingObservable, LindbladModel
from .symmetry import PermutationSymmetry

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

PAULI = {"1": IDENTITY_2, "x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}


@dataclass(frozen=True)
class ModelBundle:
    """A model plus its counting observable and (optionally) symmetry data."""

    name: str
    model: LindbladModel
    observable: CountingObservable
    symmetry: PermutationSymmetry | None = None
    psi0: np.ndarray | None = None


# ---------------------------------------------------------------------------
# single qubit

def single_qubit(gamma_minus: float = 1.0, gamma_plus: float = 1.0,
                 omega: float = 0.5) -> ModelBundle:
    """Driven qubit with decay/pumping channels counted as K = K_plus - K_minus.

    The channel permutation swaps the two channels; it is represented by
    V = sigma_x and flips the sign of K (U = -1). The dynamics carries the
    symmetry only when the two rates are equal.
    """
    if gamma_minus <= 0 or gamma_plus <= 0:
        raise OutOfValidityDomainError("rates must be strictly positive")
    h = omega * SIGMA_X
    jumps = (
        ("minus", math.sqrt(gamma_minus) * SIGMA_MINUS),
        ("plus", math.sqrt(gamma_plus) * SIGMA_PLUS),
    )
    observable = CountingObservable(np.array([[-1.0], [1.0]]))
    sym = PermutationSymmetry(perm=(1, 0), v=SIGMA_X, u=np.array([[-1.0]]))
    psi0 = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2)  # V-symmetric
    return ModelBundle("single-qubit", LindbladModel(h, jumps), observable, sym, psi0)


def _require_single_qubit_closed_form(gamma_minus, gamma_plus, omega):
    gamma = gamma_minus
    if not (math.isclose(gamma_minus, gamma_plus, rel_tol=0, abs_tol=1e-12)
            and math.isclose(4 * omega**2, gamma**2, rel_tol=1e-12)):
        raise OutOfValidityDomainError(
            "closed form requires equal rates and 4 omega^2 == gamma^2"
        )
    return gamma


def single_qubit_theta(lam: float, gamma: float = 1.0) -> float:
    """SCGF gamma (cosh^{1/3}(lam) - 1) of the resonant equal-rate qubit."""
    return gamma * (math.cosh(lam) ** (1.0 / 3.0) - 1.0)


def single_qubit_eigenmatrices(lam: float, gamma: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form normalized (l, r) of the resonant equal-rate qubit.

    Singular (removable) at lam = 0; callers keep |lam| away from zero.
    """
    if abs(lam) < 1e-6:
        raise OutOfValidityDomainError("eigenmatrix formulas are singular at lam = 0")
    c = math.cosh(lam) ** (1.0 / 3.0)
    pref = math.sinh(lam) / (3 * c**2 * (c**2 - 1))
    off = 1j * (1 - c**2)
    l = pref * np.array([[math.exp(lam) - c, off],
                         [-off, c - math.exp(-lam)]])
    r = (1 / (2 * math.sinh(lam))) * np.array([[c - math.exp(-lam), off],
                                               [-off, math.exp(lam) - c]])
    return l, r


def single_qubit_root_params(lam: float) -> tuple[float, float, float]:
    """Parameters (alpha, beta, delta) with l^{1/2} = [[alpha, -i delta], [i delta, beta]]."""
    if abs(lam) < 1e-6:
        raise OutOfValidityDomainError("root parameters are singular at lam = 0")
    ch = math.cosh(lam)
    s = abs(math.sinh(lam))
    sgn = math.copysign(1.0, lam)
    c13, c23, c43 = ch ** (1 / 3), ch ** (2 / 3), ch ** (4 / 3)
    front = math.sqrt(s / (6 * c23 * (c43 - 1)))
    rad = math.sqrt((c23 - 1) * (c23 + 2))
    alpha = front * math.sqrt(s * (2 * c23 + 1) + 2 * sgn * c13 * (c43 - 1) + rad)
    beta = front * math.sqrt(s * (2 * c23 + 1) - 2 * sgn * c13 * (c43 - 1) + rad)
    delta = sgn * math.sqrt(s / (6 * c23 * (c43 - 1)) * (s - rad))
    return alpha, beta, delta


def single_qubit_doob_operators(s: float, gamma: float = 1.0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Closed-form (H_s, L_minus^s, L_plus^s) of the resonant equal-rate qubit."""
    alpha, beta, delta = single_qubit_root_params(s)
    det = alpha * beta - delta**2
    c23 = math.cosh(s) ** (2 / 3)
    h_s = (gamma / 2) * abs(math.sinh(s)) / math.sqrt((c23 - 1) * (c23 + 2)) * SIGMA_X
    l_minus = (math.sqrt(gamma) * math.exp(s / 2) / det) * np.array(
        [[-1j * beta * delta, delta**2], [beta**2, 1j * beta * delta]])
    l_plus = (math.sqrt(gamma) * math.exp(-s / 2) / det) * np.array(
        [[-1j * alpha * delta, alpha**2], [delta**2, 1j * alpha * delta]])
    return h_s, l_minus, l_plus


# ---------------------------------------------------------------------------
# two qubits

def _basis_proj(i: int, j: int, dim: int = 4) -> np.ndarray:
    out = np.zeros((dim, dim), dtype=complex)
    out[i - 1, j - 1] = 1.0  # 1-based state labels
    return out


def two_qubit(alpha: float = 1.0, g: float = 1.0) -> ModelBundle:
    """Exchange-coupled qubit pair with eight equal-rate single-flip channels.

    The observable counts jumps through the single-excitation state 2 minus
    jumps through state 3. The permutation exchanges channels n <-> n+4 and is
    represented by the swap of basis states 2 and 3, with U = -1.
    """
    if alpha <= 0:
        raise OutOfValidityDomainError("flip rate must be strictly positive")
    h = g * (_basis_proj(3, 2) + _basis_proj(2, 3))
    root = math.sqrt(alpha)
    jumps = (
        ("L1", root * _basis_proj(2, 1)),
        ("L2", root * _basis_proj(1, 2)),
        ("L3", root * _basis_proj(2, 4)),
        ("L4", root * _basis_proj(4, 2)),
        ("L5", root * _basis_proj(3, 1)),
        ("L6", root * _basis_proj(1, 3)),
        ("L7", root * _basis_proj(3, 4)),
        ("L8", root * _basis_proj(4, 3)),
    )
    observable = CountingObservable(np.array([[1.0]] * 4 + [[-1.0]] * 4))
    v = np.eye(4, dtype=complex)[:, [0, 2, 1, 3]]  # swap states 2 and 3
    sym = PermutationSymmetry(perm=(4, 5, 6, 7, 0, 1, 2, 3), v=v, u=np.array([[-1.0]]))
    psi0 = np.zeros(4, dtype=complex)
    psi0[0] = 1.0  # V-invariant
    return ModelBundle("two-qubit", LindbladModel(h, jumps), observable, sym, psi0)


def two_qubit_theta(lam: float, alpha: float = 1.0, g: float = 1.0) -> float:
    """Closed-form SCGF of the coupled-qubit model."""
    inner = math.sqrt(alpha**4 * math.cosh(2 * lam) ** 2 + g**4 + 2 * alpha**2 * g**2)
    return -2 * alpha + math.sqrt(2 * alpha**2 * math.cosh(2 * lam) - 2 * g**2 + 2 * inner)


@dataclass(frozen=True)
class TwoQubitEigParams:
    """Entries of the block-structured eigenmatrices (a, b, c, d, m, eta)."""

    a: float
    b: float
    c: float
    d: float
    m: float
    eta: float


def two_qubit_eig_params(lam: float, alpha: float = 1.0, g: float = 1.0) -> TwoQubitEigParams:
    """Closed-form eigenmatrix entries; singular (removable) at lam = 0."""
    if abs(lam) < 1e-6:
        raise OutOfValidityDomainError("eigenmatrix parameters are singular at lam = 0")
    gl = two_qubit_theta(lam, alpha, g) + 2 * alpha
    den = gl + 2 * alpha * math.cosh(lam)
    a = gl / (2 * den)
    c = (2 * alpha**2 * (math.exp(2 * lam) + 1) - gl**2) / (4 * alpha * math.sinh(lam) * den)
    d = (-2 * alpha**2 * (math.exp(-2 * lam) + 1) + gl**2) / (4 * alpha * math.sinh(lam) * den)
    m = (2 * alpha * g * math.cosh(lam) - g * gl) / (2 * alpha * gl * math.sinh(lam))
    eta = 1 / (2 * a**2 + c**2 + d**2 - 2 * m**2)
    return TwoQubitEigParams(a=a, b=a, c=c, d=d, m=m, eta=eta)


def two_qubit_eigenmatrices(lam: float, alpha: float = 1.0,
                            g: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form normalized (l, r) built from the block parameters."""
    p = two_qubit_eig_params(lam, alpha, g)
    r = np.array([
        [p.a, 0, 0, 0],
        [0, p.c, 1j * p.m, 0],
        [0, -1j * p.m, p.d, 0],
        [0, 0, 0, p.b],
    ])
    l = p.eta * np.array([
        [p.a, 0, 0, 0],
        [0, p.c, -1j * p.m, 0],
        [0, 1j * p.m, p.d, 0],
        [0, 0, 0, p.b],
    ])
    return l, r


def two_qubit_root_params(s: float, alpha: float = 1.0, g: float = 1.0) -> tuple[float, float, float]:
    """Parameters (A, B, C) of the inner block of l_s^{1/2}."""
    p = two_qubit_eig_params(s, alpha, g)
    gl = two_qubit_theta(s, alpha, g) + 2 * alpha
    u = (p.c + p.d) / 2
    v = (p.c - p.d) / 2
    w = abs(p.c - p.d) / 2 * math.sqrt(1 + 4 * g**2 / gl**2)
    if u < w:
        raise OutOfValidityDomainError(f"u = {u} < |w| = {w}; block root is not real")
    den = 4 * g**2 / gl**2 * v**2 + (w - v) ** 2
    sp_, sm_ = math.sqrt(u + w), math.sqrt(u - w)
    big_a = (4 * g**2 / gl**2 * v**2 * sp_ + (w - v) ** 2 * sm_) / den
    big_b = ((w - v) ** 2 * sp_ + 4 * g**2 / gl**2 * v**2 * sm_) / den
    big_c = (-2 * g / gl * v * (w - v)) / den * (sp_ - sm_)
    return big_a, big_b, big_c


def two_qubit_doob_operators(s: float, alpha: float = 1.0,
                             g: float = 1.0) -> tuple[np.ndarray, tuple[np.ndarray, ...]]:
    """Closed-form (H_s, (L_1^s, ..., L_8^s)) of the coupled-qubit model."""
    p = two_qubit_eig_params(s, alpha, g)
    big_a, big_b, big_c = two_qubit_root_params(s, alpha, g)
    det = big_a * big_b - big_c**2
    h_s = g / 2 * (big_a**2 + big_b**2 + 2 * big_c**2) / det * (
        _basis_proj(2, 3) + _basis_proj(3, 2))
    root, sa = math.sqrt(alpha), math.sqrt(p.a)
    e_m, e_p = math.exp(-s / 2), math.exp(s / 2)
    jumps = (
        e_m * root / sa * (big_a * _basis_proj(2, 1) - 1j * big_c * _basis_proj(3, 1)),
        e_m * root * sa / det * (big_b * _basis_proj(1, 2) - 1j * big_c * _basis_proj(1, 3)),
        e_m * root / sa * (big_a * _basis_proj(2, 4) - 1j * big_c * _basis_proj(3, 4)),
        e_m * root * sa / det * (big_b * _basis_proj(4, 2) - 1j * big_c * _basis_proj(4, 3)),
        e_p * root / sa * (big_b * _basis_proj(3, 1) + 1j * big_c * _basis_proj(2, 1)),
        e_p * root * sa / det * (big_a * _basis_proj(1, 3) + 1j * big_c * _basis_proj(1, 2)),
        e_p * root / sa * (big_b * _basis_proj(3, 4) + 1j * big_c * _basis_proj(2, 4)),
        e_p * root * sa / det * (big_a * _basis_proj(4, 3) + 1j * big_c * _basis_proj(4, 2)),
    )
    return h_s, jumps


# ---------------------------------------------------------------------------
# spin chain

def site_operator(op: np.ndarray, n_sites: int, site: int) -> np.ndarray:
    """Single-site operator embedded in an n-site chain (site 0 first factor)."""
    out = np.array([[1.0]], dtype=complex)
    for k in range(n_sites):
        out = np.kron(out, op if k == site else IDENTITY_2)
    return out


def translation_operator(n_sites: int) -> np.ndarray:
    """Unitary T with T^dag S_k T = S_{k+1} (site indices mod n_sites)."""
    dim = 2**n_sites
    t = np.zeros((dim, dim), dtype=complex)
    mask = dim - 1
    for j in range(dim):
        rotated = ((j << 1) & mask) | (j >> (n_sites - 1))
        t[rotated, j] = 1.0
    return t


def spin_chain(n_sites: int = 2, coupling: float = 1.0, gamma: float = 1.0) -> ModelBundle:
    """Periodic chain of spins with nearest-neighbour zz coupling and local flips.

    Channels are ordered (site 0 x, site 0 y, site 1 x, ...). Counting weight
    is +1 on even sites and -1 on odd sites (1-based site numbering), so K is
    the even-site minus odd-site jump count. The shift-by-one symmetry is
    represented by the translation unitary and flips K (U = -1). Requires an
    even number of sites.
    """
    if n_sites < 2 or n_sites % 2:
        raise OutOfValidityDomainError("n_sites must be even and >= 2")
    if gamma <= 0:
        raise OutOfValidityDomainError("flip rate must be strictly positive")
    dim = 2**n_sites
    h = np.zeros((dim, dim), dtype=complex)
    for k in range(n_sites):
        h -= coupling * site_operator(SIGMA_Z, n_sites, k) @ site_operator(
            SIGMA_Z, n_sites, (k + 1) % n_sites)
    jumps = []
    weights = []
    root = math.sqrt(gamma)
    for k in range(n_sites):
        parity = 1.0 if (k + 1) % 2 == 0 else -1.0
        jumps.append((f"x{k}", root * site_operator(SIGMA_X, n_sites, k)))
        jumps.append((f"y{k}", root * site_operator(SIGMA_Y, n_sites, k)))
        weights += [[parity], [parity]]
    observable = CountingObservable(np.array(weights))
    perm = []
    for k in range(n_sites):
        shifted = (k + 1) % n_sites
        perm += [2 * shifted, 2 * shifted + 1]
    sym = PermutationSymmetry(perm=tuple(perm), v=translation_operator(n_sites),
                              u=np.array([[-1.0]]))
    psi0 = np.full(dim, 1 / math.sqrt(dim), dtype=complex)  # translation invariant
    return ModelBundle(
        "spin-chain", LindbladModel(h, tuple(jumps)), observable, sym, psi0)


def spin_chain_theta(lam: float, n_sites: int, gamma: float = 1.0) -> float:
    """SCGF 2 gamma N (cosh(lam) - 1) of the flip-counting spin chain."""
    return 2 * gamma * n_sites * (math.cosh(lam) - 1)


# ---------------------------------------------------------------------------
# Pauli-string representation (spin-chain block structure)

def pauli_strings(n_sites: int) -> list[str]:
    """All length-n strings over {1, x, y, z}, lexicographic in (1, x, y, z)."""
    labels = [""]
    for _ in range(n_sites):
        labels = [s + c for s in labels for c in "1xyz"]
    return labels


def pauli_string_operator(label: str) -> np.ndarray:
    out = np.array([[1.0]], dtype=complex)
    for c in label:
        out = np.kron(out, PAULI[c])
    return out


def xy_count(label: str) -> int:
    """Number of x/y letters; the block index of the string basis."""
    return sum(1 for c in label if c in "xy")


def superoperator_in_pauli_basis(matrix: np.ndarray, n_sites: int) -> np.ndarray:
    """Rewrite a superoperator matrix in the orthogonal Pauli-string basis."""
    dim = 2**n_sites
    if matrix.shape != (dim * dim, dim * dim):
        raise ValueError(f"superoperator shape {matrix.shape} does not match n_sites={n_sites}")
    basis = np.column_stack([
        pauli_string_operator(label).reshape(-1, order="F")
        for label in pauli_strings(n_sites)
    ])
    # basis^dag basis == dim * identity
    return basis.conj().T @ matrix @ basis / dim


# ---------------------------------------------------------------------------
# registry and oracle dispatch

EXAMPLE_BUILDERS = {
    "single-qubit": single_qubit,
    "two-qubit": two_qubit,
    "spin-chain": spin_chain,
}


def build_example(name: str, **params) -> ModelBundle:
    """Build a named example; params are forwarded to its builder."""
    try:
        builder = EXAMPLE_BUILDERS[name]
    except KeyError:
        raise KeyError(
            f"unknown example {name!r}; available: {sorted(EXAMPLE_BUILDERS)}"
        ) from None
    return builder(**params)


def oracle_theta(name: str, lam: float, s: float = 0.0, **params) -> float:
    """Closed-form theta_s(lam) = theta(lam + s) - theta(s) for a named example.

    Raises :class:`OutOfValidityDomainError` when params leave the closed
    form's domain (for the qubit: equal rates and 4 omega^2 == gamma^2).
    """
    if name == "single-qubit":
        gamma = _require_single_qubit_closed_form(
            params.get("gamma_minus", 1.0), params.get("gamma_plus", 1.0),
            params.get("omega", 0.5))
        theta = lambda x: single_qubit_theta(x, gamma)
    elif name == "two-qubit":
        theta = lambda x: two_qubit_theta(x, params.get("alpha", 1.0), params.get("g", 1.0))
    elif name == "spin-chain":
        theta = lambda x: spin_chain_theta(x, params.get("n_sites", 2), params.get("gamma", 1.0))
    else:
        raise KeyError(f"unknown example {name!r}")
    return theta(lam + s) - theta(s)
