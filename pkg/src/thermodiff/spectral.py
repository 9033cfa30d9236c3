"""Spectral analysis of the linearized evolution about a uniform state.

Linearizing the field-free (V = 0) dynamics about a uniform background
(E0, Theta0) gives

    d/dt (e, theta) = 2*lam*Theta0 * M (e'', theta''),
    M = [[1, gamma], [alpha/gamma, 1]],   gamma = E0/Theta0,

with no-flow Neumann conditions e'(0) = e'(1) = 0 and Dirichlet
theta(0) = theta(1) = 0. The physical coupling has alpha = 1/2. M is not
symmetric but is diagonalizable by a similarity S with S M S^-1 =
diag[1 + sqrt(alpha), 1 - sqrt(alpha)], independent of gamma; the operator
is therefore similar to a negative self-adjoint one and its spectrum is
real, discrete and non-positive even though the operator itself is not
self-adjoint (its numerical range is unbounded in the mixed-boundary
mode, so sectorial-form methods do not apply).

Eigenvalues omega of minus the generator are computed two independent
ways: as roots of the 4x4 boundary-condition determinant of a
trigonometric mode ansatz in the transformed variables, and from a dense
finite-difference discretization solved with a general nonsymmetric
eigensolver. The module also measures the semigroup decay against the
kappa(S)*exp(-lambda1*t) envelope and probes the numerical range.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as sla

from .errors import IncompleteSpectrumError

BISECT_RTOL = 1e-12
DOUBLE_ROOT_TOL = 1e-10
MAX_SCAN_REFINEMENTS = 6


@dataclass(frozen=True)
class CouplingMatrix:
    """The 2x2 matrix of the linearized system together with its prefactor
    2*lam*theta0."""

    gamma: float
    alpha: float = 0.5
    lam: float = 1.0
    theta0: float = 1.0

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1); the diagonalized "
                             "entries 1 +/- sqrt(alpha) must stay positive")
        if self.lam <= 0 or self.theta0 <= 0:
            raise ValueError("lam and theta0 must be positive")

    @property
    def scale(self):
        return 2.0 * self.lam * self.theta0

    @property
    def m11(self):
        return 1.0

    @property
    def m12(self):
        return self.gamma

    @property
    def m21(self):
        return self.alpha / self.gamma

    @property
    def m22(self):
        return 1.0

    @property
    def matrix(self):
        return np.array([[self.m11, self.m12], [self.m21, self.m22]])

    @property
    def det(self):
        return 1.0 - self.alpha

    @property
    def sqrt_alpha(self):
        return math.sqrt(self.alpha)


def coupling_matrix(gamma, alpha=0.5, lam=1.0, theta0=1.0):
    """Validated constructor for CouplingMatrix."""
    return CouplingMatrix(gamma=float(gamma), alpha=float(alpha),
                          lam=float(lam), theta0=float(theta0))


@dataclass(frozen=True)
class Similarity:
    """An invertible S with S M S^-1 = diag[1+sqrt(alpha), 1-sqrt(alpha)].

    The diagonalizing family satisfies b = a*gamma/sqrt(alpha) and
    d = -c*gamma/sqrt(alpha) (opposite square-root signs keep det S
    nonzero). 'convenient' uses a = 1, c = -1; 'symmetrizing' rescales the
    rows so the boundary form vanishes; 'custom' left-multiplies by
    diag[beta, 1/beta], which commutes with the diagonal result.
    """

    a: float
    b: float
    c: float
    d: float
    kind: str
    beta: Optional[float] = None

    @property
    def matrix(self):
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def det(self):
        return self.a * self.d - self.b * self.c

    @property
    def inverse(self):
        return np.array([[self.d, -self.b], [-self.c, self.a]]) / self.det

    @property
    def kappa(self):
        """Condition number ||S|| ||S^-1|| in the spectral norm."""
        s = sla.svdvals(self.matrix)
        return float(s[0] / s[-1])


def diagonalize(m: CouplingMatrix, kind="convenient", beta=None):
    """Produce a diagonalizing similarity of the requested kind."""
    ra = m.sqrt_alpha
    g = m.gamma
    if kind == "convenient":
        a, c = 1.0, -1.0
    elif kind == "symmetrizing":
        # rows scaled so (1+sqrt(alpha))*a^2 = (1-sqrt(alpha))*c^2
        a = 1.0
        c = math.sqrt((1.0 + ra) / (1.0 - ra))
    elif kind == "custom":
        if beta is None or beta == 0.0:
            raise ValueError("custom similarity needs a nonzero beta")
        a, c = float(beta) * 1.0, (1.0 / float(beta)) * (-1.0)
    else:
        raise ValueError(f"unknown similarity kind {kind!r}")
    b = a * g / ra
    d = -c * g / ra
    s = Similarity(a=a, b=b, c=c, d=d, kind=kind,
                   beta=None if kind != "custom" else float(beta))
    # sanity: the construction must actually diagonalize M
    md = s.matrix @ m.matrix @ s.inverse
    off = max(abs(md[0, 1]), abs(md[1, 0]))
    if off > 1e-12 * np.abs(m.matrix).max():
        raise AssertionError("similarity failed to diagonalize the coupling")
    return s


def boundary_form_coefficient(s: Similarity, m: CouplingMatrix):
    """Coefficient multiplying [e*theta']_0^1 in the integrated-by-parts
    boundary form; zero exactly for the symmetrizing similarity."""
    ra = m.sqrt_alpha
    g = m.gamma
    return ((1.0 + ra) * g / ra * s.a**2 - (1.0 - ra) * g / ra * s.c**2)


def dispersion(omega, m: CouplingMatrix):
    """Wavenumbers (k1, k2) with omega/scale = (1+sqrt(a))k1^2 = (1-sqrt(a))k2^2."""
    if omega < 0:
        raise ValueError("omega must be nonnegative")
    ra = m.sqrt_alpha
    k1 = math.sqrt(omega / (m.scale * (1.0 + ra)))
    k2 = math.sqrt(omega / (m.scale * (1.0 - ra)))
    return k1, k2


def _bc_matrix(omega, m):
    """4x4 boundary-condition system for the mode coefficients (A, B, C, D).

    In the transformed variables the walls impose e^' - th^' = 0 and
    e^ + th^ = 0 at x = 0 and x = 1, applied to
    e^ = A cos(k1 x) + B sin(k1 x), th^ = C cos(k2 x) + D sin(k2 x).
    """
    k1, k2 = dispersion(omega, m)
    s1, c1 = math.sin(k1), math.cos(k1)
    s2, c2 = math.sin(k2), math.cos(k2)
    return np.array([
        [0.0, k1, 0.0, -k2],
        [1.0, 0.0, 1.0, 0.0],
        [-k1 * s1, k1 * c1, k2 * s2, -k2 * c2],
        [c1, s1, c2, s2],
    ])


def mode_determinant(omega, m: CouplingMatrix):
    """Determinant of the 4x4 boundary system; its zeros are the
    eigenvalues of minus the generator. Independent of gamma."""
    return float(np.linalg.det(_bc_matrix(omega, m)))


@dataclass(frozen=True)
class ModeAnsatz:
    """A trigonometric eigenmode: decay rate, wavenumbers, coefficients."""

    omega: float
    k1: float
    k2: float
    A: float
    B: float
    C: float
    D: float

    def hatted_fields(self, x):
        x = np.asarray(x, dtype=float)
        e = self.A * np.cos(self.k1 * x) + self.B * np.sin(self.k1 * x)
        th = self.C * np.cos(self.k2 * x) + self.D * np.sin(self.k2 * x)
        return e, th


def mode_ansatz(omega, m: CouplingMatrix):
    """Null-vector coefficients of the boundary system at a root omega."""
    mat = _bc_matrix(omega, m)
    _, _, vt = sla.svd(mat)
    A, B, C, D = vt[-1]
    k1, k2 = dispersion(omega, m)
    return ModeAnsatz(omega=float(omega), k1=k1, k2=k2,
                      A=float(A), B=float(B), C=float(C), D=float(D))


@dataclass(frozen=True)
class SpectrumResult:
    """Eigenvalues omega of minus the generator, ascending, with the method
    that produced them and the largest imaginary part seen before realness
    filtering. agreement holds |omega_this - omega_other| after a
    cross-method comparison."""

    eigenvalues: np.ndarray
    method: str
    gamma_used: float
    max_imag: float = 0.0
    multiplicities: Tuple[int, ...] = ()
    agreement: Optional[np.ndarray] = None

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)
        if not self.multiplicities:
            object.__setattr__(self, "multiplicities", tuple([1] * ev.size))

    @property
    def smallest_nonzero(self):
        scale = max(1.0, float(np.max(np.abs(self.eigenvalues), initial=0.0)))
        for w in self.eigenvalues:
            if w > 1e-10 * scale:
                return float(w)
        return None


def _default_scan_step(m):
    # a quarter of the smallest expected eigenvalue-gap scale
    ra = m.sqrt_alpha
    return m.scale * min(1.0 + ra, 1.0 - ra) * (math.pi / 4.0) ** 2


def _default_omega_max(m, count):
    # roots arrive roughly in pairs per 2*(1-sqrt(a))*pi^2 window
    ra = m.sqrt_alpha
    return m.scale * 2.0 * (1.0 - ra) * math.pi**2 * (0.5 * count + 2.0) ** 2


def _bisect_root(f, a, b, fa):
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if fa * fm < 0:
            b = mid
        else:
            a, fa = mid, fm
        if b - a <= BISECT_RTOL * max(b, 1e-300):
            break
    return 0.5 * (a + b)


def determinant_sign_changes(m: CouplingMatrix, omega_max, step=None):
    """Number of sign changes of the mode determinant on (0, omega_max]."""
    if step is None:
        step = _default_scan_step(m)
    grid_w = np.arange(step * 1e-6, omega_max, step)
    vals = np.array([mode_determinant(w, m) for w in grid_w])
    return int(np.sum(vals[:-1] * vals[1:] < 0))


def eigenvalues_transcendental(m: CouplingMatrix, count, omega_max=None):
    """Roots of the transcendental boundary determinant.

    Scans (0, omega_max], brackets sign changes, bisects each to relative
    tolerance 1e-12, and prepends the omega = 0 constant mode. Local
    near-zero minima of the normalized |determinant| without a sign change
    are refined on the determinant's derivative and flagged with
    multiplicity 2. The scan step is halved (up to 6 times) if fewer than
    count eigenvalues are found; if that still fails an
    IncompleteSpectrumError reports how many were located.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if omega_max is None:
        omega_max = _default_omega_max(m, count)
    step = _default_scan_step(m)

    f = lambda w: mode_determinant(w, m)
    norm = lambda w, v: abs(v) / (1.0 + (w / m.scale) ** 2)

    for _ in range(MAX_SCAN_REFINEMENTS + 1):
        ws = np.arange(step * 1e-6, omega_max, step)
        vals = np.array([f(w) for w in ws])
        roots = []
        mults = []
        for i in range(len(ws) - 1):
            if vals[i] == 0.0:
                roots.append(float(ws[i]))
                mults.append(1)
            elif vals[i] * vals[i + 1] < 0:
                roots.append(_bisect_root(f, ws[i], ws[i + 1], vals[i]))
                mults.append(1)
            elif 0 < i and norm(ws[i], vals[i]) < DOUBLE_ROOT_TOL \
                    and norm(ws[i - 1], vals[i - 1]) > norm(ws[i], vals[i]) \
                    and norm(ws[i + 1], vals[i + 1]) > norm(ws[i], vals[i]):
                # determinant touches zero: bisect on the derivative
                df = lambda w: (f(w + 1e-7 * step) - f(w - 1e-7 * step))
                da, db = df(ws[i - 1]), df(ws[i + 1])
                if da * db < 0:
                    roots.append(_bisect_root(df, ws[i - 1], ws[i + 1], da))
                    mults.append(2)
        total = 1 + sum(mults)
        if total >= count:
            break
        step *= 0.5
    if total < count:
        raise IncompleteSpectrumError(
            f"found {total} eigenvalues below omega_max={omega_max:g}, "
            f"requested {count}", found=total)

    evs = [0.0]
    allmults = [1]
    for r, mu in zip(roots, mults):
        evs.append(r)
        allmults.append(mu)
    evs = np.array(evs[:count])
    return SpectrumResult(eigenvalues=evs, method="transcendental",
                          gamma_used=m.gamma, max_imag=0.0,
                          multiplicities=tuple(allmults[:count]))


def fd_operator(n, m: CouplingMatrix, isolated=False):
    """Dense finite-difference matrix of the linearized generator.

    Mixed mode (default): e lives on all n nodes with a mirror ghost-point
    Neumann closure; theta on the n-2 interior nodes with the Dirichlet
    values eliminated. The boundary e-rows close the theta coupling with a
    half-cell flux balance (second-order one-sided theta' at the wall), so
    the matrix is size (2n-2) with columns ordered (e nodes, theta
    interior nodes).

    Isolated mode: Neumann mirror closures on both fields, size 2n, equal
    blocks scale*M_ij*Delta_N.
    """
    if n < 8:
        raise ValueError("fd operator needs n >= 8")
    h = 1.0 / (n - 1)
    ih2 = 1.0 / h**2
    scale = m.scale

    def neumann(nn):
        D = np.zeros((nn, nn))
        idx = np.arange(1, nn - 1)
        D[idx, idx - 1] = ih2
        D[idx, idx] = -2.0 * ih2
        D[idx, idx + 1] = ih2
        D[0, 0], D[0, 1] = -2.0 * ih2, 2.0 * ih2
        D[-1, -1], D[-1, -2] = -2.0 * ih2, 2.0 * ih2
        return D

    if isolated:
        return scale * np.kron(m.matrix, neumann(n))

    ni = n - 2
    L = np.zeros((n + ni, n + ni))
    # e-rows, e-columns: Neumann mirror closure
    L[:n, :n] = neumann(n)
    # e-rows, theta-columns (theta_j at column n + j - 1, j = 1..n-2)
    idx = np.arange(1, n - 1)
    L[idx[1:], n + idx[1:] - 2] += m.m12 * ih2          # theta_{i-1}, i >= 2
    L[idx, n + idx - 1] += m.m12 * (-2.0) * ih2         # theta_i
    L[idx[:-1], n + idx[:-1]] += m.m12 * ih2            # theta_{i+1}, i <= n-3
    # boundary e-rows: half-cell balance with one-sided theta' at the wall
    L[0, n] += m.m12 * (-2.0) * ih2
    L[0, n + 1] += m.m12 * ih2
    L[n - 1, n + ni - 1] += m.m12 * (-2.0) * ih2
    L[n - 1, n + ni - 2] += m.m12 * ih2
    # theta-rows: plain interior second differences of e and theta
    r = n + idx - 1
    L[r, idx - 1] += m.m21 * ih2
    L[r, idx] += m.m21 * (-2.0) * ih2
    L[r, idx + 1] += m.m21 * ih2
    L[r[1:], n + idx[1:] - 2] += ih2
    L[r, n + idx - 1] += -2.0 * ih2
    L[r[:-1], n + idx[:-1]] += ih2
    return scale * L


def fd_weights(n, isolated=False):
    """Trapezoid weights matching the fd_operator unknown layout."""
    h = 1.0 / (n - 1)
    we = np.full(n, h)
    we[0] = we[-1] = 0.5 * h
    if isolated:
        return np.concatenate([we, we])
    return np.concatenate([we, np.full(n - 2, h)])


def eigenvalues_fd(n, m: CouplingMatrix, count, isolated=False):
    """Dense nonsymmetric eigensolve of the fd operator.

    Negates, sorts ascending and records the largest |Im| before the
    imaginary parts are discarded; realness is an observed outcome of the
    general eigensolver, not an imposed structure.
    """
    L = fd_operator(n, m, isolated=isolated)
    if count > L.shape[0]:
        raise ValueError("count exceeds the number of discrete modes")
    ev = sla.eigvals(L)
    max_imag = float(np.max(np.abs(ev.imag)))
    om = np.sort(-ev.real)
    return SpectrumResult(eigenvalues=om[:count], method=f"matrix-oracle({n})",
                          gamma_used=m.gamma, max_imag=max_imag)


def richardson_eigenvalues(m: CouplingMatrix, ns, count):
    """Grid-limit estimate of the fd eigenvalues.

    Two grids fit f0 + a*h^2; three grids fit f0 + a*h^2 + b*h^3, which
    also removes the boundary-closure correction. The grids must share the
    eigenvalue ordering (true for the well-resolved low modes requested).
    """
    ns = sorted(ns)
    if len(ns) not in (2, 3):
        raise ValueError("extrapolation needs two or three grid sizes")
    results = [eigenvalues_fd(n, m, count) for n in ns]
    hs = np.array([1.0 / (n - 1) for n in ns])
    if len(ns) == 3:
        A = np.column_stack([np.ones(3), hs**2, hs**3])
    else:
        A = np.column_stack([np.ones(2), hs**2])
    vals = np.column_stack([r.eigenvalues for r in results])
    extrap = np.linalg.solve(A, vals)[0]
    max_imag = max(r.max_imag for r in results)
    return SpectrumResult(eigenvalues=extrap,
                          method=f"matrix-oracle-extrapolated{tuple(ns)}",
                          gamma_used=m.gamma, max_imag=max_imag)


def attach_agreement(result: SpectrumResult, oracle: SpectrumResult):
    """Copy of result carrying |omega - omega_oracle| per eigenvalue."""
    k = min(result.eigenvalues.size, oracle.eigenvalues.size)
    agr = np.abs(result.eigenvalues[:k] - oracle.eigenvalues[:k])
    return SpectrumResult(eigenvalues=result.eigenvalues, method=result.method,
                          gamma_used=result.gamma_used,
                          max_imag=result.max_imag,
                          multiplicities=result.multiplicities,
                          agreement=agr)


@dataclass(frozen=True)
class SemigroupReport:
    """Decay of the semigroup on the zero-mode complement, the
    kappa*exp(-lambda1 t) envelope check, and numerical-range probes."""

    times: np.ndarray
    norms: np.ndarray
    lambda1: float
    kappa_convenient: float
    bound_satisfied: np.ndarray
    sup_norm: float          # sup_t of norms(t): > 1 means transient growth
    sup_ratio: float         # sup_t of norms(t) * exp(+lambda1 t)
    numerical_range: Tuple[Tuple[int, float], ...]
    numerical_range_isolated: Tuple[Tuple[int, float], ...]

    @property
    def all_bounded(self):
        return bool(np.all(self.bound_satisfied))


def _rayleigh_probe(H, rng, n_random=64, restarts=4, iters=300):
    """Largest Rayleigh quotient of symmetric H found by random unit
    vectors plus shifted-power-iteration ascent restarts."""
    N = H.shape[0]
    samples = rng.standard_normal((n_random, N))
    quot = np.einsum("ij,jk,ik->i", samples, H, samples) / np.einsum(
        "ij,ij->i", samples, samples)
    best = float(np.max(quot))
    shift = float(np.max(np.sum(np.abs(H), axis=1)))  # >= spectral radius
    order = np.argsort(quot)[::-1]
    for s in order[:restarts]:
        z = samples[s] / np.linalg.norm(samples[s])
        for _ in range(iters):
            z = H @ z + shift * z
            z /= np.linalg.norm(z)
        best = max(best, float(z @ H @ z))
    return best


def semigroup_diagnostics(n, m: CouplingMatrix, times, seed=0,
                          probe_sizes=None):
    """Semigroup norms on the zero-mode complement and range probes.

    The norm is the discrete L2 operator norm (trapezoid weights) of
    exp(L t) restricted to the invariant complement of the constant-e
    kernel vector, so norms(0) = 1 exactly. The envelope uses the
    discrete smallest nonzero eigenvalue lambda1 and kappa of the
    convenient similarity. The numerical-range probe reports the largest
    weighted Rayleigh quotient of the symmetric part at several sizes for
    both the mixed and the isolated boundary modes; the isolated one is
    nonpositive, the mixed one grows without bound as the grid refines.
    """
    times = np.asarray(sorted(float(t) for t in times))
    if np.any(times < 0):
        raise ValueError("times must be nonnegative")
    L = fd_operator(n, m)
    N = L.shape[0]
    w = fd_weights(n)
    sw = np.sqrt(w)

    ev, V = sla.eig(L)
    Vinv = np.linalg.inv(V)
    om = np.sort(-ev.real)
    lambda1 = float(om[1])

    # invariant complement of the zero mode, in the weighted coordinates
    w0 = sla.null_space(L.T)
    if w0.shape[1] != 1:
        raise AssertionError("expected a one-dimensional kernel")
    q = w0[:, 0] / sw
    q /= np.linalg.norm(q)
    Qo = np.eye(N) - np.outer(q, q)

    VL = sw[:, None] * V
    VR = (Vinv / sw[None, :]) @ Qo
    norms = np.empty(times.size)
    for i, t in enumerate(times):
        if t == 0.0:
            norms[i] = 1.0
            continue
        B = ((VL * np.exp(ev * t)) @ VR).real
        norms[i] = sla.svdvals(B)[0]

    kappa = diagonalize(m, "convenient").kappa
    envelope = kappa * np.exp(-lambda1 * times)
    bound_ok = norms <= envelope * (1.0 + 1e-12)
    with np.errstate(over="ignore"):
        ratios = norms * np.exp(lambda1 * times)

    if probe_sizes is None:
        probe_sizes = tuple(sorted({max(8, n // 4), max(8, n // 2), n}))
    rng = np.random.default_rng(seed)
    table = []
    table_iso = []
    for nn in probe_sizes:
        for isolated, tab in ((False, table), (True, table_iso)):
            Lp = fd_operator(nn, m, isolated=isolated)
            swp = np.sqrt(fd_weights(nn, isolated=isolated))
            B = (Lp * swp[:, None]) / swp[None, :]
            H = 0.5 * (B + B.T)
            tab.append((nn, _rayleigh_probe(H, rng)))

    return SemigroupReport(
        times=times, norms=norms, lambda1=lambda1, kappa_convenient=kappa,
        bound_satisfied=bound_ok, sup_norm=float(np.max(norms)),
        sup_ratio=float(np.max(ratios)),
        numerical_range=tuple(table),
        numerical_range_isolated=tuple(table_iso))
