"""Finite-volume tight-binding models.

Builds dense Hermitian samples of hopping Hamiltonians on d-dimensional
lattices (d = 1, 2, 3) with L orbitals per site, uniform magnetic field in
a fixed axial gauge, i.i.d. on-site disorder, open or periodic boundaries,
half-space restriction, and local flux insertion.  Ships a small zoo of
named models and a symmetry-class detector.

Conventions fixed here and relied on everywhere else:

* site order is row-major over coordinates, fiber index fastest:
  global index = site * L + orbital;
* a hopping (a, t_a) contributes t_a to the block <n+a| H |n>, so the
  Bloch symbol of a clean model is  h(k) = sum_a exp(-i k.a) t_a;
* the magnetic phase on a unit step +e_k from site m is
  sum_{j>k} B[k, j] * m_j, with a seam correction -B[i, j] * N_j * m_i on
  wrapping j-steps so every plaquette in axes (i, j) carries flux -B[i, j];
  on a torus this requires B[i, j] * N_i * N_j in 2 pi Z.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import (
    BadDimensionError,
    FluxQuantizationError,
    InconsistentSymmetriesError,
    NonHermitianHoppingsError,
    ParamOutOfRangeError,
    UnknownModelError,
)

PERIODIC = "periodic"
OPEN = "open"

SIGMA_0 = np.eye(2, dtype=complex)
SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)

_HERMITICITY_TOL = 1e-12
_SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class LatticeSpec:
    """Geometry of the finite lattice: sizes, boundaries, orbitals per site."""

    dimension: int
    linear_sizes: tuple[int, ...]
    boundary: tuple[str, ...]
    fiber: int

    def __post_init__(self):
        if self.dimension not in (1, 2, 3):
            raise BadDimensionError(f"dimension must be 1, 2 or 3, got {self.dimension}")
        if len(self.linear_sizes) != self.dimension or len(self.boundary) != self.dimension:
            raise ParamOutOfRangeError("linear_sizes and boundary must have one entry per axis")
        if any(n < 2 for n in self.linear_sizes):
            raise ParamOutOfRangeError("need at least two sites per axis")
        if any(b not in (PERIODIC, OPEN) for b in self.boundary):
            raise ParamOutOfRangeError(f"boundary flags must be '{PERIODIC}' or '{OPEN}'")
        if self.fiber < 1:
            raise ParamOutOfRangeError("fiber dimension must be positive")

    @property
    def num_sites(self) -> int:
        return int(np.prod(self.linear_sizes))

    @property
    def hilbert_dim(self) -> int:
        return self.num_sites * self.fiber

    def site_coords(self) -> np.ndarray:
        """Integer coordinates of every site, shape (num_sites, d), row-major."""
        grids = np.meshgrid(*[np.arange(n) for n in self.linear_sizes], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def site_index(self, coord: Sequence[int]) -> int:
        idx = 0
        for j in range(self.dimension):
            idx = idx * self.linear_sizes[j] + int(coord[j]) % self.linear_sizes[j]
        return idx


@dataclass(frozen=True)
class MagneticFieldSpec:
    """Uniform magnetic field, one antisymmetric flux matrix in radians per plaquette."""

    B: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.B, dtype=float)
        object.__setattr__(self, "B", B)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise ParamOutOfRangeError("B must be a square matrix")
        if np.abs(B + B.T).max() > 1e-14:
            raise ParamOutOfRangeError("B must be exactly antisymmetric")

    @staticmethod
    def zero(dimension: int) -> "MagneticFieldSpec":
        return MagneticFieldSpec(np.zeros((dimension, dimension)))

    @staticmethod
    def two_dimensional(b12: float) -> "MagneticFieldSpec":
        return MagneticFieldSpec(np.array([[0.0, b12], [-b12, 0.0]]))

    def validate_quantization(self, lattice: LatticeSpec) -> None:
        """Both-periodic axis pairs must carry an integer number of flux quanta."""
        d = lattice.dimension
        if self.B.shape[0] != d:
            raise ParamOutOfRangeError("B dimension does not match the lattice")
        for i in range(d):
            for j in range(i + 1, d):
                if lattice.boundary[i] == PERIODIC and lattice.boundary[j] == PERIODIC:
                    phi = self.B[i, j] * lattice.linear_sizes[i] * lattice.linear_sizes[j]
                    if abs(phi / (2 * np.pi) - round(phi / (2 * np.pi))) > 1e-9:
                        raise FluxQuantizationError(
                            f"B[{i},{j}]*N_{i}*N_{j} = {phi:.6f} is not a multiple of 2*pi"
                        )


@dataclass(frozen=True)
class SymmetrySpec:
    """Fiber-local symmetry operators with declared parities.

    s_tr and s_ph implement antiunitary symmetries (combined with complex
    conjugation in the position basis) and must be real; s_ch is unitary.
    """

    s_tr: np.ndarray | None = None
    eta_tr: int = +1
    s_ph: np.ndarray | None = None
    eta_ph: int = +1
    s_ch: np.ndarray | None = None

    def __post_init__(self):
        for name, op, eta, need_real in (
            ("s_tr", self.s_tr, self.eta_tr, True),
            ("s_ph", self.s_ph, self.eta_ph, True),
            ("s_ch", self.s_ch, +1, False),
        ):
            if op is None:
                continue
            op = np.asarray(op, dtype=complex)
            object.__setattr__(self, name, op)
            if need_real and np.abs(op.imag).max() > _SYMMETRY_TOL:
                raise InconsistentSymmetriesError(f"{name} must have real entries")
            if np.abs(op.conj().T @ op - np.eye(len(op))).max() > _SYMMETRY_TOL:
                raise InconsistentSymmetriesError(f"{name} is not unitary")
            if np.abs(op @ op - eta * np.eye(len(op))).max() > _SYMMETRY_TOL:
                raise InconsistentSymmetriesError(f"{name}^2 differs from declared parity {eta}")
        if self.s_tr is not None and self.s_ph is not None and self.s_ch is not None:
            prod = self.s_ph @ self.s_tr
            # s_ch must agree with s_ph s_tr up to a scalar phase
            tr = np.trace(self.s_ch.conj().T @ prod)
            if abs(abs(tr) - len(prod)) > 1e-9:
                raise InconsistentSymmetriesError("s_ch is not proportional to s_ph @ s_tr")

    @property
    def empty(self) -> bool:
        return self.s_tr is None and self.s_ph is None and self.s_ch is None


@dataclass(frozen=True)
class DisorderSpec:
    """I.i.d. self-adjoint on-site matrices, bounded in norm by the strength."""

    family: str = "diagonal-scalar"
    strength: float = 0.0
    seed: int = 0
    constraint: SymmetrySpec | None = None

    _FAMILIES = ("diagonal-scalar", "diagonal-matrix", "symmetry-constrained-matrix")

    def __post_init__(self):
        if self.family not in self._FAMILIES:
            raise ParamOutOfRangeError(f"unknown disorder family {self.family!r}")
        if self.strength < 0:
            raise ParamOutOfRangeError("disorder strength must be >= 0")

    def sample_site_matrices(self, num_sites: int, fiber: int, realization_seed: int) -> np.ndarray:
        """Deterministic array of on-site matrices, shape (num_sites, L, L)."""
        rng = np.random.default_rng(np.random.SeedSequence((self.seed, realization_seed)))
        lam = self.strength
        out = np.zeros((num_sites, fiber, fiber), dtype=complex)
        if lam == 0.0:
            return out
        if self.family == "diagonal-scalar":
            u = rng.uniform(-1.0, 1.0, size=num_sites)
            out = lam * u[:, None, None] * np.eye(fiber)[None]
        elif self.family == "diagonal-matrix":
            u = rng.uniform(-1.0, 1.0, size=(num_sites, fiber))
            for n in range(num_sites):
                out[n] = lam * np.diag(u[n])
        else:
            for n in range(num_sites):
                a = rng.uniform(-1.0, 1.0, size=(fiber, fiber))
                b = rng.uniform(-1.0, 1.0, size=(fiber, fiber))
                h = (a + a.T) / 2 + 1j * (b - b.T) / 2
                v = rng.uniform(-1.0, 1.0)
                h = self._project(h)
                norm = np.linalg.norm(h, 2)
                if norm > 1e-14:
                    out[n] = lam * v * h / norm
        return out

    def _project(self, h: np.ndarray) -> np.ndarray:
        """Orthogonal projection onto the symmetry-allowed subspace."""
        c = self.constraint
        if c is None:
            return h
        if c.s_tr is not None:
            h = (h + c.s_tr.conj().T @ h.conj() @ c.s_tr) / 2
        if c.s_ph is not None:
            h = (h - c.s_ph.conj().T @ h.conj() @ c.s_ph) / 2
        if c.s_ch is not None:
            h = (h - c.s_ch.conj().T @ h @ c.s_ch) / 2
        return (h + h.conj().T) / 2


def _canonical_positive(a: tuple[int, ...]) -> bool:
    for c in a:
        if c > 0:
            return True
        if c < 0:
            return False
    return False


@dataclass(frozen=True)
class ModelDefinition:
    """Declarative model: lattice + field + hoppings + on-site + disorder + symmetry."""

    lattice: LatticeSpec
    field: MagneticFieldSpec
    hoppings: tuple[tuple[tuple[int, ...], np.ndarray], ...]
    onsite: np.ndarray
    disorder: DisorderSpec = field(default_factory=DisorderSpec)
    symmetry: SymmetrySpec = field(default_factory=SymmetrySpec)
    name: str = "custom"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        L = self.lattice.fiber
        onsite = np.asarray(self.onsite, dtype=complex)
        object.__setattr__(self, "onsite", onsite)
        if onsite.shape != (L, L):
            raise ParamOutOfRangeError("onsite matrix must be L x L")
        if np.abs(onsite - onsite.conj().T).max() > _HERMITICITY_TOL:
            raise NonHermitianHoppingsError("onsite matrix must be self-adjoint")
        hop = []
        for a, t in self.hoppings:
            a = tuple(int(c) for c in a)
            t = np.asarray(t, dtype=complex)
            if len(a) != self.lattice.dimension:
                raise ParamOutOfRangeError(f"displacement {a} has wrong dimension")
            if all(c == 0 for c in a):
                raise ParamOutOfRangeError("zero displacement belongs in the onsite matrix")
            if t.shape != (L, L):
                raise ParamOutOfRangeError("hopping matrices must be L x L")
            hop.append((a, t))
        object.__setattr__(self, "hoppings", tuple(hop))
        self._check_closure()
        self.field.validate_quantization(self.lattice)

    def _check_closure(self):
        table = {a: t for a, t in self.hoppings}
        if len(table) != len(self.hoppings):
            raise NonHermitianHoppingsError("duplicate displacement in hopping list")
        for a, t in self.hoppings:
            rev = tuple(-c for c in a)
            if rev not in table:
                raise NonHermitianHoppingsError(f"missing reverse hopping for {a}")
            if np.abs(table[rev] - t.conj().T).max() > _HERMITICITY_TOL:
                raise NonHermitianHoppingsError(f"reverse hopping of {a} is not the adjoint")

    def positive_hoppings(self) -> list[tuple[tuple[int, ...], np.ndarray]]:
        return [(a, t) for a, t in self.hoppings if _canonical_positive(a)]

    @property
    def max_hop_range(self) -> int:
        if not self.hoppings:
            return 0
        return max(max(abs(c) for c in a) for a, _ in self.hoppings)

    def fingerprint(self) -> str:
        """Stable hash of the model content, for result provenance."""
        h = hashlib.sha256()
        h.update(repr((self.name, self.lattice.dimension, self.lattice.linear_sizes,
                       self.lattice.boundary, self.lattice.fiber)).encode())
        h.update(np.ascontiguousarray(self.field.B).tobytes())
        for a, t in sorted(self.hoppings, key=lambda p: p[0]):
            h.update(repr(a).encode())
            h.update(np.ascontiguousarray(np.round(t, 14)).tobytes())
        h.update(np.ascontiguousarray(np.round(self.onsite, 14)).tobytes())
        h.update(repr((self.disorder.family, self.disorder.strength, self.disorder.seed)).encode())
        return h.hexdigest()[:16]

    def with_boundary(self, axis: int, flag: str) -> "ModelDefinition":
        boundary = list(self.lattice.boundary)
        boundary[axis] = flag
        lat = replace(self.lattice, boundary=tuple(boundary))
        return replace(self, lattice=lat)

    def with_sizes(self, sizes: Sequence[int]) -> "ModelDefinition":
        lat = replace(self.lattice, linear_sizes=tuple(int(n) for n in sizes))
        return replace(self, lattice=lat)


@dataclass(frozen=True)
class HamiltonianSample:
    """One disorder realization as a dense Hermitian matrix plus site metadata."""

    matrix: np.ndarray
    model: ModelDefinition
    realization_seed: int

    @property
    def lattice(self) -> LatticeSpec:
        return self.model.lattice

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def site_coords(self) -> np.ndarray:
        return self.lattice.site_coords()

    def position_arrays(self) -> np.ndarray:
        """Per-global-index coordinates, shape (hilbert_dim, d)."""
        return np.repeat(self.site_coords(), self.lattice.fiber, axis=0).astype(float)


def _step_phase(coord: np.ndarray, axis: int, direction: int, lattice: LatticeSpec,
                B: np.ndarray) -> tuple[np.ndarray | None, float]:
    """One unit step in the axial gauge.

    Returns (new coordinate or None if the step leaves an open lattice,
    accumulated phase).  Forward steps +e_k carry sum_{j>k} B[k,j]*m_j; a
    wrapping step along axis j adds the seam term -B[i,j]*N_j*m_i for every
    i < j so the flux per plaquette stays uniform across the seam.
    """
    d = lattice.dimension
    sizes = lattice.linear_sizes
    m = coord.copy()
    if direction > 0:
        phase = float(sum(B[axis, j] * m[j] for j in range(axis + 1, d)))
        m[axis] += 1
        wrapped = m[axis] == sizes[axis]
        if wrapped:
            if lattice.boundary[axis] == OPEN:
                return None, 0.0
            m[axis] = 0
            for i in range(axis):
                phase += -B[i, axis] * sizes[axis] * m[i]
        return m, phase
    # backward step: adjoint of the forward step from the target
    m[axis] -= 1
    wrapped = m[axis] < 0
    if wrapped:
        if lattice.boundary[axis] == OPEN:
            return None, 0.0
        m[axis] = sizes[axis] - 1
    back, phase = _step_phase(m, axis, +1, lattice, B)
    assert back is not None
    return m, -phase


def peierls_target(coord: Sequence[int], a: Sequence[int], lattice: LatticeSpec,
                   B: np.ndarray) -> tuple[int | None, float]:
    """Target site index and gauge phase for displacement a, stepping axis by axis."""
    m = np.array(coord, dtype=int)
    phase = 0.0
    for axis in range(lattice.dimension):
        step = 1 if a[axis] > 0 else -1
        for _ in range(abs(a[axis])):
            m2, ph = _step_phase(m, axis, step, lattice, B)
            if m2 is None:
                return None, 0.0
            m = m2
            phase += ph
    return lattice.site_index(m), phase


def build_hamiltonian(model: ModelDefinition, realization_seed: int = 0) -> HamiltonianSample:
    """Assemble the dense finite-volume matrix of the model.

    Deterministic in (model, realization_seed); raises FluxQuantizationError
    via the model validation if the field is incompatible with the torus.
    """
    lat = model.lattice
    L = lat.fiber
    dim = lat.hilbert_dim
    coords = lat.site_coords()
    H = np.zeros((dim, dim), dtype=complex)
    for a, t in model.positive_hoppings():
        for n in range(lat.num_sites):
            target, phase = peierls_target(coords[n], a, lat, model.field.B)
            if target is None:
                continue
            blk = np.exp(1j * phase) * t
            H[target * L:(target + 1) * L, n * L:(n + 1) * L] += blk
    H = H + H.conj().T
    omega = model.disorder.sample_site_matrices(lat.num_sites, L, realization_seed)
    for n in range(lat.num_sites):
        H[n * L:(n + 1) * L, n * L:(n + 1) * L] += model.onsite + omega[n]
    return HamiltonianSample(matrix=H, model=model, realization_seed=realization_seed)


def magnetic_translations(lattice: LatticeSpec, B: np.ndarray) -> list[np.ndarray]:
    """Matrices of the gauge translations on the torus, one per axis."""
    if any(b != PERIODIC for b in lattice.boundary):
        raise ParamOutOfRangeError("magnetic translations need a full torus")
    coords = lattice.site_coords()
    out = []
    for axis in range(lattice.dimension):
        U = np.zeros((lattice.num_sites, lattice.num_sites), dtype=complex)
        for n in range(lattice.num_sites):
            target, phase = peierls_target(coords[n], np.eye(lattice.dimension, dtype=int)[axis],
                                           lattice, B)
            U[target, n] = np.exp(1j * phase)
        out.append(np.kron(U, np.eye(lattice.fiber)))
    return out


def dual_translations(lattice: LatticeSpec, B: np.ndarray) -> list[np.ndarray]:
    """Translations commuting with the gauge translations (mirrored phase convention)."""
    if any(b != PERIODIC for b in lattice.boundary):
        raise ParamOutOfRangeError("dual translations need a full torus")
    # mirror the gauge: run the peierls rule on the axis-reversed lattice with
    # the sign-flipped reversed field, then map indices back
    Bm = -B[::-1, ::-1].copy()
    lat_m = LatticeSpec(lattice.dimension, lattice.linear_sizes[::-1],
                        lattice.boundary[::-1], 1)
    coords_m = lat_m.site_coords()
    out = []
    n_sites = lattice.num_sites
    native_index = {tuple(c): i for i, c in enumerate(lattice.site_coords())}
    for axis in range(lattice.dimension):
        axis_m = lattice.dimension - 1 - axis
        V = np.zeros((n_sites, n_sites), dtype=complex)
        for nm in range(n_sites):
            target_m, phase = peierls_target(coords_m[nm], np.eye(lattice.dimension, dtype=int)[axis_m],
                                             lat_m, Bm)
            src = native_index[tuple(coords_m[nm][::-1])]
            dst = native_index[tuple(coords_m[target_m][::-1])]
            V[dst, src] = np.exp(1j * phase)
        out.append(np.kron(V, np.eye(lattice.fiber)))
    return out


def restrict_half_space(sample: HamiltonianSample) -> HamiltonianSample:
    """Dirichlet truncation: relabel the last axis open and drop its wrap bonds."""
    model = sample.model.with_boundary(sample.lattice.dimension - 1, OPEN)
    return build_hamiltonian(model, sample.realization_seed)


def _string_phases(x_from: np.ndarray, y_from: np.ndarray, x_to: np.ndarray,
                   y_to: np.ndarray, px: float, py: float, t: float,
                   active: np.ndarray, half: bool = False) -> np.ndarray:
    """Phases for straight bonds against a vertical string through (px, py).

    Full gauge (half=False): bonds crossing the upward ray {x = px, y > py}
    pick up exp(+-2 pi i t).  Mirror-split gauge (half=True): the full
    vertical line, with exp(+-i pi t) above py and the conjugate below, so a
    reflection about the line y = py maps the phase field to its conjugate.
    Only pairs flagged active (actual bonds) are validated against the center.
    """
    dx = x_to - x_from
    out = np.ones(dx.shape, dtype=complex)
    moving = dx != 0
    s = np.zeros_like(dx)
    s[moving] = (px - x_from[moving]) / dx[moving]
    crossing = moving & (s > 0.0) & (s < 1.0)
    y_cross = y_from + s * (y_to - y_from)
    if np.any(crossing & active & (np.abs(y_cross - py) < 1e-9)):
        raise BadDimensionError(
            "a bond passes through the flux plaquette center; shift the plaquette")
    sgn = np.sign(dx)
    if half:
        side = np.where(y_cross > py, 1.0, -1.0)
        out[crossing] = np.exp(1j * np.pi * t * sgn[crossing] * side[crossing])
    else:
        up = crossing & (y_cross > py)
        out[up] = np.exp(2j * np.pi * t * sgn[up])
    return out


def insert_flux(sample: HamiltonianSample, t: float, plaquette: Sequence[int]) -> HamiltonianSample:
    """Thread flux 2*pi*t through one lattice cell.

    d = 2: string gauge, the phase sits on bonds crossing the half-line going
    up from the plaquette center, so t = 1 returns the input exactly and
    t = 1/2 phases are real.  d = 1 with a two-component fiber: the fiber is
    read as the two legs of a strip and the strip cell at the given column is
    threaded with a mirror-split gauge, which preserves a particle-hole
    symmetry exchanging the legs along the whole path; there t = 1 is a local
    gauge conjugation of the input on open chains.
    """
    lat = sample.lattice
    L = lat.fiber
    H = sample.matrix.copy()
    if t == 0.0:
        return HamiltonianSample(matrix=H, model=sample.model,
                                 realization_seed=sample.realization_seed)
    coords = sample.site_coords().astype(float)

    if lat.dimension == 2:
        if lat.boundary[1] != OPEN:
            raise BadDimensionError(
                "flux insertion needs the second axis open so the string can leave the sample")
        px, py = plaquette[0] + 0.5, plaquette[1] + 0.5
        X, Y = coords[:, 0], coords[:, 1]
        x_from = np.broadcast_to(X[None, :], (len(X), len(X))).copy()
        x_to = np.broadcast_to(X[:, None], (len(X), len(X))).copy()
        if lat.boundary[0] == PERIODIC:
            # unroll wrap bonds by minimal image so the segment geometry is local
            N1 = lat.linear_sizes[0]
            dxm = (x_to - x_from + N1 / 2) % N1 - N1 / 2
            x_to = x_from + dxm
        y_from = np.broadcast_to(Y[None, :], x_from.shape)
        y_to = np.broadcast_to(Y[:, None], x_from.shape)
        active = np.abs(H).reshape(len(X), L, len(X), L).max(axis=(1, 3)) > 0
        ph = _string_phases(x_from, y_from, x_to, y_to, px, py, t, active)
        H *= np.kron(ph, np.ones((L, L)))
        return HamiltonianSample(matrix=H, model=sample.model,
                                 realization_seed=sample.realization_seed)

    if lat.dimension == 1 and L == 2:
        if sample.model.max_hop_range > 1:
            raise BadDimensionError("two-leg flux insertion supports nearest-neighbor hopping only")
        px = plaquette[0] + 0.4
        N = lat.linear_sizes[0]
        xs = np.repeat(coords[:, 0], 2)
        ys = np.tile(np.array([0.0, 1.0]), N)
        x_from = np.broadcast_to(xs[None, :], (2 * N, 2 * N)).copy()
        x_to = np.broadcast_to(xs[:, None], (2 * N, 2 * N)).copy()
        if lat.boundary[0] == PERIODIC:
            dxm = (x_to - x_from + N / 2) % N - N / 2
            x_to = x_from + dxm
        y_from = np.broadcast_to(ys[None, :], x_from.shape)
        y_to = np.broadcast_to(ys[:, None], x_from.shape)
        active = np.abs(H) > 0
        ph = _string_phases(x_from, y_from, x_to, y_to, px, 0.5, t, active, half=True)
        H *= ph
        return HamiltonianSample(matrix=H, model=sample.model,
                                 realization_seed=sample.realization_seed)

    raise BadDimensionError("flux insertion is defined for d = 2 or the d = 1 two-leg strip")


# ---------------------------------------------------------------------------
# symmetry classification
# ---------------------------------------------------------------------------

_CAZ_COMPLEX = {(False, False, False): ("A", 0), (False, False, True): ("AIII", 1)}
_CAZ_REAL = {
    (+1, 0): ("AI", 0),
    (+1, +1): ("BDI", 1),
    (0, +1): ("D", 2),
    (-1, +1): ("DIII", 3),
    (-1, 0): ("AII", 4),
    (-1, -1): ("CII", 5),
    (0, -1): ("C", 6),
    (+1, -1): ("CI", 7),
}


def classify_caz(sample: HamiltonianSample | np.ndarray, sym: SymmetrySpec,
                 tol: float = 1e-10) -> tuple[str, int]:
    """Detect the symmetry class of a sample from the declared fiber operators.

    Tests s_tr* conj(H) s_tr = H, s_ph* conj(H) s_ph = -H and
    s_ch* H s_ch = -H, reads the declared parities, and returns the class
    label together with its row index in the tenfold classification.
    """
    H = sample.matrix if isinstance(sample, HamiltonianSample) else np.asarray(sample)
    if isinstance(sample, HamiltonianSample):
        L = sample.lattice.fiber
        n_sites = sample.lattice.num_sites
    else:
        L = len(sym.s_tr) if sym.s_tr is not None else (
            len(sym.s_ph) if sym.s_ph is not None else (len(sym.s_ch) if sym.s_ch is not None else H.shape[0]))
        n_sites = H.shape[0] // L
    scale = max(np.abs(H).max(), 1.0)

    def lift(s):
        return np.kron(np.eye(n_sites), s)

    has_tr = has_ph = has_ch = False
    if sym.s_tr is not None:
        S = lift(sym.s_tr)
        has_tr = np.abs(S.conj().T @ H.conj() @ S - H).max() <= tol * scale
    if sym.s_ph is not None:
        S = lift(sym.s_ph)
        has_ph = np.abs(S.conj().T @ H.conj() @ S + H).max() <= tol * scale
    if sym.s_ch is not None:
        S = lift(sym.s_ch)
        has_ch = np.abs(S.conj().T @ H @ S + H).max() <= tol * scale

    if has_tr and has_ph and not has_ch and sym.s_ch is not None:
        raise InconsistentSymmetriesError(
            "TRS and PHS hold but the declared chiral operator does not anticommute with H")
    if not has_tr and not has_ph:
        return _CAZ_COMPLEX[(False, False, has_ch)]
    key = (sym.eta_tr if has_tr else 0, sym.eta_ph if has_ph else 0)
    if key not in _CAZ_REAL:
        raise InconsistentSymmetriesError(f"unclassifiable symmetry data {key}")
    return _CAZ_REAL[key]


# ---------------------------------------------------------------------------
# model zoo
# ---------------------------------------------------------------------------

def _default_lattice(d: int, sizes, boundary, fiber) -> LatticeSpec:
    if isinstance(sizes, int):
        sizes = (sizes,) * d
    if boundary is None:
        boundary = (PERIODIC,) * d
    elif isinstance(boundary, str):
        boundary = (boundary,) * d
    return LatticeSpec(d, tuple(sizes), tuple(boundary), fiber)


def _ssh(m: float, sizes, boundary, disorder: DisorderSpec) -> ModelDefinition:
    lat = _default_lattice(1, sizes, boundary, 2)
    t_plus = np.array([[0, 1], [0, 0]], dtype=complex)
    hops = (((1,), t_plus), ((-1,), t_plus.conj().T))
    sym = SymmetrySpec(s_ch=SIGMA_3)
    return ModelDefinition(lat, MagneticFieldSpec.zero(1), hops, m * SIGMA_2,
                           disorder, sym, name="ssh", metadata={"m": m})


def _harper(b12: float, sizes, boundary, disorder: DisorderSpec) -> ModelDefinition:
    lat = _default_lattice(2, sizes, boundary, 1)
    one = np.array([[1.0]], dtype=complex)
    hops = (((1, 0), one), ((-1, 0), one), ((0, 1), one), ((0, -1), one))
    return ModelDefinition(lat, MagneticFieldSpec.two_dimensional(b12), hops,
                           np.zeros((1, 1)), disorder, SymmetrySpec(),
                           name="harper", metadata={"b12": b12})


_QWZ_T10 = 0.5j * SIGMA_1 - 0.5 * SIGMA_3
_QWZ_T01 = -0.5j * SIGMA_2 - 0.5 * SIGMA_3


def _qwz(mass: float, sizes, boundary, disorder: DisorderSpec) -> ModelDefinition:
    if mass in (0.0, 2.0, -2.0):
        raise ParamOutOfRangeError("qwz gap closes at mass in {0, +-2}")
    lat = _default_lattice(2, sizes, boundary, 2)
    hops = (((1, 0), _QWZ_T10), ((-1, 0), _QWZ_T10.conj().T),
            ((0, 1), _QWZ_T01), ((0, -1), _QWZ_T01.conj().T))
    return ModelDefinition(lat, MagneticFieldSpec.zero(2), hops, mass * SIGMA_3,
                           disorder, SymmetrySpec(), name="qwz", metadata={"mass": mass})


def _kane_mele_qsh(mass: float, rashba: float, zeeman: float, sizes, boundary,
                   disorder: DisorderSpec) -> ModelDefinition:
    """Spin-doubled Chern model: up block and conjugated down block, optional
    spin-mixing (time-reversal preserving) and Zeeman (time-reversal breaking) terms."""
    if mass in (0.0, 2.0, -2.0):
        raise ParamOutOfRangeError("gap closes at mass in {0, +-2}")
    lat = _default_lattice(2, sizes, boundary, 4)
    z = np.zeros((2, 2), dtype=complex)
    t10 = np.block([[_QWZ_T10, rashba * SIGMA_0], [-rashba * SIGMA_0, _QWZ_T10.conj()]])
    t01 = np.block([[_QWZ_T01, z], [z, _QWZ_T01.conj()]])
    ons = np.block([[mass * SIGMA_3 + zeeman * SIGMA_0, z],
                    [z, (mass * SIGMA_3).conj() - zeeman * SIGMA_0]])
    hops = (((1, 0), t10), ((-1, 0), t10.conj().T),
            ((0, 1), t01), ((0, -1), t01.conj().T))
    s_tr = np.kron(np.array([[0., -1.], [1., 0.]]), np.eye(2))
    sym = SymmetrySpec(s_tr=s_tr, eta_tr=-1)
    sz = np.kron(0.5 * SIGMA_3, SIGMA_0)
    return ModelDefinition(lat, MagneticFieldSpec.zero(2), hops, ons, disorder, sym,
                           name="kane_mele_qsh",
                           metadata={"mass": mass, "rashba": rashba, "zeeman": zeeman, "s_z": sz})


def _kitaev_chain(mu: float, w_strength: float, sizes, boundary,
                  disorder: DisorderSpec | None) -> ModelDefinition:
    """One-dimensional pairing chain in the two-component form.

    Bloch symbol (cos k + mu) sigma_3 + sin k sigma_1; disorder is a random
    chemical potential respecting the even particle-hole and even
    time-reversal operators.
    """
    lat = _default_lattice(1, sizes, boundary, 2)
    t_plus = np.array([[0.5, 0.5j], [0.5j, -0.5]], dtype=complex)
    hops = (((1,), t_plus), ((-1,), t_plus.conj().T))
    sym = SymmetrySpec(s_tr=SIGMA_3.real, eta_tr=+1, s_ph=SIGMA_1.real, eta_ph=+1,
                       s_ch=SIGMA_2)
    if disorder is None:
        disorder = DisorderSpec(family="symmetry-constrained-matrix", strength=w_strength,
                                seed=0, constraint=sym)
    return ModelDefinition(lat, MagneticFieldSpec.zero(1), hops, mu * SIGMA_3,
                           disorder, sym, name="kitaev_chain",
                           metadata={"mu": mu, "w_strength": w_strength})


def _chiral_3d(mass: float, sizes, boundary, disorder: DisorderSpec) -> ModelDefinition:
    """Three-dimensional chiral model with off-diagonal block
    sum_j sin k_j sigma_j + i (mass + sum_j cos k_j)."""
    lat = _default_lattice(3, sizes, boundary, 4)
    z = np.zeros((2, 2), dtype=complex)
    sig = (SIGMA_1, SIGMA_2, SIGMA_3)
    hops = []
    for j in range(3):
        ur = 0.5j * (sig[j] + SIGMA_0)
        ll = 0.5j * (sig[j] - SIGMA_0)
        t = np.block([[z, ur], [ll, z]])
        a = tuple(1 if k == j else 0 for k in range(3))
        hops.append((a, t))
        hops.append((tuple(-c for c in a), t.conj().T))
    ons = np.block([[z, 1j * mass * SIGMA_0], [-1j * mass * SIGMA_0, z]])
    sym = SymmetrySpec(s_ch=np.kron(SIGMA_3, SIGMA_0))
    return ModelDefinition(lat, MagneticFieldSpec.zero(3), hops, ons, disorder, sym,
                           name="chiral_3d", metadata={"mass": mass})


MODEL_NAMES = ("ssh", "harper", "qwz", "kane_mele_qsh", "kitaev_chain", "chiral_3d")


def make_named_model(name: str, sizes=None, boundary=None,
                     disorder: DisorderSpec | None = None, **params) -> ModelDefinition:
    """Construct one of the shipped models by name.

    Size defaults are desk scale; every parameter the model knows is a
    keyword.  Raises UnknownModelError / ParamOutOfRangeError.
    """
    dis = disorder if disorder is not None else DisorderSpec()
    if name == "ssh":
        return _ssh(float(params.pop("m", 0.0)), sizes or 64, boundary, dis)
    if name == "harper":
        return _harper(float(params.pop("b12", 2 * np.pi / 3)), sizes or 12, boundary, dis)
    if name == "qwz":
        return _qwz(float(params.pop("mass", 1.0)), sizes or 12, boundary, dis)
    if name == "kane_mele_qsh":
        return _kane_mele_qsh(float(params.pop("mass", 1.0)), float(params.pop("rashba", 0.0)),
                              float(params.pop("zeeman", 0.0)), sizes or 12, boundary, dis)
    if name == "kitaev_chain":
        return _kitaev_chain(float(params.pop("mu", 0.0)), float(params.pop("w_strength", 0.0)),
                             sizes or 64, boundary, disorder)
    if name == "chiral_3d":
        return _chiral_3d(float(params.pop("mass", 2.0)), sizes or 6, boundary, dis)
    raise UnknownModelError(f"unknown model {name!r}; known: {', '.join(MODEL_NAMES)}")
