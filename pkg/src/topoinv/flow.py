"""Spectral flow along flux paths: tracking, parity counts, Pfaffian signs.

Finite volume forces one refinement of the textbook definitions: over a full
flux cycle the net signed crossing count through mu is zero because the
outer boundary returns what the defect pumps.  The flow therefore counts
crossings whose eigenvector localizes at the flux plaquette; the raw count
is reported alongside.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import (
    BranchAmbiguityError,
    KernelAtEndpointError,
    MarginTooSmallError,
    PfaffianUnderflowError,
    SymmetryBrokenAtHalfFluxError,
)
from .invariants import _pfaffian_sign_logabs, localized_mode_count
from .models import (
    OPEN,
    PERIODIC,
    HamiltonianSample,
    ModelDefinition,
    build_hamiltonian,
    insert_flux,
)
from .spectral import EigenData, detect_gap, diagonalize

_CAYLEY = np.array([[1.0, -1.0j], [1.0, 1.0j]]) / np.sqrt(2.0)


@dataclass
class FluxPath:
    """Family of samples along one flux insertion, lazily built and cached."""

    base: HamiltonianSample
    plaquette: tuple[int, ...]
    ts: list[float] = field(default_factory=lambda: list(np.linspace(0.0, 1.0, 21)))
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        ts = sorted(set(float(t) for t in self.ts))
        if not ts or ts[0] < 0.0 or ts[-1] > 1.0:
            raise ValueError("flux values must lie in [0, 1]")
        self.ts = ts

    def sample_at(self, t: float) -> HamiltonianSample:
        if t not in self._cache:
            self._cache[t] = insert_flux(self.base, t, self.plaquette)
        return self._cache[t]

    def eigen_at(self, t: float) -> EigenData:
        key = ("eig", t)
        if key not in self._cache:
            self._cache[key] = diagonalize(self.sample_at(t))
        return self._cache[key]


def _defect_window(sample: HamiltonianSample, plaquette, radius_frac: float = 0.25) -> np.ndarray:
    from .invariants import global_positions

    pos = global_positions(sample)
    lat = sample.lattice
    keep = np.ones(pos.shape[0], dtype=bool)
    center = [plaquette[0] + 0.5]
    if lat.dimension >= 2:
        center.append(plaquette[1] + 0.5)
    if lat.dimension == 1:
        center = [plaquette[0] + 0.5]
    for axis in range(lat.dimension):
        n = lat.linear_sizes[axis]
        dx = pos[:, axis] - center[axis]
        if lat.boundary[axis] == PERIODIC:
            dx = (dx + n / 2) % n - n / 2
        keep &= np.abs(dx) <= radius_frac * n
    return keep


@dataclass(frozen=True)
class SpectralFlowResult:
    """Signed defect-localized crossing count, with raw count and diagnostics."""

    net: int
    raw_net: int
    crossings: tuple[dict, ...]
    min_overlap: float


def spectral_flow(path: FluxPath, mu: float, overlap_floor: float = 0.7,
                  max_refine: int = 6, weight_floor: float = 0.5,
                  radius_frac: float = 0.25, width: float | None = None) -> SpectralFlowResult:
    """Net number of tracked eigenvalue branches moving through mu.

    Branches inside the bulk gap window around mu are matched between
    consecutive flux values by maximal eigenvector overlap (bijective
    assignment); intervals whose best overlaps fall below the floor are
    bisected, up to max_refine rounds, after which a degenerate sample point
    is skipped.  A crossing counts toward the net flow when its branch
    localizes at the flux plaquette; the unfiltered count is reported too.
    The window defaults to the gap of the periodic companion of the base
    model, since the open base sample carries edge spectrum inside the gap.
    """
    if width is None:
        torus = path.base.model
        for axis in range(torus.lattice.dimension):
            torus = torus.with_boundary(axis, PERIODIC)
        companion = build_hamiltonian(torus, path.base.realization_seed)
        gap = detect_gap(diagonalize(companion), mu)
        width = min(mu - gap[0], gap[1] - mu)
    window = _defect_window(path.base, path.plaquette, radius_frac)
    ts = list(path.ts)
    dt_floor = 2.0 ** (-max_refine)

    def matched_pairs(t0, t1):
        e0, e1 = path.eigen_at(t0), path.eigen_at(t1)
        sel0 = np.where(np.abs(e0.eigenvalues - mu) < width)[0]
        sel1 = np.where(np.abs(e1.eigenvalues - mu) < width)[0]
        if len(sel0) == 0 or len(sel1) == 0:
            return [], 1.0
        V0 = e0.eigenvectors[:, sel0]
        V1 = e1.eigenvectors[:, sel1]
        O = np.abs(V0.conj().T @ V1) ** 2
        rows, cols = linear_sum_assignment(-O)
        worst = float(O[rows, cols].min()) if len(rows) else 1.0
        pairs = []
        for r, c in zip(rows, cols):
            pairs.append((e0.eigenvalues[sel0[r]], e1.eigenvalues[sel1[c]],
                          V0[:, r], V1[:, c]))
        return pairs, worst

    crossings = []
    min_overlap = 1.0
    k = 0
    while k < len(ts) - 1:
        t0, t1 = ts[k], ts[k + 1]
        pairs, worst = matched_pairs(t0, t1)
        if worst < overlap_floor:
            if t1 - t0 > dt_floor:
                ts.insert(k + 1, 0.5 * (t0 + t1))
                continue
            # refinement floor: the sample at an endpoint sits inside an
            # avoided-crossing window; skip over it and match across
            if k + 2 < len(ts):
                pairs2, worst2 = matched_pairs(t0, ts[k + 2])
                if worst2 >= overlap_floor:
                    del ts[k + 1]
                    continue
            raise BranchAmbiguityError(
                f"overlap {worst:.2f} below {overlap_floor} at dt {t1 - t0:.3g}")
        min_overlap = min(min_overlap, worst)
        for lam0, lam1, v0, v1 in pairs:
            if (lam0 - mu) * (lam1 - mu) < 0:
                direction = int(np.sign(lam1 - lam0))
                # measure localization away from the degeneracy point
                vec = v0 if abs(lam0 - mu) > abs(lam1 - mu) else v1
                weight = float((np.abs(vec) ** 2 * window).sum())
                crossings.append({"t": 0.5 * (t0 + t1), "direction": direction,
                                  "multiplicity": 1, "weight": weight})
        k += 1

    net = sum(c["direction"] for c in crossings if c["weight"] > weight_floor)
    raw = sum(c["direction"] for c in crossings)
    return SpectralFlowResult(net=int(net), raw_net=int(raw),
                              crossings=tuple(crossings), min_overlap=min_overlap)


def flow_trace(path: FluxPath, mu: float, width: float | None = None) -> list[tuple]:
    """(t, eigenvalue, branch id) rows for spaghetti plots of the window spectrum.

    Branch ids propagate between consecutive flux values by the same
    overlap assignment the flow counter uses; fresh branches entering the
    window get fresh ids.
    """
    if width is None:
        torus = path.base.model
        for axis in range(torus.lattice.dimension):
            torus = torus.with_boundary(axis, PERIODIC)
        gap = detect_gap(diagonalize(build_hamiltonian(torus, path.base.realization_seed)), mu)
        width = min(mu - gap[0], gap[1] - mu)
    rows = []
    prev_sel = prev_vecs = prev_ids = None
    next_id = 0
    for t in path.ts:
        eig = path.eigen_at(t)
        sel = np.where(np.abs(eig.eigenvalues - mu) < width)[0]
        vecs = eig.eigenvectors[:, sel]
        ids = [-1] * len(sel)
        if prev_sel is not None and len(sel) and len(prev_sel):
            O = np.abs(prev_vecs.conj().T @ vecs) ** 2
            r, c = linear_sum_assignment(-O)
            for i, j in zip(r, c):
                if O[i, j] > 0.25:
                    ids[j] = prev_ids[i]
        for j in range(len(sel)):
            if ids[j] < 0:
                ids[j] = next_id
                next_id += 1
            rows.append((float(t), float(eig.eigenvalues[sel[j]]), ids[j]))
        prev_sel, prev_vecs, prev_ids = sel, vecs, ids
    return rows


# ---------------------------------------------------------------------------
# time-reversal: degenerate midgap pairs at half flux
# ---------------------------------------------------------------------------

def kramers_halfflux_probe(model: ModelDefinition, plaquette, realization_seed: int = 0,
                           gap: tuple[float, float] | None = None,
                           tol: float = 1e-6) -> list[dict]:
    """Midgap eigenvalues of the half-flux sample with degeneracy verification.

    Requires the declared odd time-reversal to hold exactly at t = 0 and
    t = 1/2 (the string phases are real there).  Each midgap level is paired
    with its antiunitary partner; the overlap |<v, S conj(v)>| must vanish
    for an odd symmetry.
    """
    sym = model.symmetry
    if sym.s_tr is None or sym.eta_tr != -1:
        raise SymmetryBrokenAtHalfFluxError("model does not declare an odd time reversal")
    sample0 = build_hamiltonian(model, realization_seed)
    if gap is None:
        gap = detect_gap(diagonalize(build_hamiltonian(
            model.with_boundary(model.lattice.dimension - 1, PERIODIC), realization_seed)), 0.0)
    half = insert_flux(sample0, 0.5, plaquette)
    S = np.kron(np.eye(model.lattice.num_sites), sym.s_tr)
    for tag, Ht in (("t=0", sample0.matrix), ("t=1/2", half.matrix)):
        dev = np.abs(S.conj().T @ Ht.conj() @ S - Ht).max()
        if dev > 1e-9 * max(1.0, np.abs(Ht).max()):
            raise SymmetryBrokenAtHalfFluxError(f"time reversal broken at {tag} (dev {dev:.2e})")
    eig = diagonalize(half)
    w, v = eig.eigenvalues, eig.eigenvectors
    inside = np.where((w > gap[0] + 1e-12) & (w < gap[1] - 1e-12))[0]
    out = []
    used = set()
    for i in inside:
        if i in used:
            continue
        cluster = [j for j in inside if abs(w[j] - w[i]) < 1e-8]
        used.update(cluster)
        vecs = v[:, cluster]
        partner_overlaps = []
        for c in range(len(cluster)):
            partner = S @ vecs[:, c].conj()
            partner_overlaps.append(abs(np.vdot(vecs[:, c], partner)))
        out.append({
            "energy": float(w[i]),
            "multiplicity": len(cluster),
            "kramers_partner_overlap": float(max(partner_overlaps)),
            "degenerate": len(cluster) % 2 == 0 and max(partner_overlaps) < tol,
        })
    return out


# ---------------------------------------------------------------------------
# particle-hole: Majorana form, parity flows, half-flux kernels
# ---------------------------------------------------------------------------

def majorana_form(H: np.ndarray, num_sites: int) -> np.ndarray:
    """Real skew-symmetric T with C* H C = i T, per-site Cayley rotation."""
    C = np.kron(np.eye(num_sites), _CAYLEY)
    M = C.conj().T @ H @ C
    if np.abs(M.real).max() > 1e-9 * max(1.0, np.abs(M).max()):
        raise SymmetryBrokenAtHalfFluxError("Majorana form is not purely imaginary")
    T = M.imag
    return 0.5 * (T - T.T)


def z2_spectral_flow(path: FluxPath, sym=None, kernel_tol: float = 1e-8) -> dict:
    """Parity of the Pfaffian sign change along a particle-hole symmetric path.

    Every sample is rotated to its real skew form; the path is cut at kernel
    touchings and the Pfaffian sign tracked on the gapped stretches.  The
    result compares the first and last gapped segments; endpoints touching
    zero are an error.
    """
    num_sites = path.base.lattice.num_sites
    sym = sym if sym is not None else path.base.model.symmetry
    if sym.s_ph is None:
        raise SymmetryBrokenAtHalfFluxError("path samples must declare a particle-hole operator")
    if path.ts[0] != 0.0 or path.ts[-1] != 1.0:
        raise KernelAtEndpointError("parity flow needs the full cycle t in [0, 1]")
    S = np.kron(np.eye(num_sites), sym.s_ph)
    signs = []
    touches = []
    logabs_floor = np.log(1e-300)
    for t in path.ts:
        H = path.sample_at(t).matrix
        dev = np.abs(S.conj().T @ H.conj() @ S + H).max()
        if dev > 1e-9 * max(1.0, np.abs(H).max()):
            raise SymmetryBrokenAtHalfFluxError(f"particle-hole broken at t={t} (dev {dev:.2e})")
        T = majorana_form(H, num_sites)
        scale = np.abs(T).max()
        smin = np.abs(np.linalg.eigvalsh(1j * T)).min()
        if smin < kernel_tol * max(scale, 1.0):
            touches.append(t)
            signs.append((t, 0.0))
            continue
        sign, logabs = _pfaffian_sign_logabs(T / scale)
        if logabs < logabs_floor:
            raise PfaffianUnderflowError("Pfaffian underflow after rescaling")
        signs.append((t, sign))
    gapped = [(t, s) for t, s in signs if s != 0.0]
    if not gapped or gapped[0][0] != path.ts[0] or gapped[-1][0] != path.ts[-1]:
        raise KernelAtEndpointError("flux-path endpoint touches zero")
    flow = 1 if gapped[0][1] != gapped[-1][1] else 0
    changes = [0.5 * (gapped[i][0] + gapped[i + 1][0]) for i in range(len(gapped) - 1)
               if gapped[i][1] != gapped[i + 1][1]]
    return {"sf2": flow, "signs": signs, "kernel_touches": touches,
            "sign_changes": changes}


def _near_zero_cluster(abs_vals: np.ndarray, margin: float, scale_cap: float) -> int:
    """Size of the near-zero cluster: the deepest margin-separated leading block."""
    count = 0
    for k in range(len(abs_vals) - 1):
        if abs_vals[k] > scale_cap:
            break
        if abs_vals[k + 1] / max(abs_vals[k], 1e-300) >= margin:
            count = k + 1
    return count


def halfflux_kernel_parity(model: ModelDefinition, realization_seed: int = 0,
                           plaquette=None, margin: float = 1e2,
                           scale_cap: float = 1e-2) -> dict:
    """Half the near-kernel dimension mod 2 at half flux, defect-localized.

    Open-chain realization: the model is restricted to open boundaries, flux
    pi is threaded through the central strip cell, and near-zero modes are
    counted only when localized at the cell; a topological open chain also
    carries end modes, which the window excludes.
    """
    open_model = model.with_boundary(0, OPEN)
    sample = build_hamiltonian(open_model, realization_seed)
    if plaquette is None:
        plaquette = (model.lattice.linear_sizes[0] // 2,)
    half = insert_flux(sample, 0.5, plaquette)
    sym = model.symmetry
    if sym.s_ph is None:
        raise SymmetryBrokenAtHalfFluxError("model must declare a particle-hole operator")
    S = np.kron(np.eye(model.lattice.num_sites), sym.s_ph)
    dev = np.abs(S.conj().T @ half.matrix.conj() @ S + half.matrix).max()
    if dev > 1e-10 * max(1.0, np.abs(half.matrix).max()):
        raise SymmetryBrokenAtHalfFluxError(f"particle-hole broken at half flux (dev {dev:.2e})")
    w, v = np.linalg.eigh(half.matrix)
    order = np.argsort(np.abs(w))
    aw = np.abs(w)[order]
    count = _near_zero_cluster(aw, margin, scale_cap * np.abs(w).max())
    if count and aw[count] / max(aw[count - 1], 1e-300) < margin:
        raise MarginTooSmallError("near-zero cluster not separated")
    window = _defect_window(half, plaquette)
    loc = localized_mode_count(v[:, order[:count]], window)
    if loc % 2:
        raise MarginTooSmallError("odd defect-localized zero count; window unreliable")
    parity = (loc // 2) % 2
    return {"parity": int(parity), "near_zero_total": int(count),
            "near_zero_localized": int(loc),
            "smallest": aw[:max(count + 2, 4)].tolist()}


def majorana_zero_mode_parity(model: ModelDefinition, realization_seed: int = 0,
                              plaquette=None, margin: float = 1e2,
                              scale_cap: float = 5e-2) -> dict:
    """Kernel parity at half flux against the bulk pairing parity, d = 2.

    The sample is opened on both axes with the flux at the center; the
    defect binds one zero mode per unit of the bulk pairing, its partner
    hybridizing into the boundary modes, so counting is windowed at the
    defect.  Returns the parity together with Ch mod 2 of the periodic
    companion for comparison.
    """
    from .invariants import chern_projection
    from .spectral import fermi_projection

    if model.lattice.dimension != 2:
        raise SymmetryBrokenAtHalfFluxError("needs a two-dimensional sample")
    open_model = model.with_boundary(0, OPEN).with_boundary(1, OPEN)
    sample = build_hamiltonian(open_model, realization_seed)
    n1, n2 = model.lattice.linear_sizes
    if plaquette is None:
        plaquette = (n1 // 2, n2 // 2)
    half = insert_flux(sample, 0.5, plaquette)
    sym = model.symmetry
    if sym.s_ph is None:
        raise SymmetryBrokenAtHalfFluxError("model must declare a particle-hole operator")
    S = np.kron(np.eye(model.lattice.num_sites), sym.s_ph)
    dev = np.abs(S.conj().T @ half.matrix.conj() @ S + half.matrix).max()
    if dev > 1e-10 * max(1.0, np.abs(half.matrix).max()):
        raise SymmetryBrokenAtHalfFluxError(f"particle-hole broken at half flux (dev {dev:.2e})")
    w, v = np.linalg.eigh(half.matrix)
    order = np.argsort(np.abs(w))
    aw = np.abs(w)[order]
    count = _near_zero_cluster(aw, margin, scale_cap)
    window = _defect_window(half, plaquette)
    loc = localized_mode_count(v[:, order[:count]], window)
    parity = loc % 2
    torus = model
    for axis in range(2):
        torus = torus.with_boundary(axis, PERIODIC)
    bulk = build_hamiltonian(torus, realization_seed)
    P = fermi_projection(diagonalize(bulk), 0.0)
    ch = chern_projection(P, (1, 2))
    return {"parity": int(parity), "chern_mod2": int(ch.rounded % 2),
            "chern": ch.value, "near_zero_total": int(count),
            "near_zero_localized": int(loc), "smallest": aw[:max(count + 2, 4)].tolist()}
