"""Truncated Fock-space simulator.

Brute-force ground truth for photon-number statistics, overlaps and
fidelities of small circuits.  Unitary elements are exponentials of the
truncated ladder-operator generators, so they are exactly unitary on the
truncated space; loss is an exact Kraus sum and thermal admixture is a
pure-loss/amplifier composition, both of which stay inside the truncated
space up to genuine tail mass.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as la

from .decompositions import bloch_messiah, unitary_from_orthosymplectic, williamson
from .gaussian import (
    BeamSplitter,
    Displace,
    Element,
    GaussianCircuit,
    GaussianState,
    Loss,
    Squeeze,
    ThermalMix,
    TwoModeSqueeze,
)
from .tables import FCTable

__all__ = [
    "TruncationError",
    "FockDensity",
    "element_matrix",
    "replay_fock",
    "photon_distribution",
    "fidelity_fock",
    "attach_detector_noise",
    "gaussian_to_fock",
    "mean_photon_fock",
]


class TruncationError(RuntimeError):
    """Raised when a truncated computation has not converged."""


# ---------------------------------------------------------------------------
# operator construction
# ---------------------------------------------------------------------------


def _ladder(cutoff: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1.0, cutoff)), k=1)


def _expm_skew(gen: np.ndarray) -> np.ndarray:
    """Exponential of an anti-Hermitian matrix via diagonalization."""
    herm = -1j * gen
    w, v = np.linalg.eigh(herm)
    return (v * np.exp(1j * w)) @ v.conj().T


def _pair_index(m1: int, m2: int, cutoff: int) -> int:
    return m1 * cutoff + m2


@lru_cache(maxsize=128)
def _squeeze_matrix(r: float, phase: float, cutoff: int) -> np.ndarray:
    a = _ladder(cutoff)
    z = r * np.exp(1j * phase)
    gen = 0.5 * (np.conj(z) * (a @ a) - z * (a.T @ a.T))
    out = _expm_skew(gen)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=128)
def _displace_matrix(alpha: complex, cutoff: int) -> np.ndarray:
    a = _ladder(cutoff)
    gen = alpha * a.T - np.conj(alpha) * a
    out = _expm_skew(gen)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=128)
def _bs_matrix(theta: float, phase: float, cutoff: int) -> np.ndarray:
    """Beam splitter on a mode pair; block diagonal in total photon number.

    Generator theta * (e^{i phase} a1+ a2 - e^{-i phase} a1 a2+); within a
    block of fixed total it is tridiagonal in the first occupation.
    """
    dim = cutoff * cutoff
    out = np.zeros((dim, dim), dtype=complex)
    ph = np.exp(1j * phase)
    for total in range(2 * cutoff - 1):
        lo = max(0, total - cutoff + 1)
        hi = min(total, cutoff - 1)
        m1s = np.arange(lo, hi)
        raising = theta * ph * np.sqrt((m1s + 1.0) * (total - m1s))
        gen = np.diag(raising, -1) - np.diag(raising.conj(), 1)
        block = _expm_skew(gen)
        idx = [_pair_index(m, total - m, cutoff) for m in range(lo, hi + 1)]
        out[np.ix_(idx, idx)] = block
    out.setflags(write=False)
    return out


@lru_cache(maxsize=128)
def _tms_matrix(r: float, cutoff: int) -> np.ndarray:
    """Two-mode squeezer exp(r (a1+ a2+ - a1 a2)); block diagonal in the
    photon-number difference, tridiagonal within each block."""
    dim = cutoff * cutoff
    out = np.zeros((dim, dim), dtype=complex)
    for diff in range(-(cutoff - 1), cutoff):
        lo = max(0, diff)
        hi = min(cutoff - 1, cutoff - 1 + diff)
        m1s = np.arange(lo, hi)
        raising = r * np.sqrt((m1s + 1.0) * (m1s - diff + 1.0))
        gen = np.diag(raising, -1) - np.diag(raising, 1)
        block = _expm_skew(gen)
        idx = [_pair_index(m, m - diff, cutoff) for m in range(lo, hi + 1)]
        out[np.ix_(idx, idx)] = block
    out.setflags(write=False)
    return out


def _passive_pair_matrix(w: np.ndarray, cutoff: int) -> np.ndarray:
    """Fock unitary of a two-mode passive mixing a -> W a."""
    gen_small = la.logm(np.asarray(w, dtype=complex))
    dim = cutoff * cutoff
    out = np.zeros((dim, dim), dtype=complex)
    for total in range(2 * cutoff - 1):
        lo = max(0, total - cutoff + 1)
        hi = min(total, cutoff - 1)
        states = [(m, total - m) for m in range(lo, hi + 1)]
        size = len(states)
        gen = np.zeros((size, size), dtype=complex)
        for row, occ in enumerate(states):
            for j, k in itertools.product(range(2), repeat=2):
                c = gen_small[j, k]
                if abs(c) < 1e-16:
                    continue
                if j == k:
                    gen[row, row] += c * occ[j]
                    continue
                if occ[k] >= 1:
                    new = list(occ)
                    new[k] -= 1
                    new[j] += 1
                    if new[j] <= cutoff - 1:
                        col = states.index(tuple(new))
                        gen[col, row] += c * math.sqrt(occ[k] * (occ[j] + 1))
        block = _expm_skew(gen)
        idx = [_pair_index(m1, m2, cutoff) for m1, m2 in states]
        out[np.ix_(idx, idx)] = block
    return out


def element_matrix(elem: Element, cutoff: int) -> np.ndarray:
    """Truncated unitary of a circuit element on its own mode(s).

    Single-mode elements give a ``cutoff x cutoff`` matrix; two-mode
    elements act on the pair space ``|m_first, m_second>`` flattened
    row-major.  Loss and thermal admixture are channels, not unitaries,
    and are rejected.
    """
    if cutoff < 2:
        raise ValueError("cutoff must be at least 2")
    if isinstance(elem, Squeeze):
        return _squeeze_matrix(float(elem.r), float(elem.phase), cutoff)
    if isinstance(elem, Displace):
        return _displace_matrix(complex(elem.alpha), cutoff)
    if isinstance(elem, BeamSplitter):
        return _bs_matrix(float(elem.theta), float(elem.phase), cutoff)
    if isinstance(elem, TwoModeSqueeze):
        return _tms_matrix(float(elem.r), cutoff)
    raise TypeError(f"{type(elem).__name__} has no unitary matrix")


def _loss_kraus(transmission: float, cutoff: int) -> list[np.ndarray]:
    """K_k[n-k, n] = sqrt(C(n,k) eta^(n-k) (1-eta)^k)."""
    eta = transmission
    ops = []
    for k in range(cutoff):
        mat = np.zeros((cutoff, cutoff))
        for n in range(k, cutoff):
            mat[n - k, n] = math.sqrt(
                math.comb(n, k) * eta ** (n - k) * (1.0 - eta) ** k
            )
        if np.any(mat):
            ops.append(mat)
    return ops


def _superop(kraus: list[np.ndarray]) -> np.ndarray:
    """Single-mode channel as one matrix on the doubled (bra, ket) axis."""
    return sum(np.kron(k, k.conj()) for k in kraus).astype(complex)


@lru_cache(maxsize=64)
def _loss_superop(transmission: float, cutoff: int) -> np.ndarray:
    out = _superop(_loss_kraus(transmission, cutoff))
    out.setflags(write=False)
    return out


@lru_cache(maxsize=64)
def _thermal_mix_superop(reflectivity: float, mean_photons: float, cutoff: int) -> np.ndarray:
    # V -> (1-d)V + d(nbar+1/2)I  ==  amplifier(1 + d*nbar) o loss
    gain = 1.0 + reflectivity * mean_photons
    eta = (1.0 - reflectivity) / gain
    op = np.eye(cutoff * cutoff)
    if eta < 1.0:
        op = _loss_superop(eta, cutoff) @ op
    if gain > 1.0:
        op = _superop(_amplifier_kraus(gain, cutoff)) @ op
    op = np.ascontiguousarray(op, dtype=complex)
    op.setflags(write=False)
    return op


def _amplifier_kraus(gain: float, cutoff: int, weight_tol: float = 1e-16) -> list[np.ndarray]:
    """Quantum-limited amplifier of gain G = cosh(s)^2 as a Kraus family."""
    s = math.acosh(math.sqrt(gain))
    th, ch = math.tanh(s), math.cosh(s)
    ops = []
    for k in range(cutoff):
        if th**(2 * k) < weight_tol and k > 0:
            break
        mat = np.zeros((cutoff, cutoff))
        for n in range(cutoff - k):
            mat[n + k, n] = math.sqrt(math.comb(n + k, k)) * th**k / ch ** (n + 1)
        ops.append(mat)
    return ops


# ---------------------------------------------------------------------------
# density representation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FockDensity:
    """Density matrix of ``num_modes`` modes truncated at ``cutoff``.

    ``tail_mass = 1 - trace`` is the probability that has left the
    truncated space (zero for purely unitary circuits).
    """

    num_modes: int
    cutoff: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        dim = self.cutoff**self.num_modes
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.shape != (dim, dim):
            raise ValueError(f"matrix shape {mat.shape} does not match {dim}")
        if np.max(np.abs(mat - mat.conj().T)) > 1e-10:
            raise ValueError("density matrix is not Hermitian")
        mat = 0.5 * (mat + mat.conj().T)
        tr = float(mat.trace().real)
        if not -1e-10 < tr < 1.0 + 1e-9:
            raise ValueError(f"trace {tr} is not a probability")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @property
    def trace(self) -> float:
        return float(self.matrix.trace().real)

    @property
    def tail_mass(self) -> float:
        return max(0.0, 1.0 - self.trace)

    def occupations(self) -> np.ndarray:
        """Diagonal probabilities reshaped to one axis per mode."""
        diag = np.clip(self.matrix.diagonal().real, 0.0, None)
        return diag.reshape((self.cutoff,) * self.num_modes)

    def boundary_mass(self, band: int = 2) -> float:
        """Probability of any mode occupying the top ``band`` levels,
        plus the trace deficit; a convergence diagnostic."""
        occ = self.occupations()
        interior = occ[(slice(0, self.cutoff - band),) * self.num_modes]
        return float(1.0 - interior.sum())

    def converged(self, tail_tol: float = 1e-6, boundary_tol: float = 1e-3) -> bool:
        return self.tail_mass <= tail_tol and self.boundary_mass() <= boundary_tol


# ---------------------------------------------------------------------------
# evolution
# ---------------------------------------------------------------------------


def _apply_single(tensor: np.ndarray, op: np.ndarray, axis: int) -> np.ndarray:
    moved = np.tensordot(op, tensor, axes=([1], [axis]))
    return np.moveaxis(moved, 0, axis)


def _apply_pair(tensor: np.ndarray, op: np.ndarray, ax1: int, ax2: int, cutoff: int) -> np.ndarray:
    nd = tensor.ndim
    rest = [a for a in range(nd) if a not in (ax1, ax2)]
    moved = np.ascontiguousarray(np.transpose(tensor, (ax1, ax2) + tuple(rest)))
    flat = op @ moved.reshape(cutoff * cutoff, -1)
    moved = flat.reshape((cutoff, cutoff) + tuple(tensor.shape[a] for a in rest))
    return np.transpose(moved, np.argsort((ax1, ax2) + tuple(rest)))


class _FockWorkspace:
    """Evolving state; pure vector until the first channel element."""

    def __init__(self, num_modes: int, cutoff: int):
        self.num_modes = num_modes
        self.cutoff = cutoff
        vec = np.zeros((cutoff,) * num_modes, dtype=complex)
        vec[(0,) * num_modes] = 1.0
        self.vec: np.ndarray | None = vec
        self.rho: np.ndarray | None = None

    def _densify(self) -> None:
        if self.vec is not None:
            flat = self.vec.reshape(-1)
            self.rho = np.outer(flat, flat.conj()).reshape(
                (self.cutoff,) * (2 * self.num_modes)
            )
            self.vec = None

    def apply_unitary(self, op: np.ndarray, modes: tuple[int, ...]) -> None:
        n, cut = self.num_modes, self.cutoff
        if self.vec is not None:
            if len(modes) == 1:
                self.vec = _apply_single(self.vec, op, modes[0])
            else:
                self.vec = _apply_pair(self.vec, op, modes[0], modes[1], cut)
            return
        assert self.rho is not None
        if len(modes) == 1:
            self.rho = _apply_single(self.rho, op, modes[0])
            self.rho = _apply_single(self.rho, op.conj(), n + modes[0])
        else:
            self.rho = _apply_pair(self.rho, op, modes[0], modes[1], cut)
            self.rho = _apply_pair(self.rho, op.conj(), n + modes[0], n + modes[1], cut)

    def apply_channel(self, superop: np.ndarray, mode: int) -> None:
        """Apply a single-mode channel given on the doubled (bra, ket) axis."""
        self._densify()
        assert self.rho is not None
        n, cut = self.num_modes, self.cutoff
        axes = (mode, n + mode)
        rest = [a for a in range(2 * n) if a not in axes]
        moved = np.ascontiguousarray(np.transpose(self.rho, axes + tuple(rest)))
        flat = superop @ moved.reshape(cut * cut, -1)
        moved = flat.reshape((cut, cut) + tuple(self.rho.shape[a] for a in rest))
        self.rho = np.transpose(moved, np.argsort(axes + tuple(rest)))

    def density(self) -> np.ndarray:
        self._densify()
        assert self.rho is not None
        dim = self.cutoff**self.num_modes
        return self.rho.reshape(dim, dim)


def _apply_element(ws: _FockWorkspace, elem: Element) -> None:
    cut = ws.cutoff
    if isinstance(elem, (Squeeze, Displace)):
        ws.apply_unitary(element_matrix(elem, cut), (elem.mode,))
    elif isinstance(elem, (BeamSplitter, TwoModeSqueeze)):
        ws.apply_unitary(element_matrix(elem, cut), (elem.mode1, elem.mode2))
    elif isinstance(elem, Loss):
        if elem.transmission < 1.0:
            ws.apply_channel(_loss_superop(float(elem.transmission), cut), elem.mode)
    elif isinstance(elem, ThermalMix):
        if elem.reflectivity > 0.0:
            ws.apply_channel(
                _thermal_mix_superop(
                    float(elem.reflectivity), float(elem.mean_photons), cut
                ),
                elem.mode,
            )
    else:  # pragma: no cover
        raise TypeError(f"unknown element {elem!r}")


def replay_fock(
    circuit: GaussianCircuit,
    cutoff: int,
    *,
    strict: bool = True,
    tail_tol: float = 1e-6,
    boundary_tol: float = 1e-3,
) -> FockDensity:
    """Replay a circuit on the truncated Fock space, starting from vacuum.

    With ``strict=True`` a :class:`TruncationError` is raised when the
    result fails the tail/boundary convergence checks.
    """
    ws = _FockWorkspace(circuit.num_modes, cutoff)
    for elem in circuit.elements:
        _apply_element(ws, elem)
    rho = FockDensity(circuit.num_modes, cutoff, ws.density())
    if strict and not rho.converged(tail_tol, boundary_tol):
        raise TruncationError(
            f"cutoff {cutoff} too small: tail_mass={rho.tail_mass:.3e}, "
            f"boundary_mass={rho.boundary_mass():.3e}"
        )
    return rho


# ---------------------------------------------------------------------------
# measurements and comparisons
# ---------------------------------------------------------------------------


def photon_distribution(rho: FockDensity, *, floor: float = 1e-16) -> FCTable:
    """Diagonal probabilities grouped by occupation tuple."""
    occ = rho.occupations()
    entries: dict[tuple[int, ...], float] = {}
    for idx in np.argwhere(occ > floor):
        entries[tuple(int(i) for i in idx)] = float(occ[tuple(idx)])
    tail = max(0.0, 1.0 - sum(entries.values()))
    return FCTable(entries, rho.cutoff, tail)


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(mat)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity_fock(rho1: FockDensity, rho2: FockDensity) -> float:
    """Uhlmann fidelity of two truncated densities (nuclear norm of
    ``sqrt(rho1) sqrt(rho2)``)."""
    if rho1.matrix.shape != rho2.matrix.shape:
        raise ValueError("density matrices must share a shape")
    for rho in (rho1, rho2):
        if rho.tail_mass > 1e-3:
            raise TruncationError(f"tail mass {rho.tail_mass:.2e} too large for fidelity")
    prod = _psd_sqrt(rho1.matrix) @ _psd_sqrt(rho2.matrix)
    sing = np.linalg.svd(prod, compute_uv=False)
    return float(min(1.0, sing.sum()))


def mean_photon_fock(rho: FockDensity, mode: int) -> float:
    occ = rho.occupations()
    axes = tuple(a for a in range(rho.num_modes) if a != mode)
    marg = occ.sum(axis=axes) if axes else occ
    return float(np.arange(rho.cutoff) @ marg)


def _dark_kernel(dark_p1: float, floor: float = 1e-16) -> np.ndarray:
    """Registered dark counts: geometric with P(>=1 count) = dark_p1."""
    if dark_p1 <= 0.0:
        return np.array([1.0])
    probs = [1.0 - dark_p1]
    k = 1
    while (1.0 - dark_p1) * dark_p1**k > floor:
        probs.append((1.0 - dark_p1) * dark_p1**k)
        k += 1
    return np.array(probs)


def attach_detector_noise(rho: FockDensity, det) -> FCTable:
    """Observed distribution after per-detector dark counts and pump leak.

    ``det`` needs ``dark_p1`` (probability of registering at least one
    noise photon) and ``pump_p2`` (probability of a spurious two-photon
    event) attributes.  Noise is convolved classically and independently
    per detector; outcomes may exceed the signal cutoff.
    """
    signal = photon_distribution(rho)
    dark = _dark_kernel(float(det.dark_p1))
    pump = float(det.pump_p2)
    kernel = np.zeros(len(dark) + 2)
    kernel[: len(dark)] += dark * (1.0 - pump)
    if pump > 0.0:
        kernel[2:] += dark * pump
    if kernel[0] >= 1.0:
        return signal
    modes, cut = rho.num_modes, rho.cutoff
    occ = rho.occupations()
    width = occ.shape[0] + kernel.size - 1
    grid = np.zeros((width,) * modes)
    shifts = [s for s in np.ndindex(*(kernel.size,) * modes)]
    for shift in shifts:
        weight = math.prod(kernel[s] for s in shift)
        if weight < 1e-18:
            continue
        window = tuple(slice(s, s + occ.shape[0]) for s in shift)
        grid[window] += weight * occ
    entries = {
        tuple(int(i) for i in idx): float(grid[tuple(idx)])
        for idx in np.argwhere(grid > 1e-16)
    }
    tail = max(0.0, 1.0 - sum(entries.values()))
    return FCTable(entries, cut, tail)


# ---------------------------------------------------------------------------
# Gaussian -> Fock conversion
# ---------------------------------------------------------------------------


def _thermal_diag(nbar: float, cutoff: int) -> np.ndarray:
    if nbar <= 0.0:
        out = np.zeros(cutoff)
        out[0] = 1.0
        return out
    ratio = nbar / (1.0 + nbar)
    return ratio ** np.arange(cutoff) / (1.0 + nbar)


def _apply_passive(ws: _FockWorkspace, w: np.ndarray) -> None:
    num_modes = w.shape[0]
    if num_modes == 1:
        phase = np.angle(w[0, 0])
        op = np.diag(np.exp(1j * phase * np.arange(ws.cutoff)))
        ws.apply_unitary(op, (0,))
        return
    if num_modes == 2:
        ws.apply_unitary(_passive_pair_matrix(w, ws.cutoff), (0, 1))
        return
    # general case: QR-style reduction into two-mode mixes
    work = w.copy()
    ops: list[tuple[np.ndarray, tuple[int, int]]] = []
    for col in range(num_modes):
        for row in range(col + 1, num_modes):
            a, b = work[col, col], work[row, col]
            norm = math.hypot(abs(a), abs(b))
            if abs(b) < 1e-14:
                continue
            g = np.array([[np.conj(a), np.conj(b)], [-b, a]]) / norm
            full = np.eye(num_modes, dtype=complex)
            full[np.ix_([col, row], [col, row])] = g
            work = full @ work
            ops.append((np.linalg.inv(g), (col, row)))
    phases = np.angle(np.diag(work))
    for mode in range(num_modes):
        op = np.diag(np.exp(1j * phases[mode] * np.arange(ws.cutoff)))
        ws.apply_unitary(op, (mode,))
    for g, (i, j) in reversed(ops):
        ws.apply_unitary(_passive_pair_matrix(g, ws.cutoff), (i, j))


def gaussian_to_fock(state: GaussianState, cutoff: int) -> FockDensity:
    """Synthesize the truncated Fock density of a Gaussian state.

    Route: Williamson normal form (thermal core), Bloch-Messiah of the
    symplectic part (passive / squeeze / passive), then displacement.
    """
    sympl, nu = williamson(state.cov)
    o1, rs, o2 = bloch_messiah(sympl)
    nbars = np.clip(nu - 0.5, 0.0, None)
    ws = _FockWorkspace(state.num_modes, cutoff)
    if np.max(nbars) > 1e-12:
        diags = [_thermal_diag(float(nb), cutoff) for nb in nbars]
        joint = diags[0]
        for d in diags[1:]:
            joint = np.outer(joint, d).reshape(-1)
        ws.vec = None
        ws.rho = np.diag(joint.astype(complex)).reshape(
            (cutoff,) * (2 * state.num_modes)
        )
    _apply_passive(ws, unitary_from_orthosymplectic(o2))
    for mode, r in enumerate(rs):
        if abs(r) > 1e-14:
            # Z scales x by exp(+r); Squeeze(r) scales x by exp(-r)
            ws.apply_unitary(element_matrix(Squeeze(mode, -float(r)), cutoff), (mode,))
    _apply_passive(ws, unitary_from_orthosymplectic(o1))
    n = state.num_modes
    for mode in range(n):
        alpha = (state.mean[mode] + 1j * state.mean[mode + n]) / math.sqrt(2.0)
        if abs(alpha) > 1e-14:
            ws.apply_unitary(element_matrix(Displace(mode, complex(alpha)), cutoff), (mode,))
    return FockDensity(state.num_modes, cutoff, ws.density())
