"""Hofstadter-ladder waveguide: real-space Hamiltonian and 2x2 Bloch form.

The waveguide is a two-leg ladder (legs "A" and "B") with rung hopping
``t_prime`` and intra-leg hopping ``t`` carrying a Peierls phase
``exp(+i*phi)`` on leg A and ``exp(-i*phi)`` on leg B (Landau gauge), so the
synthetic flux through each plaquette is ``2*phi``.  All energies are
measured in the frame rotating at the common site frequency, which is
dropped entirely.

Site layout is leg-major: leg-A sites occupy flat indices ``[0, N)`` and
leg-B sites ``[N, 2N)``.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ParameterError

LEGS = ("A", "B")


@dataclass(frozen=True)
class LadderParams:
    """Waveguide constants; the single source of model truth.

    Parameters
    ----------
    t : float
        Inter-cell hopping along each leg (> 0).
    t_prime : float
        Rung hopping between the legs (>= 0).
    phi : float
        Peierls phase per intra-leg hop, in (-pi, pi]. Flux per plaquette
        is ``2*phi``.
    n_cells : int
        Number of rungs N (>= 2).
    boundary : str
        ``"periodic"`` or ``"open"``.
    kappa : float
        Uniform per-site photon loss rate (>= 0); enters the single-excitation
        Hamiltonian as a non-Hermitian diagonal ``-1j*kappa/2`` on every site.
    """

    t: float = 2.0
    t_prime: float = 1.0
    phi: float = np.pi / 3
    n_cells: int = 1000
    boundary: str = "open"
    kappa: float = 0.0

    def __post_init__(self):
        if self.n_cells < 2:
            raise ParameterError(f"n_cells must be >= 2, got {self.n_cells}")
        if self.t <= 0:
            raise ParameterError(f"t must be > 0, got {self.t}")
        if self.t_prime < 0:
            raise ParameterError(f"t_prime must be >= 0, got {self.t_prime}")
        if self.kappa < 0:
            raise ParameterError(f"kappa must be >= 0, got {self.kappa}")
        if not (-np.pi < self.phi <= np.pi):
            raise ParameterError(f"phi must lie in (-pi, pi], got {self.phi}")
        if self.boundary not in ("periodic", "open"):
            raise ParameterError(f"boundary must be 'periodic' or 'open', got {self.boundary!r}")

    @property
    def eta(self) -> float:
        """Dimensionless rung-to-leg hopping ratio t'/(2t)."""
        return self.t_prime / (2.0 * self.t)


@dataclass(frozen=True)
class Site:
    """One lattice site: cell index ``x`` on leg ``"A"`` or ``"B"``."""

    x: int
    leg: str

    def __post_init__(self):
        if self.leg not in LEGS:
            raise ParameterError(f"leg must be one of {LEGS}, got {self.leg!r}")
        if self.x < 0:
            raise ParameterError(f"cell index must be >= 0, got {self.x}")


def site_index(site: Site, n_cells: int) -> int:
    """Flat index of a site in the leg-major layout (A block first)."""
    if not 0 <= site.x < n_cells:
        raise ParameterError(f"cell index {site.x} out of range for n_cells={n_cells}")
    return site.x if site.leg == "A" else n_cells + site.x


def index_site(index: int, n_cells: int) -> Site:
    """Inverse of :func:`site_index`."""
    if not 0 <= index < 2 * n_cells:
        raise ParameterError(f"flat index {index} out of range for n_cells={n_cells}")
    return Site(index, "A") if index < n_cells else Site(index - n_cells, "B")


@dataclass(frozen=True)
class LatticeHamiltonian:
    """Sparse single-excitation lattice Hamiltonian.

    ``hermitian_terms`` holds the coherent part as a deterministic,
    duplicate-free, (row, col)-sorted coordinate list; ``loss_terms`` holds
    the diagonal ``-1j*kappa/2`` entries separately.
    """

    params: LadderParams
    dimension: int
    hermitian_terms: tuple[tuple[int, int, complex], ...]
    loss_terms: tuple[tuple[int, int, complex], ...] = field(default=())

    def hermitian_matrix(self) -> sp.csr_matrix:
        return _coo_to_csr(self.hermitian_terms, self.dimension)

    def matrix(self) -> sp.csr_matrix:
        """Coherent part plus the non-Hermitian loss diagonal."""
        return _coo_to_csr(self.hermitian_terms + self.loss_terms, self.dimension)

    def dense(self) -> np.ndarray:
        return self.matrix().toarray()


def _coo_to_csr(terms, dim) -> sp.csr_matrix:
    if not terms:
        return sp.csr_matrix((dim, dim), dtype=complex)
    rows, cols, vals = zip(*((r, c, v) for r, c, v in terms))
    return sp.csr_matrix(
        sp.coo_matrix((np.asarray(vals, complex), (rows, cols)), shape=(dim, dim))
    )


def build_lattice(params: LadderParams) -> LatticeHamiltonian:
    """Construct the ladder Hamiltonian over 2N sites.

    Terms: rungs ``-t' (a_x^† b_x + h.c.)``, leg-A hops
    ``-t e^{+i phi} a_{x+1}^† a_x + h.c.`` and leg-B hops
    ``-t e^{-i phi} b_{x+1}^† b_x + h.c.``; wrap-around terms are present
    iff the boundary is periodic.  With ``kappa > 0`` every site carries a
    ``-1j*kappa/2`` loss diagonal (exact in the single-excitation sector,
    where every quantum jump ends in the inert vacuum).
    """
    n = params.n_cells
    hop_a = -params.t * cmath.exp(1j * params.phi)
    hop_b = -params.t * cmath.exp(-1j * params.phi)

    acc: dict[tuple[int, int], complex] = {}

    def add(row: int, col: int, val: complex):
        key = (row, col)
        acc[key] = acc.get(key, 0.0j) + val

    for x in range(n):
        ia, ib = x, n + x
        add(ia, ib, -params.t_prime)
        add(ib, ia, -params.t_prime)
        xp = x + 1
        if xp == n:
            if params.boundary != "periodic":
                continue
            xp = 0
        add(xp, ia, hop_a)
        add(ia, xp, hop_a.conjugate())
        add(n + xp, ib, hop_b)
        add(ib, n + xp, hop_b.conjugate())

    hermitian = tuple((r, c, v) for (r, c), v in sorted(acc.items()))
    loss = ()
    if params.kappa > 0:
        loss = tuple((i, i, -0.5j * params.kappa) for i in range(2 * n))
    return LatticeHamiltonian(params, 2 * n, hermitian, loss)


def bloch_hamiltonian(params: LadderParams, k: float) -> np.ndarray:
    """2x2 Bloch Hamiltonian ``-2t [g(k) I + f(k) sigma_z + eta sigma_x]``.

    with ``g(k) = cos(phi) cos(k)`` and ``f(k) = sin(phi) sin(k)``.
    Valid for the periodic chain; its eigenvalues are the two bands.
    """
    g = np.cos(params.phi) * np.cos(k)
    f = np.sin(params.phi) * np.sin(k)
    eta = params.eta
    return -2.0 * params.t * np.array([[g + f, eta], [eta, g - f]], dtype=complex)
