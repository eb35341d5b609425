"""Dirac gamma matrices, photon spin matrices and the unitary diagonalizers of
the free momentum-space Hamiltonians.

Conventions
-----------
* Standard (Dirac) representation: ``gamma0 = diag(1, 1, -1, -1)``,
  ``gamma^j = [[0, sigma_j], [-sigma_j, 0]]``.  The chiral representation is
  available for covariance checks.
* ``(gamma, p) = sum_j gamma^j p_j``; ``gamma0 (gamma, p) + m gamma0`` is the
  Hermitian Dirac Hamiltonian with eigenvalues ``+-sqrt(m^2 + rho^2)``.
* Photon spin: ``(s^j)_{kl} = -i eps_{jkl}``, so ``(S, p) v = i p x v``.
* Helicity basis: seed axis = coordinate axis with the smallest ``|p_e|``
  component (ties to the lowest index); ``e1`` is that axis made orthogonal to
  ``p_e``, ``e2 = p_e x e1``.  Rows of ``Q(p)`` are ``u_+^H, u_-^H, p_e^T``
  with ``u_+- = (e1 +- i e2)/sqrt(2)``, giving
  ``Q (S, p) Q^H = diag(rho, -rho, 0)``.

Single-point functions return labelled arrays; the ``*_batch`` variants work
on stacks of momenta of shape ``(n, 3)``.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "DiracMatrix",
    "SpinMatrix",
    "MomentumPoint",
    "REPRESENTATIONS",
    "gamma_matrices",
    "pauli_matrices",
    "spin_matrices",
    "slash",
    "dirac_hamiltonian",
    "fw_diagonalizer_massless",
    "fw_diagonalizer_massive",
    "fw_diagonalizer_batch",
    "helicity_basis",
    "helicity_diagonalizer",
    "helicity_diagonalizer_batch",
    "spin_dot",
    "DegenerateMomentumError",
]

REPRESENTATIONS = ("dirac", "chiral")


class DegenerateMomentumError(ValueError):
    """Raised when a construction needs ``p != 0`` (or ``m > 0``)."""


class _Labelled(np.ndarray):
    _default_label = "composite"

    def __new__(cls, entries, label=None):
        obj = np.asarray(entries, dtype=complex).view(cls)
        obj.label = label or cls._default_label
        return obj

    def __array_finalize__(self, obj):
        self.label = getattr(obj, "label", self._default_label) if obj is not None else self._default_label

    def __array_wrap__(self, out, context=None, return_scalar=False):
        res = super().__array_wrap__(out, context, return_scalar)
        if isinstance(res, _Labelled):
            res.label = "composite"
        return res

    @property
    def entries(self) -> np.ndarray:
        return np.asarray(self)


class DiracMatrix(_Labelled):
    """4x4 complex matrix with a label (gamma0..gamma3, identity, composite)."""


class SpinMatrix(_Labelled):
    """3x3 complex matrix with a label (s1, s2, s3, composite)."""


class MomentumPoint:
    """Momentum vector with its norm ``rho`` and direction ``p_e``."""

    def __init__(self, p):
        p = np.atleast_1d(np.asarray(p, dtype=float))
        if p.ndim != 1 or len(p) not in (1, 3):
            raise ValueError("momentum must have 1 or 3 components")
        if not np.all(np.isfinite(p)):
            raise ValueError("momentum must be finite")
        self.p = p
        self.d = len(p)
        self.rho = float(np.linalg.norm(p))

    @property
    def direction(self) -> np.ndarray:
        if self.rho == 0.0:
            raise DegenerateMomentumError("direction undefined at p = 0")
        return self.p / self.rho

    def __repr__(self):
        return "MomentumPoint(%r)" % (self.p.tolist(),)


def _as_momentum(p) -> np.ndarray:
    if isinstance(p, MomentumPoint):
        p = p.p
    p = np.asarray(p, dtype=float)
    if p.shape != (3,):
        raise ValueError("expected a 3-vector")
    if not np.all(np.isfinite(p)):
        raise ValueError("momentum must be finite")
    return p


_SIGMA = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


def pauli_matrices() -> np.ndarray:
    """The three Pauli matrices, shape (3, 2, 2)."""
    return _SIGMA.copy()


def _gammas(representation: str) -> np.ndarray:
    z = np.zeros((2, 2), dtype=complex)
    one = np.eye(2, dtype=complex)
    if representation == "dirac":
        g0 = np.block([[one, z], [z, -one]])
    elif representation == "chiral":
        g0 = np.block([[z, one], [one, z]])
    else:
        raise ValueError("unknown representation %r; expected one of %s" % (representation, REPRESENTATIONS))
    gs = [np.block([[z, s], [-s, z]]) for s in _SIGMA]
    return np.stack([g0] + gs)


_G = {rep: _gammas(rep) for rep in REPRESENTATIONS}
for _arr in _G.values():
    _arr.setflags(write=False)


def gamma_matrices(representation: str = "dirac") -> list[DiracMatrix]:
    """Return ``[gamma0, gamma1, gamma2, gamma3]``.

    Parameters
    ----------
    representation : {"dirac", "chiral"}
        ``"dirac"`` (default) has diagonal gamma0.
    """
    if representation not in _G:
        raise ValueError("unknown representation %r; expected one of %s" % (representation, REPRESENTATIONS))
    labels = ("gamma0", "gamma1", "gamma2", "gamma3")
    return [DiracMatrix(g, lab) for g, lab in zip(_G[representation], labels)]


def slash(p, representation: str = "dirac") -> np.ndarray:
    """``(gamma, p) = sum_j gamma^j p_j`` for p of shape (3,) or (n, 3)."""
    g = _G[representation]
    p = np.asarray(p, dtype=float)
    return np.tensordot(p, g[1:], axes=([-1], [0]))


def dirac_hamiltonian(p, m: float = 0.0, representation: str = "dirac") -> np.ndarray:
    """``gamma0 (gamma, p) + m gamma0``; accepts (3,) or (n, 3)."""
    g0 = _G[representation][0]
    return g0 @ slash(p, representation) + m * g0


def fw_diagonalizer_batch(p, m: float = 0.0, representation: str = "dirac") -> np.ndarray:
    """Stacked ``T^m(p) = gamma0 ((gamma, p) + (m + E) I) / sqrt(2 E (m + E))``.

    For ``m = 0`` this is ``gamma0 ((gamma, p_e) + I) / sqrt(2)``.
    """
    p = np.atleast_2d(np.asarray(p, dtype=float))
    if m < 0 or not np.isfinite(m):
        raise ValueError("mass must be finite and non-negative")
    rho = np.linalg.norm(p, axis=-1)
    if m == 0 and np.any(rho == 0):
        raise DegenerateMomentumError("T(p) is undefined at p = 0 for m = 0")
    e = np.sqrt(m * m + rho * rho)
    g0 = _G[representation][0]
    eye = np.eye(4)
    num = slash(p, representation) + (m + e)[:, None, None] * eye
    return (g0 @ num) / np.sqrt(2.0 * e * (m + e))[:, None, None]


def fw_diagonalizer_massless(p, representation: str = "dirac") -> DiracMatrix:
    """Unitary Hermitian involution with ``T gamma0 rho T = gamma0 (gamma, p)``.

    Raises
    ------
    DegenerateMomentumError
        For ``p = 0``.
    """
    p = _as_momentum(p)
    return DiracMatrix(fw_diagonalizer_batch(p[None, :], 0.0, representation)[0])


def fw_diagonalizer_massive(p, m: float, representation: str = "dirac") -> DiracMatrix:
    """Unitary Hermitian involution with
    ``T gamma0 sqrt(m^2 + rho^2) T = gamma0 (gamma, p) + m gamma0``.

    At ``p = 0`` it reduces to gamma0 for any m > 0.
    """
    p = _as_momentum(p)
    return DiracMatrix(fw_diagonalizer_batch(p[None, :], m, representation)[0])


_EPS3 = np.zeros((3, 3, 3))
_EPS3[0, 1, 2] = _EPS3[1, 2, 0] = _EPS3[2, 0, 1] = 1.0
_EPS3[0, 2, 1] = _EPS3[2, 1, 0] = _EPS3[1, 0, 2] = -1.0
_S = -1j * _EPS3
_S.setflags(write=False)


def spin_matrices() -> list[SpinMatrix]:
    """Photon spin matrices ``s1, s2, s3`` with ``(s^j)_{kl} = -i eps_{jkl}``."""
    return [SpinMatrix(_S[j], "s%d" % (j + 1)) for j in range(3)]


def spin_dot(p) -> np.ndarray:
    """``(S, p)`` for p of shape (3,) or (n, 3)."""
    return np.tensordot(np.asarray(p, dtype=float), _S, axes=([-1], [0]))


def helicity_basis(p):
    """Return ``(e1, e2, p_e)`` for p of shape (n, 3) with the seed-axis rule."""
    p = np.atleast_2d(np.asarray(p, dtype=float))
    rho = np.linalg.norm(p, axis=-1)
    if np.any(rho == 0):
        raise DegenerateMomentumError("helicity basis undefined at p = 0")
    pe = p / rho[:, None]
    k = np.argmin(np.abs(pe), axis=-1)  # argmin picks the lowest index on ties
    seed = np.zeros_like(pe)
    seed[np.arange(len(pe)), k] = 1.0
    e1 = seed - np.sum(seed * pe, axis=-1)[:, None] * pe
    e1 /= np.linalg.norm(e1, axis=-1)[:, None]
    e2 = np.cross(pe, e1)
    return e1, e2, pe


def helicity_diagonalizer_batch(p) -> np.ndarray:
    """Stacked ``Q(p)`` with ``Q (S, p) Q^H = diag(rho, -rho, 0)``."""
    e1, e2, pe = helicity_basis(p)
    up = (e1 + 1j * e2) / np.sqrt(2.0)
    um = (e1 - 1j * e2) / np.sqrt(2.0)
    return np.stack([up.conj(), um.conj(), pe.astype(complex)], axis=1)


def helicity_diagonalizer(p) -> SpinMatrix:
    """Unitary ``Q(p)`` diagonalizing ``(S, p)`` with eigenvalue order (rho, -rho, 0).

    Raises
    ------
    DegenerateMomentumError
        For ``p = 0``.
    """
    p = _as_momentum(p)
    return SpinMatrix(helicity_diagonalizer_batch(p[None, :])[0])
