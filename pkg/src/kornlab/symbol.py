"""Frequency-side 9x9 operators for the matrix curl.

Flattening convention (fixed here, used everywhere): a 3x3 matrix P is
identified with the length-9 vector P.reshape(9) in row-major order, so
component 3*r + c is P[r, c].  A SymbolOperator is a complex (9, 9) array
acting on such vectors; its column j is the image of the basis matrix with
a single 1 at (j // 3, j % 3).

The curl of a matrix field acts row-wise, and on the Fourier side a
coefficient P_hat at frequency xi is mapped to -i * (P_hat x xi); the
optional symmetric / trace-free symmetric projections are applied after
the cross product.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .algebra3 import EYE3, anti, dev, dot, mat_norm, sym

__all__ = [
    "ZeroFrequencyError", "TOL_KERNEL",
    "basis_matrices", "curl_symbol", "apply_symbol",
    "KernelBasis", "kernel_basis", "build_multiplier",
    "sharp_ratio", "KernelWitness", "complex_kernel_witness",
]

TOL_KERNEL = 1e-8

_PARTS = ("full", "sym", "devsym")


class ZeroFrequencyError(ValueError):
    """The requested construction needs a nonzero frequency."""


def basis_matrices():
    """The nine 3x3 basis matrices in flattening order."""
    return np.eye(9).reshape(9, 3, 3)


def _project(M, part):
    if part == "full":
        return M
    if part == "sym":
        return sym(M)
    if part == "devsym":
        return dev(sym(M))
    raise ValueError("part must be one of %s" % (_PARTS,))


def curl_symbol(xi, part="full"):
    """Symbol of (a projection of) the row-wise matrix curl at frequency xi.

    Returns the 9x9 complex matrix of P_hat -> -i * proj(P_hat x xi).
    """
    xi = np.asarray(xi)
    A = anti(xi)
    images = _project(-1j * (basis_matrices() @ A), part)
    return images.reshape(9, 9).T.copy()


def apply_symbol(op, P):
    """Apply a SymbolOperator to a 3x3 matrix, returning a 3x3 matrix."""
    P = np.asarray(P)
    return (op @ P.reshape(P.shape[:-2] + (9,))[..., None])[..., 0].reshape(P.shape[:-2] + (3, 3))


@dataclass(frozen=True)
class KernelBasis:
    """Orthonormal basis (Hermitian inner product) of a numerical kernel."""

    vectors: np.ndarray          # shape (dimension, 3, 3)
    dimension: int
    singular_values: np.ndarray  # all nine, descending


def kernel_basis(op, tol=TOL_KERNEL):
    """Numerical kernel of a SymbolOperator via SVD.

    Directions whose singular value is below tol * sigma_max count as
    kernel.  The returned vectors are orthonormal 3x3 matrices.
    """
    op = np.asarray(op, dtype=complex)
    _, s, vh = np.linalg.svd(op)
    cut = tol * (s[0] if s[0] > 0 else 1.0)
    rank = int(np.sum(s > cut))
    vecs = vh[rank:].conj().reshape(-1, 3, 3)
    return KernelBasis(vectors=vecs, dimension=9 - rank, singular_values=s)


def build_multiplier(xi, tol=TOL_KERNEL):
    """Bounded degree-0 multiplier M with M(xi) A(xi) = A_sym(xi).

    A is the trace-free symmetric curl symbol and A_sym the symmetric one.
    M = A_sym @ Q where Q is the SVD pseudo-inverse of A (cut at
    tol * sigma_max), so Q A = id - (kernel projector) and Q vanishes on
    the orthogonal complement of the range of A.  Because the kernels of
    A and A_sym agree at real frequencies, M A = A_sym holds exactly and
    M is homogeneous of degree zero in xi.
    """
    xi = np.asarray(xi)
    if float(np.sqrt(np.sum(np.abs(xi) ** 2))) <= 1e-12:
        raise ZeroFrequencyError("multiplier needs a nonzero frequency")
    a_dev = curl_symbol(xi, "devsym")
    a_sym = curl_symbol(xi, "sym")
    q = np.linalg.pinv(a_dev, rcond=tol)
    return a_sym @ q


def sharp_ratio(xi, tol=TOL_KERNEL):
    """Largest ratio |sym(P x xi)| / |devsym(P x xi)| over admissible P.

    Solved as a generalized Hermitian eigenproblem on the orthogonal
    complement of the (common) kernel of the two projected symbols.
    """
    xi = np.asarray(xi)
    if float(np.sqrt(np.sum(np.abs(xi) ** 2))) <= 1e-12:
        raise ZeroFrequencyError("sharp ratio needs a nonzero frequency")
    c_sym = curl_symbol(xi, "sym")
    c_dev = curl_symbol(xi, "devsym")
    _, s, vh = np.linalg.svd(c_dev)
    keep = s > tol * s[0]
    w = vh[keep].conj().T                      # columns span (ker A)^perp
    num = w.conj().T @ (c_sym.conj().T @ c_sym) @ w
    den = w.conj().T @ (c_dev.conj().T @ c_dev) @ w
    lam = scipy.linalg.eigh(num, den, eigvals_only=True)
    return float(np.sqrt(lam[-1]))


@dataclass(frozen=True)
class KernelWitness:
    """A complex frequency and coefficient killed by devsym-curl but not sym-curl.

    The pair satisfies devsym(p_hat x xi) = 0 while sym(p_hat x xi) = i*id,
    and the bilinear pairing <xi, xi> vanishes, which is why a complex
    frequency can do what no real one can.  Both identities are re-checked
    on construction.
    """

    p_hat: np.ndarray = field(default_factory=lambda: np.array(
        [[0, 0, -1], [0, 0, 1j], [0, -1j, 0]], dtype=complex))
    xi: np.ndarray = field(default_factory=lambda: np.array([1, 1j, 0], dtype=complex))

    def __post_init__(self):
        c = self.p_hat @ anti(self.xi)
        if float(mat_norm(dev(sym(c)))) > 1e-15:
            raise ValueError("witness failed: devsym(p_hat x xi) != 0")
        if float(mat_norm(sym(c) - 1j * EYE3)) > 1e-15:
            raise ValueError("witness failed: sym(p_hat x xi) != i*id")
        if abs(complex(dot(self.xi, self.xi))) > 1e-15:
            raise ValueError("witness failed: <xi, xi> != 0")


def complex_kernel_witness():
    """The stored witness pair (p_hat, xi), verified before it is returned."""
    return KernelWitness()
