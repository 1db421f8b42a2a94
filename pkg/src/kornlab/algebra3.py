"""Small dense algebra for 3-vectors and 3x3 matrices.

Conventions used throughout the package:

* vectors have shape (..., 3), matrices shape (..., 3, 3); every operation
  broadcasts over leading axes so sample batches stay vectorized,
* entries may be real or complex.  The only pairing is the bilinear
  (non-conjugated) one, ``dot``/``frob``; magnitudes are measured separately
  with the Hermitian norms ``vec_norm``/``mat_norm``,
* ``cross(P, b, "right")`` is the row-wise matrix cross product P @ anti(b),
  ``cross(P, b, "left")`` the column-wise anti(b) @ P, and
  ``anti(a) @ b == np.cross(a, b)``.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "NotSkewError", "NotTracelessSymError", "ZeroDirectionError", "NotUnitError",
    "TOL_SKEW", "TOL_ZERO", "TOL_UNIT",
    "anti", "axl", "cross", "sym", "skew", "dev", "tr", "tp",
    "dot", "frob", "vec_norm", "mat_norm",
    "OrthSplit", "orth_decompose", "recover_axial", "tangential_projector",
    "random_rotation",
]

TOL_SKEW = 1e-9
TOL_ZERO = 1e-9
TOL_UNIT = 1e-9

EYE3 = np.eye(3)


class NotSkewError(ValueError):
    """Argument of axl is not skew-symmetric within tolerance."""


class NotTracelessSymError(ValueError):
    """Axial recovery needs a traceless symmetric matrix."""


class ZeroDirectionError(ValueError):
    """A direction vector is (numerically) zero."""


class NotUnitError(ValueError):
    """A direction that must be normalized is not."""


def anti(a):
    """Skew matrix of a, so that anti(a) @ b is the cross product a x b."""
    a = np.asarray(a)
    out = np.zeros(a.shape[:-1] + (3, 3), dtype=a.dtype if a.dtype.kind == "c" else float)
    a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2]
    out[..., 0, 1] = -a3
    out[..., 0, 2] = a2
    out[..., 1, 0] = a3
    out[..., 1, 2] = -a1
    out[..., 2, 0] = -a2
    out[..., 2, 1] = a1
    return out


def axl(A, tol=TOL_SKEW):
    """Axial vector of a skew matrix; inverse of anti.

    Raises NotSkewError when the symmetric part of A exceeds tol relative
    to the size of A.
    """
    A = np.asarray(A)
    defect = mat_norm(A + tp(A)) / (2.0 * np.maximum(mat_norm(A), 1e-300))
    if np.any(defect > tol):
        raise NotSkewError("matrix is not skew-symmetric (relative defect %.3e)"
                           % float(np.max(defect)))
    return np.stack([A[..., 2, 1], A[..., 0, 2], A[..., 1, 0]], axis=-1)


def cross(P, b, side="right"):
    """Matrix cross product with a vector.

    side="right": P x b, acting on rows (P @ anti(b)).
    side="left":  b x P, acting on columns (anti(b) @ P).
    """
    P = np.asarray(P)
    B = anti(b)
    if side == "right":
        return P @ B
    if side == "left":
        return B @ P
    raise ValueError("side must be 'right' or 'left'")


def sym(X):
    X = np.asarray(X)
    return 0.5 * (X + tp(X))


def skew(X):
    X = np.asarray(X)
    return 0.5 * (X - tp(X))


def dev(X):
    """Trace-free part X - tr(X)/3 * id."""
    X = np.asarray(X)
    return X - tr(X)[..., None, None] / 3.0 * EYE3


def tr(X):
    return np.trace(np.asarray(X), axis1=-2, axis2=-1)


def tp(X):
    return np.asarray(X).swapaxes(-1, -2)


def dot(a, b):
    """Bilinear vector pairing sum_i a_i b_i (no conjugation)."""
    return np.sum(np.asarray(a) * np.asarray(b), axis=-1)


def frob(P, Q):
    """Bilinear matrix pairing tr(P^T Q) = sum_ij P_ij Q_ij (no conjugation)."""
    return np.sum(np.asarray(P) * np.asarray(Q), axis=(-2, -1))


def vec_norm(a):
    """Hermitian length of a vector."""
    a = np.asarray(a)
    return np.sqrt(np.sum(np.abs(a) ** 2, axis=-1))


def mat_norm(X):
    """Hermitian Frobenius norm of a matrix."""
    X = np.asarray(X)
    return np.sqrt(np.sum(np.abs(X) ** 2, axis=(-2, -1)))


@dataclass(frozen=True)
class OrthSplit:
    """Orthogonal split X = devsym + skew + sphere * id.

    The three parts are mutually orthogonal for the bilinear pairing, so the
    squared Hermitian norms add up (the spherical part contributes
    3 * |sphere|^2).
    """

    devsym: np.ndarray
    skew: np.ndarray
    sphere: np.ndarray | complex

    def reassemble(self):
        sphere = np.asarray(self.sphere)
        return self.devsym + self.skew + sphere[..., None, None] * EYE3


def orth_decompose(X):
    """Split X into trace-free symmetric, skew and spherical parts."""
    X = np.asarray(X)
    s = sym(X)
    sphere = tr(X) / 3.0
    return OrthSplit(devsym=s - sphere[..., None, None] * EYE3, skew=skew(X), sphere=sphere)


def recover_axial(M, b, tol=TOL_SKEW):
    """Recover a from M = devsym(anti(a) x b) for a known real direction b.

    The map a -> devsym(anti(a) x b) is injective for b != 0; its left
    inverse is

        a = (2/|b|^2) * (M b - (1/4) <M b, b>/|b|^2 * b).

    M must be traceless symmetric (NotTracelessSymError) and b a nonzero
    real vector (ZeroDirectionError).
    """
    M = np.asarray(M)
    b = np.asarray(b)
    if np.iscomplexobj(b):
        if np.any(np.abs(b.imag) > 0):
            raise ZeroDirectionError("direction must be real")
        b = b.real
    scale = np.maximum(mat_norm(M), 1e-300)
    if np.any(mat_norm(M - tp(M)) > 2.0 * tol * scale) or np.any(np.abs(tr(M)) > tol * scale):
        raise NotTracelessSymError("matrix is not traceless symmetric within tolerance")
    b2 = np.sum(b * b, axis=-1)
    if np.any(b2 <= TOL_ZERO ** 2):
        raise ZeroDirectionError("direction vector is numerically zero")
    Mb = (M @ b[..., None])[..., 0]
    coef = dot(Mb, b) / b2
    return 2.0 / b2[..., None] * (Mb - 0.25 * coef[..., None] * b)


def tangential_projector(nu, tol=TOL_UNIT):
    """Projector id - nu (x) nu onto the plane orthogonal to a unit vector."""
    nu = np.asarray(nu, dtype=float)
    if np.any(np.abs(vec_norm(nu) - 1.0) > tol):
        raise NotUnitError("direction must have unit length")
    return EYE3 - nu[..., :, None] * nu[..., None, :]


def random_rotation(rng):
    """Uniform random rotation matrix drawn via a normalized quaternion."""
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])
