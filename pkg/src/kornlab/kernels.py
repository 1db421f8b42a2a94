"""Finite-dimensional kernels of the curl seminorms and their point evaluation.

A skew matrix field whose symmetric curl vanishes has axial vector
a_tilde x x + b; dropping only the trace-free symmetric part of the curl
enlarges the family by a dilation and an inversion-type quadratic term.
KernelElement stores the ten parameters (a_tilde, beta, b, d) of

    axial(x) = a_tilde x x + beta*x + b + <d, x> x - d * |x|^2 / 2,

the matrix value being anti(axial(x)).  The axial polynomial is exactly a
conformal Killing field, which is what makes twelve points in general
position rigid (boundary_rank == 10) while lines and circles stay floppy.
"""

from dataclasses import dataclass, field

import numpy as np

from .algebra3 import anti, dot

__all__ = [
    "TooFewSamplesError", "DegenerateGeometryError",
    "KernelElement", "ConformalKilling", "PointCloud",
    "eval_kernel", "axial_polynomial", "curl_kernel_closed_form",
    "conformal_field", "ProjectionResult", "project_kernel",
    "boundary_system", "boundary_rank",
]

COND_LIMIT = 1e12
RANK_TOL = 1e-8

MIN_SAMPLES = {"sym": 6, "devsym": 10}
PARAM_COUNT = {"sym": 6, "devsym": 10}


class TooFewSamplesError(ValueError):
    """Not enough sample pairs to determine the kernel parameters."""


class DegenerateGeometryError(ValueError):
    """Sample points sit on a configuration that cannot pin the parameters."""


def _vec(v):
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError("expected a 3-vector, got shape %s" % (v.shape,))
    return v


@dataclass(frozen=True)
class KernelElement:
    """Parameters of one kernel field; beta = d = 0 gives the sym-curl kernel."""

    a_tilde: np.ndarray = field(default_factory=lambda: np.zeros(3))
    beta: float = 0.0
    b: np.ndarray = field(default_factory=lambda: np.zeros(3))
    d: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "a_tilde", _vec(self.a_tilde))
        object.__setattr__(self, "b", _vec(self.b))
        object.__setattr__(self, "d", _vec(self.d))
        object.__setattr__(self, "beta", float(self.beta))


@dataclass(frozen=True)
class ConformalKilling:
    """Quadratic vector field <a,x>x - a|x|^2/2 + A_axial x x + beta*x + b."""

    a: np.ndarray = field(default_factory=lambda: np.zeros(3))
    A_axial: np.ndarray = field(default_factory=lambda: np.zeros(3))
    beta: float = 0.0
    b: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "a", _vec(self.a))
        object.__setattr__(self, "A_axial", _vec(self.A_axial))
        object.__setattr__(self, "b", _vec(self.b))
        object.__setattr__(self, "beta", float(self.beta))


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError("points must have shape (m, 3)")
        object.__setattr__(self, "points", pts)


def _points_of(obj):
    if isinstance(obj, PointCloud):
        return obj.points
    return PointCloud(np.atleast_2d(np.asarray(obj, dtype=float))).points


def axial_polynomial(e, x):
    """Axial vector of the kernel field at x (broadcasts over leading axes of x)."""
    x = np.asarray(x, dtype=float)
    x2 = np.sum(x * x, axis=-1)[..., None]
    return (np.cross(e.a_tilde, x) + e.beta * x + e.b
            + dot(e.d, x)[..., None] * x - 0.5 * e.d * x2)


def eval_kernel(e, x):
    """Kernel field value anti(axial_polynomial(e, x))."""
    return anti(axial_polynomial(e, x))


def curl_kernel_closed_form(e, x):
    """Row-wise curl of the kernel field: 2(beta + <d,x>) id + anti(a_tilde) + anti(d x x)."""
    x = np.asarray(x, dtype=float)
    scale = 2.0 * (e.beta + dot(e.d, x))
    return (scale[..., None, None] * np.eye(3)
            + anti(e.a_tilde) + anti(np.cross(e.d, x)))


def conformal_field(c, x):
    """Value of a ConformalKilling field at x."""
    x = np.asarray(x, dtype=float)
    x2 = np.sum(x * x, axis=-1)[..., None]
    return (dot(c.a, x)[..., None] * x - 0.5 * c.a * x2
            + np.cross(c.A_axial, x) + c.beta * x + c.b)


def as_conformal(e):
    """The conformal Killing field matching axl of the kernel field of e."""
    return ConformalKilling(a=e.d, A_axial=e.a_tilde, beta=e.beta, b=e.b)


def _design_columns(x, space):
    """Stack of 3x3 matrix images of the unit parameter directions at x."""
    cols = []
    for j in range(3):
        a = np.zeros(3); a[j] = 1.0
        cols.append(eval_kernel(KernelElement(a_tilde=a), x))
    for j in range(3):
        b = np.zeros(3); b[j] = 1.0
        cols.append(eval_kernel(KernelElement(b=b), x))
    if space == "devsym":
        cols.append(eval_kernel(KernelElement(beta=1.0), x))
        for j in range(3):
            d = np.zeros(3); d[j] = 1.0
            cols.append(eval_kernel(KernelElement(d=d), x))
    return cols


@dataclass(frozen=True)
class ProjectionResult:
    element: KernelElement
    residual: float
    cond: float


def project_kernel(points, matrices, space="devsym"):
    """Least-squares fit of a kernel element to sampled matrix values.

    space selects which seminorm kernel to project onto: "sym" fits the
    six-parameter family (a_tilde, b), "devsym" the full ten-parameter one.
    The residual is the Hermitian norm of the stacked misfit over all
    samples.  Raises TooFewSamplesError below the minimum sample count and
    DegenerateGeometryError when the design matrix condition number
    exceeds 1e12.
    """
    if space not in MIN_SAMPLES:
        raise ValueError("space must be 'sym' or 'devsym'")
    pts = _points_of(points)
    mats = np.asarray(matrices, dtype=float)
    m = pts.shape[0]
    if mats.shape != (m, 3, 3):
        raise ValueError("matrices must have shape (m, 3, 3) matching the points")
    if m < MIN_SAMPLES[space]:
        raise TooFewSamplesError("space %r needs at least %d samples, got %d"
                                 % (space, MIN_SAMPLES[space], m))
    nparam = PARAM_COUNT[space]
    design = np.zeros((9 * m, nparam))
    for i, x in enumerate(pts):
        for j, col in enumerate(_design_columns(x, space)):
            design[9 * i:9 * i + 9, j] = col.reshape(9)
    rhs = mats.reshape(9 * m)
    sv = np.linalg.svd(design, compute_uv=False)
    cond = float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf
    if cond > COND_LIMIT:
        raise DegenerateGeometryError("design matrix condition %.3e exceeds %.1e"
                                      % (cond, COND_LIMIT))
    theta, _, _, _ = np.linalg.lstsq(design, rhs, rcond=None)
    residual = float(np.linalg.norm(design @ theta - rhs))
    if space == "sym":
        e = KernelElement(a_tilde=theta[0:3], b=theta[3:6])
    else:
        e = KernelElement(a_tilde=theta[0:3], b=theta[3:6], beta=theta[6], d=theta[7:10])
    return ProjectionResult(element=e, residual=residual, cond=cond)


def boundary_system(points):
    """Rows of the vanishing conditions f(x) = 0, three per point, ten unknowns.

    Unknown order: (A_axial, beta, b, d) for the quadratic field
    f(x) = A_axial x x + beta*x + b + <d,x>x - d|x|^2/2.
    """
    pts = _points_of(points)
    m = pts.shape[0]
    rows = np.zeros((3 * m, 10))
    for i, x in enumerate(pts):
        blk = rows[3 * i:3 * i + 3]
        blk[:, 0:3] = -anti(x)
        blk[:, 3] = x
        blk[:, 4:7] = np.eye(3)
        blk[:, 7:10] = np.outer(x, x) - 0.5 * np.dot(x, x) * np.eye(3)
    return rows


def boundary_rank(points, tol=RANK_TOL):
    """Number of kernel parameters a point set pins down (10 = rigid).

    Twelve points in general position on a sphere give 10; point sets on a
    line or a circle leave at least one quadratic field vanishing on all
    of them, so the rank drops below 10.
    """
    sv = np.linalg.svd(boundary_system(points), compute_uv=False)
    if sv[0] == 0.0:
        return 0
    return int(np.sum(sv > tol * sv[0]))
