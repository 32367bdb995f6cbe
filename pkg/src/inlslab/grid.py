"""Radial grids, weighted quadrature and discrete radial operators.

Cell-centered nodes r_j = (j + 1/2) h never touch r = 0, where the |x|^{-b}
weight is singular; the weight r^{N-1-b} stays integrable for b < 1, so
midpoint quadrature converges at second order.  The Laplacian is the
flux (conservative) form of u'' + (N-1)/r u', which is self-adjoint in the
weighted inner product by construction: zero-flux face at r = 0 (the
reflection ghost u_{-1} = u_0) and a homogeneous Dirichlet ghost u_J = 0.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma as gamma_fn


def sphere_area(N: int) -> float:
    """Surface measure of the unit sphere, 2 pi^{N/2} / Gamma(N/2)."""
    return 2 * math.pi ** (N / 2) / gamma_fn(N / 2)


@dataclass(frozen=True)
class RadialGrid:
    J: int
    h: float
    N: int
    nodes: np.ndarray = field(init=False, repr=False)
    faces: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.J < 3:
            raise ValueError(f"need at least 3 cells, got {self.J}")
        if self.h <= 0:
            raise ValueError(f"mesh width must be positive, got {self.h}")
        if self.N < 1:
            raise ValueError(f"dimension must be >= 1, got {self.N}")
        nodes = (np.arange(self.J) + 0.5) * self.h
        faces = np.arange(self.J + 1) * self.h
        omega = sphere_area(self.N)
        weights = omega * nodes ** (self.N - 1) * self.h
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "faces", faces)
        object.__setattr__(self, "weights", weights)

    @property
    def r_max(self) -> float:
        return self.J * self.h

    def field(self, values) -> "RadialField":
        return RadialField(self, np.asarray(values))


@dataclass(frozen=True)
class RadialField:
    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape != (self.grid.J,):
            raise ValueError(
                f"expected {self.grid.J} samples, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("field contains non-finite samples")
        object.__setattr__(self, "values", values)


def gaussian_field(grid: RadialGrid, amplitude=1.0, width=1.0) -> RadialField:
    """amplitude * exp(-(r/width)^2) sampled on the grid."""
    return grid.field(amplitude * np.exp(-((grid.nodes / width) ** 2)))


def weighted_inner(u: RadialField, v: RadialField) -> complex:
    """<u, v> = sum_j w_j u_j conj(v_j)."""
    return np.sum(u.grid.weights * u.values * np.conj(v.values))


def l2_norm(u: RadialField) -> float:
    """(sum_j w_j |u_j|^2)^{1/2}."""
    return math.sqrt(float(np.sum(u.grid.weights * np.abs(u.values) ** 2)))


def radial_derivative(u: RadialField) -> np.ndarray:
    """Centered differences, one-sided at both ends."""
    v = u.values
    h = u.grid.h
    d = np.empty_like(v)
    d[1:-1] = (v[2:] - v[:-2]) / (2 * h)
    d[0] = (v[1] - v[0]) / h
    d[-1] = (v[-1] - v[-2]) / h
    return d


def grad_norm(u: RadialField) -> float:
    """Weighted l2 norm of the centered-difference radial derivative."""
    d = radial_derivative(u)
    return math.sqrt(float(np.sum(u.grid.weights * np.abs(d) ** 2)))


def grad_norm_sq_form(u: RadialField) -> float:
    """<-Lap u, u> via the face fluxes; the operator-consistent gradient.

    This is the quadratic form conserved by the implicit linear step, so
    evolution traces use it; it agrees with grad_norm up to O(h^2).
    """
    grid = u.grid
    omega = sphere_area(grid.N)
    v = u.values
    dif = np.diff(v)  # u_{j+1} - u_j, j = 0..J-2
    a_int = grid.faces[1:-1] ** (grid.N - 1)
    total = np.sum(a_int * np.abs(dif) ** 2)
    total += grid.faces[-1] ** (grid.N - 1) * np.abs(v[-1]) ** 2  # Dirichlet face
    return float(omega * total / grid.h)


def potential_term(u: RadialField, alpha: float, b: float) -> float:
    """sum_j w_j r_j^{-b} |u_j|^{alpha+2}, the weighted potential integral."""
    if b >= u.grid.N:
        raise ValueError(f"need b < N for integrability, got b={b}, N={u.grid.N}")
    r = u.grid.nodes
    return float(np.sum(u.grid.weights * r ** (-b) * np.abs(u.values) ** (alpha + 2)))


def laplacian_diagonals(grid: RadialGrid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(lower, diag, upper) of the flux-form radial Laplacian.

    Row j applies (a_{j+1}(u_{j+1}-u_j) - a_j(u_j-u_{j-1})) / (r_j^{N-1} h^2)
    with a_j = face_j^{N-1}; the r = 0 face carries zero flux for N >= 2 and
    the reflection ghost cancels it for N = 1, and u_J = 0.
    """
    a = grid.faces ** (grid.N - 1)
    scale = grid.nodes ** (grid.N - 1) * grid.h**2
    lower = a[1:-1] / scale[1:]  # couples u_{j-1}, j = 1..J-1
    upper = a[1:-1] / scale[:-1]  # couples u_{j+1}, j = 0..J-2
    diag = -(a[1:] + a[:-1]) / scale
    if grid.N == 1:
        diag[0] += a[0] / scale[0]  # reflection ghost u_{-1} = u_0
    return lower, diag, upper


def laplacian_radial(u: RadialField) -> RadialField:
    """Second-order flux-form discretization of u'' + (N-1)/r u'."""
    lower, diag, upper = laplacian_diagonals(u.grid)
    v = u.values
    out = diag * v
    out[1:] += lower * v[:-1]
    out[:-1] += upper * v[1:]
    return u.grid.field(out)


def strauss_check(u: RadialField, R: float, tol: float = 1e-6) -> dict:
    """Pointwise radial decay bound sup_{r >= R} |u| <= R^{-(N-1)/2} ||u||^{1/2} ||grad u||^{1/2}."""
    grid = u.grid
    if not (0 < R < grid.r_max):
        raise ValueError(f"R must lie in (0, {grid.r_max}), got {R}")
    mask = grid.nodes >= R
    lhs = float(np.max(np.abs(u.values[mask]))) if np.any(mask) else 0.0
    rhs = R ** (-(grid.N - 1) / 2) * math.sqrt(l2_norm(u) * grad_norm(u))
    return {"lhs": lhs, "rhs": rhs, "holds": lhs <= rhs * (1 + tol), "tol": tol}


def field_to_csv(u: RadialField, path, precision: int = 12) -> None:
    """Write the field as rows r,re,im in decimal text."""
    fmt = f"%.{precision}g"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r", "re", "im"])
        for r, v in zip(u.grid.nodes, u.values):
            writer.writerow([fmt % r, fmt % np.real(v), fmt % np.imag(v)])


def field_from_csv(path, N: int) -> RadialField:
    """Read a field written by field_to_csv; the grid is inferred from r."""
    rs, vals = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [c.strip() for c in header] != ["r", "re", "im"]:
            raise ValueError(f"unexpected field CSV header {header}")
        for row in reader:
            rs.append(float(row[0]))
            vals.append(float(row[1]) + 1j * float(row[2]))
    rs = np.asarray(rs)
    if len(rs) < 3:
        raise ValueError("field CSV too short")
    h = 2 * rs[0]
    J = len(rs)
    grid = RadialGrid(J=J, h=h, N=N)
    if not np.allclose(grid.nodes, rs, rtol=1e-9, atol=1e-12):
        raise ValueError("field CSV nodes are not a uniform cell-centered grid")
    return grid.field(np.asarray(vals))
