"""B-spline bases, difference penalties, and identifiability constraints.

One-dimensional smooths use cubic B-splines with knots at empirical
quantiles and a difference penalty on adjacent coefficients; the
two-dimensional spatial smooth is the row-wise tensor product of two such
marginals with one Kronecker-structured penalty per direction. Smooth
blocks enter the regression after a sum-to-zero reparameterization that
keeps them orthogonal to the intercept.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BSpline
from scipy.linalg import null_space

from .errors import ConfigurationError


@dataclass(frozen=True)
class SmoothBasis1D:
    """Clamped B-spline basis on [breakpoints[0], breakpoints[-1]].

    `breakpoints` holds the strictly increasing distinct knots (range ends
    plus interior quantile knots); the evaluation knot vector repeats the
    boundary knots degree + 1 times.
    """

    breakpoints: np.ndarray
    degree: int
    basis_dim: int
    penalty_order: int

    @property
    def knot_vector(self) -> np.ndarray:
        lo, hi = self.breakpoints[0], self.breakpoints[-1]
        return np.concatenate(
            [
                np.repeat(lo, self.degree + 1),
                self.breakpoints[1:-1],
                np.repeat(hi, self.degree + 1),
            ]
        )

    def evaluate(self, values) -> np.ndarray:
        """Evaluate all basis functions at `values` (clamped to the range)."""
        x = np.clip(np.asarray(values, dtype=float), self.breakpoints[0], self.breakpoints[-1])
        design = BSpline.design_matrix(x, self.knot_vector, self.degree, extrapolate=False)
        return design.toarray()

    def penalty(self) -> np.ndarray:
        """Difference penalty matrix D'D of the configured order."""
        diff = np.diff(np.eye(self.basis_dim), n=self.penalty_order, axis=0)
        return diff.T @ diff


def build_basis_1d(
    values, basis_dim: int = 10, degree: int = 3, penalty_order: int = 2
) -> tuple[SmoothBasis1D, np.ndarray]:
    """Place knots at quantiles of `values` and evaluate the basis there.

    Returns the basis object and the (n, basis_dim) design block.
    """
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0 or not np.all(np.isfinite(x)):
        raise ConfigurationError("smooth covariate values must be finite and non-empty")
    if basis_dim < degree + 2:
        raise ConfigurationError(
            f"basis_dim must be at least degree + 2, got {basis_dim} with degree {degree}"
        )
    if not 1 <= penalty_order < basis_dim:
        raise ConfigurationError(f"penalty_order {penalty_order} out of range")
    distinct = np.unique(x)
    if distinct.size < basis_dim:
        raise ConfigurationError(
            f"need at least {basis_dim} distinct values for a {basis_dim}-dimensional "
            f"basis, got {distinct.size}"
        )

    n_interior = basis_dim - degree - 1
    probs = np.arange(1, n_interior + 1) / (n_interior + 1)
    interior = np.quantile(x, probs)
    breakpoints = np.concatenate([[distinct[0]], interior, [distinct[-1]]])
    if np.any(np.diff(breakpoints) <= 0):
        raise ConfigurationError(
            "quantile knots are not strictly increasing; values are too concentrated"
        )

    basis = SmoothBasis1D(
        breakpoints=breakpoints,
        degree=degree,
        basis_dim=basis_dim,
        penalty_order=penalty_order,
    )
    return basis, basis.evaluate(x)


@dataclass(frozen=True)
class SmoothBasis2D:
    """Row-wise tensor product of two marginal B-spline bases."""

    marginal_x: SmoothBasis1D
    marginal_y: SmoothBasis1D

    @property
    def basis_dim(self) -> int:
        return self.marginal_x.basis_dim * self.marginal_y.basis_dim

    def evaluate(self, x, y) -> np.ndarray:
        bx = self.marginal_x.evaluate(x)
        by = self.marginal_y.evaluate(y)
        n = bx.shape[0]
        return (bx[:, :, None] * by[:, None, :]).reshape(n, -1)

    def penalties(self) -> tuple[np.ndarray, np.ndarray]:
        """Roughness penalties along each direction, in tensor coordinates."""
        sx = self.marginal_x.penalty()
        sy = self.marginal_y.penalty()
        ix = np.eye(self.marginal_x.basis_dim)
        iy = np.eye(self.marginal_y.basis_dim)
        return np.kron(sx, iy), np.kron(ix, sy)


def build_basis_2d(
    x, y, dims: tuple[int, int] = (5, 5), degree: int = 3, penalty_order: int = 2
) -> tuple[SmoothBasis2D, np.ndarray]:
    """Tensor-product basis over paired coordinates."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ConfigurationError("coordinate vectors must have equal length")
    basis_x, _ = build_basis_1d(x, basis_dim=dims[0], degree=degree, penalty_order=penalty_order)
    basis_y, _ = build_basis_1d(y, basis_dim=dims[1], degree=degree, penalty_order=penalty_order)
    basis = SmoothBasis2D(marginal_x=basis_x, marginal_y=basis_y)
    return basis, basis.evaluate(x, y)


@dataclass(frozen=True)
class ConstraintTransform:
    """Linear reparameterization onto the sum-to-zero subspace.

    `projection` has shape (m, m - 1); constrained coefficients gamma map
    back to full coefficients via projection @ gamma.
    """

    projection: np.ndarray

    def reduce_design(self, block: np.ndarray) -> np.ndarray:
        return block @ self.projection

    def reduce_penalty(self, penalty: np.ndarray) -> np.ndarray:
        return self.projection.T @ penalty @ self.projection

    def expand_coef(self, gamma: np.ndarray) -> np.ndarray:
        return self.projection @ gamma


def apply_constraint(block: np.ndarray) -> tuple[np.ndarray, ConstraintTransform]:
    """Reparameterize a smooth block so its fitted values sum to zero.

    Removes the single direction along which the block's column sums act,
    making the smooth orthogonal to the intercept over the design rows.
    """
    block = np.asarray(block, dtype=float)
    if block.ndim != 2 or block.shape[1] < 2:
        raise ConfigurationError("constraint needs a design block with at least 2 columns")
    col_sums = block.sum(axis=0)
    scale = np.linalg.norm(block, ord="fro")
    if np.linalg.norm(col_sums) <= 1e-12 * max(scale, 1.0):
        raise ConfigurationError(
            "sum-to-zero constraint is rank deficient: block columns already sum to zero"
        )
    projection = null_space(col_sums[None, :])
    transform = ConstraintTransform(projection=projection)
    return transform.reduce_design(block), transform
