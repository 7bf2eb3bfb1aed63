"""Declarative intensity model specs and design matrix assembly.

An `IntensityModelSpec` names what goes into one log-linear intensity
model: linear covariate columns (with the token ``"weekday"`` expanding to
dummy variables against a Friday reference), penalized smooth terms, and
whether a supplied offset enters the linear predictor. `build_design`
turns a spec plus a panel frame into the assembled matrix, the full-size
penalty matrices, and enough metadata to rebuild rows for new data and to
evaluate fitted smooths on grids.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import ConfigurationError
from .smoothing import (
    ConstraintTransform,
    SmoothBasis1D,
    SmoothBasis2D,
    apply_constraint,
    build_basis_1d,
    build_basis_2d,
)

WEEKDAY_TOKEN = "weekday"
# Friday is the reference category and gets no dummy.
WEEKDAY_LEVELS = ("Monday", "Tuesday", "Wednesday", "Thursday", "Saturday", "Sunday")

OFFSET_NONE = "none"
OFFSET_SUPPLIED = "supplied"


@dataclass(frozen=True)
class SmoothTermSpec:
    """One penalized smooth term over one or two panel columns."""

    columns: tuple[str, ...]
    basis_dim: int | tuple[int, int] = 10
    degree: int = 3
    penalty_order: int = 2

    def __post_init__(self):
        cols = tuple(self.columns)
        object.__setattr__(self, "columns", cols)
        if len(cols) not in (1, 2):
            raise ConfigurationError("smooth terms take one or two columns")
        if len(cols) == 2:
            dims = self.basis_dim
            if np.isscalar(dims):
                dims = (int(dims), int(dims))
            object.__setattr__(self, "basis_dim", (int(dims[0]), int(dims[1])))
        else:
            object.__setattr__(self, "basis_dim", int(self.basis_dim))

    @property
    def name(self) -> str:
        if len(self.columns) == 1:
            return f"s({self.columns[0]})"
        return f"te({self.columns[0]},{self.columns[1]})"

    def to_dict(self) -> dict:
        dims = self.basis_dim
        return {
            "columns": list(self.columns),
            "basis_dim": list(dims) if isinstance(dims, tuple) else dims,
            "degree": self.degree,
            "penalty_order": self.penalty_order,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "SmoothTermSpec":
        dims = payload["basis_dim"]
        return cls(
            columns=tuple(payload["columns"]),
            basis_dim=tuple(dims) if isinstance(dims, list) else dims,
            degree=payload.get("degree", 3),
            penalty_order=payload.get("penalty_order", 2),
        )


@dataclass(frozen=True)
class IntensityModelSpec:
    """What enters one log-link intensity model."""

    linear_terms: tuple[str, ...] = ()
    smooth_terms: tuple[SmoothTermSpec, ...] = ()
    offset: str = OFFSET_NONE
    penalty_weights: dict[str, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "linear_terms", tuple(self.linear_terms))
        object.__setattr__(self, "smooth_terms", tuple(self.smooth_terms))
        if self.offset not in (OFFSET_NONE, OFFSET_SUPPLIED):
            raise ConfigurationError(
                f"offset must be '{OFFSET_NONE}' or '{OFFSET_SUPPLIED}', got {self.offset!r}"
            )
        if self.penalty_weights is not None:
            for key, value in self.penalty_weights.items():
                if not np.isfinite(value) or value < 0:
                    raise ConfigurationError(
                        f"penalty weight for {key!r} must be finite and nonnegative"
                    )

    @property
    def uses_offset(self) -> bool:
        return self.offset == OFFSET_SUPPLIED

    def to_dict(self) -> dict:
        return {
            "linear_terms": list(self.linear_terms),
            "smooth_terms": [term.to_dict() for term in self.smooth_terms],
            "offset": self.offset,
            "penalty_weights": dict(self.penalty_weights) if self.penalty_weights else None,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "IntensityModelSpec":
        return cls(
            linear_terms=tuple(payload.get("linear_terms", ())),
            smooth_terms=tuple(
                SmoothTermSpec.from_dict(term) for term in payload.get("smooth_terms", [])
            ),
            offset=payload.get("offset", OFFSET_NONE),
            penalty_weights=payload.get("penalty_weights"),
        )


@dataclass
class SmoothBlock:
    """A constrained smooth block inside an assembled design."""

    spec: SmoothTermSpec
    basis: SmoothBasis1D | SmoothBasis2D
    transform: ConstraintTransform
    columns: slice
    penalty_names: tuple[str, ...]

    def evaluate_rows(self, panel: pd.DataFrame) -> np.ndarray:
        coords = [panel[col].to_numpy(dtype=float) for col in self.spec.columns]
        raw = self.basis.evaluate(*coords)
        return self.transform.reduce_design(raw)


def _linear_matrix(panel: pd.DataFrame, linear_terms) -> tuple[np.ndarray, list[str]]:
    n = len(panel)
    columns = [np.ones(n)]
    names = ["intercept"]
    for term in linear_terms:
        if term == WEEKDAY_TOKEN:
            if "weekday" not in panel.columns:
                raise ConfigurationError("panel has no 'weekday' column for the weekday term")
            observed = set(panel["weekday"].unique())
            known = set(WEEKDAY_LEVELS) | {"Friday"}
            if not observed <= known:
                raise ConfigurationError(f"unknown weekday labels: {sorted(observed - known)}")
            for level in WEEKDAY_LEVELS:
                columns.append((panel["weekday"] == level).to_numpy(dtype=float))
                names.append(f"weekday[{level}]")
        else:
            if term not in panel.columns:
                raise ConfigurationError(f"panel has no column {term!r}")
            values = panel[term].to_numpy(dtype=float)
            if not np.all(np.isfinite(values)):
                raise ConfigurationError(f"column {term!r} contains non-finite values")
            columns.append(values)
            names.append(term)
    return np.column_stack(columns), names


@dataclass
class ModelDesign:
    """Assembled design matrix with penalties and smooth metadata."""

    spec: IntensityModelSpec
    matrix: np.ndarray
    column_names: list[str]
    penalties: dict[str, np.ndarray] = field(default_factory=dict)
    smooth_blocks: list[SmoothBlock] = field(default_factory=list)

    @property
    def n_columns(self) -> int:
        return self.matrix.shape[1]

    def rows_for(self, panel: pd.DataFrame) -> np.ndarray:
        """Assemble design rows for new panel data with the fitted bases."""
        linear, names = _linear_matrix(panel, self.spec.linear_terms)
        parts = [linear]
        for block in self.smooth_blocks:
            parts.append(block.evaluate_rows(panel))
        rows = np.hstack(parts)
        if rows.shape[1] != self.n_columns:
            raise ConfigurationError(
                f"assembled {rows.shape[1]} columns, design has {self.n_columns}"
            )
        return rows

    def smooth_block(self, term_name: str) -> SmoothBlock:
        for block in self.smooth_blocks:
            if block.spec.name == term_name:
                return block
        raise ConfigurationError(f"design has no smooth term {term_name!r}")

    def smooth_eval_matrix(self, term_name: str, *grids) -> np.ndarray:
        """Matrix mapping the full coefficient vector to smooth values.

        For a 1-D term pass one grid; for a 2-D term pass the two coordinate
        grids, which are meshed (x varying slowest). The result has shape
        (n_points, n_columns) and is zero outside the term's block.
        """
        block = self.smooth_block(term_name)
        if len(block.spec.columns) == 1:
            (grid,) = grids
            raw = block.basis.evaluate(np.asarray(grid, dtype=float))
        else:
            gx, gy = (np.asarray(g, dtype=float) for g in grids)
            xx, yy = np.meshgrid(gx, gy, indexing="ij")
            raw = block.basis.evaluate(xx.ravel(), yy.ravel())
        reduced = block.transform.reduce_design(raw)
        full = np.zeros((reduced.shape[0], self.n_columns))
        full[:, block.columns] = reduced
        return full


def build_design(panel: pd.DataFrame, spec: IntensityModelSpec) -> ModelDesign:
    """Assemble the design matrix, penalties, and smooth blocks for a spec."""
    linear, names = _linear_matrix(panel, spec.linear_terms)
    parts = [linear]
    penalties: dict[str, np.ndarray] = {}
    blocks: list[SmoothBlock] = []
    col_start = linear.shape[1]

    for term in spec.smooth_terms:
        for col in term.columns:
            if col not in panel.columns:
                raise ConfigurationError(f"panel has no column {col!r} for smooth {term.name}")
        if len(term.columns) == 1:
            values = panel[term.columns[0]].to_numpy(dtype=float)
            basis, raw = build_basis_1d(
                values, basis_dim=term.basis_dim, degree=term.degree,
                penalty_order=term.penalty_order,
            )
            raw_penalties = {term.name: basis.penalty()}
        else:
            x = panel[term.columns[0]].to_numpy(dtype=float)
            y = panel[term.columns[1]].to_numpy(dtype=float)
            basis, raw = build_basis_2d(
                x, y, dims=term.basis_dim, degree=term.degree,
                penalty_order=term.penalty_order,
            )
            s_row, s_col = basis.penalties()
            raw_penalties = {
                f"{term.name}[{term.columns[0]}]": s_row,
                f"{term.name}[{term.columns[1]}]": s_col,
            }

        constrained, transform = apply_constraint(raw)
        cols = slice(col_start, col_start + constrained.shape[1])
        block = SmoothBlock(
            spec=term,
            basis=basis,
            transform=transform,
            columns=cols,
            penalty_names=tuple(raw_penalties),
        )
        blocks.append(block)
        parts.append(constrained)
        names.extend(f"{term.name}[{j}]" for j in range(constrained.shape[1]))
        for pen_name, pen in raw_penalties.items():
            penalties[pen_name] = (pen_name, transform.reduce_penalty(pen), cols)
        col_start += constrained.shape[1]

    if len(set(names)) != len(names):
        raise ConfigurationError("duplicate design column names; check linear terms")

    matrix = np.hstack(parts)
    full_penalties: dict[str, np.ndarray] = {}
    for pen_name, (_, reduced, cols) in penalties.items():
        embedded = np.zeros((matrix.shape[1], matrix.shape[1]))
        embedded[cols, cols] = reduced
        full_penalties[pen_name] = embedded

    return ModelDesign(
        spec=spec,
        matrix=matrix,
        column_names=names,
        penalties=full_penalties,
        smooth_blocks=blocks,
    )
