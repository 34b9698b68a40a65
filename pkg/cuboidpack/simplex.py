"""
simplex.py
----------
Exact two-phase primal simplex over Fractions with Bland's rule.

Problems are ``min c.x`` subject to rows ``a.x (<=|>=|==) b`` and ``x >= 0``.
The solver returns a basic solution, so at most (number of rows) structural
variables are nonzero.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence

from cuboidpack.errors import InfeasibleError, PreconditionError
from cuboidpack.geometry import ZERO, as_rational

logger = logging.getLogger(__name__)

SENSES = ("<=", ">=", "==")


@dataclass
class Row:
    coeffs: Dict[int, Fraction]
    sense: str
    rhs: Fraction


@dataclass
class LinearProgram:
    n_vars: int
    objective: List[Fraction] = field(default_factory=list)
    rows: List[Row] = field(default_factory=list)

    def __post_init__(self):
        if not self.objective:
            self.objective = [ZERO] * self.n_vars

    def add_row(self, coeffs: Mapping[int, object], sense: str, rhs) -> None:
        if sense not in SENSES:
            raise PreconditionError(f"unknown constraint sense {sense!r}")
        clean = {}
        for j, value in coeffs.items():
            if not 0 <= j < self.n_vars:
                raise PreconditionError(f"variable index {j} out of range")
            value = as_rational(value)
            if value != 0:
                clean[j] = value
        self.rows.append(Row(clean, sense, as_rational(rhs)))


@dataclass
class LPSolution:
    x: List[Fraction]
    objective: Fraction
    basis: List[int]
    pivots: int = 0

    def nonzeros(self) -> int:
        return sum(1 for v in self.x if v != 0)


class _Tableau:
    """Dense tableau; column ``-1`` of every row is the right-hand side."""

    def __init__(self, rows: List[List[Fraction]], basis: List[int], n_cols: int):
        self.rows = rows
        self.basis = basis
        self.n_cols = n_cols
        self.pivots = 0

    def pivot(self, r: int, c: int) -> None:
        row = self.rows[r]
        piv = row[c]
        if piv != 1:
            row[:] = [v / piv if v else v for v in row]
        support = [j for j, v in enumerate(row) if v]
        for k, other in enumerate(self.rows):
            if k == r:
                continue
            f = other[c]
            if f:
                for j in support:
                    other[j] -= f * row[j]
        self.basis[r] = c
        self.pivots += 1

    def reduced_costs(self, costs: Sequence[Fraction]) -> List[Fraction]:
        reduced = list(costs) + [ZERO]
        for r, b in enumerate(self.basis):
            cb = costs[b]
            if cb:
                row = self.rows[r]
                for j, v in enumerate(row):
                    if v:
                        reduced[j] -= cb * v
        return reduced

    def run(self, costs: Sequence[Fraction], allowed: Sequence[bool]) -> None:
        """Bland's rule: lowest-index improving column, lowest-index leaving basic."""
        reduced = self.reduced_costs(costs)
        while True:
            entering = next(
                (j for j in range(self.n_cols) if allowed[j] and reduced[j] < 0), None
            )
            if entering is None:
                return
            best = None
            for r, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    key = (row[-1] / a, self.basis[r])
                    if best is None or key < best[0]:
                        best = (key, r)
            if best is None:
                raise PreconditionError("linear program is unbounded")
            r = best[1]
            self.pivot(r, entering)
            f = reduced[entering]
            row = self.rows[r]
            for j, v in enumerate(row):
                if v:
                    reduced[j] -= f * v


def solve_lp(lp: LinearProgram) -> LPSolution:
    """Solve ``lp`` exactly; raises InfeasibleError when no point satisfies the rows."""
    n = lp.n_vars
    rows = []
    for row in lp.rows:
        coeffs, sense, rhs = dict(row.coeffs), row.sense, row.rhs
        if rhs < 0:
            coeffs = {j: -v for j, v in coeffs.items()}
            rhs = -rhs
            sense = {"<=": ">=", ">=": "<=", "==": "=="}[sense]
        rows.append((coeffs, sense, rhs))

    n_slack = sum(1 for _, sense, _ in rows if sense != "==")
    n_art = sum(1 for _, sense, _ in rows if sense != "<=")
    n_cols = n + n_slack + n_art
    first_art = n + n_slack

    table: List[List[Fraction]] = []
    basis: List[int] = []
    slack = n
    art = first_art
    for coeffs, sense, rhs in rows:
        line = [ZERO] * (n_cols + 1)
        for j, v in coeffs.items():
            line[j] = v
        line[-1] = rhs
        if sense == "<=":
            line[slack] = Fraction(1)
            basis.append(slack)
            slack += 1
        else:
            if sense == ">=":
                line[slack] = Fraction(-1)
                slack += 1
            line[art] = Fraction(1)
            basis.append(art)
            art += 1
        table.append(line)

    tableau = _Tableau(table, basis, n_cols)
    allowed = [True] * n_cols
    if n_art:
        phase1 = [ZERO] * first_art + [Fraction(1)] * n_art
        tableau.run(phase1, allowed)
        infeasibility = sum(
            (tableau.rows[r][-1] for r, b in enumerate(tableau.basis) if b >= first_art), ZERO
        )
        if infeasibility > 0:
            raise InfeasibleError(f"linear program infeasible (phase one residual {infeasibility})")
        _drive_out_artificials(tableau, first_art)
        for j in range(first_art, n_cols):
            allowed[j] = False

    costs = list(lp.objective) + [ZERO] * (n_cols - n)
    tableau.run(costs, allowed)

    x = [ZERO] * n
    for r, b in enumerate(tableau.basis):
        if b < n:
            x[b] = tableau.rows[r][-1]
    objective = sum((c * v for c, v in zip(lp.objective, x)), ZERO)
    logger.debug("simplex: %d rows, %d cols, %d pivots, objective %s", len(table), n_cols, tableau.pivots, objective)
    return LPSolution(x, objective, list(tableau.basis), tableau.pivots)


def _drive_out_artificials(tableau: _Tableau, first_art: int) -> None:
    keep = []
    for r in range(len(tableau.rows)):
        if tableau.basis[r] < first_art:
            keep.append(r)
            continue
        row = tableau.rows[r]
        column = next((j for j in range(first_art) if row[j] != 0), None)
        if column is None:
            continue  # redundant row
        tableau.pivot(r, column)
        keep.append(r)
    tableau.rows = [tableau.rows[r] for r in keep]
    tableau.basis = [tableau.basis[r] for r in keep]


def feasible_point(lp: LinearProgram) -> Optional[LPSolution]:
    """Basic feasible solution ignoring the objective, or None if infeasible."""
    feasibility = LinearProgram(lp.n_vars, [ZERO] * lp.n_vars, list(lp.rows))
    try:
        return solve_lp(feasibility)
    except InfeasibleError:
        return None
