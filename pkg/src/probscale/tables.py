"""The three comparison tables: thresholds by equation, and the two beta grids."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from . import _io
from .exponents import (
    EquationKind,
    EquationSpec,
    NonlinearityKind,
    NonlinearitySpec,
    beta_hhh,
    beta_hhl,
)

TABLE_DIMS = (2, 3, 4)
TABLE_DEGREES = (2, 3)
EQUATIONS = (EquationKind.HEAT, EquationKind.WAVE, EquationKind.SCHRODINGER)

WAVE_LOW_DIM_NOTE = ("for d in {1,2} the actual threshold is higher than -3/2 "
                     "(s_pr returns -1 at d=1 and -5/4 at d=2)")
SCHRODINGER_QUAD_NOTE = "p=2 means |u|^2; for u^2 or conj(u)^2, s_hhl follows -(d+2)/4"


@dataclass(frozen=True)
class FormulaCell:
    """A printed formula in ``d`` and ``p`` together with its exact evaluation."""

    text: str
    evaluate: Callable[[int, int], Fraction]
    footnote: Optional[str] = None

    def __call__(self, d: int, p: int) -> Fraction:
        return self.evaluate(d, p)


@dataclass(frozen=True)
class ThresholdRow:
    eq: EquationKind
    nonlinearity: str
    s_pr: FormulaCell
    s_hhl: FormulaCell

    def applies_to(self, p: int) -> bool:
        if self.nonlinearity == "all p":
            return True
        if self.nonlinearity == "p=2":
            return p == 2
        return p >= 3


def table_spec(eq: EquationKind, d: int, p: int) -> EquationSpec:
    """Model equation used for a beta-table cell (Schrodinger quadratic is |u|^2)."""
    if eq is EquationKind.SCHRODINGER and p == 2:
        return EquationSpec(eq, d, NonlinearitySpec(2, NonlinearityKind.MODULUS_SQUARE))
    return EquationSpec(eq, d, NonlinearitySpec(p))


def column_label(d: int, p: int) -> str:
    return f"{d}D " + {2: "Quad.", 3: "Cubic"}[p]


@dataclass(frozen=True)
class TableSet:
    thresholds: tuple[ThresholdRow, ...]
    beta_hhh: dict[tuple[EquationKind, int, int], Fraction]
    beta_hhl: dict[tuple[EquationKind, int, int], Fraction]

    def to_json(self) -> dict:
        def grid(values):
            return {eq.value: {column_label(d, p): _io.rational_to_json(values[eq, d, p])
                               for d in TABLE_DIMS for p in TABLE_DEGREES} for eq in EQUATIONS}

        rows = []
        for row in self.thresholds:
            rows.append({
                "eq": row.eq.value,
                "nonlinearity": row.nonlinearity,
                "s_pr": row.s_pr.text,
                "s_pr_footnote": row.s_pr.footnote,
                "s_hhl": row.s_hhl.text,
                "s_hhl_footnote": row.s_hhl.footnote,
            })
        return {"table1": rows, "table2": grid(self.beta_hhh), "table3": grid(self.beta_hhl)}

    def to_text(self, which: Optional[int] = None) -> str:
        parts = []
        if which in (None, 1):
            header = ["", "N_p(u)", "s_pr", "s_hhl"]
            body = [[row.eq.value.capitalize(), row.nonlinearity,
                     row.s_pr.text + ("*" if row.s_pr.footnote else ""),
                     row.s_hhl.text] for row in self.thresholds]
            notes = sorted({c.footnote for r in self.thresholds for c in (r.s_pr, r.s_hhl) if c.footnote})
            parts.append("Table 1: probabilistic scaling vs high-high-to-low criticality\n"
                         + _align([header] + body) + "".join(f"  * {n}\n" for n in notes))
        for idx, (title, values) in ((2, ("Table 2: beta, high-high-to-high", self.beta_hhh)),
                                     (3, ("Table 3: beta, high-high-to-low", self.beta_hhl))):
            if which in (None, idx):
                header = [""] + [column_label(d, p) for d in TABLE_DIMS for p in TABLE_DEGREES]
                body = [[eq.value.capitalize()] + [_io.format_rational(values[eq, d, p])
                                                   for d in TABLE_DIMS for p in TABLE_DEGREES]
                        for eq in EQUATIONS]
                parts.append(title + "\n" + _align([header] + body))
        return "\n".join(parts)


def _align(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "".join("  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip() + "\n" for r in rows)


def threshold_rows() -> tuple[ThresholdRow, ...]:
    F = Fraction
    return (
        ThresholdRow(EquationKind.HEAT, "all p",
                     FormulaCell("-2/(p-1)", lambda d, p: F(-2, p - 1)),
                     FormulaCell("-(d+2)/(2p)", lambda d, p: F(-(d + 2), 2 * p))),
        ThresholdRow(EquationKind.WAVE, "p=2",
                     FormulaCell("-3/2", lambda d, p: F(-3, 2), footnote=WAVE_LOW_DIM_NOTE),
                     FormulaCell("-d/4", lambda d, p: F(-d, 4))),
        ThresholdRow(EquationKind.WAVE, "p>=3",
                     FormulaCell("-3/(2(p-1))", lambda d, p: F(-3, 2 * (p - 1))),
                     FormulaCell("-(d+1)/(2p)", lambda d, p: F(-(d + 1), 2 * p))),
        ThresholdRow(EquationKind.SCHRODINGER, "p=2",
                     FormulaCell("-1", lambda d, p: F(-1)),
                     FormulaCell("-(d+1)/4", lambda d, p: F(-(d + 1), 4), footnote=SCHRODINGER_QUAD_NOTE)),
        ThresholdRow(EquationKind.SCHRODINGER, "p>=3",
                     FormulaCell("-1/(p-1)", lambda d, p: F(-1, p - 1)),
                     FormulaCell("-(d+2)/(2p)", lambda d, p: F(-(d + 2), 2 * p))),
    )


def render_tables() -> TableSet:
    hhh, hhl = {}, {}
    for eq in EQUATIONS:
        for d in TABLE_DIMS:
            for p in TABLE_DEGREES:
                spec = table_spec(eq, d, p)
                hhh[eq, d, p] = beta_hhh(spec)
                hhl[eq, d, p] = beta_hhl(spec)
    return TableSet(threshold_rows(), hhh, hhl)
