"""Summary tables, cross-experiment comparison, and curve figures.

``compare`` merges the summary tables of several artifact directories (all
from the same setting and objective) and flags violations of the mechanism
class ordering ASP <= PSP <= SPM: an arm whose statistic limits it to a
smaller class must not beat an arm of a larger class by more than the
confidence allowance.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

from seqprice.errors import InputError
from seqprice.statistics import STATISTIC_KINDS, constrain

_CLASS_RANK = {"ASP": 0, "PSP": 1, "SPM": 2}

_SOURCE_CLASS = {
    "rsd": None,  # randomized order, outside the deterministic hierarchy
    "oracle_asp": "ASP",
    "oracle_psp": "PSP",
    "oracle_spm": "SPM",
}


@dataclass
class SummaryRow:
    arm: str
    source: str  # statistic kind or baseline name
    value: Optional[float]
    ci_low: Optional[float] = None
    ci_high: Optional[float] = None
    oracle_ref: Optional[float] = None
    note: str = ""
    error: str = ""

    @property
    def ratio(self) -> Optional[float]:
        if self.value is None or not self.oracle_ref:
            return None
        return self.value / self.oracle_ref

    @property
    def mechanism_class(self) -> Optional[str]:
        if self.source in STATISTIC_KINDS:
            return constrain(self.source)
        return _SOURCE_CLASS.get(self.source)


@dataclass
class SummaryTable:
    setting: str
    objective: str
    rows: list[SummaryRow] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)

    def row(self, arm: str) -> SummaryRow:
        for r in self.rows:
            if r.arm == arm:
                return r
        raise InputError(f"no arm named {arm!r} in summary")


_COLUMNS = [
    "arm", "source", "value", "ci_low", "ci_high", "oracle_ref", "ratio",
    "note", "error",
]


def _fmt(x: Optional[float]) -> str:
    return "" if x is None else f"{x:.10g}"


def write_summary_csv(path: Union[str, Path], table: SummaryTable) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["setting", table.setting, "objective", table.objective])
        writer.writerow(_COLUMNS)
        for r in table.rows:
            writer.writerow([
                r.arm, r.source, _fmt(r.value), _fmt(r.ci_low), _fmt(r.ci_high),
                _fmt(r.oracle_ref), _fmt(r.ratio), r.note, r.error,
            ])


def read_summary_csv(path: Union[str, Path]) -> SummaryTable:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2 or rows[0][0] != "setting":
        raise InputError(f"{path}: not a summary table")
    table = SummaryTable(setting=rows[0][1], objective=rows[0][3])
    for raw in rows[2:]:
        rec = dict(zip(_COLUMNS, raw))
        table.rows.append(
            SummaryRow(
                arm=rec["arm"],
                source=rec["source"],
                value=float(rec["value"]) if rec["value"] else None,
                ci_low=float(rec["ci_low"]) if rec["ci_low"] else None,
                ci_high=float(rec["ci_high"]) if rec["ci_high"] else None,
                oracle_ref=float(rec["oracle_ref"]) if rec["oracle_ref"] else None,
                note=rec["note"],
                error=rec["error"],
            )
        )
    return table


def _allowance(low: SummaryRow, high: SummaryRow) -> float:
    # CI half-widths absorb sampling noise; exact values get a float epsilon
    out = 1e-9
    if low.ci_low is not None and low.value is not None:
        out += low.value - low.ci_low
    if high.ci_high is not None and high.value is not None:
        out += high.ci_high - high.value
    return out


def monotonicity_violations(rows: Sequence[SummaryRow]) -> list[str]:
    """Class-ordering breaches: a smaller class beating a larger one."""
    out = []
    scored = [
        r for r in rows
        if r.value is not None and r.mechanism_class in _CLASS_RANK
    ]
    for low in scored:
        for high in scored:
            if _CLASS_RANK[low.mechanism_class] >= _CLASS_RANK[high.mechanism_class]:
                continue
            if low.value > high.value + _allowance(low, high):
                out.append(
                    f"{low.arm} ({low.mechanism_class}) = {low.value:.6g} exceeds "
                    f"{high.arm} ({high.mechanism_class}) = {high.value:.6g}"
                )
    return out


def compare(artifact_dirs: Sequence[Union[str, Path]]) -> SummaryTable:
    """Merge the summaries of several runs of the same setting/objective."""
    if not artifact_dirs:
        raise InputError("compare needs at least one artifact directory")
    tables = []
    for d in artifact_dirs:
        d = Path(d)
        path = d / "summary.csv"
        if not path.exists():
            path = d / "solution.csv"
        if not path.exists():
            raise InputError(f"{d}: no summary.csv or solution.csv")
        tables.append((d.name, read_summary_csv(path)))
    setting = tables[0][1].setting
    objective = tables[0][1].objective
    for name, t in tables[1:]:
        if t.setting != setting or t.objective != objective:
            raise InputError(
                f"cannot compare {name}: setting/objective "
                f"({t.setting}, {t.objective}) != ({setting}, {objective})"
            )
    merged = SummaryTable(setting=setting, objective=objective)
    names_seen: set[str] = set()
    for dirname, t in tables:
        for r in t.rows:
            arm = r.arm if r.arm not in names_seen else f"{dirname}/{r.arm}"
            names_seen.add(arm)
            merged.rows.append(
                SummaryRow(
                    arm=arm, source=r.source, value=r.value, ci_low=r.ci_low,
                    ci_high=r.ci_high, oracle_ref=r.oracle_ref, note=r.note,
                    error=r.error,
                )
            )
    merged.violations = monotonicity_violations(merged.rows)
    return merged


# ----------------------------------------------------------------- figures


def render_curves_figure(out: Path, cfg, rows: Sequence[SummaryRow]) -> Optional[Path]:
    """Learning curves with top-3 CI bands, one PNG next to the CSVs."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    learned = [
        r for r in rows if r.source in STATISTIC_KINDS and not r.error
    ]
    if not learned:
        return None
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for r in learned:
        path = out / f"arm_{r.arm}_aggregate.csv"
        if not path.exists():
            continue
        with open(path, newline="") as fh:
            data = list(csv.reader(fh))[1:]
        steps = [int(row[0]) for row in data]
        mean = [float(row[1]) for row in data]
        lo = [float(row[2]) for row in data]
        hi = [float(row[3]) for row in data]
        (line,) = ax.plot(steps, mean, label=f"{r.arm} ({r.source})")
        ax.fill_between(steps, lo, hi, alpha=0.2, color=line.get_color())
    for r in rows:
        if r.source in STATISTIC_KINDS or r.value is None:
            continue
        ax.axhline(r.value, linestyle="--", linewidth=1, color="gray")
        ax.annotate(
            r.arm, (0.99, r.value), xycoords=("axes fraction", "data"),
            ha="right", va="bottom", fontsize=8, color="gray",
        )
    ax.set_xlabel("environment steps")
    ax.set_ylabel("evaluation objective")
    ax.set_title(f"{cfg.setting} learning curves")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    target = out / "curves.png"
    fig.savefig(target, dpi=120)
    plt.close(fig)
    return target


def render_compare_figure(
    out: Path, table: SummaryTable
) -> Optional[Path]:
    """Final-value bar chart for a merged comparison."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = [r for r in table.rows if r.value is not None]
    if not rows:
        return None
    fig, ax = plt.subplots(figsize=(7, 4))
    xs = range(len(rows))
    values = [r.value for r in rows]
    errs = [
        [
            0 if r.ci_low is None else r.value - r.ci_low
            for r in rows
        ],
        [
            0 if r.ci_high is None else r.ci_high - r.value
            for r in rows
        ],
    ]
    ax.bar(xs, values, yerr=errs, capsize=3)
    ax.set_xticks(list(xs))
    ax.set_xticklabels([r.arm for r in rows], rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("final objective")
    ax.set_title(f"{table.setting} ({table.objective})")
    fig.tight_layout()
    target = out / "compare.png"
    fig.savefig(target, dpi=120)
    plt.close(fig)
    return target


def write_compare_csv(path: Union[str, Path], table: SummaryTable) -> None:
    write_summary_csv(path, table)
    if table.violations:
        with open(path, "a", newline="") as fh:
            writer = csv.writer(fh)
            for v in table.violations:
                writer.writerow(["violation", v])
