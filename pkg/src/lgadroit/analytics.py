"""Correlator estimates, adroitness bounds, the LG quantity and the verdict.

Estimation follows the program's repetition structure: each repetition's
shot table yields one correlator value, and the report carries the
cross-repetition mean with the sample standard error (std/sqrt(n_reps)).
Initialization contributes the constant +1 to every correlator involving
O1, so <O1 O3> reduces to <O3> and <O1 O2>_f to <O2>_f.

Errors on derived quantities propagate in quadrature and are reported
alongside; the verdict itself is decided on central values.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import sqrt
from typing import Mapping, Sequence

from .protocols import ProtocolId, ProtocolRun, bit_value
from .qsim import ValidationError


class Verdict(str, Enum):
    VIOLATION_ESTABLISHED = "violation_established"
    VIOLATION_UNRESOLVED = "violation_unresolved"
    NO_VIOLATION = "no_violation"


@dataclass(frozen=True)
class CorrelatorEstimate:
    mean: float
    stderr: float
    n_reps: int

    def __post_init__(self):
        if abs(self.mean) > 1.0 + 1e-12:
            raise ValidationError(f"correlator mean {self.mean} outside [-1, 1]")
        if not self.stderr >= 0.0:
            raise ValidationError(f"stderr must be finite and >= 0, got {self.stderr}")


@dataclass(frozen=True)
class ValueWithError:
    value: float
    error: float


def shot_product_mean(counts: Mapping[str, int], roles: Mapping[str, int],
                      pair: tuple[str, str]) -> float:
    """Mean over one table's shots of the product of two measurement values.

    The symbol "O1" stands for the initialization read and contributes the
    constant +1.
    """
    qubits = []
    for symbol in pair:
        if symbol == "O1":
            continue
        if symbol not in roles:
            raise ValidationError(f"no role {symbol!r} in this protocol")
        qubits.append(roles[symbol])
    total = sum(counts.values())
    if total == 0:
        raise ValidationError("empty shot table")
    acc = 0
    for outcome, count in counts.items():
        prod = 1
        for q in qubits:
            prod *= bit_value(outcome, q)
        acc += prod * count
    return acc / total


def correlator(tables: Sequence[Mapping[str, int]], roles: Mapping[str, int],
               pair: tuple[str, str]) -> CorrelatorEstimate:
    """Cross-repetition mean and sample standard error of one correlator."""
    if len(tables) < 2:
        raise ValidationError("need >= 2 repetitions for a standard error")
    values = [shot_product_mean(t, roles, pair) for t in tables]
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return CorrelatorEstimate(mean, sqrt(var / n), n)


def adroitness(est_x: CorrelatorEstimate, est_a: CorrelatorEstimate) -> ValueWithError:
    """|<O1 O3>_x - <O1 O3>_a| with quadrature error."""
    return ValueWithError(abs(est_x.mean - est_a.mean),
                          sqrt(est_x.stderr ** 2 + est_a.stderr ** 2))


def adroitness_total(parts: Sequence[ValueWithError]) -> ValueWithError:
    return ValueWithError(sum(p.value for p in parts),
                          sqrt(sum(p.error ** 2 for p in parts)))


def lg_quantity(c_a: CorrelatorEstimate, c_12: CorrelatorEstimate,
                c_23: CorrelatorEstimate) -> ValueWithError:
    """<O1 O3>_a + <O1 O2>_f + <O2 O3>_f + 1, error in quadrature."""
    return ValueWithError(c_a.mean + c_12.mean + c_23.mean + 1.0,
                          sqrt(c_a.stderr ** 2 + c_12.stderr ** 2 + c_23.stderr ** 2))


def verdict(lg: ValueWithError, eps_total: ValueWithError) -> Verdict:
    """Two-part decision on central values: negative and outside the adroitness budget."""
    if lg.value >= 0.0:
        return Verdict.NO_VIOLATION
    if abs(lg.value) >= eps_total.value:
        return Verdict.VIOLATION_ESTABLISHED
    return Verdict.VIOLATION_UNRESOLVED


def no_signaling_check(c_f: CorrelatorEstimate, c_a: CorrelatorEstimate) -> ValueWithError:
    """|<O1 O3>_f - <O1 O3>_a|; diagnostic only, not part of the verdict."""
    return ValueWithError(abs(c_f.mean - c_a.mean),
                          sqrt(c_f.stderr ** 2 + c_a.stderr ** 2))


def per_shot_lg_min(counts: Mapping[str, int], roles: Mapping[str, int]) -> int:
    """Min over observed shots of O1 O3 + O1 O2 + O2 O3 + 1 (O1 = +1)."""
    best = None
    for outcome in counts:
        o2 = bit_value(outcome, roles["O2"])
        o3 = bit_value(outcome, roles["O3"])
        val = o3 + o2 + o2 * o3 + 1
        best = val if best is None else min(best, val)
    if best is None:
        raise ValidationError("empty shot table")
    return best


@dataclass(frozen=True)
class AdroitnessReport:
    eps_b: ValueWithError
    eps_c: ValueWithError
    eps_d: ValueWithError
    eps_e: ValueWithError
    eps_total: ValueWithError

    def __post_init__(self):
        parts = self.eps_b.value + self.eps_c.value + self.eps_d.value + self.eps_e.value
        if abs(self.eps_total.value - parts) > 1e-12:
            raise ValidationError("eps_total must be the sum of the four epsilon values")


@dataclass(frozen=True)
class LGReport:
    c_a: CorrelatorEstimate
    c_12: CorrelatorEstimate
    c_23: CorrelatorEstimate
    lg: ValueWithError
    eps_total: ValueWithError
    verdict: Verdict

    def __post_init__(self):
        s = self.c_a.mean + self.c_12.mean + self.c_23.mean + 1.0
        if abs(self.lg.value - s) > 1e-12:
            raise ValidationError("lg value must equal the correlator sum + 1")


@dataclass(frozen=True)
class ProgramReport:
    correlators: dict[str, CorrelatorEstimate]  # a..e, f_o1o2, f_o2o3, f_o1o3
    lg_report: LGReport
    adroitness_report: AdroitnessReport
    no_signaling: ValueWithError


def analyze(runs: Mapping[ProtocolId, ProtocolRun]) -> ProgramReport:
    """Turn a full program's shot tables into the two result tables."""
    def corr(pid: ProtocolId, pair: tuple[str, str]) -> CorrelatorEstimate:
        run = runs[pid]
        return correlator(run.tables, run.protocol.roles, pair)

    correlators = {
        "a": corr(ProtocolId.A, ("O1", "O3")),
        "b": corr(ProtocolId.B, ("O1", "O3")),
        "c": corr(ProtocolId.C, ("O1", "O3")),
        "d": corr(ProtocolId.D, ("O1", "O3")),
        "e": corr(ProtocolId.E, ("O1", "O3")),
        "f_o1o2": corr(ProtocolId.F, ("O1", "O2")),
        "f_o2o3": corr(ProtocolId.F, ("O2", "O3")),
        "f_o1o3": corr(ProtocolId.F, ("O1", "O3")),
    }
    eps = {x: adroitness(correlators[x], correlators["a"]) for x in "bcde"}
    eps_total = adroitness_total([eps[x] for x in "bcde"])
    lg = lg_quantity(correlators["a"], correlators["f_o1o2"], correlators["f_o2o3"])
    lg_report = LGReport(correlators["a"], correlators["f_o1o2"], correlators["f_o2o3"],
                         lg, eps_total, verdict(lg, eps_total))
    adr = AdroitnessReport(eps["b"], eps["c"], eps["d"], eps["e"], eps_total)
    return ProgramReport(
        correlators=correlators,
        lg_report=lg_report,
        adroitness_report=adr,
        no_signaling=no_signaling_check(correlators["f_o1o3"], correlators["a"]),
    )


# ---------------------------------------------------------------------------
# Fig.-6-shaped human tables
# ---------------------------------------------------------------------------

def _cell(value: float, error: float | None = None) -> str:
    if error is None:
        return f"{value:.2f}"
    return f"{value:.2f} ± {error:.2f}"


def format_tables(report: ProgramReport,
                  predictions: tuple[float, float, float, float],
                  eps_predictions: tuple[float, float, float, float]) -> str:
    """The two result tables, rounded to 2 decimals like the reference layout.

    ``predictions`` is the quantum (c_a, c_12, c_23, lg) row and
    ``eps_predictions`` the four predicted adroitness correlators.
    """
    c = report.correlators
    lg = report.lg_report
    rows1 = [
        ["", "<O1O3>_a", "<O1O2>_f", "<O2O3>_f", "LG"],
        ["Measured",
         _cell(c["a"].mean, c["a"].stderr), _cell(c["f_o1o2"].mean, c["f_o1o2"].stderr),
         _cell(c["f_o2o3"].mean, c["f_o2o3"].stderr), _cell(lg.lg.value, lg.lg.error)],
        ["Quantum Prediction", *(_cell(v) for v in predictions)],
    ]
    adr = report.adroitness_report
    rows2 = [
        ["", "<O1O3>_b", "<O1O3>_c", "<O1O3>_d", "<O1O3>_e", "eps_total"],
        ["Measured",
         _cell(c["b"].mean, c["b"].stderr), _cell(c["c"].mean, c["c"].stderr),
         _cell(c["d"].mean, c["d"].stderr), _cell(c["e"].mean, c["e"].stderr),
         _cell(adr.eps_total.value, adr.eps_total.error)],
        ["Quantum Prediction", *(_cell(v) for v in eps_predictions), _cell(0.0)],
    ]

    def table(title: str, rows: list[list[str]]) -> str:
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = [title]
        for r in rows:
            lines.append("  ".join(cell.rjust(w) for cell, w in zip(r, widths)).rstrip())
        return "\n".join(lines)

    return (table("The Leggett-Garg Quantity", rows1) + "\n\n"
            + table("Adroitness Test Results", rows2) + "\n")
