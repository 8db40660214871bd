"""Trojan-horse isolation budget in decibels.

The round-trip isolation of Alice's module is ``n*I + 2*A + R`` (isolators
passed once each way, the attenuator twice, and the back-reflection). The
OPL's own isolation is deliberately not counted: under attack its loss can
fall. Security needs ``mu_out = gamma + chi`` (dB) at or below the leakage
target, so the required isolation is ``gamma = mu_out - chi``.

Magnitudes (positive dB) are used for component values; ``gamma`` is signed.
"""
from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass

from .errors import ValidationError
from .pulse import ANCHOR_WIDTH_S, PulseTrain, photons_per_pulse

MU_OUT_TARGET = 1e-6

# leakage exponents the Table I budgets were derived from (dB, rounded)
ROUNDED_CHI_DB = {40e6: 90.0, 1e9: 80.0}

# worst-case transmitted peak (W) behind the exact leakage at each clock rate
WORST_CASE_PEAK_W = {40e6: 38.83e-3, 1e9: 55.31e-3}


def to_db(x: float) -> float:
    if not x > 0:
        raise ValidationError(f"to_db needs a positive ratio, got {x}")
    return 10.0 * math.log10(x)


def from_db(db: float) -> float:
    return 10.0 ** (db / 10.0)


def clock_label(rate_Hz: float) -> str:
    if rate_Hz >= 1e9:
        return f"{rate_Hz / 1e9:g} GHz"
    if rate_Hz >= 1e6:
        return f"{rate_Hz / 1e6:g} MHz"
    return f"{rate_Hz:g} Hz"


@dataclass(frozen=True)
class LeakageBudget:
    clock_rate_Hz: float
    chi_photons: float
    mu_out_target: float = MU_OUT_TARGET

    def __post_init__(self):
        if not self.chi_photons >= 1:
            raise ValidationError("chi_photons must be >= 1")
        if not 0 < self.mu_out_target:
            raise ValidationError("mu_out_target must be positive")

    @classmethod
    def from_peak(cls, clock_rate_Hz: float, peak_W: float, width_s: float | None = None,
                  mu_out_target: float = MU_OUT_TARGET) -> "LeakageBudget":
        """Budget whose leakage is the photon count of one transmitted pulse."""
        width = ANCHOR_WIDTH_S[clock_rate_Hz] if width_s is None else width_s
        chi = photons_per_pulse(PulseTrain(clock_rate_Hz, width, peak_W))
        return cls(clock_rate_Hz, chi, mu_out_target)

    @classmethod
    def worst_case(cls, clock_rate_Hz: float) -> "LeakageBudget":
        return cls.from_peak(clock_rate_Hz, WORST_CASE_PEAK_W[clock_rate_Hz])

    @property
    def chi_db(self) -> float:
        return to_db(self.chi_photons)


def required_gamma(budget: LeakageBudget, paper_rounding: bool = False) -> float:
    """Required (signed) isolation in dB.

    With ``paper_rounding`` the leakage exponent is replaced by the rounded
    value used for the published budgets at that clock rate.
    """
    chi_db = budget.chi_db
    if paper_rounding:
        try:
            chi_db = ROUNDED_CHI_DB[budget.clock_rate_Hz]
        except KeyError:
            raise ValidationError(f"no rounded leakage for {clock_label(budget.clock_rate_Hz)}") from None
    return to_db(budget.mu_out_target) - chi_db


@dataclass(frozen=True, order=True)
class IsolationStack:
    n_isolators: int
    isolator_db: float
    attenuator_db: float
    reflectivity_db: float

    def __post_init__(self):
        if self.n_isolators < 0 or int(self.n_isolators) != self.n_isolators:
            raise ValidationError("n_isolators must be a non-negative integer")
        if min(self.isolator_db, self.attenuator_db, self.reflectivity_db) < 0:
            raise ValidationError("isolation magnitudes must be non-negative")
        if self.n_isolators == 0:
            object.__setattr__(self, "isolator_db", 0.0)

    @property
    def achieved_db(self) -> float:
        return self.n_isolators * self.isolator_db + 2 * self.attenuator_db + self.reflectivity_db

    @property
    def attenuator_free(self) -> bool:
        return self.attenuator_db == 0


@dataclass(frozen=True)
class StackCheck:
    passed: bool
    margin_db: float


def check_stack(stack: IsolationStack, gamma_required_db: float) -> StackCheck:
    """Compare a stack with a required isolation (magnitude; sign ignored)."""
    required = abs(gamma_required_db)
    margin = stack.achieved_db - required
    return StackCheck(margin >= 0, margin)


@dataclass(frozen=True)
class Catalog:
    isolator_db: tuple = ()
    attenuator_db: tuple = ()
    reflectivity_db: tuple = ()
    max_isolators: int = 2

    def __post_init__(self):
        for name in ("isolator_db", "attenuator_db", "reflectivity_db"):
            vals = tuple(sorted({float(v) for v in getattr(self, name)}))
            if any(v < 0 for v in vals):
                raise ValidationError(f"{name} options must be non-negative")
            object.__setattr__(self, name, vals)
        if self.max_isolators < 0:
            raise ValidationError("max_isolators must be non-negative")

    @classmethod
    def from_dict(cls, data: dict) -> "Catalog":
        return cls(
            isolator_db=tuple(data.get("isolator_db", ())),
            attenuator_db=tuple(data.get("attenuator_db", ())),
            reflectivity_db=tuple(data.get("reflectivity_db", ())),
            max_isolators=int(data.get("max_isolators", 2)),
        )


TABLE1_CATALOG = Catalog(isolator_db=(50, 60), attenuator_db=(0, 10, 40),
                         reflectivity_db=(20, 30, 40), max_isolators=2)


def _sort_key(stack: IsolationStack):
    return (stack.n_isolators, stack.achieved_db, stack.reflectivity_db,
            stack.attenuator_db, stack.isolator_db)


def search_stacks(catalog: Catalog, gamma_required_db: float) -> list[IsolationStack]:
    """All catalog stacks meeting the requirement, fewest isolators first.

    For each isolator/attenuator choice the reflectivity options that pass
    form a suffix of the sorted list, located by bisection.
    """
    required = abs(gamma_required_db)
    if not (catalog.attenuator_db and catalog.reflectivity_db):
        return []
    found = []
    for n in range(catalog.max_isolators + 1):
        isolators = (0.0,) if n == 0 else catalog.isolator_db
        for iso, att in itertools.product(isolators, catalog.attenuator_db):
            need = required - n * iso - 2 * att
            start = bisect.bisect_left(catalog.reflectivity_db, need - 1e-9)
            found.extend(IsolationStack(n, iso, att, r) for r in catalog.reflectivity_db[start:])
    return sorted(found, key=_sort_key)


# the published combinations: (clock rate, stack)
TABLE1_ROWS = (
    (1e9, IsolationStack(1, 60, 40, 40)),
    (1e9, IsolationStack(2, 60, 0, 20)),
    (40e6, IsolationStack(2, 50, 10, 40)),
    (40e6, IsolationStack(2, 60, 0, 30)),
)

TABLE1_HEADER = "Clock rate, |gamma|, |R|, |A|, |I|(n)"


def format_row(clock_rate_Hz: float, gamma_db: float, stack: IsolationStack) -> str:
    return (f"{clock_label(clock_rate_Hz)}, {abs(gamma_db):g}, {stack.reflectivity_db:g}, "
            f"{stack.attenuator_db:g}, {stack.isolator_db:g}({stack.n_isolators})")


def render_table(rows) -> str:
    """Rows of ``(clock_rate, gamma_db, stack)`` as comma-separated text."""
    lines = [TABLE1_HEADER] + [format_row(*row) for row in rows]
    return "\n".join(lines) + "\n"


def table1(paper_rounding: bool = True) -> str:
    """Render the published combinations with budgets recomputed here.

    Raises ValidationError if a listed stack fails its requirement.
    """
    rows = []
    for rate, stack in TABLE1_ROWS:
        gamma = required_gamma(LeakageBudget.worst_case(rate), paper_rounding)
        if not check_stack(stack, gamma).passed:
            raise ValidationError(f"{format_row(rate, gamma, stack)} does not meet its budget")
        rows.append((rate, gamma, stack))
    return render_table(rows)
