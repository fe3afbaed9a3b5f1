"""Deterministic sweep datasets and the perception-data fitting pipeline.

Builds the seeded random cell scenario, sweeps the weighting exponent alpha
across the recovery strategies, and emits each study as CSV rows (floats
printed with 9 significant digits). Also maps the bundled subjective-rating /
decoded-fps tables onto the unit square and fits the weighting exponent to
them.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import _search, prospect
from .channel import LinkBudget, channel_from_budget
from .game import (BenefitFunction, CostModel, NashResult, PricingFunction,
                   Scenario, min_bandwidth_for_user, solve_nash)
from .prospect import PRICE_EPS_REL, equalized_willingness, ne_preserved
from .weighting import InsufficientDataError, WeightingModel, fit_alpha

DEFAULT_SEED = 4966
DEFAULT_ALPHA_STEP = 0.005
# per-sweep default alpha windows; the loss/price window starts where the
# strict-vs-reallocation gap is still small, the others where the curves of
# interest (crossings, admission boundaries) live
DEFAULT_RANGE_LOSS = (0.92, 1.0)
DEFAULT_RANGE_PRICE = (0.92, 1.0)
DEFAULT_RANGE_EXPANSION = (0.84, 1.0)
DEFAULT_RANGE_ADMISSION = (0.85, 1.0)
DEFAULT_RANGE_COMPARISON = (0.85, 1.0)

HEADER_LOSS = ("alpha", "loss_strict_norm", "loss_realloc_norm")
HEADER_PRICE = ("alpha", "price_strict_norm", "price_realloc_norm")
HEADER_EXPANSION = ("alpha", "min_bw_norm", "max_revenue_norm", "const_1.0")
HEADER_ADMISSION = ("alpha", "n_served", "price_ratio", "loss_norm", "feasible")
HEADER_COMPARISON = ("alpha",
                     "bw_no_pricing_norm", "bw_expansion_norm",
                     "bw_admission_norm", "bw_rate_norm",
                     "rev_no_pricing_norm", "rev_expansion_norm",
                     "rev_admission_norm", "rev_rate_norm")
HEADER_NE = ("rate_bps", "n_served", "sp_revenue")
HEADER_FIT = ("alpha", "mse", "p", "w")


def build_scenario(n_users: int = 10, *, seed: int = DEFAULT_SEED,
                   cell_radius_m: float = 800.0,
                   tx_power_dbm: float = 40.0,
                   antenna_const_db: float = -64.5,
                   noise_psd_dbm_per_hz: float = -174.0,
                   ref_distance_m: float = 20.0,
                   pathloss_exponent: float = 4.0,
                   shadow_sigma_db: float = 4.0,
                   price_coeff: float = 2e-3, price_exp: float = 0.82,
                   benefit_coeff: float = 1e-2, benefit_exp: float = 0.65,
                   c1: float = (1.0 / 3.0) * 1e-6, c3: float = 1e-8,
                   bandwidth_margin: float = 0.10,
                   total_bandwidth_hz: float | None = None) -> Scenario:
    """Scenario with users placed uniformly over the cell disc.

    Per user, in index order: one uniform draw for the radial position
    (area-uniform, radius = R*sqrt(u), floored at the reference distance) and
    one normal draw for the shadowing term. This draw order is frozen by
    regression tests; changing it silently changes every golden dataset.

    Unless total_bandwidth_hz is given, the band is sized to the per-user
    minimum at the unconstrained optimal rate plus the stated margin.
    """
    if n_users < 1:
        raise ValueError("n_users must be >= 1")
    rng = np.random.default_rng(seed)
    pricing = PricingFunction(price_coeff, price_exp)
    benefit = BenefitFunction(benefit_coeff, benefit_exp)
    users = []
    for _ in range(n_users):
        dist = max(ref_distance_m, cell_radius_m * math.sqrt(rng.random()))
        shadow = rng.normal(0.0, shadow_sigma_db)
        lb = LinkBudget(tx_power_dbm=tx_power_dbm,
                        antenna_const_db=antenna_const_db,
                        pathloss_exponent=pathloss_exponent,
                        distance_m=dist,
                        ref_distance_m=ref_distance_m,
                        shadow_db=shadow,
                        noise_psd_dbm_per_hz=noise_psd_dbm_per_hz)
        users.append((channel_from_budget(lb), benefit))
    cost = CostModel(c1=c1, c3=c3)

    if total_bandwidth_hz is None:
        scratch = Scenario(users=tuple(users), pricing=pricing, cost=cost,
                           total_bandwidth_hz=1.0, rng_seed=seed)
        rate_opt = unconstrained_optimal_rate(pricing, cost)
        need = sum(min_bandwidth_for_user(rate_opt, i, scratch)
                   for i in range(n_users))
        total_bandwidth_hz = (1.0 + bandwidth_margin) * need
    return Scenario(users=tuple(users), pricing=pricing, cost=cost,
                    total_bandwidth_hz=total_bandwidth_hz, rng_seed=seed)


def unconstrained_optimal_rate(pricing: PricingFunction, cost: CostModel) -> float:
    """Rate maximizing the per-user margin r(b) - c1*b, ignoring bandwidth."""
    f = lambda b: pricing(b) - cost.c1 * b
    hi = 1e6
    while f(2.0 * hi) > f(hi):
        hi *= 2.0
        if hi > 1e15:
            raise ValueError("per-user margin does not peak below 1e15 bps")
    rate, _ = _search.golden_max(f, 1.0, 2.0 * hi, rel_tol=1e-10)
    return rate


def reference_offer(scenario: Scenario, ne: NashResult,
                    margin: float = 0.10) -> NashResult:
    """The solved outcome with each served user given margin over their minimum.

    This proportional split is the offer the sweeps perturb; with the band
    sized by the same margin it exhausts the endowment.
    """
    alloc = [0.0] * scenario.n_users
    for i in ne.served_set:
        alloc[i] = (1.0 + margin) * min_bandwidth_for_user(ne.rate_bps, i, scenario)
    return NashResult(rate_bps=ne.rate_bps, served_set=ne.served_set,
                      allocation=tuple(alloc), price=ne.price,
                      sp_revenue=ne.sp_revenue,
                      per_n_revenues=ne.per_n_revenues,
                      equilibrium=ne.equilibrium)


@dataclass(frozen=True)
class SweepSpec:
    scenario: Scenario
    alpha_min: float
    alpha_max: float
    alpha_step: float = DEFAULT_ALPHA_STEP
    rng_seed: int = DEFAULT_SEED
    offer_margin: float = 0.10
    strategies: tuple[str, ...] = prospect.STRATEGY_IDS

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha_min <= self.alpha_max <= 1.0):
            raise ValueError("alpha range must satisfy 0 < alpha_min <= alpha_max <= 1")
        if self.alpha_step <= 0.0:
            raise ValueError("alpha_step must be > 0")

    def alphas(self) -> list[float]:
        out = []
        k = 0
        while True:
            a = round(self.alpha_min + k * self.alpha_step, 12)
            if a > self.alpha_max + 1e-12:
                break
            out.append(min(a, 1.0))
            k += 1
        return out


@dataclass(frozen=True)
class SweepTable:
    header: tuple[str, ...]
    rows: tuple[tuple, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        write_csv(buf, self.header, self.rows)
        return buf.getvalue()


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return value.replace(",", ";")
    return "%.9g" % value


def write_csv(fileobj, header: tuple[str, ...], rows) -> None:
    fileobj.write(",".join(header) + "\n")
    for row in rows:
        fileobj.write(",".join(format_cell(v) for v in row) + "\n")


def _baseline(spec: SweepSpec) -> tuple[NashResult, float]:
    ne = solve_nash(spec.scenario)
    if not ne.equilibrium:
        raise ValueError("scenario has no equilibrium to perturb")
    ref = reference_offer(spec.scenario, ne, spec.offer_margin)
    eut = ne.sp_revenue
    return ref, eut


def sweep_revenue_loss(spec: SweepSpec) -> SweepTable:
    """Normalized revenue loss, constraints fixed vs allocation free."""
    ref, eut = _baseline(spec)
    rows = []
    for a in spec.alphas():
        model = WeightingModel(alpha=a)
        strict = prospect.loss_strict_rrm(spec.scenario, ref, model)
        realloc, _ = prospect.loss_with_reallocation(spec.scenario, ref, model)
        rows.append((a, min(1.0, strict / eut), min(1.0, realloc / eut)))
    return SweepTable(HEADER_LOSS, tuple(rows))


def sweep_price(spec: SweepSpec) -> SweepTable:
    """Acceptance-capped prices normalized by the baseline price."""
    ref, _ = _baseline(spec)
    rows = []
    for a in spec.alphas():
        model = WeightingModel(alpha=a)
        ps = prospect.strict_rrm_price(spec.scenario, ref, model) / ref.price
        pr = prospect.reallocation_price(spec.scenario, ref, model) / ref.price
        rows.append((a, ps, pr))
    return SweepTable(HEADER_PRICE, tuple(rows))


def sweep_expansion(spec: SweepSpec) -> SweepTable:
    """Band needed for full recovery at the old price, and best in-band revenue.

    Both columns are normalized so they cross 1.0 together: the aggregate
    requirement fits the endowment exactly when repricing at the equalized
    willingness recovers at least the baseline revenue.
    """
    ref, eut = _baseline(spec)
    sc = spec.scenario
    budget = sc.total_bandwidth_hz
    rows = []
    for a in spec.alphas():
        model = WeightingModel(alpha=a)
        need = ne_preserved(sc, ref, model).aggregate_required
        x, _ = equalized_willingness(sc, ref, model)
        rev = (ref.n_served * (x - sc.cost.c1 * ref.rate_bps)
               - sc.cost.c3 * budget)
        rows.append((a, need / budget, rev / eut, 1.0))
    return SweepTable(HEADER_EXPANSION, tuple(rows))


def _drop_order(scenario: Scenario, ref: NashResult) -> list[int]:
    """Served users ordered by who gets denied first: largest minimum first."""
    reqs = {i: min_bandwidth_for_user(ref.rate_bps, i, scenario)
            for i in ref.served_set}
    return sorted(ref.served_set, key=lambda i: (-reqs[i], i))


def sweep_admission(spec: SweepSpec, max_drops: int = 3) -> SweepTable:
    """Markup price and residual loss when up to max_drops users are denied.

    Denial order is largest minimum-bandwidth consumer first. The freed band is
    re-split over the retained users; the provider charges the
    revenue-preserving markup when the retained users accept it, otherwise the
    highest price they do accept.
    """
    ref, eut = _baseline(spec)
    sc = spec.scenario
    if not (0 <= max_drops < ref.n_served):
        raise ValueError(f"max_drops must lie in [0, {ref.n_served}), got {max_drops}")
    order = _drop_order(sc, ref)
    rows = []
    for a in spec.alphas():
        model = WeightingModel(alpha=a)
        for k in range(max_drops + 1):
            kept = tuple(sorted(order[k:]))
            target = prospect.admission_price(sc, ref, len(kept))
            cap, _ = equalized_willingness(sc, ref, model, served=kept)
            feasible = cap > target
            price = target if feasible else cap - PRICE_EPS_REL * ref.price
            rev = (len(kept) * (price - sc.cost.c1 * ref.rate_bps)
                   - sc.cost.c3 * sc.total_bandwidth_hz)
            loss = min(1.0, max(0.0, (eut - max(0.0, rev)) / eut))
            rows.append((a, len(kept), price / ref.price, loss, feasible))
    return SweepTable(HEADER_ADMISSION, tuple(rows))


def sweep_comparison(spec: SweepSpec) -> SweepTable:
    """Required band and best revenue for each recovery strategy, side by side.

    The no-pricing baseline holds the old price and buys whatever band the
    aggregate requirement demands. Expansion reprices at the equalized
    willingness; its full-recovery band equals the baseline's. Admission denies
    the heaviest consumer without re-splitting the survivors' band, so below
    some alpha no markup is acceptable and the threshold cells are empty. Rate
    control additionally moves the offered rate to wherever the total
    requirement is smallest.
    """
    ref, eut = _baseline(spec)
    sc = spec.scenario
    budget = sc.total_bandwidth_hz
    c1, c3 = sc.cost.c1, sc.cost.c3
    b_star = ref.rate_bps
    order = _drop_order(sc, ref)
    kept = tuple(sorted(order[1:]))
    markup = prospect.admission_price(sc, ref, len(kept))

    rate_grid = [float(b) for b in np.geomspace(1e-3 * b_star, 10.0 * b_star, 36)]

    rows = []
    for a in spec.alphas():
        model = WeightingModel(alpha=a)
        need = ne_preserved(sc, ref, model).aggregate_required
        bw_np = need / budget
        bw_exp = bw_np

        x_hat, _ = equalized_willingness(sc, ref, model)
        rev_np = (ref.n_served * (ref.price - c1 * b_star)
                  - c3 * max(budget, need)) / eut
        rev_exp = (ref.n_served * (x_hat - c1 * b_star) - c3 * budget) / eut

        # admission: survivors keep their original split; the markup must be
        # acceptable as-is, else the strategy has no solution at this alpha
        will = [prospect.willingness(sc, ref, model, i, ref.allocation[i])
                for i in kept]
        p_cap = min(will)
        adm_ok = p_cap >= markup
        if adm_ok:
            reqs = prospect.admission_requirements(sc, ref, model, markup)
            bw_adm = sum(reqs[i] for i in kept) / budget
            rev_adm = 1.0
        else:
            bw_adm = None
            rev_adm = (len(kept) * (p_cap - c1 * b_star) - c3 * budget) / eut

        rc = prospect.rate_control(sc, ref, model)
        bw_rate = rc.min_bandwidth_threshold_hz / budget
        best = -math.inf
        for b_pt in rate_grid:
            x, _ = equalized_willingness(sc, ref, model, rate_bps=b_pt)
            best = max(best, (ref.n_served * (x - c1 * b_pt) - c3 * budget) / eut)
        rows.append((a, bw_np, bw_exp, bw_adm, bw_rate,
                     rev_np, rev_exp, rev_adm, best))
    return SweepTable(HEADER_COMPARISON, tuple(rows))


@dataclass(frozen=True)
class PsychRecord:
    packet_loss_pct: float
    delay_ms: float
    rating_mean: float | None
    rating_dev: float | None
    fps_mean: float | None
    fps_dev: float | None
    valid: bool = True

    def __post_init__(self) -> None:
        if self.valid:
            if self.fps_mean is None or not self.fps_mean > 0.0:
                raise ValueError("valid records need fps_mean > 0")
            if self.rating_mean is None or not 1.0 <= self.rating_mean <= 4.0:
                raise ValueError("valid records need rating_mean in [1, 4]")


PSYCH_COLUMNS = ("packet_loss_pct", "delay_ms", "rating_mean", "rating_dev",
                 "fps_mean", "fps_dev")


def load_psych_records(fileobj) -> list[PsychRecord]:
    """Parse the merged ratings/fps CSV; empty fps_mean marks a cell invalid."""
    reader = csv.DictReader(fileobj)
    missing = [c for c in PSYCH_COLUMNS if c not in (reader.fieldnames or ())]
    if missing:
        raise ValueError(f"psychophysics CSV is missing columns: {missing}")
    records = []
    for row in reader:
        def num(col: str) -> float | None:
            text = (row[col] or "").strip()
            return float(text) if text else None
        fps = num("fps_mean")
        records.append(PsychRecord(
            packet_loss_pct=float(row["packet_loss_pct"]),
            delay_ms=float(row["delay_ms"]),
            rating_mean=num("rating_mean"),
            rating_dev=num("rating_dev"),
            fps_mean=fps,
            fps_dev=num("fps_dev"),
            valid=fps is not None))
    return records


def bundled_psych_records() -> list[PsychRecord]:
    path = resources.files(__package__) / "data" / "psychophysics.csv"
    with path.open("r", encoding="utf-8") as f:
        return load_psych_records(f)


def fit_psychophysics(records: list[PsychRecord]) -> tuple[WeightingModel, float, tuple[tuple[float, float], ...]]:
    """Map valid cells to the unit square and fit the weighting exponent.

    Objective probability: mean fps over the maximum mean fps among valid
    cells. Subjective weight: the 1-4 rating rescaled affinely onto [0, 1].
    Returns (model, mse, mapped samples).
    """
    valid = [rec for rec in records if rec.valid]
    if len(valid) < 2:
        raise InsufficientDataError(
            f"need at least 2 valid records, got {len(valid)}")
    fps_max = max(rec.fps_mean for rec in valid)
    samples = tuple((rec.fps_mean / fps_max, (rec.rating_mean - 1.0) / 3.0)
                    for rec in valid)
    model, mse = fit_alpha(samples)
    return model, mse, samples


def ne_table(scenario: Scenario) -> SweepTable:
    ne = solve_nash(scenario)
    return SweepTable(HEADER_NE, ((ne.rate_bps, ne.n_served, ne.sp_revenue),))


def fit_table(records: list[PsychRecord]) -> SweepTable:
    model, mse, samples = fit_psychophysics(records)
    rows = tuple((model.alpha, mse, p, w) for p, w in samples)
    return SweepTable(HEADER_FIT, rows)
