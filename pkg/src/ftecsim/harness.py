"""Monte Carlo experiments, fault-injection checks, and threshold analysis.

The experiment loop is deliberately flat Python over packed integers: a
round with no faults costs one prefetched binomial draw, one comparison
against the previous syndrome, and one decision-table lookup, which is
what makes 1e7-shot points practical at low physical error rates. Rounds
with faults take the detailed location path shared with the deterministic
fault-injection harness.

Reproducibility: shots are processed in fixed-size chunks and every chunk
draws from its own counter-based Philox stream keyed by
(seed, point_key, chunk_index). Aggregation adds counts in chunk order,
so results are byte-identical for any worker count, and the optional
stop-after-N-logical-errors rule is evaluated at chunk boundaries in
chunk order for the same reason.
"""

from __future__ import annotations

import dataclasses
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import decoders
from .colorcode import build_hex_color_code
from .decoders import (
    CONTINUE,
    SHOR_CAP,
    SHOR_REPEAT,
    STOP_CORRECT,
    USABLE_RUN,
    PolicyConfig,
    decision_table,
    make_policy,
)
from .extraction import (
    CompiledSchedule,
    FrameState,
    NoiseModel,
    _apply_faults,
    compile_schedule,
    inject_round,
    legal_values,
    sample_round,
)
from .recovery import SyndromeTable, build_table, decode_sector_masks, enumeration_count
from .stabilizer import PauliOperator, StabilizerCode

CHUNK_SHOTS = 4096
SUPPORTED_DISTANCES = (3, 5, 7, 9)
WORKER_ENV_VAR = "FTECSIM_WORKERS"

_WILSON_Z = 1.959963984540054  # 95 percent


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulation campaign: a code, a decoder, and sampling controls."""

    d: int
    decoder: str
    p_values: tuple[float, ...] = ()
    shots: int = 10_000
    seed: int = 0
    css_two_stage: bool = False
    max_errors: int | None = None
    workers: int | None = None
    built_to_weight: int | None = None

    def __post_init__(self):
        if self.d not in SUPPORTED_DISTANCES:
            raise ValueError(f"d must be one of {SUPPORTED_DISTANCES}, got {self.d}")
        if self.decoder not in decoders.KINDS:
            raise ValueError(f"unknown decoder {self.decoder!r}")
        if self.shots < 1:
            raise ValueError("shots must be positive")
        for p in self.p_values:
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"physical error rate {p} outside [0, 1]")
        if self.css_two_stage and self.decoder == "shor":
            raise ValueError("two-stage mode applies to the strong or weak decoders")

    @property
    def t(self) -> int:
        return (self.d - 1) // 2


@dataclass(frozen=True)
class ShotResult:
    logical_error: bool
    rounds: int
    stopped_by: str


@dataclass
class ExperimentStats:
    p: float
    shots: int
    logical_errors: int
    p_l_hat: float
    ci_low: float
    ci_high: float
    avg_rounds: float
    rounds_histogram: dict[int, int]
    max_rounds_seen: int
    stopped_by: dict[str, int]
    seed: int

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def wilson_interval(errors: int, shots: int, z: float = _WILSON_Z) -> tuple[float, float]:
    if shots == 0:
        return (0.0, 1.0)
    phat = errors / shots
    denom = 1.0 + z * z / shots
    center = (phat + z * z / (2 * shots)) / denom
    half = (z / denom) * math.sqrt(phat * (1 - phat) / shots + z * z / (4 * shots * shots))
    return (max(0.0, center - half), min(1.0, center + half))


def default_built_to_weight(code: StabilizerCode, t: int, budget: int = 2_000_000) -> int:
    """Deepest table weight within the enumeration budget, at most t + 1."""
    w = t + 1
    while w > 1 and enumeration_count(code.n, w) > budget:
        w -= 1
    return w


# ---------------------------------------------------------------------------
# Engine context (immutable per process, shared by all chunks)


class _Context:
    def __init__(self, d: int, decoder: str, css_two_stage: bool, built_to_weight: int | None):
        self.d = d
        self.kind = decoder
        self.t = (d - 1) // 2
        self.css_two_stage = css_two_stage
        self.code = build_hex_color_code(d)
        weight = (
            built_to_weight
            if built_to_weight is not None
            else default_built_to_weight(self.code, self.t)
        )
        self.table = build_table(self.code, weight)
        flags = NoiseModel(0.0)
        self.compiled_all = compile_schedule(self.code, flags)
        if css_two_stage:
            self.compiled_x = compile_schedule(self.code, flags, "x")
            self.compiled_z = compile_schedule(self.code, flags, "z")
        self.m = len(self.code.x_sector)
        self.x_mask = (1 << self.m) - 1
        self.logical_mask = self.code.logical_x[0].x_bits
        if self.kind == "shor":
            self.tables = None
        else:
            self.tables = (
                decision_table(self.kind, self.t, False),
                decision_table(self.kind, self.t, True),
            )
        self.cap = PolicyConfig(self.kind, self.t).max_rounds_cap()
        if css_two_stage:
            self.cap = 2 * self.cap


_CTX_CACHE: dict[tuple, _Context] = {}


def _context(key: tuple) -> _Context:
    ctx = _CTX_CACHE.get(key)
    if ctx is None:
        ctx = _Context(*key)
        _CTX_CACHE[key] = ctx
    return ctx


class _BufferedSampler:
    """Round sampler with block-prefetched draws, one per chunk stream."""

    __slots__ = ("compiled", "p", "rng", "n_enabled", "enabled", "effects",
                 "_kbuf", "_ki", "_ubuf", "_ui", "_block")

    def __init__(self, compiled: CompiledSchedule, p: float, rng: np.random.Generator,
                 block: int = 4096):
        self.compiled = compiled
        self.p = float(p)
        self.rng = rng
        self.n_enabled = len(compiled.enabled_ids)
        self.enabled = compiled.enabled_ids
        self.effects = compiled.loc_effects
        self._block = block
        self._kbuf = ()
        self._ki = 0
        self._ubuf = ()
        self._ui = 0

    def _next_k(self) -> int:
        if self._ki >= len(self._kbuf):
            self._kbuf = self.rng.binomial(self.n_enabled, self.p, self._block).tolist()
            self._ki = 0
        k = self._kbuf[self._ki]
        self._ki += 1
        return k

    def _next_u(self) -> float:
        if self._ui >= len(self._ubuf):
            self._ubuf = self.rng.random(self._block).tolist()
            self._ui = 0
        u = self._ubuf[self._ui]
        self._ui += 1
        return u

    def round(self, frame: FrameState) -> int:
        if self.p <= 0.0 or self.n_enabled == 0:
            return self.compiled.reported_bits(frame.syndrome)
        k = self._next_k()
        if k == 0:
            return self.compiled.reported_bits(frame.syndrome)
        n = self.n_enabled
        if k >= n:
            ids = range(n)
        elif k == 1:
            ids = (int(self._next_u() * n),)
        elif k <= 8:
            chosen: set[int] = set()
            while len(chosen) < k:
                chosen.add(int(self._next_u() * n))
            ids = sorted(chosen)
        else:
            ids = sorted(self.rng.choice(n, size=k, replace=False).tolist())
        enabled = self.enabled
        effects = self.effects
        fired = []
        for i in ids:
            flat = enabled[i]
            n_choices = len(effects[flat])
            choice = int(self._next_u() * n_choices) if n_choices > 1 else 0
            fired.append((flat, choice))
        return _apply_faults(self.compiled, frame, fired)


class _ChunkAccumulator:
    __slots__ = ("shots", "errors", "rounds_sum", "hist", "max_rounds", "stopped_by")

    def __init__(self, cap: int):
        self.shots = 0
        self.errors = 0
        self.rounds_sum = 0
        self.hist = [0] * (cap + 2)
        self.max_rounds = 0
        self.stopped_by = {}

    def add(self, logical: bool, rounds: int, reason: str) -> None:
        self.shots += 1
        self.errors += int(logical)
        self.rounds_sum += rounds
        self.hist[rounds] += 1
        if rounds > self.max_rounds:
            self.max_rounds = rounds
        self.stopped_by[reason] = self.stopped_by.get(reason, 0) + 1

    def as_tuple(self):
        return (self.shots, self.errors, self.rounds_sum, self.hist,
                self.max_rounds, self.stopped_by)


def _finish_shot(ctx: _Context, frame: FrameState, chosen_syndrome: int | None) -> bool:
    """Apply the selected correction, then ideal EC, then classify."""
    table = ctx.table
    m = ctx.m
    x_mask = ctx.x_mask
    fx, fz, fsyn = frame.x, frame.z, frame.syndrome
    if chosen_syndrome:
        cx, cz = decode_sector_masks(
            table, chosen_syndrome & x_mask, chosen_syndrome >> m
        )
        fx ^= cx
        fz ^= cz
        fsyn ^= chosen_syndrome
    if fsyn:
        cx, cz = decode_sector_masks(table, fsyn & x_mask, fsyn >> m)
        fx ^= cx
        fz ^= cz
    lmask = ctx.logical_mask
    return bool(((fx & lmask).bit_count() & 1) or ((fz & lmask).bit_count() & 1))


def _history_min_faults(history, rounds: int) -> int:
    """Greedy 11-pair-plus-leftover count of the history's difference vector."""
    total = 0
    run_ones = 0
    for i in range(1, rounds):
        if history[i] != history[i - 1]:
            run_ones += 1
            if run_ones & 1:
                total += 1
        else:
            run_ones = 0
    return total


def _run_policy_stream(sampler, frame, kind, t, tables, history):
    """Drive one policy over sampled rounds; returns (syndrome index, reason, rounds).

    ``history`` is reused across shots; the caller reads the chosen
    syndrome out of it. A negative syndrome index means no correction.
    """
    syn = sampler.round(frame)
    history[0] = syn
    rounds = 1
    if kind == "shor":
        cap = (t + 1) ** 2
        repeats = 1
        prev = syn
        while True:
            if repeats >= t + 1:
                return rounds - 1, SHOR_REPEAT, rounds
            if rounds >= cap:
                return rounds - 1, SHOR_CAP, rounds
            syn = sampler.round(frame)
            history[rounds] = syn
            rounds += 1
            repeats = repeats + 1 if syn == prev else 1
            prev = syn
    tbl = tables[1] if syn else tables[0]
    action, rix, reason = tbl[0][0]
    if action == CONTINUE:
        delta = 0
        prev = syn
        while True:
            syn = sampler.round(frame)
            history[rounds] = syn
            rounds += 1
            if syn != prev:
                delta |= 1 << (rounds - 2)
            prev = syn
            action, rix, reason = tbl[rounds - 1][delta]
            if action != CONTINUE:
                break
    if action == STOP_CORRECT:
        return rix - 1, reason, rounds
    return -1, reason, rounds


def _simulate_chunk_single(ctx: _Context, p: float, shots: int,
                           rng: np.random.Generator) -> _ChunkAccumulator:
    sampler = _BufferedSampler(ctx.compiled_all, p, rng)
    acc = _ChunkAccumulator(ctx.cap)
    history = [0] * (ctx.cap + 1)
    kind, t, tables = ctx.kind, ctx.t, ctx.tables
    for _ in range(shots):
        frame = FrameState()
        idx, reason, rounds = _run_policy_stream(sampler, frame, kind, t, tables, history)
        chosen = history[idx] if idx >= 0 else None
        logical = _finish_shot(ctx, frame, chosen)
        acc.add(logical, rounds, reason)
    return acc


def _simulate_chunk_two_stage(ctx: _Context, p: float, shots: int,
                              rng: np.random.Generator) -> _ChunkAccumulator:
    sampler_x = _BufferedSampler(ctx.compiled_x, p, rng)
    sampler_z = _BufferedSampler(ctx.compiled_z, p, rng)
    acc = _ChunkAccumulator(ctx.cap)
    kind, t = ctx.kind, ctx.t
    m = ctx.m
    cap1 = PolicyConfig(kind, t).max_rounds_cap()
    history = [0] * (cap1 + 1)
    tables1 = (decision_table(kind, t, False), decision_table(kind, t, True))
    for _ in range(shots):
        frame = FrameState()
        idx, reason1, rounds1 = _run_policy_stream(
            sampler_x, frame, kind, t, tables1, history
        )
        sx = history[idx] if idx >= 0 else 0
        # minimum faults already evidenced by the stage-1 difference vector
        t_oc = _history_min_faults(history, rounds1)
        budget = t - t_oc
        if budget <= 0:
            sz = sampler_z.round(frame)
            reason2 = USABLE_RUN
            rounds2 = 1
        else:
            tables2 = (decision_table(kind, budget, False), decision_table(kind, budget, True))
            idx2, reason2, rounds2 = _run_policy_stream(
                sampler_z, frame, kind, budget, tables2, history
            )
            sz = history[idx2] if idx2 >= 0 else 0
        # stage-local bits: sx keys the Z correction, sz keys the X correction
        chosen = sx | (sz << m)
        logical = _finish_shot(ctx, frame, chosen if chosen else None)
        acc.add(logical, rounds1 + rounds2, reason2)
    return acc


def _chunk_seed(seed: int, point_key: int, chunk_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(point_key, chunk_index))
    return np.random.Generator(np.random.Philox(ss))


def _run_chunk(args) -> tuple:
    (ctx_key, p, shots, seed, point_key, chunk_index) = args
    ctx = _context(ctx_key)
    rng = _chunk_seed(seed, point_key, chunk_index)
    if ctx.css_two_stage:
        acc = _simulate_chunk_two_stage(ctx, p, shots, rng)
    else:
        acc = _simulate_chunk_single(ctx, p, shots, rng)
    return acc.as_tuple()


def resolve_workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get(WORKER_ENV_VAR)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError(f"{WORKER_ENV_VAR} must be an integer, got {env!r}") from None
    return 1


def run_point(config: ExperimentConfig, p: float, point_key: int = 0) -> ExperimentStats:
    """Simulate one physical error rate and aggregate the shot outcomes."""
    ctx_key = (config.d, config.decoder, config.css_two_stage, config.built_to_weight)
    ctx = _context(ctx_key)
    n_chunks = (config.shots + CHUNK_SHOTS - 1) // CHUNK_SHOTS
    sizes = [
        min(CHUNK_SHOTS, config.shots - i * CHUNK_SHOTS) for i in range(n_chunks)
    ]
    jobs = [
        (ctx_key, p, sizes[i], config.seed, point_key, i) for i in range(n_chunks)
    ]
    workers = resolve_workers(config.workers)

    shots = errors = rounds_sum = max_rounds = 0
    hist: dict[int, int] = {}
    stopped: dict[str, int] = {}

    def consume(result) -> bool:
        nonlocal shots, errors, rounds_sum, max_rounds
        c_shots, c_errors, c_rsum, c_hist, c_max, c_stop = result
        shots += c_shots
        errors += c_errors
        rounds_sum += c_rsum
        max_rounds = max(max_rounds, c_max)
        for r, cnt in enumerate(c_hist):
            if cnt:
                hist[r] = hist.get(r, 0) + cnt
        for k, v in c_stop.items():
            stopped[k] = stopped.get(k, 0) + v
        return config.max_errors is not None and errors >= config.max_errors

    if workers <= 1 or n_chunks == 1:
        for job in jobs:
            if consume(_run_chunk(job)):
                break
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for result in pool.map(_run_chunk, jobs):
                if consume(result):
                    break

    ci_low, ci_high = wilson_interval(errors, shots)
    return ExperimentStats(
        p=p,
        shots=shots,
        logical_errors=errors,
        p_l_hat=errors / shots if shots else 0.0,
        ci_low=ci_low,
        ci_high=ci_high,
        avg_rounds=rounds_sum / shots if shots else 0.0,
        rounds_histogram=dict(sorted(hist.items())),
        max_rounds_seen=max_rounds,
        stopped_by=dict(sorted(stopped.items())),
        seed=config.seed,
    )


def run_experiment(config: ExperimentConfig) -> list[ExperimentStats]:
    return [run_point(config, p, point_key=i) for i, p in enumerate(config.p_values)]


# ---------------------------------------------------------------------------
# Reference per-shot runner (used by the fault-injection harness and tests)


def run_shot_reference(
    code: StabilizerCode,
    table: SyndromeTable,
    kind: str,
    t: int,
    *,
    p: float = 0.0,
    rng: np.random.Generator | None = None,
    initial_error: PauliOperator | None = None,
    injected_faults: dict[int, list] | None = None,
    compiled: CompiledSchedule | None = None,
) -> ShotResult:
    """One protocol run through the reference policy objects.

    ``injected_faults`` maps a round number to (location id, value) pairs
    applied in that round on top of p = 0 noise; with ``p > 0`` rounds are
    sampled instead. This path shares the circuit semantics with the fast
    engine but exercises the PolicyDecision state machines directly.
    """
    from .recovery import decode, final_verdict
    from .stabilizer import syndrome_of

    noise = NoiseModel(p)
    if compiled is None:
        compiled = compile_schedule(code, noise)
    frame = compiled.new_frame(initial_error)
    policy = make_policy(PolicyConfig(kind, t))
    history = []
    decision = None
    rounds = 0
    while True:
        rounds += 1
        if injected_faults is not None:
            syn = inject_round(compiled, frame, injected_faults.get(rounds, ()))
        else:
            syn = sample_round(compiled, noise, frame, rng)
        history.append(syn)
        decision = policy.step(syn)
        if decision.action != CONTINUE:
            break
    if decision.action == STOP_CORRECT:
        chosen = history[decision.round_index - 1]
        if chosen:
            correction = decode(table, code, chosen)
            frame.x ^= correction.x_bits
            frame.z ^= correction.z_bits
            frame.syndrome ^= syndrome_of(code, correction)
    residual = frame.to_pauli(code.n)
    verdict = final_verdict(code, table, residual)
    return ShotResult(
        logical_error=(verdict == "logical_error"),
        rounds=rounds,
        stopped_by=decision.stopped_by,
    )


def run_shot_reference_residual(
    code, table, kind, t, *, initial_error=None, injected_faults=None, compiled=None
):
    """Like run_shot_reference but also returns the pre-ideal-EC residual."""
    from .recovery import decode
    from .stabilizer import syndrome_of

    if compiled is None:
        compiled = compile_schedule(code, NoiseModel(0.0))
    frame = compiled.new_frame(initial_error)
    policy = make_policy(PolicyConfig(kind, t))
    history = []
    rounds = 0
    while True:
        rounds += 1
        syn = inject_round(compiled, frame, (injected_faults or {}).get(rounds, ()))
        history.append(syn)
        decision = policy.step(syn)
        if decision.action != CONTINUE:
            break
    if decision.action == STOP_CORRECT:
        chosen = history[decision.round_index - 1]
        if chosen:
            correction = decode(table, code, chosen)
            frame.x ^= correction.x_bits
            frame.z ^= correction.z_bits
            frame.syndrome ^= syndrome_of(code, correction)
    return frame.to_pauli(code.n), decision, rounds


# ---------------------------------------------------------------------------
# Fault-injection verification


@dataclass
class FaultEnumReport:
    d: int
    decoder: str
    order: int
    cases: int
    skipped_unreached: int
    logical_failures: int
    weight_violations: int
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.logical_failures and not self.weight_violations


def enumerate_single_faults(d: int, decoder: str, include_input_errors: bool = True,
                            max_failures_recorded: int = 20) -> FaultEnumReport:
    """Exhaustive order-1 fault injection for one decoder.

    Every input error of weight 1 and every (round, location, value)
    circuit fault runs the full protocol; the verdict must be
    no_logical_error and the pre-ideal-EC residual weight at most the
    number of circuit faults that actually landed.
    """
    t = (d - 1) // 2
    code = build_hex_color_code(d)
    table = build_table(code, default_built_to_weight(code, t))
    compiled = compile_schedule(code, NoiseModel(0.0))
    cap = PolicyConfig(decoder, t).max_rounds_cap()
    report = FaultEnumReport(d, decoder, 1, 0, 0, 0, 0)

    from .recovery import final_verdict

    def check(initial, faults, label, fault_round=0):
        residual, decision, rounds = run_shot_reference_residual(
            code, table, decoder, t, initial_error=initial,
            injected_faults=faults, compiled=compiled,
        )
        if fault_round > rounds:
            # The noiseless prefix stopped earlier, so this fault never
            # fires; the scenario is vacuous for single-fault coverage.
            report.skipped_unreached += 1
            return
        report.cases += 1
        landed = sum(
            len(v) for r, v in (faults or {}).items() if r <= rounds
        )
        weight_bad = residual.weight() > landed
        logical_bad = final_verdict(code, table, residual) == "logical_error"
        if weight_bad:
            report.weight_violations += 1
        if logical_bad:
            report.logical_failures += 1
        if (weight_bad or logical_bad) and len(report.failures) < max_failures_recorded:
            report.failures.append(
                {"case": label, "residual": residual.to_string(),
                 "rounds": rounds, "stopped_by": decision.stopped_by}
            )

    if include_input_errors:
        for q in range(code.n):
            for kind in ("X", "Y", "Z"):
                check(PauliOperator.single(code.n, q, kind), None, f"input {kind}{q}")

    for rho in range(1, cap + 1):
        for lid in range(compiled.n_locations):
            for value in legal_values(compiled, lid):
                check(None, {rho: [(lid, value)]},
                      f"round {rho} loc {lid} {value}", fault_round=rho)
    return report


def sample_fault_pairs(d: int, decoder: str, samples: int, seed: int = 0,
                       max_failures_recorded: int = 20) -> FaultEnumReport:
    """Order-2 fault injection: uniformly sampled ordered pairs."""
    t = (d - 1) // 2
    code = build_hex_color_code(d)
    table = build_table(code, default_built_to_weight(code, t))
    compiled = compile_schedule(code, NoiseModel(0.0))
    cap = PolicyConfig(decoder, t).max_rounds_cap()
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=seed)))
    report = FaultEnumReport(d, decoder, 2, 0, 0, 0, 0)
    n_loc = compiled.n_locations
    for _ in range(samples):
        faults: dict[int, list] = {}
        desc = []
        for _ in range(2):
            rho = int(rng.integers(1, cap + 1))
            lid = int(rng.integers(n_loc))
            values = legal_values(compiled, lid)
            value = values[int(rng.integers(len(values)))]
            faults.setdefault(rho, []).append((lid, value))
            desc.append((rho, lid, value))
        residual, decision, rounds = run_shot_reference_residual(
            code, table, decoder, t, injected_faults=faults, compiled=compiled
        )
        from .recovery import final_verdict

        report.cases += 1
        if final_verdict(code, table, residual) == "logical_error":
            report.logical_failures += 1
            if len(report.failures) < max_failures_recorded:
                report.failures.append(
                    {"case": repr(desc), "residual": residual.to_string(),
                     "rounds": rounds, "stopped_by": decision.stopped_by}
                )
    return report


# ---------------------------------------------------------------------------
# Closed-form threshold analysis


def threshold_lower_bound(locations_per_round: int, t: int, rounds: int) -> float:
    """Lower bound C(rounds*L, t+1) ** (-1/t) on the concatenation threshold.

    Evaluated through log-gamma so huge binomial coefficients never
    overflow.
    """
    if locations_per_round < 1 or rounds < 1 or t < 1:
        raise ValueError("locations, rounds, and t must all be positive")
    total = rounds * locations_per_round
    if total < t + 1:
        raise ValueError(
            f"need rounds * locations >= t + 1, got {total} < {t + 1}"
        )
    ln_comb = (
        math.lgamma(total + 1) - math.lgamma(t + 2) - math.lgamma(total - t)
    )
    return math.exp(-ln_comb / t)


# ---------------------------------------------------------------------------
# Pseudothreshold estimation


class BracketError(RuntimeError):
    """The pseudothreshold bracket has no sign change; carries the curve."""

    def __init__(self, message: str, probes):
        super().__init__(message)
        self.probes = probes


@dataclass
class PseudothresholdResult:
    estimate: float
    ci_low: float
    ci_high: float
    probes: list
    shots_per_probe: int


def estimate_pseudothreshold(
    config: ExperimentConfig,
    p_lo: float,
    p_hi: float,
    shots_per_probe: int = 200_000,
    iterations: int = 9,
) -> PseudothresholdResult:
    """Bisect g(p) = p_L(p) - 2p/3 between a bracketing pair of rates.

    Probes use fixed shot counts and deterministic per-probe streams. The
    returned interval is read off the probes whose whole binomial
    confidence band lies on one side of the 2p/3 line.
    """
    probes: list[tuple[float, ExperimentStats]] = []
    probe_cfg = dataclasses.replace(config, shots=shots_per_probe, max_errors=None)
    counter = 0

    def g(p: float) -> float:
        nonlocal counter
        counter += 1
        stats = run_point(probe_cfg, p, point_key=1_000_000 + counter)
        probes.append((p, stats))
        return stats.p_l_hat - 2.0 * p / 3.0

    if not (0 < p_lo < p_hi <= 1):
        raise ValueError("need 0 < p_lo < p_hi <= 1")
    g_lo = g(p_lo)
    g_hi = g(p_hi)
    if not (g_lo < 0 < g_hi):
        curve = [
            {"p": p, "p_l": s.p_l_hat, "ci_low": s.ci_low, "ci_high": s.ci_high}
            for p, s in probes
        ]
        raise BracketError(
            f"no crossing in bracket [{p_lo}, {p_hi}]: g({p_lo})={g_lo:.3g}, "
            f"g({p_hi})={g_hi:.3g}; sampled curve attached",
            curve,
        )
    lo, hi = p_lo, p_hi
    for _ in range(iterations):
        mid = math.sqrt(lo * hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    estimate = math.sqrt(lo * hi)

    # Final falsi-style refinement: a binomially weighted log-log fit over
    # the probes nearest the bracket, intersected with the 2p/3 line. The
    # raw bracket endpoints are noise-dominated once g is smaller than the
    # per-probe error, so interpolation through all nearby probes is the
    # better estimator.
    near = [
        (p, s) for p, s in probes
        if estimate / 4 <= p <= estimate * 4 and s.logical_errors > 0
    ]
    if len(near) >= 3:
        xs = [math.log(p) for p, _ in near]
        ys = [math.log(s.p_l_hat) for _, s in near]
        ws = [float(s.logical_errors) for _, s in near]
        sw = sum(ws)
        xbar = sum(w * x for w, x in zip(ws, xs)) / sw
        ybar = sum(w * y for w, y in zip(ws, ys)) / sw
        sxx = sum(w * (x - xbar) ** 2 for w, x in zip(ws, xs))
        if sxx > 0:
            slope = sum(w * (x - xbar) * (y - ybar) for w, x, y in zip(ws, xs, ys)) / sxx
            if slope > 1.05:
                # solve  ybar + slope (x - xbar) = log(2/3) + x
                x_cross = (math.log(2.0 / 3.0) - ybar + slope * xbar) / (slope - 1.0)
                p_cross = math.exp(x_cross)
                if lo / 2 <= p_cross <= hi * 2:
                    estimate = p_cross
                    # statistical error of the fitted crossing
                    var_y = 1.0 / sw + (x_cross - xbar) ** 2 / sxx
                    sigma = math.sqrt(var_y) / (slope - 1.0)
                    lo = max(lo / 2, estimate * math.exp(-1.96 * sigma))
                    hi = min(hi * 2, estimate * math.exp(1.96 * sigma))

    below = [p for p, s in probes if s.ci_high < 2.0 * p / 3.0]
    above = [p for p, s in probes if s.ci_low > 2.0 * p / 3.0]
    ci_low = min(max(below) if below else lo, lo)
    ci_high = max(min(above) if above else hi, hi)
    return PseudothresholdResult(estimate, ci_low, ci_high, probes, shots_per_probe)
