"""Stopping policies for repeated syndrome measurement.

Three policies are implemented as incremental state machines over a
growing syndrome history:

- ``shor``: stop once t+1 consecutive rounds agree, or at the hard cap of
  (t+1)**2 rounds; correct with the latest syndrome.
- ``strong``: after each round, run the usable-substring search on the
  difference vector with budget t; stop on the earliest usable run
  (correct with the syndrome of the run's first round) or once the vector
  contains t non-overlapping 11 pairs (correct with the latest round).
- ``weak``: branch on whether the first syndrome is zero. For t = 1 this
  is the two-round protocol that may stop without correcting; for t >= 2
  the usable-substring search runs on a transformed vector (first bit
  dropped when the first syndrome is nonzero, a zero prepended when it is
  zero) with budget t-1 or t respectively.

Every policy decision is computed by one pure function of the observed
difference vector (plus the first-syndrome branch for the weak policy),
so the state machines, the exhaustive verifiers, and the Monte Carlo
engine's precomputed decision tables cannot drift apart.

Tie-breaking is fixed: among usable runs the earliest wins, and within a
run the syndrome of its first round is used. All rounds of a run share one
syndrome, so the choice only pins determinism.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import diffvec
from .diffvec import find_usable, min_faults, pairs_only

CONTINUE = "continue"
STOP_CORRECT = "stop_correct"
STOP_NO_CORRECTION = "stop_no_correction"

# stopped_by reasons
USABLE_RUN = "usable_run"
PAIR_COUNT = "pair_count"
SHOR_REPEAT = "shor_repeat"
SHOR_CAP = "shor_cap"
WEAK_NO_CORRECTION = "weak_no_correction"

KINDS = ("shor", "strong", "weak")


class ProtocolDefect(RuntimeError):
    """The policy reached its worst-case round cap without deciding.

    The round bounds guarantee a decision at or before the cap, so hitting
    this means the stopping logic itself is broken; it is never a normal
    runtime outcome.
    """


@dataclass(frozen=True)
class PolicyDecision:
    """Outcome of one policy step."""

    action: str
    rounds_used: int
    round_index: int | None = None  # round whose syndrome corrects, 1-based
    stopped_by: str | None = None

    def __post_init__(self):
        if self.action == STOP_CORRECT and not (
            self.round_index is not None and 1 <= self.round_index <= self.rounds_used
        ):
            raise ValueError("stop_correct must name a round inside the history")


@dataclass(frozen=True)
class PolicyConfig:
    """Which policy to run and with what fault budget."""

    kind: str
    t: int
    css_two_stage: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown decoder kind {self.kind!r}")
        if self.t < 1:
            raise ValueError(f"fault budget t must be >= 1, got {self.t}")

    def max_rounds_cap(self, s1_branch: str = "worst") -> int:
        if self.kind != "weak":
            return worst_case_rounds(self.kind, self.t)
        if s1_branch == "worst":
            return max(
                worst_case_rounds("weak", self.t, "nonzero"),
                worst_case_rounds("weak", self.t, "zero"),
            )
        return worst_case_rounds("weak", self.t, s1_branch)


def worst_case_rounds(kind: str, t: int, s1_branch: str = "n/a") -> int:
    """Closed-form maximum round count for a policy and fault budget."""
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    if kind == "shor":
        return (t + 1) ** 2
    if kind == "strong":
        if t % 2:
            return ((t + 3) // 2) ** 2 - 1
        return (t + 2) * (t + 4) // 4 - 1
    if kind == "weak":
        if s1_branch not in ("nonzero", "zero"):
            raise ValueError("weak policy needs s1_branch 'nonzero' or 'zero'")
        if t == 1:
            return 2 if s1_branch == "nonzero" else 1
        if s1_branch == "nonzero":
            if t % 2 == 0:
                return ((t + 2) // 2) ** 2
            return (t + 1) * (t + 3) // 4
        if t % 2 == 0:
            return (t + 2) * (t + 4) // 4 - 2
        return ((t + 3) // 2) ** 2 - 2
    raise ValueError(f"unknown decoder kind {kind!r}")


# ---------------------------------------------------------------------------
# Pure decision functions


def shor_decision(t: int, delta: str) -> PolicyDecision:
    rounds = len(delta) + 1
    trailing = len(delta) - len(delta.rstrip("0"))
    if trailing >= t:
        return PolicyDecision(STOP_CORRECT, rounds, rounds, SHOR_REPEAT)
    if rounds >= (t + 1) ** 2:
        return PolicyDecision(STOP_CORRECT, rounds, rounds, SHOR_CAP)
    return PolicyDecision(CONTINUE, rounds)


def strong_decision(t: int, delta: str) -> PolicyDecision:
    rounds = len(delta) + 1
    usable = find_usable(t, delta) if delta else []
    if usable:
        run = usable[0]
        return PolicyDecision(STOP_CORRECT, rounds, run.start, USABLE_RUN)
    if pairs_only(delta) == t:
        return PolicyDecision(STOP_CORRECT, rounds, rounds, PAIR_COUNT)
    if rounds >= worst_case_rounds("strong", t):
        raise ProtocolDefect(
            f"strong policy undecided at its round cap (t={t}, delta={delta!r})"
        )
    return PolicyDecision(CONTINUE, rounds)


def weak_decision(t: int, s1_nonzero: bool, delta: str) -> PolicyDecision:
    rounds = len(delta) + 1
    if t == 1:
        # Two-round protocol for distance-3 codes.
        if not s1_nonzero:
            return PolicyDecision(STOP_NO_CORRECTION, rounds, None, WEAK_NO_CORRECTION)
        if rounds == 1:
            return PolicyDecision(CONTINUE, rounds)
        if delta[0] == "0":
            return PolicyDecision(STOP_CORRECT, rounds, 1, USABLE_RUN)
        return PolicyDecision(STOP_NO_CORRECTION, rounds, None, WEAK_NO_CORRECTION)

    if s1_nonzero:
        prime = delta[1:]
        budget = t - 1
        usable = find_usable(budget, prime) if prime else []
        if usable:
            run = usable[0]
            # position k in the trimmed vector is position k+1 in delta
            return PolicyDecision(STOP_CORRECT, rounds, run.start + 1, USABLE_RUN)
        if pairs_only(prime) == budget:
            return PolicyDecision(STOP_CORRECT, rounds, rounds, PAIR_COUNT)
        branch = "nonzero"
    else:
        prime = "0" + delta
        budget = t
        usable = find_usable(budget, prime)
        if usable:
            run = usable[0]
            if run.start == 1:
                # The run contains the prepended zero, so the selected
                # syndrome is the all-zero first-round syndrome: nothing to
                # correct.
                return PolicyDecision(
                    STOP_NO_CORRECTION, rounds, None, WEAK_NO_CORRECTION
                )
            return PolicyDecision(STOP_CORRECT, rounds, run.start - 1, USABLE_RUN)
        if pairs_only(prime) == budget:
            return PolicyDecision(STOP_CORRECT, rounds, rounds, PAIR_COUNT)
        branch = "zero"
    if rounds >= worst_case_rounds("weak", t, branch):
        raise ProtocolDefect(
            f"weak policy undecided at its round cap (t={t}, s1_nonzero={s1_nonzero}, "
            f"delta={delta!r})"
        )
    return PolicyDecision(CONTINUE, rounds)


def policy_decision(kind: str, t: int, s1_nonzero: bool, delta: str) -> PolicyDecision:
    """Decision after observing a difference vector (and the s1 branch)."""
    if kind == "shor":
        return shor_decision(t, delta)
    if kind == "strong":
        return strong_decision(t, delta)
    if kind == "weak":
        return weak_decision(t, s1_nonzero, delta)
    raise ValueError(f"unknown decoder kind {kind!r}")


# ---------------------------------------------------------------------------
# Incremental state machines


class _Policy:
    """Shared stepping logic: accumulate syndromes, delegate to the pure rule."""

    kind: str

    def __init__(self, t: int):
        self.t = t
        self.history = diffvec.SyndromeHistory()
        self.decision: PolicyDecision | None = None

    @property
    def rounds_used(self) -> int:
        return self.history.m

    def step(self, syndrome: int) -> PolicyDecision:
        if self.decision is not None and self.decision.action != CONTINUE:
            raise RuntimeError("policy stepped after it already stopped")
        self.history.add_round(syndrome)
        s1_nonzero = self.history.rounds[0] != 0
        self.decision = policy_decision(self.kind, self.t, s1_nonzero, self.history.delta)
        return self.decision


class ShorPolicy(_Policy):
    kind = "shor"


class StrongPolicy(_Policy):
    kind = "strong"


class WeakPolicy(_Policy):
    kind = "weak"


def make_policy(config: PolicyConfig) -> _Policy:
    return {"shor": ShorPolicy, "strong": StrongPolicy, "weak": WeakPolicy}[config.kind](
        config.t
    )


def step_shor(policy: ShorPolicy, syndrome: int) -> PolicyDecision:
    return policy.step(syndrome)


def step_strong(policy: StrongPolicy, syndrome: int) -> PolicyDecision:
    return policy.step(syndrome)


def step_weak(policy: WeakPolicy, syndrome: int) -> PolicyDecision:
    return policy.step(syndrome)


# ---------------------------------------------------------------------------
# CSS two-stage refinement


@dataclass
class TwoStageState:
    """Sector-by-sector stopping for CSS codes.

    Stage 1 repeats X-generator rounds under the full budget t and fixes
    the syndrome for Z-type correction. The minimum fault count already
    evidenced by the stage-1 difference vector is then subtracted from the
    budget for stage 2's Z-generator rounds; a zero remaining budget means
    stage 2 accepts its first syndrome immediately.
    """

    kind: str
    t: int
    stage: int = 1
    stage1: PolicyDecision | None = None
    stage2: PolicyDecision | None = None
    t_oc: int = 0
    stage2_budget: int | None = None
    _policy: _Policy = field(init=False, repr=False)

    def __post_init__(self):
        if self.kind not in ("strong", "weak"):
            raise ValueError("two-stage mode applies to the strong or weak policies")
        self._policy = make_policy(PolicyConfig(self.kind, self.t))

    def step(self, syndrome: int) -> PolicyDecision:
        if self.stage == 1:
            decision = self._policy.step(syndrome)
            if decision.action != CONTINUE:
                self.stage1 = decision
                self.t_oc = min_faults(self._policy.history.delta)
                self.stage2_budget = max(self.t - self.t_oc, 0)
                self.stage = 2
                if self.stage2_budget > 0:
                    self._policy = make_policy(PolicyConfig(self.kind, self.stage2_budget))
                else:
                    self._policy = None  # accept the first stage-2 syndrome
            return decision
        if self.stage2 is not None:
            raise RuntimeError("two-stage policy stepped after both stages stopped")
        if self.stage2_budget == 0:
            # No remaining fault budget: the first measured syndrome is
            # guaranteed correct.
            self.stage2 = PolicyDecision(STOP_CORRECT, 1, 1, USABLE_RUN)
            return self.stage2
        decision = self._policy.step(syndrome)
        if decision.action != CONTINUE:
            self.stage2 = decision
        return decision


# ---------------------------------------------------------------------------
# Precomputed decision tables for the Monte Carlo engine

_TABLE_CACHE: dict = {}


def decision_table(kind: str, t: int, s1_nonzero: bool):
    """Map reachable (length, packed delta) states to compact decisions.

    Table entry layout: ``tables[length][delta_int]`` is ``None`` for
    states unreachable without an earlier stop, or a tuple
    ``(action, round_index, stopped_by)``. Delta bits pack little-endian:
    position i (1-based) lives at bit i-1. Intended for the strong and
    weak policies whose caps are small; the Shor rule is cheap enough to
    evaluate inline.
    """
    key = (kind, t, s1_nonzero)
    cached = _TABLE_CACHE.get(key)
    if cached is not None:
        return cached
    if kind == "weak":
        cap = worst_case_rounds(kind, t, "nonzero" if s1_nonzero else "zero")
    else:
        cap = worst_case_rounds(kind, t)
    max_len = cap - 1
    tables: list[list] = [[None] * (1 << min(length, max_len)) for length in range(max_len + 1)]

    def fill(length: int, bits: int, delta: str) -> None:
        decision = policy_decision(kind, t, s1_nonzero, delta)
        tables[length][bits] = (decision.action, decision.round_index, decision.stopped_by)
        if decision.action != CONTINUE:
            return
        for b in (0, 1):
            fill(length + 1, bits | (b << length), delta + str(b))

    fill(0, 0, "")
    _TABLE_CACHE[key] = tables
    return tables
