"""Shor syndrome-extraction circuits under circuit-level depolarizing noise.

Each stabilizer generator of weight w is measured with a w-qubit cat-state
ancilla, one controlled-Pauli per support qubit, a transversal Hadamard,
and w single-qubit Z measurements whose parity is the reported bit. The
noise model follows the standard circuit-level depolarizing convention:

1. every one-qubit gate (the Hadamards) is followed by X/Y/Z, p/3 each;
2. every two-qubit gate is followed by one of the 15 nontrivial two-qubit
   Paulis, p/15 each;
3. cat states are prepared ideally and then each cat qubit suffers
   one-qubit depolarizing noise with rate p (no verification circuit);
4. every classical measurement outcome flips with probability p;
5. there is no idling noise.

The sampler tracks the Pauli frame, not state vectors. Propagation
reduces to two rules. A fault component that acts as X on a cat qubit
pushes the generator's Pauli letter onto that qubit's data partner and
never flips the reported bit; a component acting as Z on a cat qubit
(including the Z part of Y) flips the reported bit and never touches
data. Errors deposited on data qubits during a generator's own circuit
are invisible to that generator's outcome (its controlled gate has
already acted) but are seen by every later circuit, which is what
produces partially detectable, type-I style faults.

Locations are numbered consecutively through the round: circuit 0's 4w
locations first (cat preparations, two-qubit gates, Hadamards,
measurements, w of each in that order), then circuit 1's, and so on.
These flat ids are stable and used by the fault-injection harness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .stabilizer import PauliOperator, StabilizerCode

CAT_PREP = "cat_qubit_prep"
TWO_QUBIT = "two_qubit_gate"
ONE_QUBIT = "one_qubit_gate"
MEASUREMENT = "ancilla_measurement"

_LETTERS = ("I", "X", "Y", "Z")
# Two-qubit fault values as (data, ancilla) pairs, identity-pair excluded.
TWO_QUBIT_FAULTS = tuple(
    (d, a) for d in _LETTERS for a in _LETTERS if (d, a) != ("I", "I")
)


@dataclass(frozen=True)
class NoiseModel:
    """Physical error rate and per-mechanism enable flags."""

    p: float
    one_qubit: bool = True
    two_qubit: bool = True
    cat_qubit: bool = True
    measurement: bool = True

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"error rate must be in [0, 1], got {self.p}")


@dataclass(frozen=True)
class ShorCircuit:
    """One generator measurement: support order fixes the gate order."""

    generator_index: int
    w: int
    support: tuple[int, ...]
    letters: tuple[str, ...]
    locations: tuple[tuple[str, int], ...]


def build_round_schedule(code: StabilizerCode) -> list[ShorCircuit]:
    """One Shor circuit per generator, in the code's generator order."""
    schedule = []
    for gi, g in enumerate(code.generators):
        support = []
        letters = []
        for q in range(code.n):
            xb = (g.x_bits >> q) & 1
            zb = (g.z_bits >> q) & 1
            if xb or zb:
                support.append(q)
                letters.append("Y" if xb and zb else ("X" if xb else "Z"))
        w = len(support)
        locations = tuple(
            (kind, j)
            for kind in (CAT_PREP, TWO_QUBIT, ONE_QUBIT, MEASUREMENT)
            for j in range(w)
        )
        schedule.append(
            ShorCircuit(gi, w, tuple(support), tuple(letters), locations)
        )
    return schedule


class FrameState:
    """Accumulated data error plus its syndrome, kept in sync incrementally.

    ``x``/``z`` are the packed bit masks of the Pauli frame on the data
    block; ``syndrome`` is the packed true syndrome over all generators of
    the compiled code. Shots own their frame exclusively; all cross-shot
    state (schedules, tables) is immutable.
    """

    __slots__ = ("x", "z", "syndrome")

    def __init__(self, x: int = 0, z: int = 0, syndrome: int = 0):
        self.x = x
        self.z = z
        self.syndrome = syndrome

    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    def to_pauli(self, n: int) -> PauliOperator:
        return PauliOperator(n, self.x, self.z)


class CompiledSchedule:
    """Flattened location/effect tables for one measurement schedule.

    ``sector`` selects which circuits the schedule contains: "all" for a
    full round, "x"/"z" for the two-stage CSS refinement. Reported
    syndromes pack the measured circuits' bits from zero upward in
    measurement order; the frame's true syndrome always spans the full
    generator list.
    """

    def __init__(self, code: StabilizerCode, noise: NoiseModel, sector: str = "all"):
        self.code = code
        self.noise = noise
        self.sector = sector
        if sector == "all":
            gen_ids = list(range(code.r))
        elif sector in ("x", "z"):
            if not code.css:
                raise ValueError("sector schedules need a CSS code")
            gen_ids = list(code.x_sector if sector == "x" else code.z_sector)
        else:
            raise ValueError(f"unknown sector {sector!r}")
        full = build_round_schedule(code)
        self.circuits = [full[g] for g in gen_ids]
        self.n_circuits = len(self.circuits)
        self.gen_bit = [c.generator_index for c in self.circuits]

        # Syndrome contribution of a single-qubit X (resp. Z) deposit.
        self.syn_x = [0] * code.n
        self.syn_z = [0] * code.n
        for gi, g in enumerate(code.generators):
            for q in range(code.n):
                if (g.z_bits >> q) & 1:
                    self.syn_x[q] |= 1 << gi
                if (g.x_bits >> q) & 1:
                    self.syn_z[q] |= 1 << gi

        # Per-location effect tables: loc_effects[flat_id][choice] is
        # (flip, dep_x, dep_z, syn_delta). Uniform choice over each table
        # row realizes the p/3, p/15, p/3, p location distributions.
        self.loc_circuit: list[int] = []
        self.loc_kind: list[tuple[str, int]] = []
        self.loc_effects: list[tuple] = []
        enabled = {
            CAT_PREP: noise.cat_qubit,
            TWO_QUBIT: noise.two_qubit,
            ONE_QUBIT: noise.one_qubit,
            MEASUREMENT: noise.measurement,
        }
        self.enabled_ids: list[int] = []
        for ci, circ in enumerate(self.circuits):
            for kind, j in circ.locations:
                flat = len(self.loc_effects)
                q = circ.support[j]
                letter = circ.letters[j]
                if kind == CAT_PREP:
                    choices = tuple(
                        self._effect(flip="Z" in val or val == "Y",
                                     deposit=letter if val in ("X", "Y") else None,
                                     qubit=q)
                        for val in ("X", "Y", "Z")
                    )
                elif kind == TWO_QUBIT:
                    choices = tuple(
                        self._effect(flip=a in ("Y", "Z"),
                                     deposit=d if d != "I" else None,
                                     qubit=q)
                        for d, a in TWO_QUBIT_FAULTS
                    )
                elif kind == ONE_QUBIT:
                    choices = tuple(
                        self._effect(flip=val in ("X", "Y"), deposit=None, qubit=q)
                        for val in ("X", "Y", "Z")
                    )
                else:
                    choices = (self._effect(flip=True, deposit=None, qubit=q),)
                self.loc_circuit.append(ci)
                self.loc_kind.append((kind, j))
                self.loc_effects.append(choices)
                if enabled[kind]:
                    self.enabled_ids.append(flat)
        self.n_locations = len(self.loc_effects)
        # Our schedules measure a contiguous generator range, which makes
        # projecting the true syndrome onto reported bits a shift + mask.
        base = self.gen_bit[0] if self.gen_bit else 0
        contiguous = self.gen_bit == list(range(base, base + self.n_circuits))
        self.contiguous_base = base if contiguous else None
        self.local_mask = (1 << self.n_circuits) - 1

    def _effect(self, flip: bool, deposit: str | None, qubit: int):
        dep_x = dep_z = syn_delta = 0
        if deposit is not None:
            if deposit in ("X", "Y"):
                dep_x = 1 << qubit
                syn_delta ^= self.syn_x[qubit]
            if deposit in ("Z", "Y"):
                dep_z = 1 << qubit
                syn_delta ^= self.syn_z[qubit]
        return (1 if flip else 0, dep_x, dep_z, syn_delta)

    # -- frame helpers ----------------------------------------------------

    def new_frame(self, pauli: PauliOperator | None = None) -> FrameState:
        if pauli is None:
            return FrameState()
        frame = FrameState(pauli.x_bits, pauli.z_bits)
        frame.syndrome = self.syndrome_of_frame(frame)
        return frame

    def syndrome_of_frame(self, frame: FrameState) -> int:
        syn = 0
        for q in range(self.code.n):
            if (frame.x >> q) & 1:
                syn ^= self.syn_x[q]
            if (frame.z >> q) & 1:
                syn ^= self.syn_z[q]
        return syn

    def reported_bits(self, full_syndrome: int) -> int:
        """Project a full true syndrome onto this schedule's measured bits."""
        if self.contiguous_base is not None:
            return (full_syndrome >> self.contiguous_base) & self.local_mask
        out = 0
        for local, g in enumerate(self.gen_bit):
            out |= ((full_syndrome >> g) & 1) << local
        return out

    def flags(self) -> tuple[bool, bool, bool, bool]:
        n = self.noise
        return (n.one_qubit, n.two_qubit, n.cat_qubit, n.measurement)


def compile_schedule(
    code: StabilizerCode, noise: NoiseModel, sector: str = "all"
) -> CompiledSchedule:
    return CompiledSchedule(code, noise, sector)


def _apply_faults(compiled: CompiledSchedule, frame: FrameState, fired) -> int:
    """Run one round with the given (flat_id, choice_index) faults.

    ``fired`` must be sorted by flat id, which equals circuit order. The
    reported bit of each circuit is its true-syndrome bit before that
    circuit's own deposits, xored with that circuit's flip faults.
    """
    x, z, tsyn = frame.x, frame.z, frame.syndrome
    loc_circuit = compiled.loc_circuit
    loc_effects = compiled.loc_effects
    gen_bit = compiled.gen_bit
    report = 0
    prev = 0
    i = 0
    nf = len(fired)
    while i < nf:
        ci = loc_circuit[fired[i][0]]
        # circuits without faults between prev and ci report current bits
        for c in range(prev, ci):
            report |= ((tsyn >> gen_bit[c]) & 1) << c
        bit = (tsyn >> gen_bit[ci]) & 1
        flips = 0
        while i < nf and loc_circuit[fired[i][0]] == ci:
            flat, choice = fired[i]
            fl, dx, dz, sd = loc_effects[flat][choice]
            flips ^= fl
            x ^= dx
            z ^= dz
            tsyn ^= sd
            i += 1
        report |= (bit ^ flips) << ci
        prev = ci + 1
    for c in range(prev, compiled.n_circuits):
        report |= ((tsyn >> gen_bit[c]) & 1) << c
    frame.x, frame.z, frame.syndrome = x, z, tsyn
    return report


def sample_round(
    compiled: CompiledSchedule,
    noise: NoiseModel,
    frame: FrameState,
    rng: np.random.Generator,
) -> int:
    """Sample one noisy round; mutates the frame, returns the syndrome.

    Locations fail independently with probability p, so the number of
    failures is binomial and the failing set is uniform; with zero
    failures the round reports the frame's exact syndrome.
    """
    my_flags = (noise.one_qubit, noise.two_qubit, noise.cat_qubit, noise.measurement)
    if my_flags != compiled.flags():
        raise ValueError("noise mechanism flags do not match the compiled schedule")
    n_enabled = len(compiled.enabled_ids)
    k = int(rng.binomial(n_enabled, noise.p)) if (n_enabled and noise.p > 0) else 0
    if k == 0:
        return compiled.reported_bits(frame.syndrome)
    if k == n_enabled:
        idx = range(n_enabled)
    else:
        idx = sorted(rng.choice(n_enabled, size=k, replace=False).tolist())
    fired = []
    for i in idx:
        flat = compiled.enabled_ids[i]
        n_choices = len(compiled.loc_effects[flat])
        choice = int(rng.integers(n_choices)) if n_choices > 1 else 0
        fired.append((flat, choice))
    return _apply_faults(compiled, frame, fired)


def _choice_index(compiled: CompiledSchedule, location_id: int, value) -> int:
    kind, _ = compiled.loc_kind[location_id]
    try:
        if kind == CAT_PREP or kind == ONE_QUBIT:
            return ("X", "Y", "Z").index(value)
        if kind == TWO_QUBIT:
            return TWO_QUBIT_FAULTS.index(tuple(value))
        if value == "flip":
            return 0
        raise ValueError
    except ValueError:
        raise ValueError(
            f"fault value {value!r} is not legal for a {kind} location"
        ) from None


def inject_round(
    compiled: CompiledSchedule, frame: FrameState, faults
) -> int:
    """Deterministic round: zero noise plus exactly the given faults.

    ``faults`` is an iterable of (location_id, value); values are "X"/"Y"/
    "Z" for cat and one-qubit locations, a (data, ancilla) letter pair for
    two-qubit gates, and "flip" for measurements.
    """
    fired = []
    for location_id, value in faults:
        if not 0 <= location_id < compiled.n_locations:
            raise ValueError(f"location id {location_id} out of range")
        fired.append((location_id, _choice_index(compiled, location_id, value)))
    fired.sort()
    return _apply_faults(compiled, frame, fired)


def inject_fault(
    compiled: CompiledSchedule, frame: FrameState, location_id: int, value
) -> int:
    """Single-fault convenience wrapper around :func:`inject_round`."""
    return inject_round(compiled, frame, [(location_id, value)])


def legal_values(compiled: CompiledSchedule, location_id: int):
    """Every legal fault value at a location, in the sampler's choice order."""
    kind, _ = compiled.loc_kind[location_id]
    if kind in (CAT_PREP, ONE_QUBIT):
        return ("X", "Y", "Z")
    if kind == TWO_QUBIT:
        return TWO_QUBIT_FAULTS
    return ("flip",)
