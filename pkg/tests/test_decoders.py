import numpy as np
import pytest

from ftecsim.decoders import (
    CONTINUE,
    PAIR_COUNT,
    SHOR_CAP,
    SHOR_REPEAT,
    STOP_CORRECT,
    STOP_NO_CORRECTION,
    USABLE_RUN,
    WEAK_NO_CORRECTION,
    PolicyConfig,
    ProtocolDefect,
    ShorPolicy,
    StrongPolicy,
    TwoStageState,
    WeakPolicy,
    decision_table,
    make_policy,
    policy_decision,
    worst_case_rounds,
)

PAPER_TABLE = {
    "strong": [3, 5, 8, 11, 15, 19, 24, 29, 35],
    "weak_nonzero": [2, 4, 6, 9, 12, 16, 20, 25, 30],
    "weak_zero": [1, 4, 7, 10, 14, 18, 23, 28, 34],
    "shor": [4, 9, 16, 25, 36, 49, 64, 81, 100],
}


def run_stream(policy, stream):
    decision = None
    for s in stream:
        decision = policy.step(s)
        if decision.action != CONTINUE:
            break
    return decision


def test_worst_case_rounds_full_table():
    for t in range(1, 10):
        assert worst_case_rounds("strong", t) == PAPER_TABLE["strong"][t - 1]
        assert worst_case_rounds("weak", t, "nonzero") == PAPER_TABLE["weak_nonzero"][t - 1]
        assert worst_case_rounds("weak", t, "zero") == PAPER_TABLE["weak_zero"][t - 1]
        assert worst_case_rounds("shor", t) == PAPER_TABLE["shor"][t - 1]


def test_shor_examples():
    d = run_stream(ShorPolicy(1), [7, 7])
    assert (d.action, d.rounds_used, d.round_index, d.stopped_by) == (
        STOP_CORRECT, 2, 2, SHOR_REPEAT)
    d = run_stream(ShorPolicy(1), [1, 2, 3, 4])
    assert (d.action, d.rounds_used, d.round_index, d.stopped_by) == (
        STOP_CORRECT, 4, 4, SHOR_CAP)
    d = run_stream(ShorPolicy(2), [5, 5, 5])
    assert (d.action, d.rounds_used, d.round_index) == (STOP_CORRECT, 3, 3)


def test_strong_protocol1_examples():
    d = run_stream(StrongPolicy(1), [9, 9])
    assert (d.action, d.round_index, d.stopped_by) == (STOP_CORRECT, 1, USABLE_RUN)
    d = run_stream(StrongPolicy(1), [1, 2, 3])
    assert (d.action, d.rounds_used, d.round_index, d.stopped_by) == (
        STOP_CORRECT, 3, 3, PAIR_COUNT)


def test_strong_static_decision_examples():
    d = policy_decision("strong", 3, True, "0100010")
    assert (d.action, d.round_index) == (STOP_CORRECT, 3)
    d = policy_decision("strong", 1, True, "11")
    assert (d.action, d.round_index, d.stopped_by) == (STOP_CORRECT, 3, PAIR_COUNT)
    assert policy_decision("strong", 3, True, "010010").action == CONTINUE


def test_table2_syndrome_selection_rows():
    # (stream, tabulated syndrome index), nonzero distinct values a, b, c
    a, b, c = 9, 5, 3
    rows = {
        "input": ([a, a, a], 1),
        "I(1)": ([a, b, b], 2),
        "I(2)": ([a, b, c], 3),
        "I(3)": ([a, a, b], 1),
        "II(1)": ([0, b, b], 2),
        "II(2)": ([a, a, b], 1),
        "II(3)": ([a, a, a], 1),
    }
    for name, (stream, expected_round) in rows.items():
        decision = run_stream(StrongPolicy(1), stream)
        assert decision.action == STOP_CORRECT, name
        assert decision.round_index == expected_round, name
        # chosen syndrome equals the tabulated one
        assert stream[decision.round_index - 1] == stream[expected_round - 1]


def test_weak_t1_examples():
    d = run_stream(WeakPolicy(1), [0])
    assert (d.action, d.rounds_used, d.stopped_by) == (
        STOP_NO_CORRECTION, 1, WEAK_NO_CORRECTION)
    d = run_stream(WeakPolicy(1), [4, 4])
    assert (d.action, d.round_index) == (STOP_CORRECT, 1)
    d = run_stream(WeakPolicy(1), [4, 6])
    assert (d.action, d.rounds_used) == (STOP_NO_CORRECTION, 2)


def test_weak_t2_spec_example():
    # s1 != 0, delta' = "0" after round 3: usable at budget 1, corrected
    # with round 2 after the index shift
    d = run_stream(WeakPolicy(2), [4, 5, 5])
    assert (d.action, d.rounds_used, d.round_index) == (STOP_CORRECT, 3, 2)


def test_weak_zero_branch_mapping():
    # noiseless: stops after round 2 without correction (prepended zero run)
    d = run_stream(WeakPolicy(2), [0, 0])
    assert (d.action, d.rounds_used) == (STOP_NO_CORRECTION, 2)
    # s1 = 0, s2 = s3 = s4 nonzero: deltaderived run maps back to round 2
    d = run_stream(WeakPolicy(2), [0, 7, 7, 7])
    assert (d.action, d.rounds_used, d.round_index) == (STOP_CORRECT, 4, 2)


def test_weak_pair_count_stop_uses_latest():
    # s1 != 0, all syndromes distinct: delta' all ones, pairs hit t-1
    d = run_stream(WeakPolicy(2), [1, 2, 3, 4])
    assert (d.action, d.rounds_used, d.round_index, d.stopped_by) == (
        STOP_CORRECT, 4, 4, PAIR_COUNT)


def test_step_after_stop_raises():
    p = StrongPolicy(1)
    p.step(3)
    p.step(3)
    with pytest.raises(RuntimeError):
        p.step(3)


def test_policy_defect_is_unreachable_without_bugs():
    # the caps equal the exhaustive maxima, so a defect needs a broken rule;
    # force one by feeding the pure function a state past the cap that the
    # incremental policy could never reach (it stops on the prefix "11")
    with pytest.raises(ProtocolDefect):
        policy_decision("strong", 1, True, "1111")


def test_decision_tables_match_state_machines():
    rng = np.random.default_rng(7)
    for kind in ("strong", "weak"):
        for t in (1, 2, 3):
            for s1_nonzero in (False, True):
                tables = decision_table(kind, t, s1_nonzero)
                for _ in range(200):
                    policy = make_policy(PolicyConfig(kind, t))
                    syn = 5 if s1_nonzero else 0
                    delta_bits = 0
                    length = 0
                    decision = policy.step(syn)
                    entry = tables[0][0]
                    assert (decision.action, decision.round_index, decision.stopped_by) == entry
                    while decision.action == CONTINUE:
                        bit = int(rng.integers(2))
                        syn = syn + 1 if bit else syn
                        decision = policy.step(syn)
                        delta_bits |= bit << length
                        length += 1
                        entry = tables[length][delta_bits]
                        assert (
                            decision.action, decision.round_index, decision.stopped_by
                        ) == entry


def test_two_stage_budget_arithmetic():
    # stage 1 ends with delta_x = "0": t_oc = 0, stage 2 runs with budget 2
    ts = TwoStageState("strong", 2)
    ts.step(3)
    ts.step(3)
    d = ts.step(3)  # delta "00", gamma=2 >= 2 usable
    assert ts.stage == 2 and ts.t_oc == 0 and ts.stage2_budget == 2
    # stage 1 sees one 11 pair: t_oc = 1, budget 1
    ts = TwoStageState("strong", 2)
    for s in (1, 2, 3, 3):
        d = ts.step(s)
        if ts.stage == 2:
            break
    assert ts.t_oc == 1 and ts.stage2_budget == 1
    # zero remaining budget accepts the first stage-2 syndrome
    ts = TwoStageState("strong", 1)
    ts.step(1)
    ts.step(2)
    d = ts.step(2)  # delta "10": usable run, stop; t_oc = 1 -> budget 0
    assert ts.stage == 2 and ts.stage2_budget == 0
    d = ts.step(9)
    assert d.action == STOP_CORRECT and d.round_index == 1 and ts.stage2 is not None


def test_two_stage_rejects_shor():
    with pytest.raises(ValueError):
        TwoStageState("shor", 2)


def test_policy_config_validation():
    with pytest.raises(ValueError):
        PolicyConfig("nope", 1)
    with pytest.raises(ValueError):
        PolicyConfig("shor", 0)
    assert PolicyConfig("weak", 2).max_rounds_cap() == 4
    assert PolicyConfig("weak", 3).max_rounds_cap("zero") == 7
