import itertools
import math

import numpy as np
import pytest
from scipy import stats

from supersinglet.errors import InvalidInputError, ResourceLimitError
from supersinglet.measurement import SeededRng
from supersinglet.protocols import (
    PartyBehavior,
    SequenceTable,
    TamperModel,
    abort_lower_bound,
    conditional_completions,
    distribute_and_test,
    fake_position_trial,
    generate_table,
    ldp_list,
    ldp_run,
    ldp_validate,
    nsp_assign,
    rotating_orders,
    self_assignment_rate,
    ssp_detection_trial,
    ssp_run,
)
from supersinglet.protocols import ldp, ssp


def binomial_4sigma(p, n):
    return 4 * math.sqrt(p * (1 - p) / n)


def column_counts(table):
    n = table.num_parties
    perms = [sum(p[k] * n ** (n - 1 - k) for k in range(n)) for p in itertools.permutations(range(n))]
    codes = table.columns_as_codes()
    return np.array([np.sum(codes == c) for c in perms])


@pytest.fixture(scope="module")
def quantum_table_3():
    return generate_table(3, 10_000, "quantum", SeededRng(2024))


# -- tables ------------------------------------------------------------------

def test_quantum_table_columns_are_permutations():
    t = generate_table(3, 1000, "quantum", SeededRng(1))
    assert t.column_is_permutation().all()


@pytest.mark.parametrize("n", [2, 4, 6])
def test_direct_table_columns_are_permutations(n):
    assert generate_table(n, 500, "direct", 0).column_is_permutation().all()


def test_quantum_table_uniform_over_permutations(quantum_table_3):
    assert stats.chisquare(column_counts(quantum_table_3)).pvalue > 0.001


def test_quantum_and_direct_tables_equally_distributed(quantum_table_3):
    direct = generate_table(3, 10_000, "direct", SeededRng(77))
    contingency = np.vstack([column_counts(quantum_table_3), column_counts(direct)])
    assert stats.chi2_contingency(contingency)[1] > 0.001


def test_fixed_direction_source():
    t = generate_table(4, 2000, "quantum", 5, direction="fixed")
    assert t.column_is_permutation().all()


def test_table_errors():
    with pytest.raises(ResourceLimitError, match="direct"):
        generate_table(8, 10, "quantum", 0)
    assert generate_table(8, 10, "direct", 0).num_parties == 8
    with pytest.raises(InvalidInputError):
        generate_table(3, 10, "carrier-pigeon", 0)
    with pytest.raises(InvalidInputError):
        generate_table(3, 0, "direct", 0)


def test_table_seed_reproducible():
    a = generate_table(3, 50, "quantum", SeededRng(9))
    b = generate_table(3, 50, "quantum", SeededRng(9))
    np.testing.assert_array_equal(a.rows, b.rows)


# -- N strangers -------------------------------------------------------------

def test_nsp_read_off():
    t = SequenceTable(np.array([[1], [0], [2]]))
    a = nsp_assign(t, 0)
    assert a.victims == (1, 0, 2)
    assert a.self_assigned == (2,)
    assert a.is_bijection()


def test_nsp_always_bijection():
    t = generate_table(5, 300, "direct", 3)
    assert all(nsp_assign(t, j).is_bijection() for j in range(t.length))
    with pytest.raises(InvalidInputError):
        nsp_assign(t, 300)


def test_nsp_self_assignment_rate():
    t = generate_table(4, 10_000, "quantum", SeededRng(12), direction="fixed")
    assert abs(self_assignment_rate(t, 0) - 0.25) < 0.02


@pytest.mark.parametrize("n", [3, 4, 5])
def test_coalitions_cannot_pin_down_the_rest(n):
    """Any coalition of at most N-2 parties sees >= 2 equally likely completions."""
    for size in range(0, n - 1):
        for coalition in itertools.combinations(range(n), size):
            for syms in itertools.permutations(range(n), size):
                known = dict(zip(coalition, syms))
                completions = conditional_completions(n, known)
                assert len(completions) >= 2
                outsiders = [p for p in range(n) if p not in known]
                for p in outsiders:
                    assert len({c[p] for c in completions}) >= 2


def test_coalition_of_n_minus_1_learns_everything():
    assert len(conditional_completions(4, {0: 2, 1: 0, 2: 3})) == 1


# -- secret sharing -------------------------------------------------------------

def test_ssp_honest_reconstructs_dealer_row():
    t = generate_table(5, 200, "direct", 4)
    res = ssp_run(t)
    assert not any(r.aborted for r in res.rounds)
    assert res.key == t.rows[0].tolist()
    assert res.detection_rate is None


def test_ssp_orders_rotate_last_declarer():
    orders = rotating_orders(5, 8)
    assert [o[-1] for o in orders] == [4, 1, 2, 3, 4, 1, 2, 3]
    for o in orders:
        assert sorted(o) == [1, 2, 3, 4]


def test_ssp_rejects_bad_order_and_behaviour():
    t = generate_table(4, 3, "direct", 0)
    with pytest.raises(InvalidInputError):
        ssp_run(t, orders=[(1, 2, 2)] * 3)
    with pytest.raises(InvalidInputError):
        ssp_run(t, {0: ssp.FALSE_SHARE})
    with pytest.raises(InvalidInputError):
        ssp_run(t, {1: "shout"})


def test_ssp_lie_into_dealer_symbol_corrupts_key_silently():
    # liar 1 declares first; honest 2 and 3 hold symbols 3 and 0; dealer holds 1
    t = SequenceTable(np.array([[1], [2], [3], [0]]))
    outcomes = set()
    for seed in range(40):
        r = ssp_run(t, {1: ssp.FALSE_SHARE}, [(1, 2, 3)], seed).rounds[0]
        outcomes.add((r.aborted, r.detected_by, r.key_digit))
    assert outcomes == {(True, 2, None), (True, 3, None), (False, None, 2)}


def test_ssp_last_declarer_lie_is_undetectable():
    t = generate_table(4, 500, "direct", 8)
    res = ssp_run(t, {3: ssp.FALSE_SHARE}, [(1, 2, 3)] * 500, 1)
    assert not any(r.aborted for r in res.rounds)
    assert not any(r.correct for r in res.rounds)


@pytest.mark.parametrize("r", [1, 2, 3, 4, 5])
def test_ssp_detection_rate_of_uniform_liar(r):
    """A uniform lie hits an honest agent's symbol with probability r/(r+1)."""
    p = r / (r + 1)
    rate = ssp_detection_trial(r, 10_000, SeededRng(500 + r))
    assert abs(rate - p) < binomial_4sigma(p, 10_000)


# -- liar detection -------------------------------------------------------------

def test_ldp_list_examples():
    assert ldp_list([0, 1, 2, 0], 0) == [0, 3]
    assert ldp_list([1, 1, 2], 0) == []


def test_ldp_list_length_concentrates():
    t = generate_table(3, 3000, "direct", 21)
    for sym in range(3):
        assert abs(len(ldp_list(t.rows[0], sym)) - 1000) <= 150


def test_ldp_validate_honest_accepts():
    t = generate_table(3, 3000, "direct", 22)
    for sym in range(3):
        for i, j in itertools.permutations(range(3), 2):
            assert ldp_validate(ldp_list(t.rows[i], sym), t.rows[j], sym)


def test_ldp_validate_rejections():
    t = generate_table(3, 3000, "direct", 23)
    full = ldp_list(t.rows[0], 1)
    short = ldp_validate(full[: len(full) // 10 * 0 + 300], t.rows[1], 1)
    assert not short and short.reason == "list too short"
    bad = ldp_validate(full + [5000], t.rows[1], 1)
    assert not bad and bad.malformed
    own = ldp_list(t.rows[1], 1)[:5]
    hit = ldp_validate(sorted(full + own), t.rows[1], 1)
    assert not hit and "intersects" in hit.reason


def test_ldp_threshold_definitions():
    assert ldp.min_list_length(3000, 3) == pytest.approx(1000 - 3 * math.sqrt(2 * 3000 / 9))
    assert ldp.min_combined_length(3000) == pytest.approx(2000 - 3 * math.sqrt(4 * 3000 / 9))


@pytest.mark.parametrize("n", [1, 3, 5])
def test_fake_positions_rejection_rate(n):
    p = 1 - 0.5 ** n
    rate = fake_position_trial(300, n, 10_000, SeededRng(40 + n))
    assert abs(rate - p) < binomial_4sigma(p, 10_000)


def test_ldp_honest_run_is_consistent():
    t = generate_table(3, 3000, "direct", 30)
    tr = ldp_run(t, 1)
    assert tr.verdict == ldp.CONSISTENT
    assert tr.m_AB == tr.m_AC == tr.m_BC == 1
    assert set(tr.l_AB).isdisjoint(ldp_list(t.rows[1], 1))


def run_batch(behaviors, trials=1000, length=3000, seed=0):
    verdicts = []
    for s in SeededRng(seed).spawn(trials):
        gen = s.generator
        t = generate_table(3, length, "direct", gen)
        verdicts.append(ldp_run(t, int(gen.integers(3)), behaviors, gen).verdict)
    return verdicts


def test_ldp_a_lies_detected():
    v = run_batch([PartyBehavior("A", ldp.SEND_DIFFERENT)], seed=1)
    assert v.count(ldp.A_LIES) / len(v) >= 0.99


@pytest.mark.parametrize("strategy", [ldp.FORWARD_ALTERED, ldp.FORWARD_ALTERED_INFERRED])
def test_ldp_b_lies_detected(strategy):
    v = run_batch([PartyBehavior("B", strategy)], seed=2)
    assert v.count(ldp.B_LIES) / len(v) >= 0.99


def test_ldp_inferred_forgery_sizes():
    t = generate_table(3, 3000, "direct", 31)
    tr = ldp_run(t, 0, [PartyBehavior("B", ldp.FORWARD_ALTERED_INFERRED, alt_message=1)], 0)
    # own list (~L/3) plus positions where B holds the third trit and A did not list 0 (~L/6)
    assert 1300 < tr.combined_length < 1700
    assert tr.verdict == ldp.B_LIES


def test_ldp_fake_positions_and_truncation_are_rejected_at_the_hop():
    t = generate_table(3, 3000, "direct", 32)
    tr = ldp_run(t, 2, [PartyBehavior("A", ldp.INJECT_FAKE, n_fake=20)], 3)
    assert tr.verdict == ldp.REJECT and tr.failed_hop == "A->B"
    tr = ldp_run(t, 2, [PartyBehavior("B", ldp.TRUNCATE, keep_fraction=0.5)], 3)
    assert tr.verdict == ldp.REJECT and tr.failed_hop == "B->C" and tr.reason == "list too short"


def test_ldp_input_errors():
    t = generate_table(3, 30, "direct", 0)
    with pytest.raises(InvalidInputError):
        ldp_run(t, 3)
    with pytest.raises(InvalidInputError):
        ldp_run(generate_table(4, 30, "direct", 0), 1)
    with pytest.raises(InvalidInputError):
        PartyBehavior("C", ldp.SEND_DIFFERENT)
    with pytest.raises(InvalidInputError):
        ldp_run(t, 1, [PartyBehavior("A", ldp.SEND_DIFFERENT, alt_message=1)])


def test_ldp_transcript_deterministic():
    t = generate_table(3, 600, "direct", 33)
    b = [PartyBehavior("A", ldp.SEND_DIFFERENT)]
    assert ldp_run(t, 0, b, SeededRng(4)).to_dict() == ldp_run(t, 0, b, SeededRng(4)).to_dict()


# -- distribute and test ----------------------------------------------------------

def test_distribute_no_tamper_always_accepts():
    for s in SeededRng(50).spawn(50):
        res = distribute_and_test(400, 0.3, None, s)
        assert res.accepted
        assert res.usable.length == 400 - res.tested
        assert res.usable.column_is_permutation().all()


def test_distribute_detects_tampering():
    aborts = sum(
        not distribute_and_test(2000, 0.5, TamperModel(0.05), s).accepted for s in SeededRng(51).spawn(1000)
    )
    assert aborts / 1000 >= 0.99
    assert abort_lower_bound(0.05, 0.5, 2000) > 0.99


def test_distribute_abort_rate_meets_bound_at_small_scale():
    q, f, rounds, trials = 0.01, 0.5, 100, 2000
    aborts = sum(
        not distribute_and_test(rounds, f, TamperModel(q), s).accepted for s in SeededRng(52).spawn(trials)
    )
    bound = abort_lower_bound(q, f, rounds)
    assert aborts / trials >= bound - binomial_4sigma(bound, trials)


def test_distribute_product_tamper_partially_detectable():
    # an iid uniform column of 3 trits is a permutation with probability 6/27
    table = generate_table(3, 20_000, "direct", 0)
    from supersinglet.protocols.distribute import apply_tamper

    tampered, hit = apply_tamper(table, TamperModel(1.0, "product"), SeededRng(1))
    frac = tampered.column_is_permutation().mean()
    assert abs(frac - 6 / 27) < binomial_4sigma(6 / 27, 20_000)


def test_distribute_rejects_bad_fraction():
    for f in (0, 1, -0.1):
        with pytest.raises(InvalidInputError):
            distribute_and_test(100, f)
    with pytest.raises(InvalidInputError):
        TamperModel(1.5)
