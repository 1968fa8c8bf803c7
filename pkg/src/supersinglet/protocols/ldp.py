"""Liar detection among three parties A, B, C (rows 0, 1, 2 of the table).

A sends a trit to B and to C together with the list of positions where
that trit occurs in A's sequence.  B forwards to C the trit, its own
position list for it, and the list it got from A.  Receivers reject lists
that hit their own positions for the claimed trit, or that are too short.
When C sees two different trits she decides who lied from the size of the
union of B's two lists: about ``2L/3`` if B is honest, at most about
``L/3`` if B had to make them up from his own sequence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import InvalidInputError
from ..measurement import as_generator
from .table import SequenceTable

TRANSCRIPT_SCHEMA_VERSION = "1.0"

# Honest list lengths are Binomial(L, 1/3); a list shorter than the mean
# minus LIST_SIGMAS standard deviations is refused.
LIST_SIGMAS = 5.0
COMBINED_SIGMAS = 3.0

CONSISTENT = "consistent"
A_LIES = "A-lies"
B_LIES = "B-lies"
REJECT = "reject-message"
VERDICTS = (CONSISTENT, A_LIES, B_LIES, REJECT)

HONEST = "honest"
SEND_DIFFERENT = "send-different-messages"
FORWARD_ALTERED = "forward-altered-message"
FORWARD_ALTERED_INFERRED = "forward-altered-inferred"
INJECT_FAKE = "inject-fake-positions"
TRUNCATE = "truncate-list"
A_STRATEGIES = (HONEST, SEND_DIFFERENT, INJECT_FAKE, TRUNCATE)
B_STRATEGIES = (HONEST, FORWARD_ALTERED, FORWARD_ALTERED_INFERRED, INJECT_FAKE, TRUNCATE)


@dataclass(frozen=True)
class PartyBehavior:
    """How one party plays.

    ``n_fake`` is used by ``inject-fake-positions``, ``keep_fraction`` by
    ``truncate-list`` and ``alt_message`` by the two message-altering
    strategies (drawn at random when ``None``).
    """

    role: str
    strategy: str = HONEST
    n_fake: int = 0
    keep_fraction: float = 1.0
    alt_message: int | None = None

    def __post_init__(self):
        allowed = {"A": A_STRATEGIES, "B": B_STRATEGIES, "C": (HONEST,)}.get(self.role)
        if allowed is None:
            raise InvalidInputError(f"unknown role {self.role!r}")
        if self.strategy not in allowed:
            raise InvalidInputError(f"strategy {self.strategy!r} not available to {self.role}")


@dataclass(frozen=True)
class Validation:
    accepted: bool
    reason: str | None = None
    malformed: bool = False

    def __bool__(self):
        return self.accepted


@dataclass
class LdpTranscript:
    m_AB: int
    m_AC: int
    m_BC: int | None
    l_AB: list[int]
    l_AC: list[int]
    l_BC: list[int] = field(default_factory=list)
    l_BC_forwarded: list[int] = field(default_factory=list)
    verdict: str = CONSISTENT
    failed_hop: str | None = None
    reason: str | None = None
    combined_length: int | None = None
    combined_threshold: float | None = None

    def to_dict(self, include_lists: bool = True) -> dict:
        doc = {
            "schema_version": TRANSCRIPT_SCHEMA_VERSION,
            "messages": {"m_AB": self.m_AB, "m_AC": self.m_AC, "m_BC": self.m_BC},
            "verdict": self.verdict,
            "failed_hop": self.failed_hop,
            "reason": self.reason,
            "combined_length": self.combined_length,
            "combined_threshold": self.combined_threshold,
        }
        if include_lists:
            doc["lists"] = {
                "l_AB": self.l_AB,
                "l_AC": self.l_AC,
                "l_BC": self.l_BC,
                "l_BC_forwarded": self.l_BC_forwarded,
            }
        return doc


def _check_trit(m) -> int:
    if m not in (0, 1, 2):
        raise InvalidInputError(f"messages are trits, got {m!r}")
    return int(m)


def ldp_list(sequence: Sequence[int], symbol: int) -> list[int]:
    """Positions of ``symbol`` in ``sequence``."""
    _check_trit(symbol)
    return np.flatnonzero(np.asarray(sequence) == symbol).tolist()


def min_list_length(length: int, sigmas: float = LIST_SIGMAS) -> float:
    return length / 3 - sigmas * math.sqrt(2 * length / 9)


def min_combined_length(length: int, sigmas: float = COMBINED_SIGMAS) -> float:
    return 2 * length / 3 - sigmas * math.sqrt(4 * length / 9)


def ldp_validate(
    received: Sequence[int],
    receiver_sequence: Sequence[int],
    symbol: int,
    length: int | None = None,
    sigmas: float = LIST_SIGMAS,
) -> Validation:
    """Receiver-side check of a position list claimed to carry ``symbol``."""
    seq = np.asarray(receiver_sequence)
    length = seq.size if length is None else length
    pos = np.asarray(received, dtype=np.int64)
    if pos.size and (pos.min() < 0 or pos.max() >= seq.size):
        return Validation(False, "position out of range", malformed=True)
    if np.any(seq[pos] == symbol):
        return Validation(False, "list intersects receiver's own positions")
    if np.unique(pos).size < min_list_length(length, sigmas):
        return Validation(False, "list too short")
    return Validation(True)


def _other_trit(m: int, alt: int | None, gen) -> int:
    if alt is not None:
        alt = _check_trit(alt)
        if alt == m:
            raise InvalidInputError("alternative message must differ from the original")
        return alt
    return int(gen.choice([x for x in range(3) if x != m]))


def inject_fake_positions(true_list, sender_sequence, symbol, n, gen) -> list[int]:
    """Add ``n`` positions where the sender does not actually hold ``symbol``."""
    wrong = np.flatnonzero(np.asarray(sender_sequence) != symbol)
    if n > wrong.size:
        raise InvalidInputError("not enough positions to fake")
    fake = gen.choice(wrong, size=n, replace=False)
    return sorted(list(true_list) + fake.tolist())


def _tamper(lst, behavior, sender_sequence, symbol, gen) -> list[int]:
    if behavior.strategy == INJECT_FAKE:
        return inject_fake_positions(lst, sender_sequence, symbol, behavior.n_fake, gen)
    if behavior.strategy == TRUNCATE:
        keep = int(round(len(lst) * behavior.keep_fraction))
        return sorted(gen.choice(lst, size=keep, replace=False).tolist()) if keep else []
    return list(lst)


def ldp_run(
    table: SequenceTable,
    message: int = 0,
    behaviors: Sequence[PartyBehavior] = (),
    rng=0,
    list_sigmas: float = LIST_SIGMAS,
    combined_sigmas: float = COMBINED_SIGMAS,
) -> LdpTranscript:
    """Play one full exchange and return C's verdict with everything she saw.

    At most one of A and B should be dishonest; C is always honest.
    """
    if table.num_parties != 3:
        raise InvalidInputError("liar detection needs a 3-party table")
    message = _check_trit(message)
    roles = {b.role: b for b in behaviors}
    a = roles.get("A", PartyBehavior("A"))
    b = roles.get("B", PartyBehavior("B"))
    gen = as_generator(rng)
    seq_a, seq_b, seq_c = table.rows
    length = table.length

    m_ab = message
    m_ac = _other_trit(message, a.alt_message, gen) if a.strategy == SEND_DIFFERENT else message
    l_ab = _tamper(ldp_list(seq_a, m_ab), a, seq_a, m_ab, gen)
    l_ac = ldp_list(seq_a, m_ac)
    tr = LdpTranscript(m_ab, m_ac, None, l_ab, l_ac)

    def reject(hop, check):
        tr.verdict, tr.failed_hop, tr.reason = REJECT, hop, check.reason
        return tr

    check = ldp_validate(l_ab, seq_b, m_ab, length, list_sigmas)
    if not check:
        return reject("A->B", check)
    check = ldp_validate(l_ac, seq_c, m_ac, length, list_sigmas)
    if not check:
        return reject("A->C", check)

    if b.strategy in (FORWARD_ALTERED, FORWARD_ALTERED_INFERRED):
        m_bc = _other_trit(m_ab, b.alt_message, gen)
        own = ldp_list(seq_b, m_bc)
        # B cannot know A's list for m_bc, so both lists come out of his own.
        forwarded = list(own)
        if b.strategy == FORWARD_ALTERED_INFERRED:
            # where B holds the third trit and A did not list m_ab, A must hold m_bc
            third = 3 - m_ab - m_bc
            excluded = set(l_ab)
            inferred = [p for p in ldp_list(seq_b, third) if p not in excluded]
            forwarded = sorted(forwarded + inferred)
        l_bc = own
    else:
        m_bc = m_ab
        l_bc = _tamper(ldp_list(seq_b, m_bc), b, seq_b, m_bc, gen)
        forwarded = list(l_ab)
    tr.m_BC, tr.l_BC, tr.l_BC_forwarded = m_bc, l_bc, forwarded

    check = ldp_validate(l_bc, seq_c, m_bc, length, list_sigmas)
    if not check:
        return reject("B->C", check)
    if m_ac == m_bc:
        tr.verdict = CONSISTENT
        return tr

    fwd = np.asarray(forwarded, dtype=np.int64)
    if fwd.size and (fwd.min() < 0 or fwd.max() >= length):
        return reject("B->C", Validation(False, "forwarded list position out of range", True))
    if np.any(seq_c[fwd] == m_bc):
        return reject("B->C", Validation(False, "forwarded list intersects receiver's own positions"))
    combined = len(set(l_bc) | set(forwarded))
    tr.combined_length = combined
    tr.combined_threshold = min_combined_length(length, combined_sigmas)
    tr.verdict = A_LIES if combined >= tr.combined_threshold else B_LIES
    return tr


def fake_position_trial(length: int, n_fake: int, trials: int, rng=0) -> float:
    """Fraction of lists with ``n_fake`` injected positions that the receiver refuses."""
    gen = as_generator(rng)
    rejected = 0
    for _ in range(trials):
        cols = gen.permuted(np.tile(np.arange(3)[:, None], (1, length)), axis=0)
        sym = int(gen.integers(3))
        lst = inject_fake_positions(ldp_list(cols[0], sym), cols[0], sym, n_fake, gen)
        rejected += not ldp_validate(lst, cols[1], sym, length)
    return rejected / trials
