"""``supersinglet`` command line front end.

Data goes to stdout (JSON or CSV), a one-line summary to stderr.  All
randomness derives from ``--seed``; Monte-Carlo trials get child streams
from :meth:`SeededRng.spawn` so output never depends on execution order.

Exit codes: 0 ok, 1 invalid input, 2 resource limit, 3 internal
consistency failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from collections import Counter

import numpy as np

from . import bell, dfsub, measurement, qcore
from .errors import InvalidInputError, SupersingletError
from .measurement import SeededRng
from .protocols import distribute, ldp, nsp, ssp, table as tables

SCHEMA_VERSION = "1.0"

BELL_DEFAULT_ROWS = [(n, 1) for n in (2, 3, 5, 10, 50, 200, 1000)] + [(n, 2) for n in (4, 5, 10, 50, 200, 1000)]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _doc(command: str, **fields) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, **fields}


def _caps(args) -> dict:
    return {} if args.cap is None else {"cap": args.cap}


def _build_state(args) -> qcore.StateVector:
    n = args.N if args.N is not None else 2
    return qcore.supersinglet(args.family, n, args.d, args.cap)


def cmd_state(args):
    st = _build_state(args)
    nz = st.support()
    rows = [["ket", "re", "im"]] + [
        ["".join(map(str, k)), v.real, v.imag] for k, v in sorted(nz.items())
    ]
    return _doc("state", family=args.family, norm=st.norm(), **st.to_dict()), rows, f"norm {st.norm():.15f}, {len(nz)} nonzero amplitudes"


def cmd_invariance(args):
    st = _build_state(args)
    gen = SeededRng(args.seed).generator
    devs, phase_err = [], []
    for _ in range(args.trials):
        u = qcore.random_collective_op(st, gen)
        devs.append(qcore.invariance_deviation(st, u))
        if st.num_sites == st.local_dim:
            # the antisymmetric state picks up exactly det(U)
            ph = qcore.invariance_phase(st, u) - np.angle(np.linalg.det(u))
            phase_err.append(abs(math.remainder(ph, 2 * math.pi)))
    tol = args.tol if args.tol is not None else 1e-9
    doc = _doc(
        "invariance",
        family=args.family,
        N=st.num_sites,
        d=st.local_dim,
        trials=args.trials,
        seed=args.seed,
        max_deviation=max(devs),
        tolerance=tol,
        passed=max(devs) < tol,
        max_det_phase_error=max(phase_err) if phase_err else None,
    )
    rows = [["trial", "deviation"]] + [[i, d] for i, d in enumerate(devs)]
    return doc, rows, f"max deviation {max(devs):.3e} over {args.trials} unitaries"


def cmd_bell_max(args):
    if args.N is not None:
        pairs = [(args.N, args.m)]
    else:
        pairs = BELL_DEFAULT_ROWS if args.m is None else [p for p in BELL_DEFAULT_ROWS if p[1] == args.m]
    results = [bell.maximize_violation(n, m if m is not None else 1, form=args.form) for n, m in pairs]
    rows = [["N", "m", "max_violation"]] + [[r.N, r.m, f"{r.value:.6f}"] for r in results]
    if len(results) == 1:
        doc = _doc("bell-max", **results[0].to_dict())
    else:
        doc = _doc("bell-max", results=[r.to_dict() for r in results])
    return doc, rows, "; ".join(f"N={r.N} m={r.m}: {r.value:.4f}" for r in results)


def cmd_corr_check(args):
    ns = [args.N] if args.N is not None else [2, 3, 4, 5]
    ms = [args.m] if args.m is not None else [1, 2]
    if any(m not in (1, 2) for m in ms):
        raise InvalidInputError("closed forms exist for m = 1 and m = 2 only")
    gen = SeededRng(args.seed).generator
    entries = []
    for n in ns:
        state = qcore.make_nn_supersinglet(n, args.cap or qcore.NN_CAP)
        for m in ms:
            if m == 2 and n < 4:
                continue
            thetas = gen.uniform(0, 2 * np.pi, args.trials)
            brute = np.array([bell.correlation_bruteforce(state, bell.planar_spec(n, t, m)) for t in thetas])
            forms = {"published": bell.corr_closed_m1 if m == 1 else bell.corr_closed_m2}
            forms["exact"] = bell.corr_closed_m1 if m == 1 else bell.corr_exact_m2
            for name, f in forms.items():
                err = float(np.max(np.abs(f(n, thetas) - brute)))
                entries.append({"N": n, "m": m, "form": name, "angles": args.trials, "max_abs_error": err})
    if not entries:
        raise InvalidInputError("no closed form for the requested (N, m); m=2 needs N >= 4")
    rows = [["N", "m", "form", "max_abs_error"]] + [[e["N"], e["m"], e["form"], e["max_abs_error"]] for e in entries]
    worst = max(entries, key=lambda e: e["max_abs_error"])
    return _doc("corr-check", seed=args.seed, checks=entries), rows, f"worst: N={worst['N']} m={worst['m']} {worst['form']} err {worst['max_abs_error']:.2e}"


def cmd_sample(args):
    st = _build_state(args)
    direction = (args.theta, args.phi)
    outs = measurement.sample_outcomes(st, direction, args.trials, SeededRng(args.seed))
    counts = Counter("".join(map(str, row)) for row in outs.tolist())
    violations = 0
    if st.num_sites == st.local_dim:
        violations = int(np.sum(~np.all(np.sort(outs, axis=1) == np.arange(st.num_sites), axis=1)))
    doc = _doc(
        "sample",
        family=args.family,
        N=st.num_sites,
        d=st.local_dim,
        seed=args.seed,
        trials=args.trials,
        direction=list(direction),
        counts=dict(sorted(counts.items())),
        permutation_violations=violations,
    )
    rows = [["trial", "outcome"]] + [[i, "".join(map(str, r))] for i, r in enumerate(outs.tolist())]
    return doc, rows, f"{len(counts)} distinct outcomes, {violations} non-permutation samples"


def cmd_table(args):
    t = tables.generate_table(args.N or 3, args.L, args.source, SeededRng(args.seed), **_caps(args))
    rows = [["position"] + [f"party_{k}" for k in range(t.num_parties)]]
    rows += [[j, *t.column(j)] for j in range(t.length)]
    return _doc("table", seed=args.seed, source=args.source, **t.to_dict()), rows, f"{t.num_parties} x {t.length} table"


def cmd_nsp(args):
    t = tables.generate_table(args.N or 3, args.L, args.source, SeededRng(args.seed), **_caps(args))
    assigns = [nsp.nsp_assign(t, j) for j in range(t.length)]
    rates = [nsp.self_assignment_rate(t, k) for k in range(t.num_parties)]
    rows = [["round", "victims", "self_assigned"]] + [
        [a.round, " ".join(map(str, a.victims)), " ".join(map(str, a.self_assigned))] for a in assigns
    ]
    doc = _doc("nsp", seed=args.seed, N=t.num_parties, L=t.length,
               assignments=[a.to_dict() for a in assigns], self_assignment_rates=rates)
    return doc, rows, f"self-assignment rates {', '.join(f'{r:.3f}' for r in rates)} (expected {1 / t.num_parties:.3f})"


def cmd_ssp(args):
    n = args.N or 3
    t = tables.generate_table(n, args.L, args.source, SeededRng(args.seed).spawn(2)[0], **_caps(args))
    liars = {int(x): ssp.FALSE_SHARE for x in args.dishonest.split(",") if x.strip()} if args.dishonest else {}
    res = ssp.ssp_run(t, liars, rng=SeededRng(args.seed).spawn(2)[1])
    rows = [["round", "aborted", "detected_by", "key_digit", "correct"]] + [
        [r.round, r.aborted, r.detected_by, r.key_digit, r.correct] for r in res.rounds
    ]
    doc = _doc("ssp", seed=args.seed, N=n, L=t.length, dishonest=sorted(liars),
               rounds=[r.to_dict() for r in res.rounds], key=res.key,
               detection_rate=res.detection_rate,
               key_matches_dealer=all(r.correct for r in res.rounds if not r.aborted))
    return doc, rows, f"{sum(r.aborted for r in res.rounds)} of {len(res.rounds)} rounds aborted"


def _ldp_behaviors(args):
    if args.liar is None:
        return ()
    if args.liar == "A":
        return (ldp.PartyBehavior("A", args.strategy or ldp.SEND_DIFFERENT, n_fake=args.n_fake),)
    return (ldp.PartyBehavior("B", args.strategy or ldp.FORWARD_ALTERED, n_fake=args.n_fake),)


def cmd_ldp(args):
    behaviors = _ldp_behaviors(args)
    streams = SeededRng(args.seed).spawn(args.trials)
    trials = []
    for i, s in enumerate(streams):
        gen = s.generator
        t = tables.generate_table(3, args.L, args.source, gen)
        tr = ldp.ldp_run(t, int(gen.integers(3)), behaviors, gen)
        trials.append(tr)
    counts = Counter(tr.verdict for tr in trials)
    fractions = {v: counts.get(v, 0) / args.trials for v in ldp.VERDICTS}
    doc = _doc("ldp", seed=args.seed, L=args.L, trials=args.trials, liar=args.liar,
               strategy=behaviors[0].strategy if behaviors else "honest",
               verdict_counts={v: counts.get(v, 0) for v in ldp.VERDICTS},
               verdict_fractions=fractions)
    if args.trials == 1:
        doc["transcript"] = trials[0].to_dict()
    rows = [["trial", "verdict", "statistic"]] + [
        [i, tr.verdict, tr.combined_length if tr.combined_length is not None else ""] for i, tr in enumerate(trials)
    ]
    return doc, rows, ", ".join(f"{v}: {counts.get(v, 0)}" for v in ldp.VERDICTS)


def cmd_dtest(args):
    model = distribute.TamperModel(args.q, args.tamper_kind)
    streams = SeededRng(args.seed).spawn(args.trials)
    res = [
        distribute.distribute_and_test(args.L, args.test_fraction, model, s, n=args.N or 3, source=args.source)
        for s in streams
    ]
    aborts = sum(not r.accepted for r in res)
    doc = _doc("dtest", seed=args.seed, N=args.N or 3, rounds=args.L, test_fraction=args.test_fraction,
               q=args.q, tamper_kind=args.tamper_kind, trials=args.trials, aborts=aborts,
               abort_rate=aborts / args.trials,
               abort_lower_bound=distribute.abort_lower_bound(args.q, args.test_fraction, args.L))
    if args.trials == 1:
        doc["result"] = res[0].to_dict()
    rows = [["trial", "verdict", "statistic"]] + [
        [i, "accept" if r.accepted else "abort", len(r.failed_positions)] for i, r in enumerate(res)
    ]
    return doc, rows, f"aborted {aborts} of {args.trials}"


def cmd_df(args):
    top = args.N or 12
    dfsub.df_dimension(top)  # rejects odd N
    ns = list(range(2, top + 1, 2)) if top <= 64 else [2, 4, 8, 16, 32, 64, 128, 256, 512, top]
    cap = args.cap or dfsub.DF_CAP
    entries = []
    for n in ns:
        rep = dfsub.encoding_efficiency(n)
        e = rep.to_dict()
        if n <= cap:
            basis = dfsub.df_basis(n, cap)
            e["gram_rank"] = basis.rank
            if n <= qcore.QUBIT_CAP:
                e["supersinglet_residual"] = basis.projection_residual(qcore.make_qubit_supersinglet(n))
        entries.append(e)
    rows = [["N", "d", "log2_d", "efficiency", "asymptotic"]] + [
        [e["N"], e["dimension"], e["log2_dimension"], e["efficiency"], e["asymptotic_estimate"]] for e in entries
    ]
    return _doc("df", entries=entries), rows, f"{len(entries)} rows up to N={ns[-1]}"


COMMANDS = {
    "state": cmd_state,
    "invariance": cmd_invariance,
    "bell-max": cmd_bell_max,
    "corr-check": cmd_corr_check,
    "sample": cmd_sample,
    "table": cmd_table,
    "nsp": cmd_nsp,
    "ssp": cmd_ssp,
    "ldp": cmd_ldp,
    "dtest": cmd_dtest,
    "df": cmd_df,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--N", type=int, default=None)
    common.add_argument("--m", type=int, default=None)
    common.add_argument("--d", type=int, default=None)
    common.add_argument("--L", type=int, default=1000)
    common.add_argument("--trials", type=int, default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--source", choices=tables.SOURCES, default="quantum")
    common.add_argument("--cap", type=int, default=None)
    common.add_argument("--tol", type=float, default=None, help="override the pass threshold where one applies")

    parser = _Parser(prog="supersinglet", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name in ("state", "invariance", "sample"):
            p.add_argument("--family", choices=("NN", "qubit", "pair"), default="NN")
        if name in ("bell-max",):
            p.add_argument("--form", choices=bell.CLOSED_FORMS, default="published")
        if name == "sample":
            p.add_argument("--theta", type=float, default=0.0)
            p.add_argument("--phi", type=float, default=0.0)
        if name == "ssp":
            p.add_argument("--dishonest", default="", help="comma-separated agent indices")
        if name == "ldp":
            p.add_argument("--liar", choices=("A", "B"), default=None)
            p.add_argument("--strategy", default=None)
            p.add_argument("--n-fake", type=int, default=0)
        if name in ("ldp", "dtest"):
            # many trials of long tables; the quantum source samples one direction per position
            p.set_defaults(source="direct")
        if name == "dtest":
            p.add_argument("--test-fraction", type=float, default=0.5)
            p.add_argument("--q", type=float, default=0.0)
            p.add_argument("--tamper-kind", choices=distribute.TAMPER_KINDS, default="collision")
    return parser


_DEFAULT_TRIALS = {"invariance": 100, "corr-check": 50, "sample": 1000, "ldp": 100, "dtest": 100}


def _emit(doc, rows, fmt, out):
    if fmt == "csv":
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(rows)
        out.write(buf.getvalue())
    else:
        out.write(json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n")


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    if args.trials is None:
        args.trials = _DEFAULT_TRIALS.get(args.command, 1)
    try:
        if args.trials < 1:
            raise InvalidInputError("--trials must be >= 1")
        doc, rows, summary = COMMANDS[args.command](args)
    except SupersingletError as exc:
        err.write(f"supersinglet {args.command}: {exc}\n")
        return exc.exit_code
    _emit(doc, rows, args.format, out)
    err.write(f"{args.command}: {summary}\n")
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
