"""Command-line interface: ``qpnet infer|sat|convert|show``."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import report
from .algebra import DEFAULT_BUDGET, DEFAULT_CAP, eliminate_star, expand, to_text
from .errors import (
    BudgetExceededError,
    ExpansionLimitError,
    QpError,
    TooManyAtomsError,
    ValidationError,
    ZeroEvidenceError,
)
from .inference import as_literals, boost_coefficients, conditional, event_qp, parse_query
from .network import (
    Network,
    dumps_network,
    from_cpt,
    loads_cpt,
    loads_network,
    valuation_from_dict,
    valuation_to_dict,
)
from .pulse import PulseConfig, repeated_estimate
from .sat import SatStatus, count_models, decide_sat, format_count, format_result, parse_dimacs

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_BUDGET = 4
EXIT_ZERO_EVIDENCE = 5
EXIT_SAT = 10
EXIT_UNSAT = 20
EXIT_UNKNOWN = 30

PULSE_KNOBS = ("periods", "resolution", "seed", "repeats")


class InputError(Exception):
    """Unreadable or malformed input file."""


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def load_network(path: str) -> Network:
    net = loads_network(_read(path))
    return net.checked()


def load_valuation(path: str) -> dict:
    # decimals are read as exact fractions: 0.1 means 1/10
    try:
        data = json.loads(_read(path), parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from None
    return valuation_from_dict(data)


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror or exc}") from None


def _emit(args, text: str, record: dict) -> None:
    print(report.to_json(record) if args.format == "json" else text)


# --- subcommands ------------------------------------------------------------------------

def cmd_infer(args) -> int:
    if args.engine != "pulse":
        given = [k for k in PULSE_KNOBS if getattr(args, k) is not None]
        if given:
            raise argparse.ArgumentTypeError(f"--{given[0]} only applies to --engine pulse")
    if args.boost is not None and args.engine != "exact":
        raise argparse.ArgumentTypeError("--boost only applies to --engine exact")
    if args.symbolic and args.engine != "exact":
        raise argparse.ArgumentTypeError("--symbolic only applies to --engine exact")
    net = load_network(args.net)
    val = load_valuation(args.val)
    query = parse_query(args.query)
    qtext = str(query)
    if args.engine == "pulse":
        cfg = PulseConfig(args.resolution or 64, args.periods or 20_000, args.seed or 0)
        est = repeated_estimate(net, query, val, cfg, args.repeats or 1)
        try:
            exact = conditional(net, query, val, engine="oracle").value
        except TooManyAtomsError:
            exact = None
        std = est.std if (args.repeats or 1) > 1 else None
        text = report.infer_text(est.mean, exact=exact, std=std)
        rec = report.probability_record(qtext, "pulse", est.mean, reference=None if exact is None else float(exact), std=std)
        _emit(args, text, rec)
        return EXIT_OK
    res = conditional(net, query, val, engine=args.engine, budget=args.budget, strategy=args.strategy)
    boost = None
    value = res.value
    if args.boost is not None:
        if args.boost not in val:
            raise InputError(f"no value for boosted atom {args.boost!r}")
        boost = boost_coefficients(net, query, val, args.boost, budget=args.budget)
        value = boost.value_at(val[args.boost])
    qps = res.qps if args.symbolic else None
    text = report.infer_text(
        value,
        numerator=qps.numerator if qps else None,
        denominator=qps.denominator if qps else None,
        cancelled=qps.cancelled if qps else (),
        boost=boost,
    )
    extra = {}
    if qps:
        extra = {"numerator": to_text(qps.numerator), "denominator": to_text(qps.denominator)}
    _emit(args, text, report.probability_record(qtext, args.engine, value, **extra))
    return EXIT_OK


def cmd_sat(args) -> int:
    f = parse_dimacs(_read(args.cnf))
    if args.count:
        print(format_count(count_models(f, budget=args.budget)))
        return EXIT_OK
    res = decide_sat(f, args.budget, args.strategy)
    print(format_result(f, res))
    return {SatStatus.SAT: EXIT_SAT, SatStatus.UNSAT: EXIT_UNSAT}.get(res.status, EXIT_UNKNOWN)


def cmd_convert(args) -> int:
    cpt = loads_cpt(_read(args.cpt))
    net, symbols = from_cpt(cpt)
    net.checked()
    net_text = dumps_network(net)
    val_text = json.dumps(valuation_to_dict(symbols), indent=2, ensure_ascii=False)
    if loads_network(net_text) != net:  # pragma: no cover - serializer bug guard
        raise InputError("network did not round-trip through JSON")
    _write(args.out_net, net_text + "\n")
    _write(args.out_val, val_text + "\n")
    print(report.convert_text(len(net), symbols))
    return EXIT_OK


def cmd_show(args) -> int:
    net = load_network(args.net)
    lits = as_literals(args.target)
    raw = event_qp(net, lits)
    dec = eliminate_star(raw, args.budget, args.strategy)
    exp = expand(raw, args.cap) if args.expanded else None
    target = ", ".join(map(str, lits))
    _emit(args, report.show_text(raw, dec, exp), report.show_record(target, raw, dec, exp))
    return EXIT_OK


# --- parser --------------------------------------------------------------------------------

def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _nonnegative_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("must be nonnegative")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qpnet", description="Symbolic inference for noisy AND-OR-NOT networks.")
    sub = p.add_subparsers(dest="command", required=True)

    def elim_opts(sp):
        sp.add_argument("--budget", type=_positive_int, default=DEFAULT_BUDGET, help="max distribution steps in *-elimination")
        sp.add_argument("--strategy", choices=("split", "distribute"), default="split")

    inf = sub.add_parser("infer", help="probability of a query")
    inf.add_argument("--net", required=True)
    inf.add_argument("--val", required=True, help="JSON object symbol -> value")
    inf.add_argument("--query", required=True, help='e.g. "B | F, !G"')
    inf.add_argument("--engine", choices=("exact", "oracle", "pulse"), default="exact")
    inf.add_argument("--symbolic", action="store_true", help="also print the decomposed numerator and denominator")
    inf.add_argument("--boost", metavar="ATOM", help="recover the result from probes at 1/2 and 1 of ATOM")
    inf.add_argument("--periods", type=_positive_int)
    inf.add_argument("--resolution", type=_positive_int, help="slots per pulse period")
    inf.add_argument("--seed", type=_nonnegative_int)
    inf.add_argument("--repeats", type=_positive_int)
    inf.add_argument("--format", choices=("text", "json"), default="text")
    elim_opts(inf)
    inf.set_defaults(func=cmd_infer)

    sat = sub.add_parser("sat", help="decide a DIMACS CNF formula")
    sat.add_argument("cnf")
    sat.add_argument("--count", action="store_true", help="print the number of models")
    elim_opts(sat)
    sat.set_defaults(func=cmd_sat)

    conv = sub.add_parser("convert", help="CPT network to AND-OR-NOT network")
    conv.add_argument("cpt")
    conv.add_argument("--out-net", required=True)
    conv.add_argument("--out-val", required=True, help="symbol table, usable as --val")
    conv.set_defaults(func=cmd_convert)

    show = sub.add_parser("show", help="raw, decomposed and expanded QP of an event")
    show.add_argument("net")
    show.add_argument("target", help='node id or literals, e.g. "B, !F"')
    show.add_argument("--expanded", action="store_true")
    show.add_argument("--cap", type=_positive_int, default=DEFAULT_CAP, help="term cap for --expanded")
    show.add_argument("--format", choices=("text", "json"), default="text")
    elim_opts(show)
    show.set_defaults(func=cmd_show)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except argparse.ArgumentTypeError as exc:
        parser.print_usage(sys.stderr)
        print(f"qpnet {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print("invalid network:", file=sys.stderr)
        for v in exc.violations:
            print(f"  {v}", file=sys.stderr)
        return EXIT_VALIDATION
    except (BudgetExceededError, ExpansionLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ZeroEvidenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ZERO_EVIDENCE
    except (InputError, QpError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
