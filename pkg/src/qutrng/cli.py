"""Command-line interface: ``qutrng generate | verify | chsh | state-test``.

Exit codes: 0 accept / success, 1 failed verification, 2 reject,
3 inconclusive, 64 bad usage or values, 66 unreadable input file,
73 output file cannot be written.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from qutrng import biphoton, generator, qutrit, stats, verify
from qutrng.sampler import RandomStream, SourceModel, parse_seed

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_REJECT = 2
EXIT_INCONCLUSIVE = 3
EXIT_USAGE = 64
EXIT_NOINPUT = 66
EXIT_CANTCREAT = 73

VERDICT_EXIT = {
    generator.Verdict.ACCEPT: EXIT_OK,
    generator.Verdict.REJECT: EXIT_REJECT,
    generator.Verdict.INCONCLUSIVE: EXIT_INCONCLUSIVE,
}

ASCII_LINE = 64

NAMED_STATES = {
    "plus": lambda: qutrit.PLUS,
    "zero": lambda: qutrit.ZERO,
    "minus": lambda: qutrit.MINUS,
    **{f"unbiased{k}": (lambda k=k: qutrit.unbiased_state(k)) for k in range(4)},
}


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# --- parsing helpers ----------------------------------------------------------


def parse_complex(text: str) -> complex:
    """``re`` or ``re:im``."""
    parts = text.strip().split(":")
    if len(parts) > 2:
        raise ValueError(f"bad complex literal {text!r}")
    re = float(parts[0])
    im = float(parts[1]) if len(parts) == 2 else 0.0
    return complex(re, im)


def parse_state_spec(text: str) -> qutrit.QutritState:
    """Named state or ``a_re[,a_im],b_re[,b_im],c_re[,c_im]`` (3 or 6 numbers)."""
    key = text.strip().lower()
    if key in NAMED_STATES:
        return NAMED_STATES[key]()
    try:
        nums = [float(x) for x in key.split(",")]
    except ValueError:
        raise ValueError(f"cannot parse state {text!r}") from None
    if len(nums) == 3:
        amps = [complex(x) for x in nums]
    elif len(nums) == 6:
        amps = [complex(nums[i], nums[i + 1]) for i in (0, 2, 4)]
    else:
        raise ValueError(f"state needs 3 or 6 numbers, got {len(nums)}")
    return qutrit.make_state(*amps)


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def _content_lines(text: str):
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield n, line


def load_ensemble(path: str) -> SourceModel:
    comps = []
    for n, line in _content_lines(_read_text(path)):
        fields = line.split()
        if len(fields) != 4:
            raise ValueError(f"{path}:{n}: expected 'weight a b c', got {line!r}")
        w = float(fields[0])
        comps.append((w, qutrit.make_state(*(parse_complex(f) for f in fields[1:]))))
    if not comps:
        raise ValueError(f"{path}: empty ensemble")
    return SourceModel.ensemble(comps)


def parse_source(spec: str) -> SourceModel:
    if spec == "ideal":
        return SourceModel.ideal()
    if spec.startswith("state:"):
        return SourceModel.fixed(parse_state_spec(spec[len("state:") :]))
    if spec.startswith("ensemble:"):
        return load_ensemble(spec[len("ensemble:") :])
    raise ValueError(f"unknown source {spec!r}; use ideal, state:<spec> or ensemble:<file>")


def load_observables(path: str):
    """Four lines ``m00 m01 m10 m11`` (entries ``re[:im]``) for A1, A2, B1, B2."""
    mats = []
    for n, line in _content_lines(_read_text(path)):
        fields = line.split()
        if len(fields) != 4:
            raise ValueError(f"{path}:{n}: expected 4 matrix entries, got {line!r}")
        mats.append(np.array([parse_complex(f) for f in fields]).reshape(2, 2))
    if len(mats) != 4:
        raise ValueError(f"{path}: expected 4 observables, got {len(mats)}")
    return mats


def format_ascii(trits) -> str:
    s = (np.asarray(trits, dtype=np.uint8) + ord("0")).tobytes().decode("ascii")
    if not s:
        return ""
    return "\n".join(s[i : i + ASCII_LINE] for i in range(0, len(s), ASCII_LINE)) + "\n"


def parse_ascii(text: str) -> np.ndarray:
    digits = "".join(text.split())
    bad = set(digits) - set("012")
    if bad:
        raise ValueError(f"unexpected characters in trit stream: {''.join(sorted(bad))!r}")
    return np.frombuffer(digits.encode("ascii"), dtype=np.uint8) - ord("0")


def load_config(path: str, parser: argparse.ArgumentParser) -> dict[str, str]:
    allowed = {a.dest for a in parser._actions if a.dest not in ("help", "config")}
    values = {}
    for n, line in _content_lines(_read_text(path)):
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected 'key = value'")
        key, value = (x.strip() for x in line.split("=", 1))
        dest = key.replace("-", "_")
        if dest not in allowed:
            raise UsageError(f"{path}:{n}: unknown config key {key!r}")
        values[dest] = value
    return values


def _fmt(x: float) -> str:
    if abs(x) < 5e-13:
        x = 0.0
    return f"{x:.12f}"


# --- subcommands --------------------------------------------------------------


def cmd_generate(args) -> int:
    if args.public_seed is not None and args.public_file is not None:
        raise UsageError("--public-seed and --public-file are mutually exclusive")
    if args.count < 0 or args.jobs < 1:
        raise UsageError("--count must be >= 0 and --jobs >= 1")
    try:
        cfg = generator.GeneratorConfig(
            epsilon=args.epsilon,
            delta=args.delta,
            check_rate=args.check_rate,
            target_output=args.count,
            fidelity_threshold=args.threshold,
        )
        src = parse_source(args.source)
        if args.public_file is not None:
            public = parse_ascii(_read_text(args.public_file))
        else:
            pseed = args.seed if args.public_seed is None else args.public_seed
            public = RandomStream(pseed).split("settings").trits(args.count)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    trits, report = generator.run_session(src, public, cfg, RandomStream(args.seed), jobs=args.jobs)
    report.public_seed = None if args.public_file is not None else (args.seed if args.public_seed is None else args.public_seed)
    if trits.size:
        report.stats = stats.analyze(trits).to_dict()
    rep = report.to_dict()

    if args.format == "ascii":
        payload = format_ascii(trits).encode("ascii")
    elif args.format == "raw":
        payload = trits.astype(np.uint8).tobytes()
    else:
        payload = (json.dumps({"trits": trits.tolist(), "report": rep}) + "\n").encode("utf-8")
    try:
        if args.out:
            Path(args.out).write_bytes(payload)
        else:
            sys.stdout.buffer.write(payload)
            sys.stdout.flush()
        if args.report:
            Path(args.report).write_text(json.dumps(rep, indent=2) + "\n")
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CANTCREAT
    y = "n/a" if report.Y is None else f"{report.Y:.6f}"
    print(
        f"verdict={report.verdict.value} output={report.output_count} checks={report.checks}/"
        f"{report.required_checks} Y={y}",
        file=sys.stderr,
    )
    return VERDICT_EXIT[report.verdict]


def cmd_verify(args) -> int:
    if args.resolution < 16:
        raise UsageError("--resolution must be >= 16")
    results = verify.run_checks(args.resolution)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} check(s) failed: {', '.join(failed)}")
        return EXIT_FAILED
    print(f"all {len(results)} checks passed")
    return EXIT_OK


def cmd_chsh(args) -> int:
    try:
        q = parse_state_spec(args.state)
        obs = (
            (biphoton.A1, biphoton.A2, biphoton.B1, biphoton.B2)
            if args.observables == "default"
            else load_observables(args.observables)
        )
        pair, sym, spin = biphoton.chsh_values(q, *obs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"qubit_pair_chsh   {_fmt(pair)}")
    print(f"symmetrized_chsh  {_fmt(sym)}")
    print(f"spin_form_chsh    {_fmt(spin)}")
    return EXIT_OK


def cmd_state_test(args) -> int:
    if args.state is None:
        raise UsageError("--state is required")
    try:
        q = parse_state_spec(args.state)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for axis in "ZXY":
        p = qutrit.born(q, qutrit.spin_basic(axis))
        print(f"S_{axis}  p(+1)={_fmt(p.p_plus)}  p(0)={_fmt(p.p_zero)}  p(-1)={_fmt(p.p_minus)}")
    print(f"concurrence  {_fmt(qutrit.concurrence(q))}")
    print(f"fidelity     {_fmt(qutrit.fidelity_to_unbiased(q))}")
    print(f"<S^2>        {_fmt(qutrit.expectation(q, qutrit.check_observable_squared()))}")
    return EXIT_OK


def _seed(text: str) -> int:
    try:
        return parse_seed(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = _Parser(prog="qutrng", description="Single-qutrit quantum random number generator simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    subs = {}

    g = sub.add_parser("generate", help="generate a certified trit stream")
    g.add_argument("--count", type=int, default=1000)
    g.add_argument("--seed", type=_seed, default=0)
    g.add_argument("--public-seed", type=_seed, default=None)
    g.add_argument("--public-file", default=None)
    g.add_argument("--epsilon", type=float, default=0.05)
    g.add_argument("--delta", type=float, default=0.1)
    g.add_argument("--check-rate", type=float, default=0.1)
    g.add_argument("--threshold", type=float, default=1.0)
    g.add_argument("--source", default="ideal", help="ideal | state:<spec> | ensemble:<file>")
    g.add_argument("--format", choices=("ascii", "raw", "json"), default="ascii")
    g.add_argument("--out", default=None)
    g.add_argument("--report", default=None)
    g.add_argument("--jobs", type=int, default=1)
    g.set_defaults(func=cmd_generate)
    subs["generate"] = g

    v = sub.add_parser("verify", help="run the identity suite and the uniqueness grid search")
    v.add_argument("--resolution", type=int, default=64)
    v.set_defaults(func=cmd_verify)
    subs["verify"] = v

    c = sub.add_parser("chsh", help="CHSH values for a qutrit embedded as a biphoton")
    c.add_argument("--state", default="1,0,1")
    c.add_argument("--observables", default="default", help="default | file with A1, A2, B1, B2")
    c.set_defaults(func=cmd_chsh)
    subs["chsh"] = c

    s = sub.add_parser("state-test", help="probabilities, concurrence and fidelity of a state")
    s.add_argument("--state", default=None)
    s.set_defaults(func=cmd_state_test)
    subs["state-test"] = s

    for p in subs.values():
        p.add_argument("--config", default=None, help="file of 'key = value' lines; flags override it")
    return parser, subs


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, subs = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.config:
            sp = subs[args.command]
            sp.set_defaults(**load_config(args.config, sp))
            args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOINPUT


def run() -> None:
    sys.exit(main())
