"""Command-line front end: ``pacman <subcommand> ...``.

Every output starts with a comment-prefixed manifest (version, subcommand,
flags, seed, input digests) followed by plain CSV.

Exit codes: 0 ok, 1 I/O error, 2 invalid input, 3 not an antichain,
4 margin assumption violated, 5 size budget exceeded.
"""

import argparse
import csv
import hashlib
import io
import os
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import __version__
from ._exact import as_fraction, fmt
from .antichain import (
    Antichain,
    BernoulliProfile,
    antichain_probability,
    comparable_pair,
    enumerate_antichains,
    load_configurations,
    lym_sum,
    max_weight_antichain,
    sperner_bound_iid,
    sperner_bound_varied,
    within_sperner_iid,
    within_sperner_varied,
)
from .concentration import ConcentrationReport, exact_Q_discrete, monte_carlo_report, parse_config
from .decomposition import (
    Variant,
    beta_plus_by_F,
    beta_plus_by_inf,
    chasing,
    decompose,
    gap_report,
    write_csv,
)
from .errors import NotAntichain, PacmanError, TooLarge, ValidationError
from .lattice import SingleSiteProfile, load_stencil, parse_box, split_potential, write_split_csv
from .measure import load_distribution

SEED_ENV = "PACMAN_SEED"


def data_path(name):
    """``name`` itself if it exists, else the bundled data file of that name."""
    path = Path(name)
    if path.exists():
        return path
    bundled = resources.files("pacman_decomp") / "data" / str(name)
    if bundled.is_file():
        return Path(str(bundled))
    raise FileNotFoundError(f"no such file: {name}")


def _digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _resolve_seed(arg):
    if arg is not None:
        return arg
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ValidationError(f"{SEED_ENV}={env!r} is not an integer") from None


class Run:
    """Collects manifest data and the output body of one command."""

    def __init__(self, args, seed, inputs=()):
        self.args = args
        self.seed = seed
        self.inputs = list(inputs)
        self.notes = []
        self.body = io.StringIO()

    def manifest(self):
        skip = {"func", "out", "seed"}
        flags = " ".join(
            f"{k}={v}" for k, v in sorted(vars(self.args).items()) if k not in skip
        )
        lines = [
            f"# pacman {__version__}",
            f"# command: {self.args.command}",
            f"# flags: {flags}",
            f"# seed: {self.seed}",
        ]
        lines += [f"# input: {Path(p).name} sha256={_digest(p)}" for p in self.inputs]
        lines += [f"# {n}" for n in self.notes]
        return "\n".join(lines) + "\n"

    def write(self, out):
        text = self.manifest() + self.body.getvalue()
        if out in (None, "-"):
            sys.stdout.write(text)
        else:
            Path(out).write_text(text, encoding="utf-8")


def _frac_arg(text):
    try:
        return as_fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _p_grid(text):
    """``a:b:h`` (inclusive) or a comma-separated list."""
    if ":" in text:
        a, b, h = (as_fraction(s) for s in text.split(":"))
        if h <= 0:
            raise ValidationError("grid step must be positive")
        out, x = [], a
        while x <= b:
            out.append(x)
            x += h
        return out
    return [as_fraction(s) for s in text.split(",") if s.strip()]


# -- subcommands ----------------------------------------------------------------


def cmd_decompose(args):
    path = data_path(args.dist)
    mu = load_distribution(path)
    run = Run(args, _resolve_seed(args.seed), [path])
    d = decompose(mu, args.p, Variant(args.variant))
    g = gap_report(mu, d.p, args.variant)
    run.notes.append(
        "gap: "
        + " ".join(
            f"{k}={fmt(getattr(g, k))}"
            for k in ("beta_plus", "beta_sharp", "T1", "T2", "halftime_lower_bound", "diameter")
        )
        + f" check={'ok' if g.check() else 'FAILED'}"
    )
    write_csv(d, run.body, args.grid)
    return run


def cmd_beta_scan(args):
    path = data_path(args.dist)
    mu = load_distribution(path)
    run = Run(args, _resolve_seed(args.seed), [path])
    w = csv.writer(run.body, lineterminator="\n")
    w.writerow(["p", "beta_plus", "beta_plus_cdf"])
    for p in _p_grid(args.p_grid):
        b_inf = beta_plus_by_inf(chasing(mu, p))
        b_cdf = beta_plus_by_F(mu, p)
        if b_inf != b_cdf:
            raise AssertionError(f"beta+ routes disagree at p={p}: {b_inf} vs {b_cdf}")
        w.writerow([fmt(p), fmt(b_inf), fmt(b_cdf)])
    return run


def _profile(args, N):
    if args.profile:
        text = Path(args.profile).read_text() if Path(args.profile).exists() else args.profile
        ps = [as_fraction(s) for s in text.replace(",", " ").split()]
        prof = BernoulliProfile(ps)
        if N is not None and prof.N != N:
            raise ValidationError(f"profile has {prof.N} entries, configurations have {N}")
        return prof
    if N is None:
        raise ValidationError("need -N or configurations to size the profile")
    return BernoulliProfile.iid(N, args.p)


def _antichain_groups(args):
    if not args.input:
        raise ValidationError(f"'antichain {args.action}' needs an input file")
    path = data_path(args.input)
    groups = load_configurations(path)
    return path, groups


def cmd_antichain(args):
    action = args.action
    if action == "max":
        if args.N is None:
            raise ValidationError("'antichain max' needs -N")
        run = Run(args, _resolve_seed(args.seed))
        prof = _profile(args, args.N)
        A, weight = max_weight_antichain(args.N, prof)
        w = csv.writer(run.body, lineterminator="\n")
        bound = sperner_bound_iid(args.N, prof.ps[0]) if prof.is_iid else sperner_bound_varied(prof)
        within = within_sperner_iid(weight, args.N, prof.ps[0]) if prof.is_iid else within_sperner_varied(weight, prof)
        header = ["N", "weight", "weight_exact", "size", "layers", "sperner_bound", "within"]
        row = [args.N, fmt(weight), str(weight), len(A), ";".join(map(str, A.layer_counts())),
               fmt(bound), within]
        if args.enumerate:
            best = max(antichain_probability(B, prof) for B in enumerate_antichains(args.N))
            header.append("enumeration_max")
            row.append(str(best))
            if best != weight:
                raise AssertionError(f"flow solver {weight} differs from enumeration {best}")
        w.writerow(header)
        w.writerow(row)
        return run

    path, groups = _antichain_groups(args)
    run = Run(args, _resolve_seed(args.seed), [path])
    w = csv.writer(run.body, lineterminator="\n")
    if action == "check":
        w.writerow(["group", "size", "N", "antichain"])
        for i, g in enumerate(groups):
            pair = comparable_pair(g)
            if pair is not None:
                u, v = (" ".join(map(str, c)) for c in pair)
                raise NotAntichain(f"group {i}: ({u}) and ({v}) are comparable", pair)
            w.writerow([i, len(set(g)), len(g[0]), True])
        return run
    antichains = [Antichain.of(g) for g in groups]
    if action == "lym":
        w.writerow(["group", "size", "lym_sum", "lym_exact"])
        for i, A in enumerate(antichains):
            s = lym_sum(A)
            w.writerow([i, len(A), fmt(s), str(s)])
    elif action in ("prob", "bounds"):
        cols = ["group", "size", "probability", "probability_exact"]
        if action == "bounds":
            cols += ["sperner_bound", "within"]
        w.writerow(cols)
        for i, A in enumerate(antichains):
            prof = _profile(args, A.N)
            prob = antichain_probability(A, prof)
            row = [i, len(A), fmt(prob), str(prob)]
            if action == "bounds":
                if prof.is_iid:
                    row += [fmt(sperner_bound_iid(A.N, prof.ps[0])), within_sperner_iid(prob, A.N, prof.ps[0])]
                else:
                    row += [fmt(sperner_bound_varied(prof)), within_sperner_varied(prob, prof)]
            w.writerow(row)
    return run


def cmd_concentration(args):
    path = data_path(args.config)

    def resolve(name):
        local = path.parent / name
        return local if local.exists() else data_path(name)

    cfg = parse_config(path.read_text(encoding="utf-8"), resolve=resolve)
    if args.seed is not None:
        seed = args.seed
    elif cfg.seed is not None:
        seed = cfg.seed
    else:
        seed = _resolve_seed(None)
    n = args.samples if args.samples is not None else cfg.samples
    run = Run(args, seed, [path, *cfg.sources])
    rep = monte_carlo_report(cfg.phi, cfg.mus, cfg.margins, n, seed, threads=args.threads)
    try:
        q_exact = fmt(exact_Q_discrete(cfg.phi, cfg.mus))
    except (TooLarge, ValidationError):
        q_exact = ""
    w = csv.writer(run.body, lineterminator="\n")
    w.writerow([*ConcentrationReport.FIELDS, "q_exact"])
    w.writerow([*(fmt(v) if isinstance(v, float) else v for v in rep.row()), q_exact])
    return run


def cmd_lattice(args):
    path = data_path(args.dist)
    mu = load_distribution(path)
    box = parse_box(args.box)
    inputs = [path]
    if args.stencil:
        spath = data_path(args.stencil)
        u = load_stencil(spath)
        inputs.append(spath)
    else:
        u = SingleSiteProfile.kronecker(len(box))
    seed = _resolve_seed(args.seed)
    run = Run(args, seed, inputs)
    p = None if args.p == "auto" else as_fraction(args.p)
    M = None if args.M is None else as_fraction(args.M)
    s = split_potential(mu, p, u, box, seed, M=M)
    write_split_csv(s, run.body)
    return run


# -- parser -----------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help=f"random seed (default: ${SEED_ENV}, else 0)")
    common.add_argument("--threads", type=int, default=None, help="cap on worker threads")
    common.add_argument("--out", "-o", default=None, help="output file (default: stdout)")

    parser = argparse.ArgumentParser(prog="pacman", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pacman {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", parents=[common], help="tabulate Y1, Y2 and the gap")
    p.add_argument("dist")
    p.add_argument("-p", type=_frac_arg, required=True)
    p.add_argument("--variant", choices=[v.value for v in Variant], default="chasing")
    p.add_argument("--grid", type=int, default=16)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("beta-scan", parents=[common], help="beta+ over a grid of p")
    p.add_argument("dist")
    p.add_argument("--p-grid", default="0.05:0.95:0.05")
    p.set_defaults(func=cmd_beta_scan)

    p = sub.add_parser("antichain", parents=[common], help="antichain checks and bounds")
    p.add_argument("action", choices=["check", "lym", "prob", "max", "bounds"])
    p.add_argument("input", nargs="?")
    p.add_argument("-N", type=int, default=None)
    p.add_argument("-p", type=_frac_arg, default=Fraction(1, 2))
    p.add_argument("--profile", default=None, help="file or comma list of p_j")
    p.add_argument("--enumerate", action="store_true", help="cross-check 'max' by enumeration")
    p.set_defaults(func=cmd_antichain)

    p = sub.add_parser("concentration", parents=[common], help="Monte Carlo concentration report")
    p.add_argument("config")
    p.add_argument("--samples", type=int, default=None, help="override the config sample count")
    p.set_defaults(func=cmd_concentration)

    p = sub.add_parser("lattice", parents=[common], help="split an alloy-type potential")
    p.add_argument("dist")
    p.add_argument("--p", default="auto", help="'auto' or a value")
    p.add_argument("--stencil", default=None)
    p.add_argument("--box", default="32x32")
    p.add_argument("--M", default=None, help="upper end of the admissible support")
    p.set_defaults(func=cmd_lattice)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        run = args.func(args)
        run.write(args.out)
    except PacmanError as exc:
        print(f"pacman: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"pacman: I/O error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
