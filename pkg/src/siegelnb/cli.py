"""Command-line front end.

Every command writes JSON (or, for ``order``, a bare rational) to stdout or
``--out``.  Exit codes: 0 success, 1 certification failure, 2 usage error,
3 inconclusive.  Errors are reported on stderr as ``{code, message, context}``.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from .errors import (BoundExceeded, Inconclusive, PrecisionError, PreconditionError,
                     SearchExhausted, SiegelError)
from .freeness import check_primitivity, sweep_complete_freeness
from .modgroup import (Family, GroupElement, enumerate_group, enumerate_subgroups, membership)
from .numeric import DEFAULT_PRECISION, check_parameters, find_parameters
from .qseries import QSeries, default_horizon
from .siegel import (GConfig, IndexVector, act, bernoulli2, frac_part, g_image_order, g_order,
                     siegel_order, siegel_power_expansion, verify_lemma22)

log = logging.getLogger("siegelnb")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3
CACHE_FORMAT = 1
MIN_PRECISION = 64


class UsageError(Exception):
    def __init__(self, message, context=None):
        super().__init__(message)
        self.context = context or {}


def _emit_error(code: int, message: str, context: dict | None = None) -> None:
    payload = {"code": code, "message": message, "context": context or {}}
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of printing prose and exiting."""

    def error(self, message):
        raise UsageError(message, {"prog": self.prog})


# ---------------------------------------------------------------------------
# flag parsing


def _pair(text: str) -> tuple[int, int]:
    try:
        a, b = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}") from None
    return a, b


def _matrix(text: str) -> tuple[int, int, int, int]:
    try:
        a, b, c, d = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a,b,c,d', got {text!r}") from None
    return a, b, c, d


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational 'p/q', got {text!r}") from None


def _level_range(text: str) -> list[int]:
    try:
        lo, hi = (int(x) for x in text.split(".."))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'lo..hi', got {text!r}") from None
    return list(range(lo, hi + 1))


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", type=Path, help="write output here instead of stdout")
    common.add_argument("--cache-dir", type=Path, help="expansion cache directory")
    common.add_argument("--no-cache", action="store_true", help="disable the expansion cache")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    common.add_argument("--precision", type=int, default=DEFAULT_PRECISION, help="bits")

    parser = _Parser(prog="siegelnb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("expand", parents=[common], help="exact expansion of g_v^(12N)")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--v", type=_pair, required=True)
    p.add_argument("--horizon", type=int)

    p = sub.add_parser("order", parents=[common], help="q-order of g, g^sigma or g_v^(12N)")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--l", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--sigma", type=_matrix)
    p.add_argument("--v", type=_pair)
    p.add_argument("--table", action="store_true", help="B2(<a/N>) for a = 0..N-1")

    p = sub.add_parser("act", parents=[common], help="sigma^T v on index vectors")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--sigma", type=_matrix, required=True)
    p.add_argument("--v", type=_pair, required=True)

    p = sub.add_parser("group", parents=[common], help="subgroup lattice")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--family", choices=["full", "gamma0"], default="full")

    p = sub.add_parser("verify-lemma22", parents=[common], help="ratio orders on all cosets")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--m", type=int, required=True)

    p = sub.add_parser("search", parents=[common], help="find (l, m, r) for the numeric bound")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--epsilon", type=_rational)
    p.add_argument("--budget", type=int, default=64)

    for name in ("certify", "sweep"):
        p = sub.add_parser(name, parents=[common], help="complete-freeness certificates")
        if name == "certify":
            p.add_argument("--N", type=int, required=True)
        else:
            p.add_argument("--N-range", dest="N_range", type=_level_range, required=True)
            p.add_argument("--results-dir", type=Path, default=Path("results"))
        p.add_argument("--l", type=int)
        p.add_argument("--m", type=int)
        p.add_argument("--scope", choices=["gamma0", "full"], default="gamma0")
        p.add_argument("--r", type=_rational)
        p.add_argument("--epsilon", type=_rational)
        p.add_argument("--budget", type=int, default=64)

    p = sub.add_parser("primitivity", parents=[common], help="trivial stabilizer of g")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--l", type=int, default=2)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--horizon", type=int)
    return parser


def _validate(args) -> None:
    levels = args.N_range if args.command == "sweep" else [args.N]
    if not levels or min(levels) < 2:
        raise UsageError("N must be at least 2", {"N": levels})
    if args.precision < MIN_PRECISION:
        raise UsageError(f"precision must be at least {MIN_PRECISION}", {"precision": args.precision})
    if args.jobs < 1:
        raise UsageError("jobs must be positive", {"jobs": args.jobs})
    if getattr(args, "horizon", None) is not None and args.horizon < 1:
        raise UsageError("horizon must be at least 1", {"horizon": args.horizon})
    l, m = getattr(args, "l", None), getattr(args, "m", None)
    if (l is None) != (m is None):
        raise UsageError("give both --l and --m", {})
    if l is not None and not l > m > 0:
        raise UsageError("need l > m > 0", {"l": l, "m": m})
    if args.command == "order" and not args.table and args.v is None and l is None:
        raise UsageError("order needs --v, --table or --l/--m", {})
    if args.command == "order" and args.sigma is not None and l is None:
        raise UsageError("--sigma needs --l and --m", {})
    v = getattr(args, "v", None)
    if v is not None and v[0] % args.N == 0 and v[1] % args.N == 0:
        raise UsageError("index vector lies in Z^2", {"v": list(v)})
    eps = getattr(args, "epsilon", None)
    if eps is not None and not 0 < eps < 1:
        raise UsageError("epsilon must lie in (0, 1)", {"epsilon": str(eps)})
    r = getattr(args, "r", None)
    if r is not None and r <= 0:
        raise UsageError("r must be positive", {"r": str(r)})
    if args.command in ("certify", "sweep"):
        if args.scope == "gamma0" and l is None:
            raise UsageError("scope gamma0 needs --l and --m", {})
        if r is not None and l is None:
            raise UsageError("--r needs --l and --m", {})


def _element(level: int, entries) -> GroupElement:
    try:
        return GroupElement.make(level, *entries)
    except ValueError as exc:
        raise UsageError(str(exc), {"sigma": list(entries)}) from None


# ---------------------------------------------------------------------------
# persistent expansion cache


class ExpansionCache:
    """One JSON file per (N, canonical v, horizon, format version).

    Writes go to a temporary file in the same directory and are renamed into
    place, so readers never see a partial entry.  A corrupt entry is
    recomputed and overwritten; the first such event logs a warning.
    """

    _warned = False

    def __init__(self, root: Path):
        self.root = Path(root)

    @staticmethod
    def key(v: IndexVector, horizon: int) -> str:
        text = f"{CACHE_FORMAT}|{v.level}|{v.a}|{v.b}|{horizon}"
        return hashlib.sha256(text.encode()).hexdigest()

    def path(self, v: IndexVector, horizon: int) -> Path:
        return self.root / f"{self.key(v, horizon)}.json"

    def get_or_compute(self, v: IndexVector, horizon: int,
                       producer: Callable[[], QSeries]) -> QSeries:
        path = self.path(v, horizon)
        if path.exists():
            try:
                data = json.loads(path.read_text())
                if data.get("format") != CACHE_FORMAT:
                    raise ValueError("format version mismatch")
                series = QSeries.from_dict(data["series"])
                if (series.level, series.horizon) != (v.level, horizon):
                    raise ValueError("entry does not match its key")
                return series
            except (ValueError, KeyError, TypeError, OSError) as exc:
                if not ExpansionCache._warned:
                    log.warning("corrupt cache entry %s (%s); recomputing", path.name, exc)
                    ExpansionCache._warned = True
        series = producer()
        self._write(path, {"format": CACHE_FORMAT, "series": series.to_dict()})
        return series

    def _write(self, path: Path, payload: dict) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w") as fh:
                json.dump(payload, fh, separators=(",", ":"))
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


def _cache_for(args) -> ExpansionCache | None:
    if args.no_cache:
        return None
    env = os.environ.get("SIEGEL_CACHE_DIR")
    if env:
        return ExpansionCache(Path(env))
    if args.cache_dir is not None:
        return ExpansionCache(args.cache_dir)
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(Path.home(), ".cache")
    return ExpansionCache(Path(base) / "siegelnb")


# ---------------------------------------------------------------------------
# commands


def _cmd_expand(args):
    v = IndexVector.make(args.N, *args.v)
    horizon = default_horizon(args.N) if args.horizon is None else args.horizon
    cache = _cache_for(args)

    def produce():
        return siegel_power_expansion(v, horizon)

    series = produce() if cache is None else cache.get_or_compute(v, horizon, produce)
    return series.to_dict(), EXIT_OK


def _cmd_order(args):
    if args.table:
        rows = []
        for a in range(args.N):
            x = Fraction(a, args.N)
            rows.append({"x": str(x), "B2": str(bernoulli2(frac_part(x)))})
        return {"N": args.N, "rows": rows}, EXIT_OK
    if args.v is not None:
        return str(siegel_order(IndexVector.make(args.N, *args.v))), EXIT_OK
    cfg = GConfig(args.N, args.l, args.m)
    if args.sigma is None:
        return str(g_order(cfg)), EXIT_OK
    s = _element(args.N, args.sigma)
    return str(Fraction(g_image_order(cfg, s), args.N)), EXIT_OK


def _cmd_act(args):
    s = _element(args.N, args.sigma)
    w = act(s, IndexVector.make(args.N, *args.v))
    return {"N": args.N, "sigma": list(s.entries), "v": list(w.pair)}, EXIT_OK


def _cmd_group(args):
    group = enumerate_group(args.N)
    if args.family == "gamma0":
        group = tuple(s for s in group if membership(s, Family.GAMMA0_UPPER))
    subs = enumerate_subgroups(group)
    return {
        "N": args.N,
        "family": args.family,
        "order": len(group),
        "subgroups": [h.to_dict() for h in subs],
    }, EXIT_OK


def _cmd_lemma22(args):
    verdict = verify_lemma22(GConfig(args.N, args.l, args.m))
    return verdict.to_dict(), EXIT_OK if verdict.passed else EXIT_FAIL


def _cmd_search(args):
    params = find_parameters(args.N, args.epsilon, args.budget, args.precision)
    return params.to_dict(), EXIT_OK


def _params_for(args, level: int):
    if args.scope != "full":
        return None
    if args.l is None:
        return find_parameters(level, args.epsilon, args.budget, args.precision)
    if args.r is None:
        raise UsageError("scope full with --l/--m needs --r", {})
    import mpmath

    with mpmath.workprec(args.precision + 32):
        r = mpmath.mpf(args.r.numerator) / args.r.denominator
    return check_parameters(level, args.l, args.m, r, args.epsilon, args.precision)


def _certify(args, level: int):
    params = _params_for(args, level)
    if params is not None and not params.certified:
        out = {"search": params.to_dict(), "pass": False,
               "message": "ratio bound not met at these parameters"}
        return out, EXIT_FAIL
    cfg = params.config if params is not None else GConfig(level, args.l, args.m)
    report = sweep_complete_freeness(cfg, args.scope, params, args.jobs, args.precision)
    out = report.to_dict()
    if params is not None:
        out["search"] = params.to_dict()
    if report.inconclusive:
        return out, EXIT_INCONCLUSIVE
    return out, EXIT_OK if report.passed else EXIT_FAIL


def _cmd_certify(args):
    return _certify(args, args.N)


def _cmd_sweep(args):
    summary, worst = [], EXIT_OK
    stamp = time.strftime("%Y%m%dT%H%M%S", time.gmtime())
    args.results_dir.mkdir(parents=True, exist_ok=True)
    for level in args.N_range:
        try:
            out, code = _certify(args, level)
        except SearchExhausted as exc:
            out, code = {"N": level, "pass": False, "message": str(exc)}, EXIT_INCONCLUSIVE
        l = out.get("l", args.l)
        m = out.get("m", args.m)
        name = f"N{level}_l{l}_m{m}_{args.scope}_{stamp}.json"
        # append-only: never clobber an existing report
        with open(args.results_dir / name, "x") as fh:
            fh.write(json.dumps(out, indent=2) + "\n")
        summary.append({"N": level, "l": l, "m": m, "scope": args.scope,
                        "pass": out.get("pass", False), "exit": code})
        worst = max(worst, code, key=_severity)
    return {"runs": summary, "pass": worst == EXIT_OK}, worst


def _severity(code: int) -> int:
    return {EXIT_OK: 0, EXIT_INCONCLUSIVE: 1, EXIT_FAIL: 2}.get(code, 3)


def _cmd_primitivity(args):
    verdict = check_primitivity(GConfig(args.N, args.l, args.m), args.horizon)
    return verdict.to_dict(), EXIT_OK if verdict.passed else EXIT_FAIL


COMMANDS = {
    "expand": _cmd_expand,
    "order": _cmd_order,
    "act": _cmd_act,
    "group": _cmd_group,
    "verify-lemma22": _cmd_lemma22,
    "search": _cmd_search,
    "certify": _cmd_certify,
    "sweep": _cmd_sweep,
    "primitivity": _cmd_primitivity,
}


def _render(result) -> str:
    if isinstance(result, str):
        return result + "\n"
    return json.dumps(result, indent=2) + "\n"


def _write_output(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=out.parent, prefix=".tmp-")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, out)


def run(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv``, run the command and return its exit code."""
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        _validate(args)
        result, code = COMMANDS[args.command](args)
    except UsageError as exc:
        _emit_error(EXIT_USAGE, str(exc), exc.context)
        return EXIT_USAGE
    except (Inconclusive, PrecisionError, SearchExhausted) as exc:
        context = getattr(exc, "context", {})
        best = getattr(exc, "best", None)
        if best is not None:
            context = {"best": best.to_dict()}
        _emit_error(EXIT_INCONCLUSIVE, str(exc), context)
        return EXIT_INCONCLUSIVE
    except (PreconditionError, BoundExceeded) as exc:
        _emit_error(EXIT_USAGE, str(exc), {"type": type(exc).__name__})
        return EXIT_USAGE
    except SiegelError as exc:
        _emit_error(EXIT_FAIL, str(exc), {"type": type(exc).__name__})
        return EXIT_FAIL
    _write_output(_render(result), args.out)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
