"""Command-line front end.

Every subcommand writes ``<command>.json`` (a :class:`RunReport`) and, where a
series makes sense, ``<command>.csv`` into ``--out`` (default
``$HYPERTAMPER_OUT`` or ``./hypertamper-runs``).

Exit codes: 0 success, 1 a verification check failed, 2 usage, config or cap error.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__, verify
from .caps import CapError
from .companion import (
    ErConfig,
    edge_count_detector,
    er_sample,
    ham_count,
    ham_tamper,
    lis_length,
    lis_tamper,
    random_permutation,
    tampered_edge_mean,
)
from .counting import biased_second_moment, count, count_batch, count_oracle, expected_count, overlap_distribution
from .detection import (
    TAMPERED,
    UNTAMPERED,
    lln_diagnostic,
    predicted_regime,
    replicate_bits,
    simulate_counts,
    tv_exact,
    tv_mc,
    variance_ratio,
)
from .hypercube import EdgeConfig, ModelParams, Variant
from .report import Check, RunReport, default_out_dir, write_csv
from .streams import stream

ORACLE_MAX_N = 7
HEX_MAX_N = 10
MEASURES = {"P": UNTAMPERED, "Q": TAMPERED}


class ConfigError(ValueError):
    """Bad configuration file or conflicting options."""


# ---------------------------------------------------------------- options


def parse_number(text: str) -> Fraction:
    """'1/2', '0.25' or '3' as an exact rational."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"not a number: {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def _variant(text: str) -> Variant:
    try:
        return Variant.parse(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}") from None


PARSERS = {
    "n": _int_list,
    "p": parse_number,
    "gamma": _float_list,
    "variant": _variant,
    "seed": _int,
    "samples": _int,
    "eps": _float_list,
    "out": Path,
    "exact": _bool,
    "k": _int,
    "workers": _int,
}


@dataclass
class RunOptions:
    """Fully resolved run options; unset fields keep these defaults."""

    n: list[int] = field(default_factory=lambda: [3])
    p: Fraction | None = None
    gamma: list[float] | None = None
    variant: Variant = Variant.ALL
    seed: int = 0
    samples: int = 2000
    eps: list[float] = field(default_factory=lambda: [0.1, 0.25, 0.5])
    out: Path | None = None
    exact: bool = False
    k: int | None = None
    workers: int = 1

    def merged(self, values: dict[str, Any]) -> "RunOptions":
        """Overlay ``values``; setting p clears gamma and vice versa."""
        if values.get("p") is not None and values.get("gamma") is not None:
            raise ConfigError("p and gamma are mutually exclusive")
        out = replace(self, **{k: v for k, v in values.items() if v is not None})
        if values.get("p") is not None:
            out.gamma = None
        if values.get("gamma") is not None:
            out.p = None
        return out

    def params(self) -> list[tuple[ModelParams, float | None]]:
        """One (ModelParams, gamma) per grid cell, gamma-major then n."""
        cells = []
        if self.gamma is not None:
            for g in self.gamma:
                for n in self.n:
                    cells.append((ModelParams.from_gamma(n, g, self.variant, self.seed), g))
        else:
            p = Fraction(1, 2) if self.p is None else self.p
            for n in self.n:
                cells.append((ModelParams(n, p, self.variant, self.seed), None))
        return cells

    def out_dir(self) -> Path:
        return self.out if self.out is not None else default_out_dir()


def load_config(path: str | Path) -> RunOptions:
    """Read a flat ``key = value`` file (``#`` starts a comment) into options.

    Unknown keys, malformed values, duplicates and a file giving both p and
    gamma are errors naming the line.
    """
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        if key not in PARSERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = PARSERS[key](value.strip())
        except ConfigError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from None
        if "p" in values and "gamma" in values:
            raise ConfigError(f"{path}:{lineno}: p and gamma are mutually exclusive")
    return RunOptions().merged(values)


def resolve_options(args: argparse.Namespace) -> RunOptions:
    base = load_config(args.config) if args.config else RunOptions()
    flags = {f.name: getattr(args, f.name, None) for f in fields(RunOptions)}
    if flags["exact"] is False:
        flags["exact"] = None
    return base.merged(flags)


# ---------------------------------------------------------------- argument parser


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="key=value file; flags override it")
    sub.add_argument("--n", type=_int_list, help="dimension(s), comma separated")
    group = sub.add_mutually_exclusive_group()
    group.add_argument("--p", type=parse_number, help="edge probability, e.g. 1/2 or 0.25")
    group.add_argument("--gamma", type=_float_list, help="p = gamma/n, comma separated")
    sub.add_argument("--variant", type=_variant, help="all | zero")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--samples", type=int)
    sub.add_argument("--out", type=Path, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypertamper", description="Tampering detection on random hypercubes.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("sample", help="draw configurations and count paths")
    _add_common(sub)
    sub.add_argument("--measure", choices=sorted(MEASURES), default="P", help="P untampered, Q tampered")
    sub.add_argument("--hex", action="store_true", help=f"include the configuration as hex (n <= {HEX_MAX_N})")

    sub = subs.add_parser("count", help="count diameter paths in a given configuration")
    _add_common(sub)
    sub.add_argument("--hex", dest="config_hex", help="configuration as hex, edge 0 in the low bit")
    sub.add_argument("--full", action="store_true", help="use the complete hypercube")

    sub = subs.add_parser("tv", help="total variation between untampered and tampered laws")
    _add_common(sub)
    sub.add_argument("--exact", action="store_true", default=None, help="exact enumeration (n <= 3, rational p)")

    sub = subs.add_parser("scan", help="Monte Carlo grid over (gamma, n)")
    _add_common(sub)
    sub.add_argument("--eps", type=_float_list)
    sub.add_argument("--workers", type=int)

    sub = subs.add_parser("overlap", help="law of the overlap W with the reference path")
    _add_common(sub)
    sub.add_argument("--exact", action="store_true", default=None)

    sub = subs.add_parser("identities", help="exact combinatorial identity suite")
    sub.add_argument("--out", type=Path)

    sub = subs.add_parser("verify", help="exact verification suite")
    sub.add_argument("--quick", action="store_true")
    sub.add_argument("--out", type=Path)

    sub = subs.add_parser("example-ham", help="Hamiltonian paths planted in G(n, p)")
    _add_common(sub)

    sub = subs.add_parser("example-lis", help="increasing subsequence planted in a permutation")
    _add_common(sub)
    sub.add_argument("--k", type=int, help="planted length")
    return parser


# ---------------------------------------------------------------- subcommands


def _single(opts: RunOptions) -> ModelParams:
    cells = opts.params()
    if len(cells) != 1:
        raise ConfigError("this command takes a single (n, p)")
    return cells[0][0]


def _base_params(opts: RunOptions, **extra: Any) -> dict:
    params = {"n": opts.n, "variant": opts.variant, "seed": opts.seed, "samples": opts.samples}
    if opts.gamma is not None:
        params["gamma"] = opts.gamma
    else:
        params["p"] = Fraction(1, 2) if opts.p is None else opts.p
    params["cells"] = [{"n": m.n, "p": m.p, "gamma": g} for m, g in opts.params()]
    params.update(extra)
    return params


def cmd_sample(args, opts: RunOptions, report: RunReport) -> tuple[list[str], list[list]]:
    params = _single(opts)
    measure = MEASURES[args.measure]
    if args.hex and params.n > HEX_MAX_N:
        raise ConfigError(f"--hex needs n <= {HEX_MAX_N}")
    bits = replicate_bits(params, opts.samples, opts.seed, measure)
    counts = count_batch(params.n, bits, params.variant)
    report.params.update(measure=args.measure)
    columns = ["seed", "replicate", "measure", "n", "p", "variant", "edges", "N"]
    if args.hex:
        columns.append("hex")
    rows = []
    for r in range(opts.samples):
        row = [opts.seed, r, args.measure, params.n, params.p, params.variant, int(bits[r].sum()), int(counts[r])]
        if args.hex:
            row.append(EdgeConfig(params.n, bits[r]).to_hex())
        rows.append(row)
    mean = float(counts.mean()) if len(counts) else float("nan")
    report.metric("mean_N", mean)
    report.metric("EN", expected_count(params), exact=not isinstance(params.p, float))
    print(f"{opts.samples} samples under {args.measure}: mean N = {mean:.6g}, EN = {float(expected_count(params)):.6g}")
    return columns, rows


def cmd_count(args, opts: RunOptions, report: RunReport) -> None:
    n = opts.n[0] if len(opts.n) == 1 else None
    if n is None:
        raise ConfigError("count takes a single n")
    if args.full == (args.config_hex is not None):
        raise ConfigError("give exactly one of --hex or --full")
    config = EdgeConfig.full(n) if args.full else EdgeConfig.from_hex(n, args.config_hex)
    value = count(config, opts.variant)
    report.params.pop("p", None)
    report.params.update(hex=config.to_hex())
    report.metric("N", value, exact=True)
    print(value)
    if n <= ORACLE_MAX_N:
        oracle = count_oracle(config, opts.variant)
        report.check("dp_equals_oracle", oracle == value, {"dp": value, "oracle": oracle})


def cmd_tv(args, opts: RunOptions, report: RunReport) -> tuple[list[str], list[list]]:
    rows = []
    for params, gamma in opts.params():
        if opts.exact:
            rep = tv_exact(params.n, params.p, params.variant)
            report.metric(f"tv[n={params.n}]", rep.exact, exact=True)
            report.check(f"tv_equals_half_l1[n={params.n}]", rep.degenerate or rep.extra["agree"], rep.extra)
            shown = f"{rep.exact.numerator}/{rep.exact.denominator}"
        else:
            rep = tv_mc(params, opts.samples, opts.seed)
            report.metric(f"tv[n={params.n}]", rep.estimate, se=rep.se)
            shown = f"{rep.estimate:.6g} +- {rep.se:.2g}"
        print(f"n={params.n} p={params.p} variant={params.variant.value} tv={shown}")
        rows.append([params.variant, params.n, gamma, params.p, rep.method, rep.estimate, rep.se, rep.exact])
    return ["variant", "n", "gamma", "p", "method", "tv", "tv_se", "tv_exact"], rows


SCAN_COLUMNS = ["variant", "n", "gamma", "p", "EN", "mean_N", "tv_est", "tv_se", "var_ratio", "p_zero", "seed", "cell"]


def scan_cell(params: ModelParams, gamma: float | None, samples: int, seed: int, cell: int,
              eps: Sequence[float]) -> tuple[list, list]:
    """One scan row plus its exceedance diagnostics, drawn from streams prefixed by ``cell``."""
    counts = simulate_counts(params, samples, seed, prefix=(cell,))
    en = float(expected_count(params))
    tv = tv_mc(params, samples, seed, counts=counts)
    var = variance_ratio(params, "mc", samples, seed, counts=counts) if en > 0 else None
    exceed = lln_diagnostic(params, samples, eps, seed, counts=counts)
    row = [params.variant, params.n, gamma, params.p, en, float(counts.mean()), tv.estimate, tv.se,
           var.value if var else math.nan, float(np.mean(counts == 0)), seed, cell]
    return row, exceed


def cmd_scan(args, opts: RunOptions, report: RunReport) -> tuple[list[str], list[list]]:
    cells = opts.params()
    jobs = [(params, gamma, opts.samples, opts.seed, i, opts.eps) for i, (params, gamma) in enumerate(cells)]
    if opts.workers > 1:
        with ProcessPoolExecutor(opts.workers) as pool:
            results = list(pool.map(scan_cell, *zip(*jobs)))
    else:
        results = [scan_cell(*job) for job in jobs]
    rows = []
    for (params, gamma), (row, exceed) in zip(cells, results):
        rows.append(row)
        tag = f"[n={params.n},gamma={gamma if gamma is not None else ''}]"
        report.metric(f"tv{tag}", row[6], se=row[7])
        report.metric(f"var_ratio{tag}", row[8])
        for e in exceed:
            report.metric(f"exceed{tag}[eps={e.eps}]", e.prob, se=e.se)
        regime = predicted_regime(params.variant, gamma) if gamma is not None else "-"
        print(f"n={params.n:>3} gamma={gamma} p={float(params.p):.5g} EN={row[4]:.5g} "
              f"tv={row[6]:.4f}+-{row[7]:.4f} var_ratio={row[8]:.4g} p0={row[9]:.4f} regime={regime}")
    report.params.update(eps=opts.eps, workers=opts.workers)
    return SCAN_COLUMNS, rows


def cmd_overlap(args, opts: RunOptions, report: RunReport) -> tuple[list[str], list[list]]:
    n = opts.n[0] if len(opts.n) == 1 else None
    if n is None:
        raise ConfigError("overlap takes a single n")
    mode = "exact" if opts.exact else "mc"
    dist = overlap_distribution(n, opts.variant, mode, opts.samples, opts.seed)
    rows = []
    for w, prob in enumerate(dist.probs):
        se = None if dist.exact else dist.ses[w]
        report.metric(f"P(W={w})", prob, se=se, exact=dist.exact)
        rows.append([opts.variant, n, w, prob, se])
        print(f"W={w}: {prob}" + ("" if se is None else f" +- {se:.2g}"))
    if opts.p is not None and opts.gamma is None and opts.p > 0:
        moment_mode = "exact" if opts.exact else "mc"
        est = biased_second_moment(n, opts.p, opts.variant, moment_mode, opts.samples, opts.seed)
        report.metric("E[p^-W]", est.value, se=est.se, exact=opts.exact)
        print(f"E[p^-W] = {est.value}")
    else:
        report.params.pop("p", None)
    return ["variant", "n", "w", "prob", "se"], rows


def _run_checks(checks: list[Check], report: RunReport) -> None:
    for c in checks:
        report.check(c.name, c.ok, c.witness)
        print(f"{'PASS' if c.ok else 'FAIL'} {c.name}" + ("" if c.ok else f"  witness={c.witness}"))


def cmd_identities(args, opts: RunOptions, report: RunReport) -> None:
    report.params = {}
    _run_checks(verify.identities_suite(), report)


def cmd_verify(args, opts: RunOptions, report: RunReport) -> None:
    report.params = {"quick": bool(args.quick)}
    _run_checks(verify.quick_suite() if args.quick else verify.full_suite(), report)


def cmd_example_ham(args, opts: RunOptions, report: RunReport) -> tuple[list[str], list[list]]:
    params = _single(opts)
    n, p = params.n, params.p_float
    det = edge_count_detector(n, p)
    for name in ("delta_exp", "sd", "z"):
        report.metric(name, getattr(det, name), exact=True)
    report.metric("label", det.label, exact=True)
    count_paths = n <= 12
    rows = []
    edges = {UNTAMPERED: [], TAMPERED: []}
    for r in range(opts.samples):
        for measure, label in ((UNTAMPERED, "P"), (TAMPERED, "Q")):
            rng = stream(opts.seed, measure, r)
            config = er_sample(n, p, rng)
            if measure == TAMPERED:
                config, _ = ham_tamper(config, rng)
            edges[measure].append(config.edge_count())
            rows.append([opts.seed, r, label, n, p, config.edge_count(), ham_count(config) if count_paths else None])
    target = tampered_edge_mean(n, p)
    tam = np.asarray(edges[TAMPERED], dtype=float)
    mean, se = float(tam.mean()), float(tam.std(ddof=1) / math.sqrt(len(tam))) if len(tam) > 1 else math.nan
    report.metric("tampered_mean_edges", mean, se=se)
    report.metric("tampered_mean_edges_formula", target, exact=True)
    report.check("tampered_mean_within_3se", abs(mean - target) <= 3 * se, {"mean": mean, "se": se, "target": target})
    complete = ham_count(ErConfig.complete(n)) if count_paths else None
    if complete is not None:
        report.check("complete_graph_count", complete == math.factorial(n) // 2, complete)
    print(f"delta_exp={det.delta_exp:.6g} sd={det.sd:.6g} z={det.z:.4g} ({det.label})")
    print(f"tampered mean edges {mean:.6g} +- {se:.2g}, formula {target:.6g}")
    return ["seed", "replicate", "measure", "n", "p", "edges", "ham"], rows


def cmd_example_lis(args, opts: RunOptions, report: RunReport) -> tuple[list[str], list[list]]:
    n = opts.n[0] if len(opts.n) == 1 else None
    if n is None:
        raise ConfigError("example-lis takes a single n")
    k = opts.k if opts.k is not None else max(1, round(2 * math.sqrt(n)))
    if not 1 <= k <= n:
        raise ConfigError(f"k={k} out of range 1..{n}")
    report.params = {"n": n, "k": k, "seed": opts.seed, "samples": opts.samples}
    rows = []
    base, tam = [], []
    for r in range(opts.samples):
        rng = stream(opts.seed, r)
        sigma = random_permutation(n, rng)
        planted = lis_tamper(sigma, k, rng)
        a, b = lis_length(sigma.perm), lis_length(planted.perm)
        base.append(a)
        tam.append(b)
        rows.append([opts.seed, r, n, k, a, b])
    base_arr, tam_arr = np.asarray(base, float), np.asarray(tam, float)
    report.metric("mean_lis_over_sqrt_n", float(base_arr.mean() / math.sqrt(n)))
    report.metric("mean_tampered_lis_over_sqrt_n", float(tam_arr.mean() / math.sqrt(n)))
    report.check("tampered_lis_at_least_k", bool((tam_arr >= k).all()), int(tam_arr.min()))
    print(f"mean LIS/sqrt(n): untampered {base_arr.mean() / math.sqrt(n):.4f}, tampered {tam_arr.mean() / math.sqrt(n):.4f} (k={k})")
    return ["seed", "replicate", "n", "k", "lis", "lis_tampered"], rows


COMMANDS = {
    "sample": cmd_sample,
    "count": cmd_count,
    "tv": cmd_tv,
    "scan": cmd_scan,
    "overlap": cmd_overlap,
    "identities": cmd_identities,
    "verify": cmd_verify,
    "example-ham": cmd_example_ham,
    "example-lis": cmd_example_lis,
}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        opts = resolve_options(args) if hasattr(args, "config") else RunOptions(out=args.out)
        params = _base_params(opts) if hasattr(args, "config") else {}
        report = RunReport(args.command, argv, params)
        series = COMMANDS[args.command](args, opts, report)
    except (ConfigError, CapError, ValueError, OSError) as exc:
        print(f"hypertamper {args.command}: error: {exc}", file=sys.stderr)
        return 2
    report.wall_time = time.perf_counter() - start
    out = opts.out_dir()
    stem = args.command.replace("-", "_")
    path = report.write(out, stem)
    if series is not None:
        write_csv(out, stem, *series)
    print(f"report: {path}")
    return 0 if report.ok else 1
