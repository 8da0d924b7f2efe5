"""Scenario runner and command-line interface.

This module turns the library's pieces (placement profiles, delivery
plans, bounds, demand sampling) into reproducible experiments that emit
CSV artifacts. A scenario is described either by command-line flags or by
a JSON config file mirroring ScenarioConfig; flags override file values.

Subcommands:

  placement   cache-content profiles over an m-ratio grid
  rate        delivery rates for one explicit demand or pattern
  bound       cutset lower bounds over an m-ratio grid
  sweep       rate curves over an m-ratio grid, per pattern or averaged
              uniformly over all redundancy patterns with each number of
              distinct files
  simulate    Gibbs-sampled correlated demands: sample dump, empirical
              statistics, and average rates per scheme
  verify      bit-level build/decode round-trip against analytic rates

Output files are plain CSV with fixed column schemas (see the _write_*
helpers) and deterministic float formatting, so re-running a scenario
with the same seed reproduces byte-identical artifacts. Exit codes:
0 success, 1 invalid configuration, 2 numerical failure, 3 verification
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .bounds import average_bound, cutset_bound
from .core import DemandVector, RedundancyPattern, partitions_into_parts, redundancy_pattern
from .delivery import (
    DecodeError,
    adaptive_plan,
    build_messages,
    canonical_demand,
    decode,
    rate_nonadaptive,
    rate_of_schedule,
    simplified_plan,
)
from .lp import LpNumericalError
from .placement import (
    SUBSET_ENUM_CAP,
    centralized_profile,
    decentralized_profile,
    materialize_partition,
    solve_placement_lp,
)
from .core import SystemConfig
from .demand import (
    CorrelationModel,
    complete_graph,
    empirical_stats,
    epsr,
    load_edge_list,
    mean_request_index,
    sample_chains,
    zipf_pmf,
)

PLACEMENTS = ("centralized", "decentralized", "lp")
SCHEMES = ("nonadaptive", "simplified", "adaptive")
GAP_TOL = 1e-12


class ConfigError(ValueError):
    """Invalid scenario configuration; messages carry the field path."""


@dataclass
class ScenarioConfig:
    """Everything needed to run one experiment.

    m_ratio is a list (a one-point grid for single values). demand_mode
    selects how demand vectors arise: an explicit vector, the canonical
    demand of a redundancy pattern, a uniform average over all patterns
    with each distinct-file count, or Gibbs-sampled correlated requests.
    """

    K: int
    N: int = 1000
    m_ratio: list = field(default_factory=list)
    placement: str = "centralized"
    delivery: tuple = SCHEMES
    demand_mode: str | None = None
    demands: tuple | None = None
    pattern: tuple | None = None
    r: float = 0.0
    theta: float = 0.0
    chains: int = 5
    burn_in: int = 150
    samples: int = 1000
    graph: str = "complete"
    seed: int = 0
    F: int | None = None
    out: str | None = None
    jobs: int = 1

    def validate(self) -> None:
        errors = []
        if self.K < 1:
            errors.append("K: must be at least 1")
        if self.N < 1:
            errors.append("N: must be at least 1")
        if not self.m_ratio:
            errors.append("m_ratio: required")
        for m in self.m_ratio:
            if not 0.0 <= m <= 1.0:
                errors.append(f"m_ratio: value {m:g} outside [0, 1]")
                break
        if self.placement not in PLACEMENTS:
            errors.append(f"placement: must be one of {'/'.join(PLACEMENTS)}")
        bad = [s for s in self.delivery if s not in SCHEMES]
        if bad:
            errors.append(f"delivery: unknown scheme {bad[0]}")
        if not self.delivery:
            errors.append("delivery: need at least one scheme")
        if "adaptive" in self.delivery and self.K > SUBSET_ENUM_CAP:
            errors.append(f"K: adaptive delivery requires K <= {SUBSET_ENUM_CAP}")
        if self.demand_mode not in (None, "explicit", "pattern", "pattern-average", "gibbs"):
            errors.append(f"demand_mode: unknown mode {self.demand_mode}")
        if self.demand_mode == "explicit" and self.demands is None:
            errors.append("demands: required when demand_mode=explicit")
        if self.demand_mode == "pattern" and self.pattern is None:
            errors.append("pattern: required when demand_mode=pattern")
        if self.demands is not None:
            if self.demand_mode not in (None, "explicit"):
                errors.append(f"demands: not allowed with demand_mode={self.demand_mode}")
            elif len(self.demands) != self.K:
                errors.append(f"demands: expected {self.K} entries, got {len(self.demands)}")
            elif any(not 1 <= d <= self.N for d in self.demands):
                errors.append(f"demands: file indices must lie in 1..{self.N}")
        if self.pattern is not None:
            if self.demand_mode not in (None, "pattern"):
                errors.append(f"pattern: not allowed with demand_mode={self.demand_mode}")
            elif sum(self.pattern) != self.K:
                errors.append(f"pattern: counts must sum to K={self.K}")
            elif any(c < 1 for c in self.pattern):
                errors.append("pattern: counts must be positive")
        if not 0.0 <= self.r <= 1.0:
            errors.append("r: must lie in [0, 1]")
        if self.theta < 0.0:
            errors.append("theta: must be nonnegative")
        if self.chains < 1:
            errors.append("chains: must be at least 1")
        if self.burn_in < 0:
            errors.append("burn_in: must be nonnegative")
        if self.samples < 1:
            errors.append("samples: must be at least 1")
        if self.F is not None and self.F < 1:
            errors.append("F: must be at least 1")
        if self.jobs < 1:
            errors.append("jobs: must be at least 1")
        if errors:
            raise ConfigError("; ".join(errors))


@dataclass(frozen=True)
class GapReport:
    """Rates and the fraction of the gap to the lower bound closed."""

    m_ratio: float
    rate_nonadaptive: float
    rate_scheme: float
    bound: float
    gap_reduction: float


def gap_reduction(r_na: float, r_scheme: float, bound: float) -> float:
    """Fraction of the nonadaptive-to-bound gap closed by a scheme.

    Defined as (r_na - r_scheme) / (r_na - bound); requires the
    nonadaptive rate to sit strictly above the bound.
    """
    if r_na <= bound + GAP_TOL:
        raise ValueError("gap reduction undefined: nonadaptive rate does not exceed the bound")
    return (r_na - r_scheme) / (r_na - bound)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _emit_csv(path, header, rows) -> str:
    """Write rows (already formatted) as CSV to path, or stdout if None."""
    text = ",".join(header) + "\n" + "".join(",".join(row) + "\n" for row in rows)
    if path is None:
        sys.stdout.write(text)
        return "<stdout>"
    with open(path, "w") as fh:
        fh.write(text)
    return str(path)


def _profile_for(cfg: ScenarioConfig, m: float):
    if cfg.placement == "centralized":
        return centralized_profile(cfg.K, m)
    if cfg.placement == "decentralized":
        return decentralized_profile(cfg.K, m)
    return solve_placement_lp(cfg.K, m)


def _scheme_rate(profile, scheme: str, pattern: RedundancyPattern, K: int) -> float:
    if scheme == "nonadaptive":
        return rate_nonadaptive(profile, pattern.L, K)
    if scheme == "simplified":
        return simplified_plan(profile, pattern.L, K).rate
    _, rate = adaptive_plan(profile, canonical_demand(pattern))
    return rate


def _gap_cell(r_na: float, rate: float, bound: float) -> str:
    if r_na <= bound + GAP_TOL:
        return ""
    return _fmt(gap_reduction(r_na, rate, bound))


RATE_HEADER = ("m_ratio", "scheme", "pattern", "L", "rate", "bound", "gap_reduction")


def _map_jobs(fn, items, jobs: int):
    """Order-preserving map, optionally over a thread pool.

    Each item is computed independently, so parallel and serial runs
    produce identical result lists.
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _pattern_rate_rows(cfg: ScenarioConfig, m: float, pattern: RedundancyPattern):
    """Rate CSV rows for one grid point and one redundancy pattern."""
    profile = _profile_for(cfg, m)
    bound = cutset_bound(cfg.K, pattern.L, cfg.N, m * cfg.N).value
    r_na = rate_nonadaptive(profile, pattern.L, cfg.K)
    rows = []
    for scheme in SCHEMES:
        if scheme not in cfg.delivery:
            continue
        rate = _scheme_rate(profile, scheme, pattern, cfg.K)
        rows.append((_fmt(m), scheme, str(pattern), str(pattern.L), _fmt(rate),
                     _fmt(bound), _gap_cell(r_na, rate, bound)))
    return rows


def _average_rate_rows(cfg: ScenarioConfig, m: float, L: int):
    """Rate rows averaged uniformly over all patterns with L distinct files."""
    profile = _profile_for(cfg, m)
    patterns = partitions_into_parts(cfg.K, L)
    bound = cutset_bound(cfg.K, L, cfg.N, m * cfg.N).value
    r_na = rate_nonadaptive(profile, L, cfg.K)
    rows = []
    for scheme in SCHEMES:
        if scheme not in cfg.delivery:
            continue
        rate = float(np.mean([_scheme_rate(profile, scheme, p, cfg.K) for p in patterns]))
        rows.append((_fmt(m), scheme, "avg", str(L), _fmt(rate),
                     _fmt(bound), _gap_cell(r_na, rate, bound)))
    return rows


def _run_placement(cfg: ScenarioConfig):
    header = ["scheme", "K", "m_ratio"] + [f"x_{s}" for s in range(cfg.K + 1)]
    rows = []
    for m in cfg.m_ratio:
        profile = _profile_for(cfg, m)
        rows.append([cfg.placement, str(cfg.K), _fmt(m)] + [_fmt(float(x)) for x in profile.fractions])
    return [_emit_csv(cfg.out, header, rows)]


def _run_bound(cfg: ScenarioConfig):
    if cfg.pattern is not None:
        Ls = [len(cfg.pattern)]
    elif cfg.demands is not None:
        Ls = [len(set(cfg.demands))]
    else:
        Ls = list(range(1, cfg.K + 1))
    rows = []
    for m in cfg.m_ratio:
        for L in Ls:
            b = cutset_bound(cfg.K, L, cfg.N, m * cfg.N).value
            rows.append((_fmt(m), "bound", "", str(L), _fmt(b), _fmt(b), ""))
    return [_emit_csv(cfg.out, RATE_HEADER, rows)]


def _run_rate(cfg: ScenarioConfig):
    if cfg.demands is not None:
        pattern, _, _ = redundancy_pattern(DemandVector(cfg.demands))
    elif cfg.pattern is not None:
        pattern = RedundancyPattern(cfg.pattern)
    else:
        raise ConfigError("demands: rate needs an explicit demand vector or a pattern")
    chunks = _map_jobs(lambda m: _pattern_rate_rows(cfg, m, pattern), cfg.m_ratio, cfg.jobs)
    return [_emit_csv(cfg.out, RATE_HEADER, [row for chunk in chunks for row in chunk])]


def _run_sweep(cfg: ScenarioConfig):
    if cfg.pattern is not None:
        pattern = RedundancyPattern(cfg.pattern)
        chunks = _map_jobs(lambda m: _pattern_rate_rows(cfg, m, pattern), cfg.m_ratio, cfg.jobs)
    else:
        tasks = [(m, L) for m in cfg.m_ratio for L in range(1, cfg.K + 1)]
        chunks = _map_jobs(lambda t: _average_rate_rows(cfg, t[0], t[1]), tasks, cfg.jobs)
    return [_emit_csv(cfg.out, RATE_HEADER, [row for chunk in chunks for row in chunk])]


def _graph_for(cfg: ScenarioConfig) -> np.ndarray:
    if cfg.graph == "complete":
        return complete_graph(cfg.K)
    adj = load_edge_list(cfg.graph)
    if adj.shape[0] > cfg.K:
        raise ConfigError(f"graph: edge list names cache {adj.shape[0]} but K={cfg.K}")
    full = np.zeros((cfg.K, cfg.K), dtype=bool)
    full[: adj.shape[0], : adj.shape[0]] = adj
    return full


def _out_prefix(out: str | None, fallback: str) -> str:
    if out is None:
        return fallback
    return out[:-4] if out.endswith(".csv") else out


def _run_simulate(cfg: ScenarioConfig):
    model = CorrelationModel(adjacency=_graph_for(cfg), r=cfg.r,
                             popularity=zipf_pmf(cfg.N, cfg.theta))
    chain_samples = sample_chains(model, cfg.chains, cfg.samples, cfg.burn_in, cfg.seed)
    samples = [d for chain in chain_samples for d in chain]
    prefix = _out_prefix(cfg.out, "simulate")

    sample_rows = [[str(i + 1)] + [str(v) for v in d.requests] for i, d in enumerate(samples)]
    sample_path = _emit_csv(f"{prefix}_samples.csv",
                            ["sample_index"] + [f"d_{k}" for k in range(1, cfg.K + 1)],
                            sample_rows)

    stats = empirical_stats(samples)
    if cfg.chains >= 2:
        rhat = epsr(np.array([mean_request_index(chain) for chain in chain_samples]))
        print(f"epsr: {rhat:.6g}", file=sys.stderr)
    stats_path = _emit_csv(f"{prefix}_stats.csv",
                           ("r", "theta", "rho_max", "rho_avg", "L_avg"),
                           [(_fmt(cfg.r), _fmt(cfg.theta), _fmt(stats.rho_max),
                             _fmt(stats.rho_avg), _fmt(stats.L_avg))])

    patterns = [redundancy_pattern(d)[0] for d in samples]
    distinct = sorted(set(patterns), key=lambda p: (p.L, p.counts))
    rate_rows = []
    for m in cfg.m_ratio:
        profile = _profile_for(cfg, m)
        cache = {}
        for scheme in SCHEMES:
            if scheme not in cfg.delivery:
                continue
            vals = _map_jobs(lambda p, s=scheme: _scheme_rate(profile, s, p, cfg.K),
                             distinct, cfg.jobs)
            cache[scheme] = dict(zip(distinct, vals))
        bound = average_bound(samples, cfg.N, m * cfg.N, cfg.K)
        r_na_avg = float(np.mean([rate_nonadaptive(profile, p.L, cfg.K) for p in patterns]))
        L_avg = float(np.mean([p.L for p in patterns]))
        for scheme in SCHEMES:
            if scheme not in cfg.delivery:
                continue
            avg = float(np.mean([cache[scheme][p] for p in patterns]))
            rate_rows.append((_fmt(m), scheme, "avg", _fmt(L_avg), _fmt(avg),
                              _fmt(bound), _gap_cell(r_na_avg, avg, bound)))
    rate_path = _emit_csv(f"{prefix}_rates.csv", RATE_HEADER, rate_rows)
    return [sample_path, stats_path, rate_path]


def _run_verify(cfg: ScenarioConfig) -> list:
    if cfg.F is None:
        raise ConfigError("F: required for verify (bit-level symbol count)")
    failures = []
    lines = []
    m = cfg.m_ratio[0]
    sys_cfg = SystemConfig(K=cfg.K, N=cfg.N, m_ratio=m, F=cfg.F)
    profile = _profile_for(cfg, m)
    partition = materialize_partition(sys_cfg, profile, cfg.seed)
    slack = (2**cfg.K) * cfg.K / cfg.F

    if cfg.demands is not None:
        demand_list = [DemandVector(cfg.demands)]
    else:
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
        demand_list = [DemandVector(tuple(int(v) for v in rng.integers(1, cfg.N + 1, size=cfg.K)))
                       for _ in range(cfg.samples)]

    for d in demand_list:
        pattern, L, _ = redundancy_pattern(d)
        for scheme in cfg.delivery:
            if scheme == "nonadaptive":
                plan, analytic = profile, rate_nonadaptive(profile, L, cfg.K)
            elif scheme == "simplified":
                plan = simplified_plan(profile, L, cfg.K)
                analytic = plan.rate
            else:
                plan, analytic = adaptive_plan(profile, d)
            schedule = build_messages(partition, plan, d)
            achieved = rate_of_schedule(schedule, cfg.F)
            for k in range(1, cfg.K + 1):
                try:
                    got = decode(k, partition.cache_view(k), schedule, d)
                except DecodeError as exc:
                    failures.append(f"{scheme} demand {d.requests}: cache {k} decode error: {exc}")
                    continue
                if not np.array_equal(got, partition.data[d.requests[k - 1] - 1]):
                    failures.append(f"{scheme} demand {d.requests}: cache {k} reconstructed wrong bits")
            if abs(achieved - analytic) > slack:
                failures.append(f"{scheme} demand {d.requests}: schedule rate {achieved:.6g} "
                                f"vs analytic {analytic:.6g} exceeds slack {slack:.6g}")
            lines.append(f"{scheme} demand {d.requests}: rate {achieved:.6g} analytic {analytic:.6g}")

    report = "\n".join(lines + (["FAIL:"] + failures if failures else ["PASS"])) + "\n"
    if cfg.out is None:
        sys.stdout.write(report)
    else:
        with open(cfg.out, "w") as fh:
            fh.write(report)
    if failures:
        raise DecodeError(f"{len(failures)} verification failure(s); first: {failures[0]}")
    return [cfg.out or "<stdout>"]


_RUNNERS = {
    "placement": _run_placement,
    "rate": _run_rate,
    "bound": _run_bound,
    "sweep": _run_sweep,
    "simulate": _run_simulate,
    "verify": _run_verify,
}


def run_scenario(cfg: ScenarioConfig, command: str = "sweep"):
    """Validate cfg and run one subcommand, returning the artifact paths."""
    if command not in _RUNNERS:
        raise ConfigError(f"command: unknown subcommand {command}")
    if command == "simulate" and cfg.demand_mode is None:
        cfg.demand_mode = "gibbs"
    cfg.validate()
    return _RUNNERS[command](cfg)


def parse_m_ratio(text: str) -> list:
    """Parse a single value or an inclusive start:step:end grid."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError("m_ratio: grid must be start:step:end")
        start, step, end = (float(p) for p in parts)
        if step <= 0:
            raise ConfigError("m_ratio: grid step must be positive")
        values = []
        v = start
        while v <= end + 1e-9:
            values.append(round(v, 12))
            v += step
        if not values:
            raise ConfigError("m_ratio: empty grid")
        return values
    return [float(text)]


def _parse_int_tuple(text: str, what: str) -> tuple:
    try:
        return tuple(int(p) for p in text.split(",") if p != "")
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated integers") from None


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as invalid-config (exit 1)."""

    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="cachecast", description="Coded-caching rate experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("placement", "cache-content profiles over an m-ratio grid"),
        ("rate", "delivery rates for one demand vector or pattern"),
        ("bound", "cutset lower bounds"),
        ("sweep", "rate curves over an m-ratio grid"),
        ("simulate", "Gibbs-sampled correlated demands and average rates"),
        ("verify", "bit-level build/decode round-trip"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON scenario file; flags override its values")
        p.add_argument("--K", type=int, dest="K")
        p.add_argument("--N", type=int, dest="N")
        p.add_argument("--m-ratio", dest="m_ratio", help="value or start:step:end grid")
        p.add_argument("--placement", choices=PLACEMENTS)
        p.add_argument("--delivery", help="comma-separated subset of nonadaptive,simplified,adaptive")
        p.add_argument("--demands", help="comma-separated requested file indices")
        p.add_argument("--pattern", help="comma-separated distinct-file request counts")
        p.add_argument("--r", type=float)
        p.add_argument("--theta", type=float)
        p.add_argument("--chains", type=int)
        p.add_argument("--burn-in", type=int, dest="burn_in")
        p.add_argument("--samples", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--F", type=int, dest="F")
        p.add_argument("--graph", help="complete, or path to an edge-list file")
        p.add_argument("--out", help="output CSV path (simulate: path prefix)")
        p.add_argument("--jobs", type=int, help="worker threads for grid evaluation")
    return parser


def _config_from_args(args) -> ScenarioConfig:
    values = {}
    if args.command == "verify" and args.samples is None:
        # verify defaults to a quick spot check, not a full simulation run
        values["samples"] = 20
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"config: cannot read {args.config}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config: top-level JSON value must be an object")
        known = {f.name for f in fields(ScenarioConfig)}
        for key, val in raw.items():
            if key not in known:
                raise ConfigError(f"config: unknown field {key}")
            values[key] = val

    overrides = {
        "K": args.K, "N": args.N, "placement": args.placement, "r": args.r,
        "theta": args.theta, "chains": args.chains, "burn_in": args.burn_in,
        "samples": args.samples, "seed": args.seed, "F": args.F,
        "graph": args.graph, "out": args.out, "jobs": args.jobs,
    }
    for key, val in overrides.items():
        if val is not None:
            values[key] = val
    if args.m_ratio is not None:
        values["m_ratio"] = args.m_ratio
    if args.delivery is not None:
        values["delivery"] = args.delivery
    if args.demands is not None:
        values["demands"] = args.demands
    if args.pattern is not None:
        values["pattern"] = args.pattern

    if "K" not in values:
        raise ConfigError("K: required")
    mr = values.get("m_ratio")
    if isinstance(mr, str):
        values["m_ratio"] = parse_m_ratio(mr)
    elif isinstance(mr, (int, float)):
        values["m_ratio"] = [float(mr)]
    elif isinstance(mr, (list, tuple)):
        values["m_ratio"] = [float(v) for v in mr]
    if isinstance(values.get("delivery"), str):
        values["delivery"] = tuple(s for s in values["delivery"].split(",") if s)
    elif isinstance(values.get("delivery"), (list, tuple)):
        values["delivery"] = tuple(values["delivery"])
    if isinstance(values.get("demands"), str):
        values["demands"] = _parse_int_tuple(values["demands"], "demands")
    elif isinstance(values.get("demands"), (list, tuple)):
        values["demands"] = tuple(int(v) for v in values["demands"])
    if isinstance(values.get("pattern"), str):
        values["pattern"] = _parse_int_tuple(values["pattern"], "pattern")
    if values.get("pattern") is not None:
        values["pattern"] = tuple(sorted((int(c) for c in values["pattern"]), reverse=True))
    try:
        return ScenarioConfig(**values)
    except TypeError as exc:
        raise ConfigError(f"config: {exc}") from None


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        cfg = _config_from_args(args)
        run_scenario(cfg, args.command)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (LpNumericalError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except DecodeError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
