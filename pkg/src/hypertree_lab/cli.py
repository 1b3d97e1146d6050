"""Command-line front door: ``hypertree-lab <subcommand> --n .. --trials .. --seed ..``.

Every subcommand validates its config before doing any work, then writes a
single report (JSON lines or CSV) whose header embeds the version and the
full config. The thread count comes from HYPERTREE_THREADS only.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from math import comb
from typing import Iterator, Optional

import numpy as np

from . import __version__
from .config import SUBCOMMANDS, ConfigError, ExperimentConfig, parse_value, read_config_file
from .cosystole import cosys_event_stats, cocycle_basis, systole, SYSTOLE_MAX_DIM
from .dpp import build_kernel, inclusion_prob, notify_observers, sample_record, sample_stream
from .faces import Complex2, Hypertree
from .homology import census_from_samples
from .moments import (
    expected_X_exact,
    exact_prob_cocycle,
    first_family,
    mc_moments,
    overlap_census,
    spectrum_report,
)
from .oracle import brute_prob_cocycle, enumerate_hypertrees
from .reports import Report, census_report, emit_report
from .seeding import SeedScheme, SplitMix64

THREADS_ENV = "HYPERTREE_THREADS"
CHUNK = 500


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(THREADS_ENV, f"expected an integer, got {raw!r}") from None


# ---------------------------------------------------------------- sampling

@lru_cache(maxsize=4)
def _kernel(n: int):
    return build_kernel(n)


def _draw_chunk(args) -> list:
    n, seed, start, count, method = args
    K = _kernel(n)
    return [(list(T.ranks), T.certificate) for T in sample_stream(K, seed, count, start, method)]


def draw(n: int, seed: int, trials: int, method: str = "auto", threads: int = 1) -> Iterator[Hypertree]:
    """Samples for trials 0..trials-1 in order; identical for every thread count."""
    if threads <= 1 or trials <= CHUNK:
        yield from sample_stream(_kernel(n), seed, trials, method=method)
        return
    jobs = [(n, seed, s, min(CHUNK, trials - s), method) for s in range(0, trials, CHUNK)]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        for chunk in pool.map(_draw_chunk, jobs):
            for ranks, cert in chunk:
                T = Hypertree(Complex2.from_ranks(n, ranks), cert)
                notify_observers(T)
                yield T


# ---------------------------------------------------------------- subcommands

def _header(cfg: ExperimentConfig) -> dict:
    return {"version": __version__, **cfg.as_dict()}


def run_sample(cfg, threads):
    rows = []
    for i, T in enumerate(draw(cfg.n, cfg.seed, cfg.trials, cfg.resolved_mode(), threads)):
        rec = sample_record(T, SeedScheme(cfg.seed, i))
        rows.append((rec["trial_index"], rec["n"], rec["master_seed"], rec["triangles"], rec["certificate"]))
    return Report("sample", _header(cfg), {}, ("trial_index", "n", "master_seed", "triangles", "certificate"), rows)


def run_census(cfg, threads):
    samples = draw(cfg.n, cfg.seed, cfg.trials, cfg.resolved_mode(), threads)
    rep = census_from_samples(samples, cfg.n, cfg.p, cfg.seed, groups=cfg.groups)
    out = census_report(rep, _header(cfg))
    if cfg.groups:
        out.summary["group_pmf"] = {
            "x".join(str(e) for e in g) or "trivial": q for g, q in rep.group_pmf().items()
        }
    return out


def run_moments(cfg, threads):
    samples = draw(cfg.n, cfg.seed, cfg.trials, "auto", threads)
    rep = mc_moments(cfg.n, cfg.h, cfg.trials, cfg.seed, samples=samples, with_exact=False)
    ex = expected_X_exact(cfg.n, cfg.h, cfg.resolved_mode())
    rep.exact_logEX = ex.log_value
    summary = rep.as_dict()
    summary.update(family_count=ex.family_count, exact_EX=ex.exact if ex.exact is not None else ex.value,
                   ex_in_ci=rep.ex_in_ci, pz_consistent=rep.pz_consistent)
    hist = sorted(Counter(rep.x_values).items())
    return Report("moments", _header(cfg), summary, ("x", "count"), hist)


def run_spectrum(cfg, threads):
    v = spectrum_report(cfg.n, first_family(cfg.n, cfg.h))
    summary = {k: getattr(v, k) for k in v.__dataclass_fields__}
    summary["verdict"] = "satisfied" if v.satisfied else "violated"
    return Report("spectrum", _header(cfg), summary)


def run_cosystole(cfg, threads):
    exact = cfg.resolved_mode() == "exact"
    samples = list(draw(cfg.n, cfg.seed, cfg.trials, "auto", threads))
    stats = cosys_event_stats(cfg.n, cfg.trials, cfg.seed, samples=samples)
    cols = ("n", "trial", "systole_upper_num", "systole_upper_den", "event_7_over_n2", "X_positive")
    rows = [list(r) for r in stats.rows]
    if exact:
        cols += ("systole_exact",)
        for row, T in zip(rows, samples):
            ok = cocycle_basis(T).dim <= SYSTOLE_MAX_DIM
            row.append(systole(T, "exact") if ok else None)
    summary = {
        "freq_event_7_over_n2": stats.freq_event_7,
        "freq_X_positive": stats.freq_X_positive,
        "freq_systole_le_cycle_value": stats.freq_cycle_value,
        "ordering_ok": stats.ordering_ok,
        "cycle_norm_mismatches": stats.cycle_norm_mismatches,
        "seven_over_n2_threshold": stats.threshold,
    }
    return Report("cosystole", _header(cfg), summary, cols, [tuple(r) for r in rows])


def run_verify_kalai(cfg, threads):
    pmf = enumerate_hypertrees(cfg.n, use_cache=False)
    total, target = pmf.det_square_sum(), pmf.normalizer
    summary = {"hypertrees": len(pmf.entries), "det_square_sum": total,
               "n_power": target, "equal": total == target,
               "verdict": "pass" if total == target else "fail"}
    return Report("verify-kalai", _header(cfg), summary)


def run_verify_cocycle_formula(cfg, threads):
    F = first_family(cfg.n, cfg.h)
    formula = exact_prob_cocycle(cfg.n, F, cfg.resolved_mode())
    brute = brute_prob_cocycle(cfg.n, F.graph())
    if formula.exact is not None:
        agree = formula.exact == brute
    else:
        agree = abs(formula.log - math.log(brute)) <= 1e-9 * max(1.0, abs(formula.log))
    summary = {"family": [list(c) for c in F.grid], "formula": formula.exact,
               "formula_log": formula.log, "brute_force": brute,
               "verdict": "pass" if agree else "fail"}
    return Report("verify-lemma9", _header(cfg), summary)


def run_overlaps(cfg, threads):
    oc = overlap_census(cfg.n, cfg.h, first_family(cfg.n, cfg.h), cfg.k)
    summary = {"k": oc.k, "count": oc.count, "bound": oc.bound, "within_bound": oc.within_bound,
               "vertex_overlap_ok": oc.vertex_overlap_ok}
    return Report("overlaps", _header(cfg), summary, ("overlap", "families"), sorted(oc.histogram.items()))


def random_face_sets(n: int, count: int, seed: int, max_size: int = 5) -> list:
    """``count`` sets of distinct triangle ranks with sizes in 1..max_size."""
    stream = SplitMix64(seed ^ 0x5EED)
    m = comb(n, 3)
    out = []
    for _ in range(count):
        size = 1 + stream.randbelow(max_size)
        chosen = set()
        while len(chosen) < size:
            chosen.add(stream.randbelow(m))
        out.append(sorted(chosen))
    return out


def run_inclusion(cfg, threads):
    K = _kernel(cfg.n)
    sets = random_face_sets(cfg.n, cfg.k, cfg.seed)
    hits = np.zeros(len(sets), dtype=np.int64)
    N = 0
    for T in draw(cfg.n, cfg.seed, cfg.trials, "auto", threads):
        have = set(T.ranks)
        N += 1
        for j, F in enumerate(sets):
            hits[j] += all(f in have for f in F)
    rows = []
    worst = 0.0
    bounded = True
    for j, F in enumerate(sets):
        minor = inclusion_prob(K, F)
        bound = (3 / cfg.n) ** len(F)
        bounded &= minor <= bound + 1e-12
        freq = hits[j] / N if N else None
        z = None
        if N:
            se = math.sqrt(max(minor * (1 - minor), 1e-300) / N)
            z = (freq - minor) / se
            worst = max(worst, abs(z))
        rows.append((j, F, minor, bound, freq, z))
    summary = {"all_bounded": bounded, "max_abs_z": worst if N else None, "samples": N}
    return Report("inclusion", _header(cfg), summary, ("set", "faces", "minor", "bound", "frequency", "z"), rows)


HANDLERS = {
    "sample": run_sample,
    "census": run_census,
    "moments": run_moments,
    "spectrum": run_spectrum,
    "cosystole": run_cosystole,
    "verify-kalai": run_verify_kalai,
    "verify-lemma9": run_verify_cocycle_formula,
    "overlaps": run_overlaps,
    "inclusion": run_inclusion,
}


def run(cfg: ExperimentConfig, threads: Optional[int] = None) -> Report:
    cfg.validate()
    return HANDLERS[cfg.subcommand](cfg, threads or thread_count())


# ---------------------------------------------------------------- argv

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypertree-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="key=value file; flags override it")
        sp.add_argument("--n", type=str)
        sp.add_argument("--h", type=str)
        sp.add_argument("--p", type=str)
        sp.add_argument("--trials", type=str)
        sp.add_argument("--seed", type=str)
        sp.add_argument("--mode")
        sp.add_argument("--out")
        sp.add_argument("--format", choices=("jsonlines", "csv"))
        sp.add_argument("--k", type=str)
        sp.add_argument("--groups", action="store_const", const="true")
    return parser


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    values = read_config_file(ns.config) if ns.config else {}
    values.pop("subcommand", None)
    for key in ("n", "h", "p", "trials", "seed", "mode", "out", "format", "k", "groups"):
        raw = getattr(ns, key)
        if raw is not None:
            values[key] = parse_value(key, raw)
    return ExperimentConfig(ns.subcommand, **values)


def _fail(field_name: str, message: str) -> int:
    print(json.dumps({"error": "invalid_config", "field": field_name, "message": message}), file=sys.stderr)
    return 2


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(ns).validate()
        threads = thread_count()
    except ConfigError as e:
        return _fail(e.field_name, e.message)
    except OSError as e:
        return _fail("config", str(e))
    report = HANDLERS[cfg.subcommand](cfg, threads)
    try:
        text = emit_report(report, cfg.format, cfg.out)
    except OSError as e:
        print(json.dumps({"error": "unwritable_output", "field": "out", "message": str(e)}), file=sys.stderr)
        return 3
    if cfg.out is None or cfg.out == "-":
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
