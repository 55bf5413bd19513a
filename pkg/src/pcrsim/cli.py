"""Command-line entry point.

Every command is fully determined by its flags (seeds are mandatory wherever
randomness exists) and writes canonical artifacts; timing and progress go to
stderr only.  Exit codes: 0 success / all checks passed, 1 usage or input
error, 2 verification failures, 3 census found witnesses.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass
from pathlib import Path

import click

from pcrsim import __version__
from pcrsim.analysis import exhaustive_verify, ga_parity_probe, state_census
from pcrsim.codes import build_code, compute_m0
from pcrsim.construct import (
    build_hybrid_decoder,
    build_parity_only_decoder,
    delete_gdn_layers,
    parity_cell_params,
    rounding_identities,
)
from pcrsim.fixed import Precision
from pcrsim.nn_core import spec_from_json, spec_to_json
from pcrsim.reporting import (
    default_output_dir,
    render_json,
    stamp,
    verification_csv,
    write_text,
)


@dataclass(frozen=True)
class RunConfig:
    """Validated run parameters; determines the run given the code version."""

    command: str
    n_values: tuple[int, ...]
    s: int
    seed: int
    budget: int
    out: Path | None
    fmt: str
    workers: int = 1

    def __post_init__(self) -> None:
        if self.s < 2:
            raise click.BadParameter("precision parameter must be >= 2")
        if any(n < 1 for n in self.n_values):
            raise click.BadParameter("table lengths must be >= 1")
        if self.budget < 0:
            raise click.BadParameter("budget must be >= 0")
        if self.fmt not in ("json", "csv"):
            raise click.BadParameter("format must be json or csv")
        if self.workers < 1:
            raise click.BadParameter("workers must be >= 1")


def _cli_guard(fn):
    """Convert package errors into clean CLI failures (exit code 1)."""
    import functools

    from pcrsim.errors import PcrsimError

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except PcrsimError as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def _parse_n_range(text: str) -> tuple[int, ...]:
    if ".." in text:
        lo, hi = text.split("..")
        return tuple(range(int(lo), int(hi) + 1))
    return (int(text),)


def _precision(s: int) -> Precision:
    if s < 2:
        raise click.BadParameter("precision parameter must be >= 2")
    return Precision(s)


def _emit(doc_rows, cfg: RunConfig, json_doc: dict, name: str) -> None:
    if cfg.fmt == "csv":
        text = verification_csv(doc_rows)
        suffix = ".csv"
    else:
        text = render_json(json_doc)
        suffix = ".json"
    path = cfg.out or default_output_dir() / f"{name}{suffix}"
    write_text(path, text)
    click.echo(f"wrote {path}", err=True)


@click.group()
@click.version_option(version=__version__)
def main():
    """Bit-exact hybrid-decoder simulator and verifier."""


@main.command("verify-hybrid")
@click.option("--n", "n_range", required=True, help="table length or range, e.g. 4 or 1..6")
@click.option("--s", type=int, required=True, help="precision parameter (>= 2)")
@click.option("--seed", type=int, required=True)
@click.option("--budget", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@click.option("--workers", type=int, default=1, show_default=True)
@_cli_guard
def cmd_verify_hybrid(n_range, s, seed, budget, out, fmt, workers):
    """Build the hybrid decoder for each table length and verify every
    instance exhaustively; exit 0 only if all pass with zero scratch."""
    cfg = RunConfig(
        "verify-hybrid", _parse_n_range(n_range), s, seed, budget, out, fmt, workers
    )
    prec = _precision(cfg.s)
    reports = []
    all_pass = True
    for n in cfg.n_values:
        t0 = time.monotonic()
        spec = build_hybrid_decoder(n, prec, cfg.seed)
        rep = exhaustive_verify(spec, n, cfg.budget, workers=cfg.workers)
        click.echo(
            f"n={n}: {rep.total - len(rep.failures)}/{rep.total} pass, "
            f"max scratch {rep.max_scratch} ({time.monotonic() - t0:.2f}s)",
            err=True,
        )
        all_pass &= rep.passed and rep.max_scratch <= cfg.budget
        reports.append(rep.to_json_dict())
    doc = stamp(
        {"command": "verify-hybrid", "budget": cfg.budget, "reports": reports},
        s=cfg.s,
        seed=cfg.seed,
    )
    _emit(reports, cfg, doc, f"verify_hybrid_s{cfg.s}_seed{cfg.seed}")
    sys.exit(0 if all_pass else 2)


@main.command("census")
@click.option("--decoder", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--n", type=int, required=True)
@click.option("--out", type=click.Path(path_type=Path), default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@_cli_guard
def cmd_census(decoder, n, out, fmt):
    """Census the recurrent states of a pure-recurrent decoder loaded from
    JSON; exit 3 when collision witnesses exist, 0 otherwise."""
    spec = spec_from_json(decoder.read_text())
    cfg = RunConfig(
        "census", (n,), spec.prec.frac_bits, spec.meta.get("seed") or 0, 0, out, fmt
    )
    rep = state_census(spec, n)
    doc = stamp(
        {"command": "census", **rep.to_json_dict()},
        s=cfg.s,
        seed=spec.meta.get("seed"),
        n=n,
    )
    _emit([rep.to_json_dict()], cfg, doc, f"census_n{n}_s{cfg.s}")
    click.echo(
        f"states {rep.distinct_states}/{rep.min_states_required} required, "
        f"{len(rep.witnesses)} witnesses",
        err=True,
    )
    sys.exit(3 if rep.witnesses else 0)


@main.command("round-table")
@click.option("--s", type=int, required=True)
@_cli_guard
def cmd_round_table(s):
    """Print the rounding-identity table for one precision and fail if any
    identity is violated.  Each identity rounds an exact rational product
    once onto the grid."""
    prec = _precision(s)
    cell = parity_cell_params(prec)
    click.echo(
        f"s={s} step={cell.step.as_fraction_str()} "
        f"kappa={cell.kappa.as_fraction_str()}"
    )
    ok = True
    for name, good in rounding_identities(prec):
        ok &= bool(good)
        click.echo(f"  {'PASS' if good else 'FAIL'}  {name}")
    sys.exit(0 if ok else 2)


@main.command("code-search")
@click.option("--s", type=int, required=True)
@click.option("--n", type=int, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", type=click.Path(path_type=Path), default=None)
@_cli_guard
def cmd_code_search(s, n, seed, out):
    """Report the precision constant and emit a separated code table file."""
    prec = _precision(s)
    m0 = compute_m0(prec)
    table = build_code(n, prec, seed)
    path = out or default_output_dir() / f"code_n{n}_s{s}_seed{seed}.txt"
    write_text(path, table.to_text())
    click.echo(
        f"m0({s}) = {m0}; table n={n} m={table.m} min distance "
        f"{table.min_pairwise_distance()} (target {table.distance_target()})",
        err=True,
    )
    click.echo(f"wrote {path}", err=True)
    sys.exit(0)


@main.command("build-decoder")
@click.option(
    "--kind",
    type=click.Choice(["hybrid", "parity-only", "ga-only"]),
    required=True,
)
@click.option("--n", type=int, default=1, show_default=True)
@click.option("--s", type=int, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@_cli_guard
def cmd_build_decoder(kind, n, s, seed, out):
    """Build a decoder and serialize it to versioned JSON."""
    prec = _precision(s)
    if kind == "parity-only":
        spec = build_parity_only_decoder(
            prec, meta={"kind": "parity_only", "s": s, "seed": seed}
        )
    else:
        spec = build_hybrid_decoder(n, prec, seed)
        if kind == "ga-only":
            spec = delete_gdn_layers(spec)
    write_text(out, spec_to_json(spec))
    click.echo(f"wrote {out} (d_model={spec.d_model})", err=True)
    sys.exit(0)


@main.command("ga-probe")
@click.option("--r", type=int, required=True, help="parity width to probe")
@click.option("--s", type=int, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--budget", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@_cli_guard
def cmd_ga_probe(r, s, seed, budget, out, fmt):
    """Probe the attention-only variant on parity-projected instances."""
    cfg = RunConfig("ga-probe", (r + 1,), s, seed, budget, out, fmt)
    prec = _precision(s)
    spec = delete_gdn_layers(build_hybrid_decoder(r + 1, prec, seed))
    rep = ga_parity_probe(spec, r, budget)
    doc = stamp(
        {"command": "ga-probe", **rep.to_json_dict()}, s=s, seed=seed, n=r + 1
    )
    _emit([rep.to_json_dict()], cfg, doc, f"ga_probe_r{r}_s{s}_seed{seed}")
    click.echo(
        f"r={r}: {rep.total - len(rep.failures)}/{rep.total} pass", err=True
    )
    sys.exit(0 if rep.passed else 2)


@main.command("bench-kernels")
@click.option("--size", type=int, default=200_000, show_default=True)
@click.option("--repeat", type=int, default=5, show_default=True)
def cmd_bench_kernels(size, repeat):
    """Compare the compiled and pure kernel backends (results must match)."""
    from pcrsim.bench import run_kernel_benchmark

    ok = run_kernel_benchmark(size=size, repeat=repeat, echo=click.echo)
    sys.exit(0 if ok else 2)


if __name__ == "__main__":
    main()
