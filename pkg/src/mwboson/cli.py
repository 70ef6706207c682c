"""``mwboson`` command-line entry point.

Exit status: 0 success, 2 usage error, 3 validation failure, 4 resource-cap
refusal, 5 invariant violation (including failed verification checks).
Errors print one ``error: kind=<kind> reason=<text>`` line on stderr.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import __version__
from . import formats
from .config import READOUTS, ExperimentConfig, load_config
from .device import PHI_CONVENTIONS
from .dynamics import schedule_sector_unitary
from .errors import InvariantViolation, ResourceCapError, ValidationError
from .feasibility import budget
from .gaussian import gaussian_pipeline
from .interferometer import (ElementList, elements_to_unitary, haar_random, max_entry_error, reck_decompose,
                             remove_global_phase)
from .protocols import flux_modulated_squeezing, squeezing_full_simulation
from .pulses import compile_schedule
from .sampler import (apply_loss, apply_readout, brute_force_distribution, full_distribution, readout_distribution,
                      sample, survival_probability)
from .verify import run_battery

OUT_ENV = "MWBOSON_OUT"

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_RESOURCE, EXIT_INVARIANT = 0, 2, 3, 4, 5


class Context:
    """Resolved configuration plus output helpers for one command."""

    def __init__(self, command: str, cfg: ExperimentConfig, out: Path):
        self.command = command
        self.cfg = cfg
        self.out = out
        self.hash = formats.config_hash(cfg.canonical())

    def header(self, **extra):
        return formats.make_header(self.command, self.hash, self.cfg.seed, **extra)

    def path(self, name: str) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        return self.out / name

    def say(self, key: str, value) -> None:
        print(f"{key}\t{value}")


# -- shared steps --------------------------------------------------------------


def _unitary(ctx: Context) -> np.ndarray:
    if ctx.cfg.unitary == "haar":
        return haar_random(ctx.cfg.modes, ctx.cfg.seed)
    _, U = formats.read_unitary(ctx.cfg.unitary)
    if U.shape[0] != ctx.cfg.modes:
        ctx.cfg = ctx.cfg.replace(modes=U.shape[0], input=None)
    return U


def _decompose(ctx: Context) -> tuple[np.ndarray, ElementList]:
    U = _unitary(ctx)
    elements = reck_decompose(U)
    err = max_entry_error(elements_to_unitary(elements, U.shape[0]), U)
    ctx.say("modes", U.shape[0])
    ctx.say("elements", len(elements))
    ctx.say("beam_splitters", elements.beam_splitter_count)
    ctx.say("roundtrip_error", f"{err:.3e}")
    if err >= 1e-10:
        raise InvariantViolation(f"decomposition round-trip error {err:.3e} >= 1e-10")
    return U, elements


# -- commands ------------------------------------------------------------------


def cmd_decompose(ctx: Context) -> int:
    U, elements = _decompose(ctx)
    formats.write_unitary(ctx.path("unitary.tsv"), U, ctx.header())
    formats.write_elements(ctx.path("elements.tsv"), elements, ctx.header())
    return EXIT_OK


def cmd_compile(ctx: Context, elements_file: str | None) -> int:
    if elements_file:
        _, elements = formats.read_elements(elements_file)
    else:
        _, elements = _decompose(ctx)
    schedule = compile_schedule(elements, ctx.cfg.device)
    formats.write_schedule(ctx.path("schedule.tsv"), schedule, ctx.header())
    ctx.say("depth", schedule.depth)
    ctx.say("total_duration_ns", f"{schedule.total_duration * 1e9:.6g}")
    return EXIT_OK


def cmd_simulate(ctx: Context) -> int:
    cfg = ctx.cfg
    if cfg.gaussian is not None:
        U, elements = _decompose(ctx)
        dist = gaussian_pipeline(cfg.gaussian, elements, cfg.readout_model, cutoff=cfg.cutoff)
        ctx.say("leakage", f"{dist.leakage:.3e}")
        ctx.say("rejected", f"{dist.rejected:.6g}")
        formats.write_distribution(ctx.path("distribution.tsv"), dist, ctx.header(input="gaussian"))
        return EXIT_OK

    U, elements = _decompose(ctx)
    schedule = compile_schedule(elements, cfg.device)
    V = schedule_sector_unitary(schedule, cfg.device, photons=1)
    sched_err = max_entry_error(remove_global_phase(V, U), U)
    ctx.say("schedule_fidelity_error", f"{sched_err:.3e}")
    inp = ctx.cfg.input_state
    exact = full_distribution(U, inp)
    brute = brute_force_distribution(elements, inp)
    dev = exact.max_deviation(brute)
    ctx.say("oracle_max_deviation", f"{dev:.3e}")
    if sched_err >= 1e-6:
        raise InvariantViolation(f"compiled schedule deviates from the target by {sched_err:.3e}")
    if dev >= 1e-9:
        raise InvariantViolation(f"permanent and brute-force distributions differ by {dev:.3e}")
    formats.write_distribution(ctx.path("distribution.tsv"), brute, ctx.header(input=",".join(map(str, inp))))
    return EXIT_OK


def cmd_sample(ctx: Context) -> int:
    cfg = ctx.cfg
    U = _unitary(ctx)
    inp = cfg.input_state
    dist = full_distribution(U, inp)
    extra = {"input": ",".join(map(str, inp)), "readout": cfg.readout, "loss": str(cfg.loss).lower()}
    if cfg.loss:
        schedule = compile_schedule(reck_decompose(U), cfg.device)
        p = survival_probability(cfg.device.kappa_s, schedule.total_duration)
        dist = apply_loss(dist, p)
        extra["survival"] = f"{p:.12g}"
        ctx.say("survival_probability", f"{p:.12g}")
    formats.write_distribution(ctx.path("distribution.tsv"), dist, ctx.header(**extra))

    seq = np.random.SeedSequence(cfg.seed)
    sample_seed, readout_seed = seq.spawn(2)
    true = sample(dist, sample_seed, cfg.samples)
    model = cfg.readout_model
    rng = np.random.default_rng(readout_seed)
    records = []
    for t in true:
        if model is None:
            records.append((t, t, True))
        else:
            res = apply_readout(t, model, rng)
            records.append((t, res.outcome, not res.rejected))
    formats.write_samples(ctx.path("samples.tsv"), records, ctx.header(**extra))

    reported = readout_distribution(dist, model)
    counts = Counter(r for _, r, ok in records if ok)
    ordered = {k: counts.get(k, 0) for k in reported.entries}
    ordered.update({k: v for k, v in sorted(counts.items()) if k not in ordered})
    formats.write_counts(ctx.path("counts.tsv"), ordered, ctx.header(**extra))
    ctx.say("samples", cfg.samples)
    ctx.say("accepted", sum(1 for *_, ok in records if ok))
    for k, v in ordered.items():
        ctx.say("count[" + ",".join(map(str, k)) + "]", v)
    return EXIT_OK


def cmd_feasibility(ctx: Context) -> int:
    reports = {c: budget(ctx.cfg.device, ctx.cfg.depth_coefficient, convention=c) for c in PHI_CONVENTIONS}
    labels = [k for k, _ in reports["plain"].rows()]
    values = {c: dict(r.rows()) for c, r in reports.items()}
    rows = [(k, values["plain"][k], values["angular"][k]) for k in labels if k != "convention"]
    formats.write_table(ctx.path("feasibility.tsv"), ("quantity", "plain", "angular"), rows, ctx.header())
    width = max(len(k) for k in labels)
    print(f"{'quantity':<{width}}  {'plain':>14}  {'angular':>14}")
    for k, a, b in rows:
        print(f"{k:<{width}}  {a:>14}  {b:>14}")
    return EXIT_OK


def cmd_verify(ctx: Context, inject_fault: bool) -> int:
    cfg = ctx.cfg
    report = run_battery(cfg.verify_modes, cfg.verify_photons, cfg.verify_instances, cfg.seed,
                         inject_fault=inject_fault, params=cfg.device)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    rows = [(c.name, f"{c.measured:.3e}", c.bound, "pass" if c.passed else "FAIL") for c in report.checks]
    formats.write_table(ctx.path("verify.tsv"), ("check", "measured", "bound", "status"), rows,
                        ctx.header(fault_injected=str(inject_fault).lower()))
    for r in rows:
        print("\t".join(r))
    print("summary\t" + ("pass" if report.passed else "FAIL") + f"\t{sum(c.passed for c in report.checks)}/{len(report.checks)}")
    if not report.passed:
        failed = ", ".join(c.name for c in report.checks if not c.passed)
        raise InvariantViolation(f"verification failed: {failed}")
    return EXIT_OK


def squeeze_cutoff(r: float, tail_tol: float = 1e-8) -> int:
    """Smallest cutoff whose two-mode squeezing tail ``tanh(r)^(2(c+1))`` is below ``tail_tol``."""
    t = math.tanh(abs(r))
    if t == 0:
        return 1
    return max(1, math.ceil(math.log(tail_tol) / (2 * math.log(t)) - 1 + 1e-12))


def cmd_squeeze(ctx: Context, full_ratios: list[float], cutoff: int | None) -> int:
    cfg = ctx.cfg
    r = cfg.r
    if cutoff is None:
        cutoff = squeeze_cutoff(r)
    res = flux_modulated_squeezing(1.0, r, cutoff)
    rows = []
    for n in range(cutoff + 1):
        analytic = math.tanh(r) ** (2 * n) / math.cosh(r) ** 2
        rows.append((n, res.probability(n, n), analytic, abs(res.probability(n, n) - analytic)))
    formats.write_table(ctx.path("squeeze.tsv"), ("n", "p_nn", "analytic", "abs_error"), rows,
                        ctx.header(r=f"{r:.12g}"))
    ctx.say("P(0,0)", f"{res.probability(0, 0):.12g}")
    ctx.say("P(1,1)", f"{res.probability(1, 1):.12g}")
    ctx.say("leakage", f"{res.leakage:.3e}")
    if full_ratios:
        series = [squeezing_full_simulation(x, r) for x in full_ratios]
        rows = [(s.ratio, s.max_error, s.step_count) for s in series]
        formats.write_table(ctx.path("squeeze_convergence.tsv"), ("ratio", "max_error", "steps"), rows,
                            ctx.header(r=f"{r:.12g}"))
        for s in series:
            ctx.say(f"full_error[ratio={s.ratio:g}]", f"{s.max_error:.3e}")
    return EXIT_OK


# -- argument handling ---------------------------------------------------------


def _grid(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _ratios(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--modes", type=int, help="number of modes M")
    common.add_argument("--photons", type=int, help="number of single photons N")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--config", help="configuration file")
    common.add_argument("--unitary-file", help="read the interferometer unitary from this file instead of sampling one")
    common.add_argument("--convention-phi", choices=PHI_CONVENTIONS, help="unit convention of the phase-shifter rate")
    common.add_argument("--readout", choices=READOUTS, help="readout model")
    common.add_argument("--loss", action="store_true", default=None, help="apply per-photon storage loss")
    common.add_argument("--out", help=f"output directory (default ${OUT_ENV} or the current directory)")

    parser = argparse.ArgumentParser(prog="mwboson", description="Microwave boson sampling simulator and pulse compiler.")
    parser.add_argument("--version", action="version", version=f"mwboson {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("decompose", parents=[common], help="decompose a unitary into beam splitters and phase shifters")
    p = sub.add_parser("compile", parents=[common], help="compile an interferometer to a pulse schedule")
    p.add_argument("--elements-file", help="compile this element list instead of decomposing a unitary")
    sub.add_parser("simulate", parents=[common], help="simulate the compiled circuit and write the exact distribution")
    p = sub.add_parser("sample", parents=[common], help="draw samples from the output distribution")
    p.add_argument("--samples", type=int, help="number of samples")
    p = sub.add_parser("feasibility", parents=[common], help="print the lifetime and operation-time budget")
    p.add_argument("--depth-coefficient", type=float, help="layers per mode")
    p = sub.add_parser("verify", parents=[common], help="run the oracle check battery")
    p.add_argument("--grid-modes", type=_grid, help="comma-separated mode counts (empty for none)")
    p.add_argument("--grid-photons", type=_grid, help="comma-separated photon numbers (empty for none)")
    p.add_argument("--instances", type=int, help="random unitaries per grid point")
    p.add_argument("--inject-fault", action="store_true", help="perturb the reference unitary (negative control)")
    p = sub.add_parser("squeeze", parents=[common], help="two-mode squeezing statistics")
    p.add_argument("--r", type=float, help="squeeze parameter")
    p.add_argument("--cutoff", type=int, help="per-mode photon cutoff (default: smallest adequate for r)")
    p.add_argument("--full-ratios", type=_ratios, default=[],
                   help="also run the flux-modulated simulation at these g_bs/omega ratios")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    changes = {}
    for flag, key in (("modes", "modes"), ("photons", "photons"), ("seed", "seed"), ("readout", "readout"),
                      ("loss", "loss"), ("samples", "samples"), ("depth_coefficient", "depth_coefficient"),
                      ("r", "r"), ("instances", "verify_instances"),
                      ("grid_modes", "verify_modes"), ("grid_photons", "verify_photons")):
        value = getattr(args, flag, None)
        if value is not None:
            changes[key] = value
    if args.unitary_file:
        changes["unitary"] = args.unitary_file
    if args.convention_phi:
        changes["device"] = cfg.device.replace(phi_convention=args.convention_phi)
    if "modes" in changes and cfg.input is not None and len(cfg.input) != changes["modes"]:
        changes["input"] = None
    return cfg.replace(**changes)


def _fail(kind: str, reason: str, code: int) -> int:
    reason = " ".join(str(reason).split())
    print(f"error: kind={kind} reason={reason}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        out = Path(args.out or os.environ.get(OUT_ENV) or ".")
        ctx = Context(args.command, cfg, out)
        if args.command == "decompose":
            return cmd_decompose(ctx)
        if args.command == "compile":
            return cmd_compile(ctx, args.elements_file)
        if args.command == "simulate":
            return cmd_simulate(ctx)
        if args.command == "sample":
            return cmd_sample(ctx)
        if args.command == "feasibility":
            return cmd_feasibility(ctx)
        if args.command == "verify":
            return cmd_verify(ctx, args.inject_fault)
        if args.command == "squeeze":
            return cmd_squeeze(ctx, args.full_ratios, args.cutoff)
    except ResourceCapError as exc:
        return _fail("resource", exc, EXIT_RESOURCE)
    except ValidationError as exc:
        return _fail("validation", exc, EXIT_VALIDATION)
    except InvariantViolation as exc:
        return _fail("invariant", exc, EXIT_INVARIANT)
    parser.error(f"unknown command {args.command}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
