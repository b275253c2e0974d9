"""Command-line front end: experiments, figure data, and bound checks.

Every experiment writes a manifest JSON (full configuration echo, package
version, seeds) next to its outputs, so a rerun from the manifest
reproduces the CSV byte for byte.  Builtin networks can be passed to
``--network`` as ``complete:8``, ``path:5``, ``cycle:8`` or
``two-blocks:1e-6`` instead of a file path.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, coupling, oracle, stats
from .errors import GibbsLabError, ValidationError
from .gibbs import make_noise_stream, make_sampler_params, resolve_threads, start_vector
from .network import (
    Network,
    complete_network,
    connected_components,
    cycle_network,
    load_network,
    path_network,
    spectral_summary,
    two_blocks_network,
)


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    network: str
    A: tuple[float, ...]
    k: int | None
    delta: float | None
    replicas: int
    seed: int
    start: str
    out: str
    extra: dict = field(default_factory=dict)


def builtin_network(kind: str, d: int | None = None, epsilon: float | None = None) -> Network:
    """Named example networks used throughout the experiments."""
    if kind == "complete":
        return complete_network(int(d))
    if kind == "path":
        return path_network(int(d))
    if kind == "cycle":
        return cycle_network(int(d))
    if kind == "two-blocks":
        return two_blocks_network(float(epsilon) if epsilon is not None else 1e-6)
    raise ValidationError(f"unknown builtin network kind {kind!r}")


def parse_network(spec: str) -> Network:
    """File path, or builtin spec like ``complete:8`` / ``two-blocks:1e-6``."""
    if os.path.exists(spec):
        return load_network(spec)
    if ":" in spec:
        kind, _, arg = spec.partition(":")
        if kind in ("complete", "path", "cycle"):
            return builtin_network(kind, d=int(arg))
        if kind == "two-blocks":
            return builtin_network(kind, epsilon=float(arg))
    raise ValidationError(f"network {spec!r}: no such file and not a builtin spec")


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_manifest(outdir: Path, config: ExperimentConfig, outputs: list[str]) -> None:
    doc = {
        "tool": "gibbs-lab",
        "version": __version__,
        "config": asdict(config),
        "outputs": outputs,
    }
    (outdir / "manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _outdir(arg: str) -> Path:
    p = Path(arg)
    p.mkdir(parents=True, exist_ok=True)
    return p


# ----------------------------------------------------------------- spectral

def _cmd_spectral(args) -> int:
    n = parse_network(args.network)
    if n.connected:
        s = spectral_summary(n)
        doc = {
            "eigenvalues": [float(v) for v in s.eigenvalues],
            "lambda": s.lam,
            "gamma": s.gamma,
            "beta": s.beta,
            "connected": True,
        }
    else:
        comps, isolated = connected_components(n)
        doc = {
            "connected": False,
            "isolated": isolated,
            "components": [
                {
                    "vertices": list(c.vertices),
                    "weight_fraction": c.weight_fraction,
                    **{
                        k: v
                        for k, v in zip(
                            ("eigenvalues", "lambda", "gamma", "beta"),
                            (lambda s: ([float(x) for x in s.eigenvalues], s.lam, s.gamma, s.beta))(
                                spectral_summary(c.network)
                            ),
                        )
                    },
                }
                for c in comps
            ],
        }
    print(json.dumps(doc, indent=2))
    return 0


# ---------------------------------------------------------------- truncnorm

def _cmd_truncnorm(args) -> int:
    from .truncnorm import trunc_mean, trunc_quantile, trunc_variance

    sigmas = [float(s) for s in args.sigma.split(",")]
    ps = [float(p) for p in args.p.split(",")]
    us = [float(u) for u in args.u.split(",")] if args.u else None
    rows = []
    for s in sigmas:
        for p in ps:
            if us is None:
                rows.append((s, p, trunc_mean(s, p), trunc_variance(s, p)))
            else:
                for u in us:
                    rows.append((s, p, u, trunc_mean(s, p), trunc_variance(s, p), trunc_quantile(s, p, u)))
    header = ["sigma", "p", "mean", "variance"] if us is None else ["sigma", "p", "u", "mean", "variance", "quantile"]
    if args.out:
        _write_csv(Path(args.out), header, rows)
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return 0


# ------------------------------------------------------------------- sample

def _cmd_sample(args) -> int:
    resolve_threads(args.threads)
    n = parse_network(args.network)
    params = make_sampler_params(n, args.A)
    outdir = _outdir(args.out)
    if args.start in ("zero", "half", "one"):
        start = start_vector(args.start, n.d)
    else:
        start = np.loadtxt(args.start).reshape(-1)
        if start.shape != (n.d,):
            raise ValidationError(f"start file has {start.shape[0]} entries, expected {n.d}")
    config = ExperimentConfig(
        kind="sample", network=args.network, A=(args.A,), k=args.k, delta=None,
        replicas=args.replicas, seed=args.seed, start=args.start, out=str(outdir),
        extra={"dump_every": args.dump_every},
    )
    csv_path = outdir / "samples.csv"
    if args.dump_every:
        _sample_dump(params, start, args, csv_path)
    else:
        rec = args.record_every or max(1, -(-args.k // 2000))
        steps, bary, energy = stats._batch_record(
            params, start, args.k, args.seed, args.replicas, rec, True
        )
        rows = (
            (r, int(steps[i]), bary[r, i], energy[r, i])
            for i in range(len(steps))
            for r in range(args.replicas)
        )
        _write_csv(csv_path, ["replica", "step", "barycenter", "energy"], rows)
    _write_manifest(outdir, config, ["samples.csv"])
    return 0


def _sample_dump(params, start, args, csv_path: Path) -> None:
    from . import _kernels

    d = params.network.d
    every = args.dump_every
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["replica", "step"] + [f"p{i}" for i in range(d)])
        for r in range(args.replicas):
            stream = make_noise_stream(args.seed, r)
            p = np.tile(start, (1, 1)).astype(np.float64)
            writer.writerow([r, 0] + [_fmt(v) for v in p[0]])
            done = 0
            while done < args.k:
                b = min(every - (done % every), args.k - done)
                noise = stream.pair_block(b).reshape(1, b, 2)
                _kernels.advance(p, params.row_weights, params.sigmas, noise)
                done += b
                if done % every == 0 or done == args.k:
                    writer.writerow([r, done] + [_fmt(v) for v in p[0]])


# ------------------------------------------------------------- mix-estimate

def _cmd_mix_estimate(args) -> int:
    resolve_threads(args.threads)
    n = parse_network(args.network)
    params = make_sampler_params(n, args.A)
    outdir = _outdir(args.out)
    res = coupling.mixing_gap_trajectory(
        params, args.k, args.replicas, args.seed, delta=args.delta,
        record_every=args.record_every,
    )
    rows = (
        (r, int(res.record_steps[i]), res.gaps[r, i])
        for i in range(len(res.record_steps))
        for r in range(args.replicas)
    )
    _write_csv(outdir / "gaps.csv", ["replica", "step", "max_gap"], rows)
    summary = {
        "steps": [int(s) for s in res.record_steps],
        "mean_gap": [float(g) for g in res.mean_gap],
        "delta": res.delta,
        "coalesced": int((res.coalesce_step >= 0).sum()),
        "replicas": args.replicas,
        "order_min": res.order_min,
        "gap_increase_max": res.gap_increase_max,
    }
    (outdir / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    config = ExperimentConfig(
        kind="mix-estimate", network=args.network, A=(args.A,), k=args.k,
        delta=args.delta, replicas=args.replicas, seed=args.seed, start="coupled",
        out=str(outdir),
    )
    _write_manifest(outdir, config, ["gaps.csv", "summary.json"])
    if args.svg:
        from ._svg import line_plot

        line_plot(outdir / "gaps.svg", res.record_steps, {"mean sup-gap": res.mean_gap},
                  title=f"Coupled extreme walkers, A={args.A}", xlabel="step", ylabel="gap")
    return 0


# ------------------------------------------------------------- fig-variance

def _cmd_fig_variance(args) -> int:
    resolve_threads(args.threads)
    n = parse_network(args.network)
    params = make_sampler_params(n, args.A)
    k = args.k or 22 * n.d * int(args.A * args.A)
    outdir = _outdir(args.out)
    res = stats.barycenter_moment_trajectory(
        params, k, args.replicas, args.seed, record_every=args.record_every
    )
    std = res.se_sq * math.sqrt(res.replicas)
    rows = (
        (int(res.record_steps[i]), res.mean_sq[i], std[i], res.replicas)
        for i in range(len(res.record_steps))
    )
    _write_csv(outdir / "variance.csv", ["step", "mean", "std", "replicas"], rows)
    config = ExperimentConfig(
        kind="fig-variance", network=args.network, A=(args.A,), k=k, delta=None,
        replicas=args.replicas, seed=args.seed, start="half", out=str(outdir),
    )
    _write_manifest(outdir, config, ["variance.csv"])
    if args.svg:
        from ._svg import line_plot

        line_plot(
            outdir / "variance.svg", res.record_steps,
            {"mean squared deviation": res.mean_sq, "uniform plateau": np.full_like(res.mean_sq, 1.0 / 12.0)},
            title=f"Squared barycenter deviation, d={n.d}, A={args.A}",
            xlabel="step", ylabel="E (barycenter - 1/2)^2",
        )
    return 0


# -------------------------------------------------------------- fig-hitting

def _parse_A_grid(args) -> list[float]:
    if args.A_list:
        return [float(a) for a in args.A_list.split(",")]
    return [float(a) for a in np.geomspace(args.A_min, args.A_max, args.A_count)]


def _cmd_fig_hitting(args) -> int:
    resolve_threads(args.threads)
    n = parse_network(args.network)
    kind = "T" if args.which == "T" else "Tprime"
    grid = _parse_A_grid(args)
    rows = []
    for A in grid:
        params = make_sampler_params(n, A)
        results = stats.sample_hitting_times(
            params, args.delta, kind, args.seed, args.replicas, k_max=args.k_max
        )
        mean, se, censored = stats.mean_hitting_time(results)
        rows.append((A, mean, se * math.sqrt(args.replicas), args.replicas, censored))
    outdir = _outdir(args.out)
    _write_csv(outdir / "hitting.csv", ["A", "mean", "std", "replicas", "censored"], rows)
    config = ExperimentConfig(
        kind=f"fig-hitting-{args.which}", network=args.network, A=tuple(grid),
        k=args.k_max, delta=args.delta, replicas=args.replicas, seed=args.seed,
        start="zero", out=str(outdir),
    )
    _write_manifest(outdir, config, ["hitting.csv"])
    if args.svg:
        from ._svg import line_plot

        line_plot(
            outdir / "hitting.svg", [r[0] for r in rows],
            {f"mean {args.which}_delta": [r[1] for r in rows]},
            title=f"Hitting time vs A (delta={args.delta}, d={n.d})",
            xlabel="A", ylabel="steps",
        )
    return 0


# -------------------------------------------------------- stationary-oracle

def _cmd_stationary_oracle(args) -> int:
    n = parse_network(args.network)
    stream = make_noise_stream(args.seed, 0)
    res = oracle.rejection_sample_stationary(n, args.A, args.count, stream)
    outdir = _outdir(args.out)
    header = [f"p{i}" for i in range(n.d)] + ["barycenter", "energy"]
    rows = (
        list(res.samples[i]) + [res.barycenters[i], res.energies[i]]
        for i in range(res.samples.shape[0])
    )
    _write_csv(outdir / "stationary.csv", header, rows)
    config = ExperimentConfig(
        kind="stationary-oracle", network=args.network, A=(args.A,), k=None,
        delta=None, replicas=args.count, seed=args.seed, start="uniform",
        out=str(outdir), extra={"acceptance_rate": res.acceptance_rate},
    )
    _write_manifest(outdir, config, ["stationary.csv"])
    print(f"acceptance rate {res.acceptance_rate:.4f} over {res.proposals} proposals", file=sys.stderr)
    return 0


# ------------------------------------------------------------ verify-bounds

def _check(name: str, ok: bool, detail: str) -> bool:
    print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return ok


def _cmd_verify_bounds(args) -> int:
    resolve_threads(args.threads)
    quick = args.quick
    rng = np.random.default_rng(args.seed)
    ok = True

    rho = oracle.estimate_rho(grid=30 if quick else 60, refinements=1 if quick else 2).value

    from .network import random_connected_network
    from .truncnorm import trunc_mean, trunc_quantile, trunc_variance

    worst = -np.inf
    for d in range(2, 9 if quick else 17):
        for _ in range(20 if quick else 50):
            net = random_connected_network(rng, d)
            s = spectral_summary(net)
            worst = max(worst, float(np.max(net.degrees)) - s.gamma)
    ok &= _check(
        "max degree below the mixing scalar",
        worst <= 1e-12,
        f"worst max(c_i) - gamma = {worst:.2e}",
    )

    sig_grid = np.arange(0.05, 1.0001, 0.05)
    p_grid = np.arange(0.0, 0.5001, 0.025)
    mean_ok = True
    var_ok = True
    for s in sig_grid:
        for p in p_grid:
            m = trunc_mean(s, p)
            mean_ok &= -1e-12 <= m <= 2.0 * s * math.exp(-p * p / (2 * s * s)) + 1e-12
            v = trunc_variance(s, p)
            var_ok &= rho * s * s - 1e-9 <= v <= s * s + 1e-12
    ok &= _check("noise mean bound on the grid", bool(mean_ok), f"{len(sig_grid) * len(p_grid)} points")
    ok &= _check("noise variance sandwich on the grid", bool(var_ok), f"floor ratio {rho:.4f}")

    pairs = 0
    coup_ok = True
    for _ in range(2000 if quick else 10_000):
        s = float(10.0 ** rng.uniform(-3, 0.3))
        delta = float(rng.choice([1e-3, 0.1, 0.5]))
        q = float(rng.uniform(0.0, 1.0))
        p = min(q + float(rng.uniform(0.0, 1.0)) * delta, 1.0)
        while p - q > delta:
            p = np.nextafter(p, q)
        u = float(rng.uniform(0.0, 1.0))
        gap = trunc_quantile(s, p, u) - trunc_quantile(s, q, u)
        coup_ok &= 0.0 <= gap <= delta
        pairs += 1
    ok &= _check("shared-noise order and Lipschitz bound", bool(coup_ok), f"{pairs} random pairs")

    # Chain-level checks; configurations scale with --quick.
    n4 = complete_network(4)

    reps = 100 if quick else 500
    k = 20_000 if quick else 100_000
    params = make_sampler_params(n4, 50.0)
    env = stats.energy_envelope(params, k, args.seed, reps)
    ok &= _check(
        "energy plateau (diagonal start)",
        bool(np.all(env.mean_energy <= 1.25 * env.bound)),
        f"max mean energy {env.mean_energy.max():.3e} vs 1.25*bound {1.25 * env.bound:.3e}",
    )

    params = make_sampler_params(n4, 150.0)
    reps_v = 200 if quick else 1000
    k_v = (4 * 150 * 150) if quick else 22 * 4 * 150 * 150
    mom = stats.barycenter_moment_trajectory(params, k_v, reps_v, args.seed + 1)
    envelope = stats.variance_growth_bound(params, mom.record_steps)
    lim = mom.record_steps <= 4 * 150 * 150
    ok &= _check(
        "squared-deviation growth envelope",
        bool(np.all(mom.mean_sq[lim] <= 1.25 * envelope[lim])),
        f"max ratio {(mom.mean_sq[lim] / envelope[lim]).max():.3f} (allowed 1.25)",
    )
    ok &= _check(
        "barycenter mean stays centered",
        bool(np.all(np.abs(mom.mean_bary - 0.5) <= 4.0 * mom.se_bary + 1e-12)),
        f"max |mean - 1/2| {np.abs(mom.mean_bary - 0.5).max():.2e}",
    )

    drift = stats.drift_diagnostic_batch(
        params, 0.05, args.seed + 2, 100 if quick else 500, None, rho
    )
    ok &= _check(
        "pre-hitting drift floor",
        drift.increment_mean >= 0.75 * drift.H,
        f"empirical {drift.increment_mean:.3e} vs 0.75*H {0.75 * drift.H:.3e}",
    )
    bound_T = 4 * n4.d * 150.0 ** 2 / rho
    ok &= _check(
        "hitting-time expectation bound",
        drift.mean_hitting_time <= 1.25 * bound_T and drift.censored == 0,
        f"mean T {drift.mean_hitting_time:.3e} vs 1.25*bound {1.25 * bound_T:.3e}",
    )

    params = make_sampler_params(n4, 2000.0)
    dev = stats.deviation_event_frequency(params, 0.2, 20_000, 100 if quick else 500, args.seed + 3)
    ok &= _check(
        "off-diagonal large deviations",
        dev.frequency <= min(dev.bound, 1.0) + dev.se3,
        f"frequency {dev.frequency:.4f} vs bound {dev.bound:.4f}",
    )

    return 0 if ok else 1


# --------------------------------------------------------------------- main

def _add_common(p, *, threads=True, seed=True):
    if threads:
        p.add_argument("--threads", type=int, default=None, help="worker pool size (env GIBBS_LAB_THREADS overrides)")
    if seed:
        p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gibbs-lab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectral", help="print the spectral summary of a network")
    p.add_argument("--network", required=True)
    p.set_defaults(func=_cmd_spectral)

    p = sub.add_parser("truncnorm", help="tabulate truncated-normal moments and quantiles")
    p.add_argument("--sigma", required=True, help="comma-separated scales")
    p.add_argument("--p", required=True, help="comma-separated locations")
    p.add_argument("--u", default=None, help="comma-separated quantile levels")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_truncnorm)

    p = sub.add_parser("sample", help="run replicated chains, dump summaries or paths")
    p.add_argument("--network", required=True)
    p.add_argument("--A", type=float, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--replicas", type=int, default=1)
    p.add_argument("--start", default="half", help="zero|half|one|FILE")
    p.add_argument("--dump-every", type=int, default=None, help="dump full coordinates at this cadence")
    p.add_argument("--record-every", type=int, default=None)
    p.add_argument("--out", required=True, help="output directory")
    _add_common(p)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("mix-estimate", help="coupled extreme walkers: sup-gap trajectories")
    p.add_argument("--network", required=True)
    p.add_argument("--A", type=float, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--replicas", type=int, default=100)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--record-every", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--svg", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_mix_estimate)

    p = sub.add_parser("fig-variance", help="squared barycenter deviation from the centered start")
    p.add_argument("--network", required=True)
    p.add_argument("--A", type=float, required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--replicas", type=int, default=1000)
    p.add_argument("--record-every", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--svg", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_fig_variance)

    p = sub.add_parser("fig-hitting", help="mean corner hitting times over an A sweep")
    p.add_argument("--which", choices=["T", "Tprime"], required=True)
    p.add_argument("--network", required=True)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--replicas", type=int, default=200)
    p.add_argument("--A-list", default=None, help="comma-separated A values")
    p.add_argument("--A-min", type=float, default=40.0)
    p.add_argument("--A-max", type=float, default=240.0)
    p.add_argument("--A-count", type=int, default=8)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--svg", action="store_true")
    _add_common(p)
    p.set_defaults(func=_cmd_fig_hitting)

    p = sub.add_parser("stationary-oracle", help="exact stationary samples by rejection")
    p.add_argument("--network", required=True)
    p.add_argument("--A", type=float, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--out", required=True)
    _add_common(p, threads=False)
    p.set_defaults(func=_cmd_stationary_oracle)

    p = sub.add_parser("verify-bounds", help="run the analytic-bound assertion suite")
    p.add_argument("--quick", action="store_true", help="scaled-down configurations")
    _add_common(p)
    p.set_defaults(func=_cmd_verify_bounds)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GibbsLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
