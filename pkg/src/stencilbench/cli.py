"""Command-line entry point.

Subcommands: simulate, bench, autotune, energy, occupancy, mandelbrot,
portlint.  Configuration is flat "key = value" INI text ([run] section);
a simulation run log is itself a valid config that reproduces the run
bitwise.  Exit codes: 0 success, 1 warnings, 2 usage/config error,
3 numerical failure (CFL/positivity).

Environment: STENCILBENCH_THREADS caps block-level parallelism inside a
launch; STENCILBENCH_BACKEND forces the kernel backend (python|compiled).
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
import time

import numpy as np

from . import backends, bench, fields_io, mandelbrot, occupancy as occ, portlint, power
from .errors import CflError, ConfigError, LaunchError, StencilBenchError, TraceError
from .execmodel import BlockConfig, LaunchSpec, TrafficStats
from .grid import (CENTERED, STAGGERED, Bathymetry, GridGeometry, SimParams, SimState,
                   auto_dt, init_state, total_mass)
from .schemes import ctcs, hires, linear

EXIT_OK = 0
EXIT_WARNINGS = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

SCHEMES = ("linear", "nonlinear", "hires")


def _fail(msg: str, code: int = EXIT_USAGE) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


# --- workload construction -----------------------------------------------------

def _smooth(field: np.ndarray, passes: int = 8) -> np.ndarray:
    """Separable box smoothing with wrap-around (keeps fields periodic)."""
    out = field.astype(np.float64)
    for _ in range(passes):
        out = (np.roll(out, 1, 0) + out + np.roll(out, -1, 0)) / 3.0
        out = (np.roll(out, 1, 1) + out + np.roll(out, -1, 1)) / 3.0
    return out


def make_bathymetry(cfg: dict, geometry: GridGeometry) -> Bathymetry:
    spec = cfg["bathy"]
    seed = int(cfg["seed"])
    ny1, nx1 = geometry.ny + 1, geometry.nx + 1
    if spec.startswith("flat"):
        depth = float(spec.split(":")[1]) if ":" in spec else float(cfg["depth"])
        h_int = np.full((ny1, nx1), depth, dtype=np.float64)
    elif spec.startswith("random-smooth"):
        parts = spec.split(":")
        mean = float(parts[1]) if len(parts) > 1 else float(cfg["depth"])
        amp = float(parts[2]) if len(parts) > 2 else 0.2 * mean
        rng = np.random.default_rng(seed + 1)
        h_int = mean + _smooth(rng.uniform(-1.0, 1.0, (ny1, nx1))) * (amp / 0.2)
        h_int = np.clip(h_int, 0.2 * mean, None)
    else:
        raise ConfigError(f"unknown bathy spec {spec!r} (flat[:D] | random-smooth[:MEAN[:AMP]])")
    return Bathymetry.from_interior(h_int.astype(np.float32), geometry, cfg["boundary"])


def make_initial_fields(cfg: dict, geometry: GridGeometry):
    nx, ny = geometry.nx, geometry.ny
    amp = float(cfg["amplitude"])
    kind = cfg["init"]
    z = np.zeros((ny, nx), dtype=np.float32)
    if kind == "rest":
        return z, z.copy(), z.copy()
    if kind == "dambreak":
        x = np.arange(nx) - (nx - 1) / 2.0
        y = np.arange(ny) - (ny - 1) / 2.0
        r2 = (x[None, :] ** 2 + y[:, None] ** 2) / max(1.0, (min(nx, ny) / 6.0) ** 2)
        return (amp * np.exp(-r2)).astype(np.float32), z.copy(), z.copy()
    if kind == "wave":
        x = (np.arange(nx) + 0.5) / nx
        eta = amp * np.cos(2.0 * np.pi * x)
        return np.tile(eta, (ny, 1)).astype(np.float32), z.copy(), z.copy()
    if kind == "random":
        rng = np.random.default_rng(int(cfg["seed"]))
        eta = _smooth(rng.uniform(-1.0, 1.0, (ny, nx))) * amp
        return eta.astype(np.float32), z.copy(), z.copy()
    if kind == "file":
        path = cfg["init_file"]
        if not path:
            raise ConfigError("init = file needs init_file = <path>")
        if path.endswith(".csv"):
            eta = fields_io.read_field_csv(path)
            return eta, np.zeros_like(eta), np.zeros_like(eta)
        fields = fields_io.read_fields(path)
        if len(fields) == 1:
            return fields[0], np.zeros_like(fields[0]), np.zeros_like(fields[0])
        if len(fields) != 3:
            raise ConfigError(f"{path}: expected 1 or 3 fields, found {len(fields)}")
        return fields
    raise ConfigError(f"unknown init {kind!r} (rest|dambreak|wave|random|file)")


RUN_DEFAULTS = {
    "scheme": "hires",
    "variant": "fused",
    "stage": "0",
    "nx": "64", "ny": "64",
    "dx": "100.0", "dy": "100.0",
    "g": "9.81", "f": "0.0",
    "dt": "auto",
    "boundary": "periodic",
    "block_w": "16", "block_h": "16",
    "steps": "100",
    "math": "precise",
    "init": "dambreak",
    "init_file": "",
    "seed": "0",
    "depth": "10.0",
    "bathy": "flat",
    "amplitude": "0.1",
}


def load_run_config(path: str | None, overrides: dict) -> dict:
    cfg = dict(RUN_DEFAULTS)
    if path:
        cp = configparser.ConfigParser()
        read = cp.read(path)
        if not read:
            raise ConfigError(f"config file {path!r} not found")
        if "run" not in cp:
            raise ConfigError(f"{path}: missing [run] section")
        for key, val in cp["run"].items():
            if key not in RUN_DEFAULTS:
                raise ConfigError(f"{path}: unknown key {key!r}")
            cfg[key] = val
    for key, val in overrides.items():
        if val is not None:
            cfg[key] = str(val)
    if cfg["scheme"] not in SCHEMES:
        raise ConfigError(f"scheme must be one of {SCHEMES}")
    return cfg


def build_run(cfg: dict):
    """Geometry, bathymetry, params, initial state, and a step closure."""
    scheme = cfg["scheme"]
    halo = 1 if scheme == "nonlinear" else 2
    geometry = GridGeometry(int(cfg["nx"]), int(cfg["ny"]),
                            float(cfg["dx"]), float(cfg["dy"]), halo=halo)
    bathy = make_bathymetry(cfg, geometry)
    if cfg["dt"] == "auto":
        dt = auto_dt(scheme, geometry, bathy, float(cfg["g"]))
    else:
        dt = float(cfg["dt"])
    params = SimParams(g=float(cfg["g"]), f=float(cfg["f"]), dt=dt,
                       boundary=cfg["boundary"])
    eta0, hu0, hv0 = make_initial_fields(cfg, geometry)
    layout = CENTERED if scheme == "hires" else STAGGERED
    state = init_state(geometry, bathy, eta0, hu0, hv0, params,
                       two_levels=(scheme == "nonlinear"), layout=layout)

    def step(st: SimState, spec: LaunchSpec, backend=None):
        if scheme == "linear":
            return linear.step_linear(st, params, bathy, spec, cfg["variant"], backend=backend)
        if scheme == "nonlinear":
            return ctcs.step_ctcs(st, params, bathy, spec, cfg["variant"], backend=backend)
        return hires.rk2_step(st, params, bathy, spec, int(cfg["stage"]), backend=backend)

    cfg_resolved = dict(cfg)
    cfg_resolved["dt"] = repr(dt)
    return geometry, bathy, params, state, step, cfg_resolved


def write_run_log(path, cfg: dict) -> None:
    cp = configparser.ConfigParser()
    cp["run"] = cfg
    with open(path, "w") as fh:
        fh.write("# stencilbench run log; reusable via --config\n")
        cp.write(fh)


# --- subcommands ----------------------------------------------------------------

def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI config ([run] section); flags override it")
    p.add_argument("--scheme", choices=SCHEMES)
    p.add_argument("--variant", choices=("fused", "three_kernel"),
                   help="launch variant for the finite-difference schemes")
    p.add_argument("--stage", type=int, choices=range(7),
                   help="shared-memory optimization stage for the hires scheme")
    p.add_argument("--nx", type=int)
    p.add_argument("--ny", type=int)
    p.add_argument("--dx", type=float)
    p.add_argument("--dy", type=float)
    p.add_argument("--g", type=float, dest="g")
    p.add_argument("--f", type=float, dest="f")
    p.add_argument("--dt", help='time step in seconds or "auto" (CFL-stable)')
    p.add_argument("--boundary", choices=("periodic", "closed-wall"))
    p.add_argument("--block", nargs=2, type=int, metavar=("W", "H"))
    p.add_argument("--steps", type=int)
    p.add_argument("--math", choices=("precise", "fast"))
    p.add_argument("--init", choices=("rest", "dambreak", "wave", "random", "file"))
    p.add_argument("--init-file", dest="init_file")
    p.add_argument("--seed", type=int, help="64-bit seed for random fields (default 0)")
    p.add_argument("--depth", type=float)
    p.add_argument("--bathy", help="flat[:DEPTH] | random-smooth[:MEAN[:AMP]]")
    p.add_argument("--amplitude", type=float)


def _overrides(args) -> dict:
    keys = ("scheme", "variant", "stage", "nx", "ny", "dx", "dy", "g", "f", "dt",
            "boundary", "steps", "math", "init", "init_file", "seed", "depth",
            "bathy", "amplitude")
    ov = {k: getattr(args, k, None) for k in keys}
    if getattr(args, "block", None):
        ov["block_w"], ov["block_h"] = args.block
    return ov


def _spec_for(cfg: dict, geometry: GridGeometry) -> LaunchSpec:
    block = BlockConfig(int(cfg["block_w"]), int(cfg["block_h"]))
    return LaunchSpec.for_domain(block, geometry.nx, geometry.ny, math_mode=cfg["math"])


def cmd_simulate(args) -> int:
    cfg = load_run_config(args.config, _overrides(args))
    geometry, bathy, params, state, step, resolved = build_run(cfg)
    spec = _spec_for(cfg, geometry)
    steps = int(cfg["steps"])
    os.makedirs(args.out, exist_ok=True)
    m0 = total_mass(state, geometry)
    t0 = time.perf_counter()
    stats = TrafficStats()
    for _ in range(steps):
        state, st = step(state, spec)
        stats = stats.merged_with(st) if stats.launches else st
    wall = time.perf_counter() - t0
    eta = state.interior("eta")
    if not np.all(np.isfinite(eta)):
        return _fail("simulation produced non-finite values", EXIT_NUMERICAL)
    if not np.all(eta + bathy.h_mid[geometry.interior] > 0):
        return _fail("positivity lost: eta + H <= 0 somewhere", EXIT_NUMERICAL)
    m1 = total_mass(state, geometry)
    final = os.path.join(args.out, "final.swf1")
    fields_io.write_fields(final, [state.interior(n) for n in ("eta", "hu", "hv")])
    write_run_log(os.path.join(args.out, "runlog.ini"), resolved)
    with open(os.path.join(args.out, "traffic.csv"), "w") as fh:
        fh.write(TrafficStats.CSV_HEADER + "\n" + stats.csv_row() + "\n")
    drift = abs(m1 - m0) / abs(m0) if m0 else abs(m1 - m0)
    print(f"scheme={cfg['scheme']} steps={steps} t={state.t:.6g}s "
          f"wall={wall:.3f}s mcells/s={geometry.nx * geometry.ny * steps / wall / 1e6:.3f} "
          f"mass_drift={drift:.3e}")
    print(f"wrote {final}")
    return EXIT_OK


def _run_fn_builder(cfg, geometry, state, step, backend=None):
    def run_fn(block: BlockConfig) -> TrafficStats:
        spec = LaunchSpec.for_domain(block, geometry.nx, geometry.ny, math_mode=cfg["math"])
        st = state
        agg = None
        for _ in range(int(cfg["steps"])):
            st, s = step(st, spec, backend=backend)
            agg = s if agg is None else agg.merged_with(s)
        return agg
    return run_fn


def cmd_bench(args) -> int:
    cfg = load_run_config(args.config, _overrides(args))
    geometry, bathy, params, state, step, _ = build_run(cfg)
    label = cfg["variant"] if cfg["scheme"] != "hires" else f"stage{cfg['stage']}"
    block = BlockConfig(int(cfg["block_w"]), int(cfg["block_h"]))
    if args.compare_backends:
        records = bench.compare_backends(
            lambda be: _run_fn_builder(cfg, geometry, state, step, backend=be),
            block, backends.BACKENDS, scheme=cfg["scheme"], variant=label,
            nx=geometry.nx, ny=geometry.ny, steps=int(cfg["steps"]),
            warmup=args.warmup, reps=args.reps)
    else:
        records, _best = bench.autotune(
            _run_fn_builder(cfg, geometry, state, step), [block],
            scheme=cfg["scheme"], variant=label, nx=geometry.nx, ny=geometry.ny,
            steps=int(cfg["steps"]), warmup=args.warmup, reps=args.reps)
    print(bench.RESULTS_HEADER)
    for rec in records:
        print(rec.csv_row())
    if args.out:
        bench.write_results_csv(args.out, records)
    return EXIT_OK


def _parse_power_source(spec: str | None):
    if not spec or spec == "none":
        return None
    if spec.startswith("constant:"):
        return bench.ConstantPower(float(spec.split(":", 1)[1]))
    if spec.startswith("tracedir:"):
        return bench.TraceDirPower(spec.split(":", 1)[1])
    raise ConfigError(f"unknown power source {spec!r} (constant:W | tracedir:PATH)")


def cmd_autotune(args) -> int:
    cfg = load_run_config(args.config, _overrides(args))
    geometry, bathy, params, state, step, _ = build_run(cfg)
    label = cfg["variant"] if cfg["scheme"] != "hires" else f"stage{cfg['stage']}"
    if args.configs:
        configs = []
        for token in args.configs.split(","):
            w, h = token.lower().split("x")
            configs.append(BlockConfig(int(w), int(h)))
    else:
        configs = bench.default_sweep()
    power_source = _parse_power_source(args.power)
    records, best = bench.autotune(
        _run_fn_builder(cfg, geometry, state, step), configs,
        scheme=cfg["scheme"], variant=label, nx=geometry.nx, ny=geometry.ny,
        steps=int(cfg["steps"]), warmup=args.warmup, reps=args.reps,
        metric=args.metric, power_source=power_source)
    os.makedirs(args.out, exist_ok=True)
    bench.write_results_csv(os.path.join(args.out, "sweep.csv"), records)
    hm = bench.Heatmap.from_records(records, args.metric)
    with open(os.path.join(args.out, "heatmap.csv"), "w") as fh:
        fh.write(hm.to_csv())
    with open(os.path.join(args.out, "heatmap.svg"), "w") as fh:
        fh.write(hm.to_svg(label=f"{cfg['scheme']} {label} {args.metric}"))
    feas = sum(1 for r in records if r.feasible)
    print(f"swept {len(records)} configs ({feas} feasible); artifacts in {args.out}")
    if best is None:
        return _fail("no feasible configuration", EXIT_NUMERICAL)
    val = next(r.metric(args.metric) for r in records if r.block == best)
    unit = "Mcells/s" if args.metric == "throughput" else "Mcells/J"
    print(f"best: {best.width}x{best.height} ({val:.4g} {unit})")
    return EXIT_OK


def cmd_energy(args) -> int:
    if args.wattmeter:
        total_wh, duration_s, idle_before, idle_after = args.wattmeter
        reading = power.WattMeterReading(total_wh, duration_s, idle_before, idle_after)
        net, low_res = power.wattmeter_energy(reading)
        print(f"net_joules={net:.6g}")
        print(f"mean_net_watts={net / reading.duration_s:.6g}")
        if low_res:
            print("warning: reading below 100x the 1 Wh display quantum", file=sys.stderr)
        if args.megacells:
            print(f"mcells_per_joule={args.megacells / net:.6g}")
        return EXIT_WARNINGS if low_res else EXIT_OK
    if not args.trace:
        return _fail("energy needs --trace FILE or --wattmeter TOTAL_WH DUR IDLE0 IDLE1")
    with open(args.trace) as fh:
        trace = power.parse_power_trace(fh.read(), args.lead, args.tail)
    base = power.idle_baseline(trace)
    net = power.net_energy(trace, base)
    print(f"samples={len(trace.t_ms)} spacing_ms={trace.nominal_spacing_ms:.3g}")
    print(f"idle_baseline_watts={base:.6g}")
    print(f"net_joules={net:.6g}")
    print(f"mean_net_watts={power.mean_net_watts(trace, base):.6g}")
    if args.megacells:
        print(f"mcells_per_joule={args.megacells / net:.6g}")
    return EXIT_OK


def cmd_occupancy(args) -> int:
    presets = occ.load_presets(args.preset_file)
    if args.list:
        for name in presets:
            print(name)
        return EXIT_OK
    if args.preset not in presets:
        return _fail(f"unknown preset {args.preset!r}; --list shows choices")
    res = occ.KernelResources(args.threads, args.regs, args.shared)
    print(occ.format_table(res, presets[args.preset]))
    return EXIT_OK


def cmd_mandelbrot(args) -> int:
    center = complex(args.center.replace("i", "j"))
    extents = mandelbrot.zoom_workload(center, args.zooms, args.nx, args.ny)
    spec = LaunchSpec.for_domain(BlockConfig(*args.block), args.nx, args.ny)
    records = []
    result = None
    for frame, ext in enumerate(extents):
        t0 = time.perf_counter()
        result = mandelbrot.render(ext, args.max_iter, spec)
        wall = time.perf_counter() - t0
        rec = bench.BenchRecord("mandelbrot", f"zoom{frame}", spec.block,
                                args.nx, args.ny, 1, wall, result.traffic)
        records.append(rec)
        total_iters = int(np.sum(result.iterations, dtype=np.int64))
        print(f"frame {frame}: width={ext.width:.6g} total_iterations={total_iters} "
              f"wall={wall:.3f}s")
    prefix = args.out
    mandelbrot.write_pgm(prefix + ".pgm", result.iterations, args.max_iter)
    mandelbrot.write_smooth_csv(prefix + ".csv", result.smooth)
    bench.write_results_csv(prefix + "_bench.csv", records)
    print(f"wrote {prefix}.pgm, {prefix}.csv, {prefix}_bench.csv")
    return EXIT_OK


def cmd_portlint(args) -> int:
    try:
        with open(args.file) as fh:
            source = fh.read()
    except OSError as exc:
        return _fail(str(exc))
    direction = portlint.TO_OPENCL if args.to == "opencl" else portlint.TO_CUDA
    result = portlint.translate(source, direction)
    diags = list(result.diagnostics)
    if args.check_only:
        diags.extend(portlint.checklist(source, direction))
        diags.sort(key=lambda d: (d.line, d.checklist_item, d.message))
    else:
        sys.stdout.write(result.text)
    for d in diags:
        print(d.format(args.file), file=sys.stderr)
    return portlint.exit_code(diags)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="stencilbench",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--version", action="version", version="%(prog)s 0.1.0")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scheme and write final fields + run log")
    _add_run_args(p)
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("bench", help="time a configuration; CSV records")
    _add_run_args(p)
    p.add_argument("--warmup", type=int, default=3)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--out", help="also write records to this CSV")
    p.add_argument("--compare-backends", action="store_true",
                   help="time the compiled and numpy kernel lanes side by side")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("autotune", help="sweep block sizes; CSV + heatmap + best")
    _add_run_args(p)
    p.add_argument("--configs", help='comma list like "8x8,16x16" (default sweep otherwise)')
    p.add_argument("--metric", choices=bench.METRICS, default="throughput")
    p.add_argument("--power", help="efficiency power source: constant:W | tracedir:PATH")
    p.add_argument("--warmup", type=int, default=3)
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--out", default="autotune_out")
    p.set_defaults(fn=cmd_autotune)

    p = sub.add_parser("energy", help="energy metrics from a power trace or watt meter")
    p.add_argument("--trace", help='power trace CSV with header "t_ms,watts"')
    p.add_argument("--lead", type=float, default=power.DEFAULT_IDLE_WINDOW_S,
                   help="leading idle window, s")
    p.add_argument("--tail", type=float, default=power.DEFAULT_IDLE_WINDOW_S,
                   help="trailing idle window, s")
    p.add_argument("--wattmeter", nargs=4, type=float,
                   metavar=("TOTAL_WH", "DURATION_S", "IDLE_W_BEFORE", "IDLE_W_AFTER"))
    p.add_argument("--megacells", type=float, help="workload size for Mcells/J")
    p.set_defaults(fn=cmd_energy)

    p = sub.add_parser("occupancy", help="analytic occupancy limits table")
    p.add_argument("--preset", default="generic")
    p.add_argument("--preset-file", help="custom device preset INI")
    p.add_argument("--list", action="store_true", help="list preset names")
    p.add_argument("--threads", type=int, default=256)
    p.add_argument("--regs", type=int, default=32)
    p.add_argument("--shared", type=int, default=0)
    p.set_defaults(fn=cmd_occupancy)

    p = sub.add_parser("mandelbrot", help="escape-time benchmark (PGM + smooth CSV)")
    p.add_argument("--center", default="-0.75+0.1i",
                   help="zoom center (chosen workload convention: factor-0.5 zooms "
                        "from the [-2,1]x[-1.5,1.5] window)")
    p.add_argument("--zooms", type=int, default=1)
    p.add_argument("--nx", type=int, default=512)
    p.add_argument("--ny", type=int, default=512)
    p.add_argument("--max-iter", type=int, default=mandelbrot.DEFAULT_MAX_ITERATIONS)
    p.add_argument("--block", nargs=2, type=int, default=(16, 16), metavar=("W", "H"))
    p.add_argument("--out", default="mandelbrot")
    p.set_defaults(fn=cmd_mandelbrot)

    p = sub.add_parser("portlint", help="translate/lint CUDA<->OpenCL kernel source")
    p.add_argument("--to", choices=("opencl", "cuda"), required=True)
    p.add_argument("file")
    p.add_argument("--check-only", action="store_true",
                   help="no translation output; checklist diagnostics only")
    p.set_defaults(fn=cmd_portlint)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except CflError as exc:
        return _fail(str(exc), EXIT_NUMERICAL)
    except (ConfigError, TraceError, LaunchError) as exc:
        return _fail(str(exc))
    except StencilBenchError as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
