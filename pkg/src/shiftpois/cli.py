"""Command-line entry point: simulation, estimation, and benchmarking runs.

Conventions shared by every subcommand:

* configs are JSON files; CLI flags override individual config fields;
* artifacts are written atomically (temp file in place, then rename) into
  --out, and each one embeds the resolved config and seed (JSON reports
  natively, CSV/gnuplot files as a leading ``#`` comment line, PNGs in
  their metadata), so outputs are self-describing;
* nothing time- or path-dependent goes into an artifact, and Monte Carlo
  reductions are indexed by replication, so reruns with any --workers value
  are byte-identical;
* exit codes: 0 ok, 2 config/validation error, 3 level-schedule error,
  4 I/O error, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, figures, meyer
from .bench import monte_carlo_risk, rate_fit, risk_ladder, theoretical_exponent
from .fourier import FourierTable
from .model import (ConfigError, LaplaceShift, SymGammaShift, _check_grid,
                    intensity_from_config, shift_from_config)
from .oracle import AssouadSpec, assouad_intensity, girsanov_log_ratio
from .simulate import (SimSeed, read_events_jsonl, sample_dataset,
                       write_events_jsonl)
from .spectral import (Filter, choose_cutoff, empirical_fourier,
                       linear_estimate, linear_risk_exact)
from .threshold import (ScheduleError, ThresholdParams, adaptive_estimate,
                        clipped_grid, k_tilde, random_threshold,
                        resolution_levels)

__all__ = ["main"]


# ---------------------------------------------------------------------------
# artifact plumbing
# ---------------------------------------------------------------------------


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(f".tmp-{os.getpid()}-{path.name}")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _atomic_write_via(path: Path, writer) -> None:
    """writer(tmp_path) produces the file; keep the extension so format
    sniffing (savefig) still works."""
    tmp = path.with_name(f".tmp-{os.getpid()}-{path.name}")
    writer(tmp)
    os.replace(tmp, path)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_csv(path: Path, header, rows, config_line: str) -> None:
    lines = [f"# {config_line}", ",".join(header)]
    lines.extend(",".join(_fmt(c) if not isinstance(c, str) else c for c in row)
                 for row in rows)
    _atomic_write_text(path, "\n".join(lines) + "\n")


def _write_gnuplot(path: Path, pairs, config_line: str) -> None:
    lines = [f"# {config_line}", "# n mise"]
    lines.extend(f"{_fmt(a)} {_fmt(b)}" for a, b in pairs)
    _atomic_write_text(path, "\n".join(lines) + "\n")


def _write_json(path: Path, doc: dict) -> None:
    _atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _run_doc(command: str, config: dict, seed: int, artifacts, **extra) -> dict:
    doc = {"command": command, "config": config, "seed": seed,
           "version": __version__, "artifacts": sorted(artifacts)}
    doc.update(extra)
    return doc


def _load_config(path) -> dict:
    if path is None:
        raise ConfigError("--config is required for this command")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"top-level config in {path} must be an object")
    return cfg


def _require(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f"config is missing required field {key!r}")
    return cfg[key]


def _resolve_seed(args, cfg: dict) -> int:
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("seed must be a nonnegative integer")
    return seed


def _resolve_workers(args) -> int:
    if getattr(args, "workers", None) is not None:
        w = args.workers
    else:
        env = os.environ.get("SHIFTPOIS_WORKERS")
        w = int(env) if env else (os.cpu_count() or 1)
    if w < 1:
        raise ConfigError("workers must be >= 1")
    return w


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config_line(cfg: dict, seed: int) -> str:
    return json.dumps({"config": cfg, "seed": seed}, sort_keys=True)


def _positive_int(cfg_value, what: str) -> int:
    if not isinstance(cfg_value, int) or isinstance(cfg_value, bool) or cfg_value < 1:
        raise ConfigError(f"{what} must be a positive integer")
    return cfg_value


# ---------------------------------------------------------------------------
# estimate serialization helpers
# ---------------------------------------------------------------------------


def _coefficient_rows(table: FourierTable):
    return [[int(ell), float(v.real), float(v.imag)]
            for ell, v in zip(table.ells, table.values)]


def _estimate_rows(values: np.ndarray):
    G = values.size
    return [[f"{k / G!r}", float(v)] for k, v in enumerate(values)]


def _grid_of(args) -> int:
    try:
        return _check_grid(args.grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _threshold_params(cfg: dict, args) -> ThresholdParams:
    base = cfg.get("threshold", {})
    if not isinstance(base, dict):
        raise ConfigError("threshold config must be an object")
    fields = dict(base)
    if args.gamma is not None:
        fields["gamma"] = args.gamma
    if args.delta is not None:
        fields["delta_offset"] = args.delta
    if args.clip:
        fields["clip_negative"] = True
    if args.levels is not None:
        fields["levels"] = tuple(args.levels)
    elif "levels" in fields and fields["levels"] is not None:
        fields["levels"] = tuple(fields["levels"])
    try:
        return ThresholdParams(**fields)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad threshold parameters: {exc}") from exc


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    intensity = intensity_from_config(_require(cfg, "intensity"))
    g = shift_from_config(_require(cfg, "shift"))
    n = _positive_int(_require(cfg, "n"), "n")
    seed = _resolve_seed(args, cfg)
    data = sample_dataset(intensity, g, n, SimSeed(seed))
    out = _outdir(args)
    _atomic_write_via(out / "events.jsonl",
                      lambda p: write_events_jsonl(data, p, keep_shifts=args.keep_shifts))
    _write_json(out / "run.json",
                _run_doc("simulate", cfg, seed, ["events.jsonl", "run.json"],
                         n=n, total_events=data.total_events,
                         keep_shifts=bool(args.keep_shifts)))
    print(f"simulate: {n} trajectories, {data.total_events} events -> {out}")
    return 0


def _cmd_estimate(args) -> int:
    cfg = _load_config(args.config)
    g = shift_from_config(_require(cfg, "shift"))
    data = read_events_jsonl(args.data)
    params = _threshold_params(cfg, args)
    G = _grid_of(args)
    table, diag = adaptive_estimate(data, g, params)
    values = clipped_grid(table, G) if params.clip_negative else table.grid_values(G)
    out = _outdir(args)
    seed = _resolve_seed(args, cfg)
    cfg_line = _config_line(cfg, seed)
    _write_csv(out / "coefficients.csv", ["ell", "re", "im"],
               _coefficient_rows(table), cfg_line)
    _write_csv(out / "estimate.csv", ["t", "value"], _estimate_rows(values), cfg_line)
    wavelet_rows = []
    thresholds = {j: s for j, s in zip(range(diag.j0, diag.j1 + 1), diag.thresholds)}
    for kind, j, k, value in diag.coefficients.rows():
        s_j = thresholds.get(j) if kind == "detail" else None
        kept = 1 if (kind == "scaling" or value != 0.0) else 0
        wavelet_rows.append([kind, int(j), int(k), float(value),
                             s_j if s_j is not None else "", kept])
    _write_csv(out / "wavelet.csv", ["type", "j", "k", "value", "threshold", "kept"],
               wavelet_rows, cfg_line)
    _write_json(out / "diagnostics.json", diag.to_dict())
    _atomic_write_via(out / "estimate.png",
                      lambda p: figures.save_estimate_curve(
                          np.arange(G) / G, values, p, meta=cfg_line))
    artifacts = ["coefficients.csv", "estimate.csv", "wavelet.csv",
                 "diagnostics.json", "estimate.png", "run.json"]
    _write_json(out / "run.json",
                _run_doc("estimate", cfg, seed, artifacts, grid=G,
                         diagnostics=diag.to_dict()))
    kept = ", ".join(f"j={j}: {k}/{m}" for j, k, m in
                     zip(range(diag.j0, diag.j1 + 1), diag.kept, diag.level_sizes))
    print(f"estimate: n={data.n}, levels ({diag.j0},{diag.j1}), kept {kept} -> {out}")
    return 0


def _cmd_linear_estimate(args) -> int:
    cfg = _load_config(args.config)
    g = shift_from_config(_require(cfg, "shift"))
    data = read_events_jsonl(args.data)
    cutoff = args.cutoff if args.cutoff is not None else cfg.get("cutoff")
    s = args.s if args.s is not None else cfg.get("s")
    if cutoff is None and s is None:
        raise ConfigError("need --cutoff M or --s S (or the config fields)")
    if cutoff is None:
        cutoff = choose_cutoff(data.n, float(s), g.ill_posedness)
    elif not isinstance(cutoff, int) or cutoff < 0:
        raise ConfigError("cutoff must be a nonnegative integer")
    G = _grid_of(args)
    table = linear_estimate(data, g, cutoff)
    values = table.grid_values(G)
    out = _outdir(args)
    seed = _resolve_seed(args, cfg)
    cfg_line = _config_line(cfg, seed)
    _write_csv(out / "coefficients.csv", ["ell", "re", "im"],
               _coefficient_rows(table), cfg_line)
    _write_csv(out / "estimate.csv", ["t", "value"], _estimate_rows(values), cfg_line)
    _atomic_write_via(out / "estimate.png",
                      lambda p: figures.save_estimate_curve(
                          np.arange(G) / G, values, p, meta=cfg_line))
    artifacts = ["coefficients.csv", "estimate.csv", "estimate.png", "run.json"]
    _write_json(out / "run.json",
                _run_doc("linear-estimate", cfg, seed, artifacts,
                         cutoff=int(cutoff), grid=G))
    print(f"linear-estimate: n={data.n}, cutoff M={cutoff} -> {out}")
    return 0


def _bench_design(args):
    cfg = _load_config(args.config)
    intensity = intensity_from_config(_require(cfg, "intensity"))
    g = shift_from_config(_require(cfg, "shift"))
    estimator = _require(cfg, "estimator")
    if not isinstance(estimator, dict):
        raise ConfigError("estimator must be an object")
    ns = _require(cfg, "ns")
    if not isinstance(ns, list) or not ns:
        raise ConfigError("ns must be a nonempty list of sample sizes")
    ns = [_positive_int(v, "every n in ns") for v in ns]
    R = _positive_int(_require(cfg, "R"), "R")
    if R < 2:
        raise ConfigError("R must be >= 2 for standard errors")
    seed = _resolve_seed(args, cfg)
    return cfg, intensity, g, estimator, ns, R, seed


def _cmd_risk_bench(args) -> int:
    cfg, intensity, g, estimator, ns, R, seed = _bench_design(args)
    workers = _resolve_workers(args)
    report = risk_ladder(intensity, g, estimator, ns, R, seed, workers=workers)
    out = _outdir(args)
    cfg_line = _config_line(cfg, seed)
    rows = [[r.n, r.R, r.mise_mean, r.mise_stderr, r.exact_risk]
            for r in report.rows]
    _write_csv(out / "risk.csv", ["n", "R", "mise_mean", "mise_stderr", "exact_risk"],
               rows, cfg_line)
    _write_gnuplot(out / "risk_gnuplot.dat",
                   [(r.n, r.mise_mean) for r in report.rows], cfg_line)
    _atomic_write_via(out / "risk.png",
                      lambda p: figures.save_risk_curves(
                          [r.to_dict() for r in report.rows], p, meta=cfg_line))
    doc = report.to_dict()
    doc["seed"] = seed
    _write_json(out / "report.json", doc)
    artifacts = ["risk.csv", "risk_gnuplot.dat", "risk.png", "report.json", "run.json"]
    _write_json(out / "run.json", _run_doc("risk-bench", cfg, seed, artifacts))
    for r in report.rows:
        extra = ""
        if r.exact_risk is not None:
            gap = abs(r.mise_mean - r.exact_risk) / r.mise_stderr
            extra = f"  exact {r.exact_risk:.6g} ({gap:.2f} se away)"
        print(f"risk-bench: n={r.n:>7} mise {r.mise_mean:.6g} "
              f"+- {r.mise_stderr:.2g}{extra}")
    return 0


def _cmd_rate_check(args) -> int:
    cfg, intensity, g, estimator, ns, R, seed = _bench_design(args)
    if len(ns) < 3:
        raise ConfigError("rate-check needs at least 3 sample sizes")
    workers = _resolve_workers(args)
    report = risk_ladder(intensity, g, estimator, ns, R, seed, workers=workers)
    means = [r.mise_mean for r in report.rows]
    fit = rate_fit(ns, means)
    out = _outdir(args)
    cfg_line = _config_line(cfg, seed)
    _write_csv(out / "rate.csv", ["n", "R", "mise_mean", "mise_stderr"],
               [[r.n, r.R, r.mise_mean, r.mise_stderr] for r in report.rows],
               cfg_line)
    _write_gnuplot(out / "rate_gnuplot.dat", list(zip(ns, means)), cfg_line)
    _atomic_write_via(out / "rate.png",
                      lambda p: figures.save_rate_fit(
                          ns, means, fit.slope, fit.intercept, p, meta=cfg_line))
    doc = report.to_dict()
    doc["seed"] = seed
    doc["fit"] = fit.to_dict()
    s = estimator.get("s")
    if isinstance(s, (int, float)):
        doc["theoretical_slope"] = -theoretical_exponent(float(s), g.ill_posedness)
    _write_json(out / "report.json", doc)
    artifacts = ["rate.csv", "rate_gnuplot.dat", "rate.png", "report.json", "run.json"]
    _write_json(out / "run.json", _run_doc("rate-check", cfg, seed, artifacts))
    print(f"rate-check: slope {fit.slope:+.4f} vs ln n "
          f"({fit.slope_effective:+.4f} vs ln(n/ln n))")
    if "theoretical_slope" in doc:
        print(f"rate-check: theoretical slope {doc['theoretical_slope']:+.4f}")
    return 0


def _cmd_lower_bound_demo(args) -> int:
    if args.D < 0 or args.D > 4:
        raise ConfigError("demo supports 0 <= D <= 4")
    if args.hypotheses < 1:
        raise ConfigError("need at least one hypothesis")
    seed = args.seed if args.seed is not None else 0
    if seed < 0:
        raise ConfigError("seed must be a nonnegative integer")
    workers = _resolve_workers(args)
    g = LaplaceShift(args.sigma) if args.nu == 2 else SymGammaShift(args.nu, args.sigma)
    c_psi = 1.1 * meyer.sup_bound_constant(8, trials=64, seed=20210)
    c = args.A / (2.0 + c_psi)
    size = 1 << args.D
    rng = SimSeed(seed, 1_000_000).generator()
    omegas = [np.zeros(size, dtype=int), np.ones(size, dtype=int)]
    while len(omegas) < args.hypotheses:
        omegas.append(rng.integers(0, 2, size))
    omegas = omegas[:args.hypotheses]
    estimator = {"kind": "linear_auto", "s": args.s}
    cfg = {"D": args.D, "s": args.s, "nu": args.nu, "n": args.n, "A": args.A,
           "sigma": args.sigma, "R": args.R, "hypotheses": args.hypotheses,
           "c": c, "c_psi": c_psi, "estimator": estimator}
    cfg_line = _config_line(cfg, seed)
    rows = []
    labels, means, errs = [], [], []
    for h, omega in enumerate(omegas):
        spec = AssouadSpec(D=args.D, omega=tuple(int(b) for b in omega),
                           s=args.s, c=c, A=args.A, c_psi=c_psi)
        truth = assouad_intensity(spec)
        row = monte_carlo_risk(truth, g, estimator, args.n, args.R, seed,
                               workers=workers, stream_offset=h * args.R)
        bits = "".join(str(b) for b in spec.omega)
        rows.append([h, bits, row.mise_mean, row.mise_stderr])
        labels.append(bits)
        means.append(row.mise_mean)
        errs.append(row.mise_stderr)
    out = _outdir(args)
    _write_csv(out / "hypotheses.csv",
               ["hypothesis", "omega", "mise_mean", "mise_stderr"], rows, cfg_line)
    _atomic_write_via(out / "lower_bound.png",
                      lambda p: figures.save_hypothesis_risks(
                          labels, means, errs, p, meta=cfg_line))
    xi = c * 2.0 ** (-args.D * (args.s + 0.5))
    m = c * 2.0 ** (-args.D * args.s)
    _write_json(out / "run.json",
                _run_doc("lower-bound-demo", cfg, seed,
                         ["hypotheses.csv", "lower_bound.png", "run.json"],
                         xi=xi, mass_scale=m, n_mass_scale_cubed=args.n * m ** 3))
    worst = max(means)
    print(f"lower-bound-demo: {len(omegas)} hypotheses, D={args.D}, "
          f"xi={xi:.4g}, worst-case mise {worst:.6g} -> {out}")
    return 0


# ---------------------------------------------------------------------------
# selftest: fast executable summary of the library invariants
# ---------------------------------------------------------------------------


class _UnitShift:
    """Degenerate no-shift operator (gamma identically 1) for identities."""

    kind = "unit"
    ill_posedness = 1.0
    sup_norm = 1.0

    def gamma_many(self, ells):
        return np.ones(np.asarray(ells).shape)

    def config(self):
        return {"kind": "unit"}


def _check_fourier_round_trip():
    rng = np.random.default_rng(7)
    ells = np.arange(-8, 9)
    half = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    vals = np.concatenate([np.conj(half)[::-1], [rng.standard_normal() + 0j], half])
    table = FourierTable(ells, vals)
    grid = table.grid_values(64)
    direct = table.eval_at(np.arange(64) / 64)
    assert np.max(np.abs(grid - direct)) < 1e-12


def _check_meyer_orthonormal():
    atoms = [meyer.scaling_band_table(3, np.eye(8)[k]) for k in range(8)]
    atoms += [meyer.detail_band_table(3, np.eye(8)[k]) for k in range(8)]
    atoms += [meyer.detail_band_table(4, np.eye(16)[k]) for k in range(16)]
    L = max(t.band_max for t in atoms)
    A = np.stack([t.dense(L) for t in atoms])
    gram = A @ A.conj().T
    assert np.max(np.abs(gram - np.eye(len(atoms)))) < 1e-10


def _check_meyer_round_trip():
    rng = np.random.default_rng(11)
    coeffs = meyer.WaveletCoefficients(
        j0=2, j1=4, scaling=rng.standard_normal(4),
        detail=[rng.standard_normal(4), rng.standard_normal(8),
                rng.standard_normal(16)])
    table = meyer.synthesize(coeffs)
    back = meyer.analyze(table, 2, 4)
    err = np.max(np.abs(back.scaling - coeffs.scaling))
    for a, b in zip(back.detail, coeffs.detail):
        err = max(err, np.max(np.abs(a - b)))
    assert err < 1e-9


def _check_empirical_fourier():
    from .model import TrajectorySet
    data = TrajectorySet.from_lists([[0.1, 0.4], [0.7]])
    stats = empirical_fourier(data, 3)
    for ell in range(-3, 4):
        direct = sum(np.exp(-2j * np.pi * ell * t) for t in [0.1, 0.4, 0.7]) / 2
        assert abs(stats.y(ell) - direct) < 1e-12


def _check_risk_identity():
    from .model import CosineIntensity
    risk = linear_risk_exact(CosineIntensity(2.0, 1.0), _UnitShift(),
                             Filter.projection(0), 64)
    assert abs(risk - (0.5 + 2.0 / 64)) < 1e-12


def _check_cutoffs():
    assert choose_cutoff(1024, 1.5, 1.0) == 3
    assert choose_cutoff(10 ** 6, 2.0, 2.0) == 4
    assert choose_cutoff(1, 2.0, 2.0) == 1


def _check_threshold_formulas():
    import math
    counts = np.array([3, 1, 4, 1, 5])
    n, gamma = 5, 2.0
    ln = math.log(n)
    expected = (14 / 5 + 8 * ln / 15
                + math.sqrt(4 * ln * 14 / 25 + 20 * ln ** 2 / 75))
    assert abs(k_tilde(counts, n, gamma) - expected) < 1e-12
    g = LaplaceShift(0.1)
    params = ThresholdParams(gamma=2.0, delta_offset=1.0)
    j, n2 = 3, 1000
    ells = meyer.omega_set(j)
    agam = np.abs(g.gamma_many(ells))
    s2 = 2.0 ** (-j) * np.sum(agam ** -2.0)
    eps = 2.0 ** (-j / 2) * np.sum(agam ** -1.0)
    kt = 3.0
    ln2 = math.log(n2)
    manual = 4 * (math.sqrt(s2 * (2 * gamma * ln2 / n2) * (g.sup_norm * kt + 1.0))
                  + gamma * ln2 / (3 * n2) * eps)
    assert abs(random_threshold(j, n2, params, g, kt) - manual) < 1e-12


def _check_schedule():
    assert resolution_levels(1000, 1.0) == (2, 2)
    try:
        resolution_levels(10, 3.0)
    except ScheduleError:
        pass
    else:
        raise AssertionError("degenerate schedule did not raise")


def _check_simulate_determinism():
    from .model import CosineIntensity
    lam, g = CosineIntensity(2.0, 1.0), LaplaceShift(0.05)
    a = sample_dataset(lam, g, 32, SimSeed(5, 0))
    b = sample_dataset(lam, g, 32, SimSeed(5, 0))
    c = sample_dataset(lam, g, 32, SimSeed(5, 1))
    assert np.array_equal(a.events, b.events) and np.array_equal(a.offsets, b.offsets)
    assert not np.array_equal(a.events, c.events)


def _check_girsanov_trivial():
    mu = FourierTable.zero()
    assert girsanov_log_ratio(np.array([0.1, 0.2]), 1.0, mu) == 0.0
    bump = FourierTable.zero().add_constant(0.7)
    assert abs(girsanov_log_ratio(np.zeros(0), 1.0, bump) + 0.7) < 1e-15


def _check_assouad_geometry():
    c_psi = 1.1 * meyer.sup_bound_constant(8, trials=16, seed=20210)
    spec = AssouadSpec(D=3, omega=(1, 0, 1, 1, 0, 0, 1, 0), s=1.5,
                       c=0.3, A=2.0, c_psi=c_psi)
    truth = assouad_intensity(spec)
    coeffs = meyer.analyze(truth.fourier_table(), 3, 3)
    target = spec.xi * np.array(spec.omega, dtype=float)
    assert np.max(np.abs(coeffs.detail[0] - target)) < 1e-12


def _check_filter_validation():
    try:
        Filter(np.array([0]), np.array([1.5]))
    except ValueError:
        pass
    else:
        raise AssertionError("out-of-range filter weight accepted")


_SELFTEST = [
    ("fourier synthesis round trip", _check_fourier_round_trip),
    ("meyer atoms orthonormal", _check_meyer_orthonormal),
    ("meyer analyze/synthesize round trip", _check_meyer_round_trip),
    ("empirical coefficients match direct sums", _check_empirical_fourier),
    ("exact risk identity (unit operator)", _check_risk_identity),
    ("cutoff selection", _check_cutoffs),
    ("threshold formulas", _check_threshold_formulas),
    ("level schedule", _check_schedule),
    ("simulation determinism", _check_simulate_determinism),
    ("likelihood ratio trivial cases", _check_girsanov_trivial),
    ("hypercube coefficient geometry", _check_assouad_geometry),
    ("filter validation", _check_filter_validation),
]


def _cmd_selftest(args) -> int:
    failures = 0
    results = []
    for name, fn in _SELFTEST:
        try:
            fn()
        except Exception as exc:  # noqa: BLE001 - report and keep going
            failures += 1
            status = "FAIL"
            detail = f" ({exc})" if str(exc) else ""
        else:
            status, detail = "PASS", ""
        results.append({"name": name, "status": status})
        print(f"{status}  {name}{detail}")
    if args.out != ".":
        out = _outdir(args)
        _write_json(out / "selftest.json",
                    {"command": "selftest", "version": __version__,
                     "results": results})
    print(f"selftest: {len(_SELFTEST) - failures}/{len(_SELFTEST)} passed")
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shiftpois",
        description="Intensity estimation for randomly shifted periodic "
                    "Poisson processes.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid=False, workers=False, data=False, config=True):
        if config:
            p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, default=None,
                       help="root seed (overrides config)")
        p.add_argument("--out", default=".", help="output directory")
        if workers:
            p.add_argument("--workers", type=int, default=None,
                           help="parallel workers (default: SHIFTPOIS_WORKERS "
                                "or all cores; results identical regardless)")
        if grid:
            p.add_argument("--grid", type=int, default=1024,
                           help="grid size for the estimate curve (power of 2)")
        if data:
            p.add_argument("--data", required=True,
                           help="events JSON-lines file from `simulate`")

    p = sub.add_parser("simulate", help="draw a dataset and write events.jsonl")
    common(p)
    p.add_argument("--keep-shifts", action="store_true",
                   help="write the latent shifts into the JSON-lines file")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("estimate", help="adaptive thresholding estimate")
    common(p, grid=True, data=True)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--delta", type=float, default=None,
                   help="delta offset inside the threshold radical")
    p.add_argument("--clip", action="store_true",
                   help="clip negative grid values to zero")
    p.add_argument("--levels", type=int, nargs=2, metavar=("J0", "J1"),
                   default=None, help="pin the resolution levels")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("linear-estimate", help="spectral cut-off estimate")
    common(p, grid=True, data=True)
    p.add_argument("--cutoff", type=int, default=None, help="fixed cutoff M")
    p.add_argument("--s", type=float, default=None,
                   help="smoothness for the automatic cutoff")
    p.set_defaults(func=_cmd_linear_estimate)

    p = sub.add_parser("risk-bench", help="Monte Carlo risk table")
    common(p, workers=True)
    p.set_defaults(func=_cmd_risk_bench)

    p = sub.add_parser("rate-check", help="risk ladder plus log-log rate fit")
    common(p, workers=True)
    p.set_defaults(func=_cmd_rate_check)

    p = sub.add_parser("lower-bound-demo",
                       help="per-hypothesis risks over a wavelet-bump cube")
    common(p, workers=True, config=False)
    p.add_argument("--D", type=int, required=True, help="cube level (<= 4)")
    p.add_argument("--s", type=float, required=True, help="smoothness")
    p.add_argument("--nu", type=float, required=True, help="ill-posedness")
    p.add_argument("--n", type=int, required=True, help="trajectories per run")
    p.add_argument("--A", type=float, default=2.0, help="ball radius")
    p.add_argument("--sigma", type=float, default=0.05, help="shift scale")
    p.add_argument("--R", type=int, default=16, help="replications per hypothesis")
    p.add_argument("--hypotheses", type=int, default=8)
    p.set_defaults(func=_cmd_lower_bound_demo)

    p = sub.add_parser("selftest", help="run the built-in invariant suite")
    common(p, config=False)
    p.set_defaults(func=_cmd_selftest)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ScheduleError as exc:
        print(f"schedule error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - map anything else to exit 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
