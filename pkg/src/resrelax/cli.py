"""Command-line interface.

Subcommands:

  rates     rate coefficients and per-transition relaxation rates (CSV)
  shift     energy shift of one level with error diagnostics (JSON)
  evolve    two-level mean-energy trajectory (CSV + JSON sidecar)
  kk-check  dispersion-transform self-test on an analytic Hilbert pair
  sweep     parameter grids in long CSV format

All numeric output is formatted %.12e and emitted in a fixed order, so
identical configs produce byte-identical files.  Files are written to a
temporary name and renamed into place only on success.  Exit codes:
0 success, 2 configuration or usage error, 3 numerical failure.
Set RESRELAX_LOG=debug|info|warning for diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .config import SWEEPABLE_KEYS, RunConfig, parse_config
from .dynamics import (
    StepConfig,
    equilibrium_energy,
    evolve_closed_form,
    evolve_ode,
    fit_decay_rate,
)
from .errors import (
    ConfigError,
    CutoffTooSmall,
    NumericalError,
    ZeroRelaxationRate,
)
from .quadrature import kk_real_from_imag, QuadratureConfig
from .rates import (
    einstein_coefficients,
    gamma_rf,
    gamma_sr,
    rate_table,
    relaxation_rate,
)
from .shifts import compute_shift, delta_sr_relative, lamb_shift_two_level

log = logging.getLogger("resrelax")

_FMT = "%.12e"


def _fmt(x):
    return _FMT % float(x)


def _round_floats(obj):
    """Round floats through the output format so JSON bytes are stable."""
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    if isinstance(obj, float):
        return float(_FMT % obj)
    return obj


def _write_output(path, text):
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".resrelax-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def _json_text(obj):
    return json.dumps(_round_floats(obj), sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# commands

def cmd_rates(cfg: RunConfig, args):
    spec = cfg.system()
    kernel = cfg.kernel()
    qcfg = cfg.quadrature()
    gamma_rows, transition_rows = rate_table(spec, kernel, qcfg)
    rows = []
    for mech, w, val, err in gamma_rows:
        rows.append((mech, "", "", _fmt(w), _fmt(val), _fmt(err)))
    for tr in transition_rows:
        rows.append(("rf", spec.labels[tr.a], spec.labels[tr.b],
                     _fmt(tr.omega_ab), _fmt(tr.rf), _fmt(tr.rf_error)))
        rows.append(("sr", spec.labels[tr.a], spec.labels[tr.b],
                     _fmt(tr.omega_ab), _fmt(tr.sr), _fmt(tr.sr_error)))
    header = ("mechanism", "a", "b", "omega", "gamma_or_Gamma", "err")
    if args.format == "json":
        obj = {
            "gamma": [
                {"mechanism": m, "omega": w, "value": v, "err": e}
                for m, w, v, e in gamma_rows
            ],
            "transitions": [
                {"mechanism": mech, "a": spec.labels[tr.a],
                 "b": spec.labels[tr.b], "omega": tr.omega_ab,
                 "value": val, "err": err}
                for tr in transition_rows
                for mech, val, err in (("rf", tr.rf, tr.rf_error),
                                       ("sr", tr.sr, tr.sr_error))
            ],
        }
        _write_output(args.out, _json_text(obj))
    else:
        _write_output(args.out, _csv(header, rows))
    return 0


def _resolve_level(spec, raw):
    if raw is None:
        return spec.n_levels - 1
    if isinstance(raw, int) and not isinstance(raw, bool):
        if not 0 <= raw < spec.n_levels:
            raise ConfigError("shift.level index %d out of range" % raw)
        return raw
    label = str(raw)
    if label not in spec.labels:
        raise ConfigError(
            "shift.level %r not among labels %s" % (label, list(spec.labels))
        )
    return spec.index_of(label)


def cmd_shift(cfg: RunConfig, args):
    spec = cfg.system()
    kernel = cfg.kernel()
    qcfg = cfg.quadrature()
    if qcfg.omega_cutoff is None:
        raise ConfigError(
            "missing required key quadrature.omega_cutoff (shift integrals "
            "need a frequency cutoff)"
        )
    a = _resolve_level(spec, cfg.get("shift", "level"))
    res = compute_shift(spec, kernel, a, qcfg, method=args.method)
    obj = {
        "level": spec.labels[a],
        "delta_e_rf": res.delta_e_rf,
        "delta_e_sr": res.delta_e_sr,
        "omega_c": res.omega_c,
        "err_quad": res.err_quad,
        "err_cutoff": res.err_cutoff,
        "method": args.method,
    }
    if spec.n_levels == 2:
        dsr_method = "direct" if args.method == "direct" else "kk"
        dsr = delta_sr_relative(spec, kernel, qcfg, method=dsr_method)
        obj["delta_sr_relative"] = dsr.value
        obj["delta_sr_error"] = dsr.error_estimate
    if args.method == "both":
        obj["kk_vs_direct_residual"] = res.detail["kk_vs_direct_residual"]
    if args.format == "csv":
        keys = sorted(obj)
        _write_output(args.out, _csv(
            tuple(keys),
            [tuple(_fmt(obj[k]) if isinstance(obj[k], float) else str(obj[k])
                   for k in keys)],
        ))
    else:
        _write_output(args.out, _json_text(obj))
    return 0


def cmd_evolve(cfg: RunConfig, args):
    spec = cfg.system()
    kernel = cfg.kernel()
    qcfg = cfg.quadrature()
    if spec.n_levels != 2:
        raise ConfigError("evolve requires a two-level system")
    omega_0 = spec.omega_ab(1, 0)
    grf = gamma_rf(kernel, omega_0, spec.g, qcfg)
    gsr = gamma_sr(kernel, omega_0, spec.g, qcfg)
    ein = einstein_coefficients(grf, gsr)
    h0 = cfg.get("evolve", "h0", default=0.5 * omega_0)
    tau_end = cfg.get("evolve", "tau_end")
    if tau_end is None:
        if grf.value <= 0.0:
            raise ZeroRelaxationRate(
                "gamma_rf <= 0: no relaxation timescale; set evolve.tau_end "
                "explicitly"
            )
        tau_end = 5.0 / grf.value
    n_samples = cfg.get("evolve", "n_samples", default=101)
    step = cfg.get("evolve", "step")
    traj = evolve_ode(grf.value, gsr.value, omega_0, h0, tau_end,
                      StepConfig(step=step, n_samples=int(n_samples)))
    h_eq = equilibrium_energy(grf.value, gsr.value, omega_0)
    rows = []
    for state in traj:
        closed = evolve_closed_form(grf.value, gsr.value, omega_0, h0,
                                    state.tau).mean_energy
        rows.append((_fmt(state.tau), _fmt(closed), _fmt(closed),
                     _fmt(state.mean_energy)))
    sidecar = {
        "a_up": ein.a_up,
        "a_down": ein.a_down,
        "a_up_error": ein.a_up_error,
        "a_down_error": ein.a_down_error,
        "equilibrium_energy": h_eq,
        "fitted_decay_rate": fit_decay_rate(traj, h_eq),
        "gamma_rf": grf.value,
        "gamma_rf_error": grf.error_estimate,
        "gamma_sr": gsr.value,
        "gamma_sr_error": gsr.error_estimate,
        "omega_0": omega_0,
        "h0": float(h0),
        "tau_end": float(tau_end),
    }
    text = _csv(("tau", "mean_energy", "closed_form", "ode"), rows)
    _write_output(args.out, text)
    side_text = _json_text(sidecar)
    if args.out is not None:
        _write_output(args.out + ".json", side_text)
    else:
        sys.stdout.write(side_text)
    return 0


def _lorentzian_pair(eta):
    def f_imag(w):
        return -eta / (np.asarray(w) ** 2 + eta * eta)

    def f_real(w):
        w = np.asarray(w)
        return w / (w * w + eta * eta)

    return f_imag, f_real


def cmd_kk_check(cfg, args):
    sec = cfg.section("kk_check") if cfg is not None else {}
    eta = float(sec.get("eta", 0.1))
    if eta <= 0:
        raise ConfigError("kk_check.eta must be positive")
    wc = 250.0 * eta
    qcfg = QuadratureConfig(omega_cutoff=wc)
    f_imag, f_real = _lorentzian_pair(eta)
    points = [s * m * eta for m in (0.5, 2.0, 5.0, 10.0, 20.0)
              for s in (-1.0, 1.0)]
    report_points = []
    max_rel = 0.0
    for w in sorted(points):
        res = kk_real_from_imag(f_imag, w, qcfg)
        exact = float(f_real(w))
        rel = abs(res.value - exact) / abs(exact)
        max_rel = max(max_rel, rel)
        report_points.append({"omega": w, "reconstructed": res.value,
                              "exact": exact, "rel_err": rel,
                              "err_estimate": res.error_estimate})
    zero = kk_real_from_imag(f_imag, 0.0, qcfg)
    # Re f(0) = 0 exactly (odd integrand); compare against the peak 1/2eta.
    zero_rel = abs(zero.value) * 2.0 * eta
    max_rel = max(max_rel, zero_rel)
    obj = {
        "eta": eta,
        "omega_cutoff": wc,
        "points": report_points,
        "max_rel_err": max_rel,
        "zero_point": zero.value,
        "passed": bool(max_rel < 1e-3),
    }
    if cfg is not None and "table" in sec:
        obj["table"] = _kk_check_table(cfg, sec, qcfg)
    _write_output(args.out, _json_text(obj))
    if not obj["passed"]:
        raise NumericalError(
            "dispersion self-test failed: max relative error %.3e >= 1e-3"
            % max_rel
        )
    return 0


def _kk_check_table(cfg, sec, qcfg):
    """Check a user-sampled (omega, re, im) table against its own transform."""
    from scipy.interpolate import CubicSpline

    path = str(sec["table"])
    if not os.path.isabs(path):
        path = os.path.join(os.path.dirname(cfg.path), path)
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    if data.shape[1] < 3:
        raise ConfigError("kk_check.table needs columns omega,re,im")
    if not np.all(np.isfinite(data)):
        raise ConfigError("kk_check.table contains non-finite entries")
    w, re, im = data[:, 0], data[:, 1], data[:, 2]
    if np.any(np.diff(w) <= 0):
        raise ConfigError("kk_check.table omega column must be increasing")
    spline = CubicSpline(w, im)
    table_cfg = QuadratureConfig(omega_cutoff=min(abs(w[0]), abs(w[-1])))
    interior = w[(w > 0.7 * w[0]) & (w < 0.7 * w[-1])]
    probes = interior[:: max(1, interior.size // 7)]
    worst = 0.0
    for p in probes:
        res = kk_real_from_imag(lambda x: spline(np.asarray(x)), float(p),
                                table_cfg)
        k = int(np.argmin(np.abs(w - p)))
        scale = max(abs(re[k]), 1e-12)
        worst = max(worst, abs(res.value - re[k]) / scale)
    return {"path": path, "probes": int(probes.size),
            "max_rel_residual": worst}


_SWEEP_QUANTITIES = ("a_down", "a_up", "einstein_ratio", "gamma_rf",
                     "gamma_sr", "lamb_shift", "relaxation_rate")


def _sweep_point(base_cfg, names, values, quantity):
    overrides = {}
    for name, value in zip(names, values):
        if name in ("omega_0", "g"):
            overrides[("system", name)] = value
        elif name == "omega_cutoff":
            overrides[("quadrature", name)] = value
        else:
            overrides[("reservoir", name)] = value
    cfg = base_cfg.with_overrides(overrides)
    spec = cfg.system()
    kernel = cfg.kernel()
    qcfg = cfg.quadrature()
    if quantity in ("gamma_rf", "gamma_sr", "a_up", "a_down",
                    "einstein_ratio"):
        if spec.n_levels != 2:
            raise ConfigError("sweep quantity %r needs a two-level system"
                              % quantity)
        w0 = spec.omega_ab(1, 0)
        grf = gamma_rf(kernel, w0, spec.g, qcfg)
        if quantity == "gamma_rf":
            return grf.value, grf.error_estimate
        gsr = gamma_sr(kernel, w0, spec.g, qcfg)
        if quantity == "gamma_sr":
            return gsr.value, gsr.error_estimate
        ein = einstein_coefficients(grf, gsr)
        if quantity == "a_up":
            return ein.a_up, ein.a_up_error
        if quantity == "a_down":
            return ein.a_down, ein.a_down_error
        value = ein.ratio
        err = (ein.a_up_error + abs(value) * ein.a_down_error) / ein.a_down
        return value, err
    if quantity == "relaxation_rate":
        res = relaxation_rate(spec, spec.n_levels - 1, kernel, qcfg)
        return res.value, res.error_estimate
    if quantity == "lamb_shift":
        if spec.n_levels != 2:
            raise ConfigError("sweep quantity lamb_shift needs a two-level "
                              "system")
        res = lamb_shift_two_level(kernel, spec.g, spec.omega_ab(1, 0), qcfg)
        return res.value, res.error_estimate
    raise ConfigError(
        "unknown sweep quantity %r (known: %s)"
        % (quantity, ", ".join(_SWEEP_QUANTITIES))
    )


def cmd_sweep(cfg: RunConfig, args):
    sec = cfg.section("sweep")
    quantity = sec.get("quantity")
    if quantity is None:
        raise ConfigError("missing required key sweep.quantity")
    axes = {}
    for key, value in sec.items():
        if key == "quantity":
            continue
        if key not in SWEEPABLE_KEYS:
            raise ConfigError(
                "sweep key %r is not sweepable (allowed: %s)"
                % (key, ", ".join(SWEEPABLE_KEYS))
            )
        if not isinstance(value, (list, tuple)) or not value:
            raise ConfigError("sweep.%s must be a non-empty list" % key)
        axes[key] = sorted(float(v) for v in value)
    if not axes:
        raise ConfigError("sweep section defines no parameter lists")
    names = sorted(axes)
    size = 1
    for name in names:
        size *= len(axes[name])
    if size > 10 ** 6:
        raise ConfigError("sweep grid has %d points (limit 10^6)" % size)
    grid = list(itertools.product(*(axes[n] for n in names)))
    jobs = max(1, args.jobs)
    log.info("sweep: %d points, %d workers", size, jobs)
    if jobs == 1:
        results = [_sweep_point(cfg, names, values, quantity)
                   for values in grid]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_sweep_point, cfg, names, values, quantity)
                       for values in grid]
            results = [f.result() for f in futures]
    rows = []
    for values, (val, err) in zip(grid, results):
        rows.append(tuple(_fmt(v) for v in values)
                    + (quantity, _fmt(val), _fmt(err)))
    header = tuple(names) + ("quantity", "value", "err")
    _write_output(args.out, _csv(header, rows))
    return 0


# ---------------------------------------------------------------------------
# entry point

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="resrelax",
        description="Relaxation rates, Einstein coefficients and radiative "
                    "shifts of a small system coupled to a stationary "
                    "reservoir.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_format):
        p.add_argument("--config", metavar="PATH",
                       help="INI-style run configuration")
        p.add_argument("--out", metavar="PATH",
                       help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"),
                       default=default_format)

    p = sub.add_parser("rates", help="rate coefficients and transition rates")
    common(p, "csv")
    p = sub.add_parser("shift", help="energy shift of one level")
    common(p, "json")
    p.add_argument("--method", choices=("kk", "direct", "both"), default="kk")
    p = sub.add_parser("evolve", help="two-level mean-energy trajectory")
    common(p, "csv")
    p = sub.add_parser("kk-check", help="dispersion-transform self-test")
    common(p, "json")
    p = sub.add_parser("sweep", help="parameter-grid scan")
    common(p, "csv")
    p.add_argument("--jobs", type=int, default=1, metavar="N",
                   help="concurrent grid evaluations")
    return parser


def _setup_logging():
    level_name = os.environ.get("RESRELAX_LOG", "").strip().lower()
    levels = {"debug": logging.DEBUG, "info": logging.INFO,
              "warning": logging.WARNING, "error": logging.ERROR}
    logging.basicConfig(
        stream=sys.stderr,
        level=levels.get(level_name, logging.WARNING),
        format="resrelax %(levelname)s: %(message)s",
    )


def main(argv=None):
    _setup_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    needs_config = args.command != "kk-check"
    try:
        if args.config is not None:
            cfg = parse_config(args.config)
        elif needs_config:
            raise ConfigError("--config is required for %r" % args.command)
        else:
            cfg = None
        dispatch = {
            "rates": cmd_rates,
            "shift": cmd_shift,
            "evolve": cmd_evolve,
            "kk-check": cmd_kk_check,
            "sweep": cmd_sweep,
        }
        return dispatch[args.command](cfg, args)
    except CutoffTooSmall as exc:
        log.debug("cutoff failure", exc_info=True)
        sys.stderr.write(
            "resrelax: numerical failure: %s\n"
            "  (increase quadrature.omega_cutoff above every transition "
            "frequency)\n" % exc
        )
        return 3
    except NumericalError as exc:
        log.debug("numerical failure", exc_info=True)
        sys.stderr.write("resrelax: numerical failure: %s\n" % exc)
        return 3
    except ConfigError as exc:
        log.debug("config failure", exc_info=True)
        sys.stderr.write("resrelax: config error: %s\n" % exc)
        return 2
    except OSError as exc:
        sys.stderr.write("resrelax: i/o error: %s\n" % exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
