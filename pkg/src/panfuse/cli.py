"""Batch command-line front end.

    panfuse simulate --config sim.json [--out DIR]
    panfuse sharpen  --config run.json [--out DIR]
    panfuse evaluate --config eval.json [--out DIR]

Each command reads a single JSON config, runs headless, and writes its
outputs (binary images, delimited logs, JSON reports and matplotlib
figures) into the output directory. Exit codes: 0 success, 2 config
error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as pfio
from . import metrics, plots
from .cube import HyperCube, PanImage
from .errors import ConfigError, DataError, PanfuseError
from .operators import SensorModel, pan_mix, psf_transfer, convolve_with_transfer, spatial_downsample, upsample_nearest
from .sim import SimScenario, averaging_psf, degrade_hx, degrade_pan, gaussian_psf
from .solver import SolverConfig, run

_UNITS = {
    "q": "resolution factor (dimensionless)",
    "sigma_x": "noise std, image radiometric units",
    "sigma_p": "noise std, image radiometric units",
    "psf.sigma": "high-resolution pixels",
    "gamma": "dimensionless balance in [0, 1]",
    "beta": "dimensionless ADMM penalty",
}


def _load_config(path, allowed, required):
    try:
        with open(path) as fh:
            config = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(config, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(config) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    missing = sorted(set(required) - set(config))
    if missing:
        raise ConfigError(f"missing config keys: {', '.join(missing)}")
    return config


def _build_psf(spec, q):
    if spec is None or spec == "average":
        return averaging_psf(q)
    if isinstance(spec, list):
        return np.asarray(spec, dtype=np.float64)
    if isinstance(spec, dict):
        kind = spec.get("type", "average")
        if kind == "average":
            return averaging_psf(q)
        if kind == "gaussian":
            return gaussian_psf(q, spec.get("sigma"))
        if kind == "delta":
            return np.ones((1, 1))
        raise ConfigError(f"unknown psf type {kind!r}")
    raise ConfigError(f"cannot interpret psf specification {spec!r}")


def _build_model(config, bands):
    q = int(config.get("q", 1))
    g = config.get("g", "uniform")
    if g == "uniform":
        g = np.full(bands, 1.0 / bands)
    else:
        g = np.asarray(g, dtype=np.float64)
        if g.size != bands:
            raise ConfigError(f"g has {g.size} entries but the cube has {bands} bands")
    try:
        return SensorModel(
            q=q,
            psf=_build_psf(config.get("psf"), q),
            g=g,
            sigma_x=np.asarray(config.get("sigma_x", 0.0), dtype=np.float64),
            sigma_p=float(config.get("sigma_p", 0.0)),
        )
    except DataError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid sensor model parameters: {exc}")


def _read_reference(config, key="reference"):
    path = Path(config[key])
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    return pfio.read_cube(path)


def cmd_simulate(config_path, out_dir):
    allowed = {"reference", "q", "psf", "g", "sigma_x", "sigma_p", "seed", "offset"}
    config = _load_config(config_path, allowed, {"reference", "q"})
    reference = _read_reference(config)
    model = _build_model(config, reference.bands)
    offset = tuple(config.get("offset", (0, 0)))
    scenario = SimScenario(reference, model, seed=int(config.get("seed", 0)), offset=offset)
    x = degrade_hx(scenario)
    p = degrade_pan(scenario)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pfio.write_cube(x, out / "x.bin")
    pfio.write_pan(p, out / "p.bin")
    pfio.write_cube(reference, out / "reference.bin")
    manifest = {
        "command": "simulate",
        "reference": str(config["reference"]),
        "q": model.q,
        "psf_shape": list(model.psf.shape),
        "g": model.g.tolist(),
        "sigma_x": model.sigma_x.tolist(),
        "sigma_p": model.sigma_p,
        "seed": scenario.seed,
        "offset": list(offset),
        "units": _UNITS,
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    plots.save_preview_figure(reference, p, out / "preview.png")
    print(f"simulate: wrote x.bin ({x.bands}x{x.height}x{x.width}), p.bin, reference.bin to {out}")
    return 0


def cmd_sharpen(config_path, out_dir):
    allowed = {
        "x", "p", "q", "psf", "g", "sigma_x", "sigma_p",
        "gamma", "beta", "iters", "primal_tol", "eps_rel", "log_every",
        "offset", "radius_inflation", "paper_init",
    }
    config = _load_config(config_path, allowed, {"x", "p", "q"})
    x = _read_reference(config, "x")
    p_path = Path(config["p"])
    if not p_path.exists():
        raise DataError(f"input file not found: {p_path}")
    p = pfio.read_pan(p_path)
    model = _build_model(config, x.bands)
    if (x.height * model.q, x.width * model.q) != (p.height, p.width):
        raise DataError(
            f"panchromatic shape {(p.height, p.width)} does not match "
            f"q={model.q} times cube shape {(x.height, x.width)}"
        )

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    solver_config = SolverConfig(
        gamma=float(config.get("gamma", 0.01)),
        beta=float(config.get("beta", 1000.0)),
        max_iters=int(config.get("iters", 300)),
        primal_tol=float(config.get("primal_tol", 0.0)),
        eps_rel=float(config.get("eps_rel", 1e-8)),
        log_every=int(config.get("log_every", 10)),
        decimation_offset=tuple(config.get("offset", (0, 0))),
        radius_inflation=float(config.get("radius_inflation", 1.0)),
        paper_init=bool(config.get("paper_init", False)),
        log_path=str(out / "convergence.csv"),
    )
    estimate, history = run(x, p, model, solver_config)
    pfio.write_cube(estimate, out / "estimate.bin")
    if history:
        plots.save_convergence_figure(history, out / "convergence.png")
        last = history[-1]
        print(
            f"sharpen: {last['iteration']} iterations, "
            f"objective {last['objective']:.6g}, "
            f"primal residual {last['primal_residual']:.3g}"
        )
    else:
        print("sharpen: 0 iterations requested; wrote the upsampled initialization")
    print(f"sharpen: wrote estimate.bin and convergence logs to {out}")
    return 0


def cmd_evaluate(config_path, out_dir):
    allowed = {"estimate", "reference", "x", "p", "q", "psf", "g", "offset"}
    config = _load_config(config_path, allowed, {"estimate"})
    estimate = _read_reference(config, "estimate")

    report = metrics.QualityReport()
    have_any = False
    p = None
    if "p" in config:
        p = pfio.read_pan(Path(config["p"]))

    if "reference" in config:
        reference = _read_reference(config)
        report.rmse = metrics.rmse(estimate, reference)
        report.ergas = metrics.ergas(estimate, reference, int(config.get("q", 1)))
        report.sam = metrics.sam(estimate, reference)
        have_any = True
    if p is not None:
        report.fcc = metrics.fcc(estimate, p)
        have_any = True
    if "x" in config:
        x = _read_reference(config, "x")
        report.d_lambda = metrics.d_lambda(estimate, x)
        have_any = True
        if p is not None:
            model = _build_model(config, estimate.bands)
            offset = tuple(config.get("offset", (0, 0)))
            transfer = psf_transfer(model.psf, p.height, p.width)
            p_low = PanImage(spatial_downsample(convolve_with_transfer(p.data, transfer), model.q, offset))
            report.d_s = metrics.d_s(estimate, p, p_low, x)
    if not have_any:
        raise ConfigError("nothing to evaluate: provide a reference, a panchromatic image, or measured data")

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.json", "w") as fh:
        fh.write(report.to_json())
        fh.write("\n")
    with open(out / "report.txt", "w") as fh:
        fh.write(report.to_text())
    plots.save_metrics_figure(report.to_dict(), out / "metrics.png")
    print(report.to_text(), end="")
    print(f"evaluate: wrote report.json, report.txt, metrics.png to {out}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(prog="panfuse", description="Constrained variational hyperspectral pan-sharpening")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "sharpen", "evaluate"):
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="path to the JSON configuration")
        cmd.add_argument("--out", default=".", help="output directory (default: current directory)")
    args = parser.parse_args(argv)

    handlers = {"simulate": cmd_simulate, "sharpen": cmd_sharpen, "evaluate": cmd_evaluate}
    try:
        return handlers[args.command](args.config, args.out)
    except PanfuseError as exc:
        print(f"panfuse {args.command}: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
