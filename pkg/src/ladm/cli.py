"""Command-line entry point.

Subcommands:

* ``ladm run``: execute a figure pipeline and write its CSVs;
* ``ladm gen-matrix``: synthesise a clustered-spectrum matrix to disk;
* ``ladm verify``: re-check bound validity on an output directory.

Exit codes: 0 on success, 2 on a bound-validity violation, 1 on error.
``LADM_THREADS`` caps the dense-kernel thread count (applied before the
numerical libraries load).
"""

from __future__ import annotations

import argparse
import os
import sys


def _apply_thread_cap():
    cap = os.environ.get("LADM_THREADS")
    if not cap:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, cap)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ladm")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a figure experiment")
    run.add_argument("--config", help="key-value config file (spectrum + experiment keys)")
    run.add_argument("--preset", choices=[f"fig{i}" for i in range(1, 6)],
                     help="figure preset fig1..fig5")
    run.add_argument("--scale", choices=["desk", "paper"], default="desk")
    run.add_argument("--out", default="ladm_out", help="output directory")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--q-max", type=int, default=None, dest="q_max")

    gen = sub.add_parser("gen-matrix", help="write a synthetic matrix in the binary format")
    gen.add_argument("--config", required=True)
    gen.add_argument("--out", required=True)

    ver = sub.add_parser("verify", help="re-check bound validity on emitted CSVs")
    ver.add_argument("--out", required=True, help="directory holding fig*_plot*.csv files")
    return parser


def _config_to_run(args):
    from pathlib import Path

    from .experiments import ExperimentConfig, preset_config
    from .io import load_spectrum_spec, parse_config

    overrides = {}
    if args.config:
        overrides = parse_config(Path(args.config).read_text())
    if args.preset:
        figure = int(args.preset[3:])
        cfg = preset_config(
            figure,
            scale=args.scale,
            seed=args.seed if args.seed is not None else 0,
            q_max=args.q_max,
            out_dir=args.out,
        )
        if args.config:
            raise SystemExit("use either --preset or --config, not both")
        return cfg
    if not args.config:
        raise SystemExit("ladm run needs --preset or --config")
    from dataclasses import replace

    from .experiments import _DEFAULT_SPLITS
    from .filters import OversamplingSplit
    from .io import spectrum_spec_from_config

    spec = spectrum_spec_from_config(overrides)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    splits = _DEFAULT_SPLITS
    if "splits" in overrides:
        pairs = [p.split(":") for p in overrides["splits"].split(";") if p]
        splits = tuple(OversamplingSplit(int(a), int(b)) for a, b in pairs)
    q_max = args.q_max if args.q_max is not None else int(overrides.get("q_max", "300"))
    return ExperimentConfig(
        spec=spec,
        method=overrides.get("method", "sim"),
        r=int(overrides.get("r", "20")),
        q_max=q_max,
        splits=splits,
        seed=spec.seed,
        scale=overrides.get("scale", args.scale),
        figure=int(overrides.get("figure", "0")),
        out_dir=args.out,
    )


def main(argv=None) -> int:
    _apply_thread_cap()
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            from .experiments import run_figure

            cfg = _config_to_run(args)
            curves = run_figure(cfg)
            violations = curves.violations()
            print(f"fig{cfg.figure}: wrote {len(curves.plots)} plots to {cfg.out_dir} "
                  f"({violations} bound violations)")
            return 2 if violations else 0
        if args.command == "gen-matrix":
            from .io import load_spectrum_spec, write_matrix
            from .spectral import synth_model

            spec = load_spectrum_spec(args.config)
            model, env = synth_model(spec)
            write_matrix(args.out, model.A)
            print(f"wrote {model.n}x{model.n} matrix to {args.out} "
                  f"(delta={env.delta:.3g}, gamma={env.gamma:.3g})")
            return 0
        if args.command == "verify":
            from .experiments import verify_outputs

            checked, violations = verify_outputs(args.out)
            print(f"checked {checked} bound/measured column pairs: {violations} violations")
            return 2 if violations else 0
    except SystemExit:
        raise
    except Exception as exc:  # pragma: no cover - defensive CLI surface
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
