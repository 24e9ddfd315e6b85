"""Command line entry point ``darkfilter``.

Exit codes: 0 on success, 1 on a configuration error, 2 when post-selection
fails because the input has no dark component.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from darkfilter import config as cfg
from darkfilter.engines import EngineKind, FilteringFailure
from darkfilter.runner import analysis, run

EXIT_OK, EXIT_CONFIG, EXIT_FILTER = 0, 1, 2


def _add_source(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="path to a JSON experiment config")
    src.add_argument("--preset", choices=cfg.PRESETS, help="bundled experiment")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="darkfilter",
        description="Dark-state entanglement filtering in waveguide networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="sweep z and write CSV, JSON summary and optional figure")
    _add_source(p_run)
    p_run.add_argument("--engine", choices=[e.value for e in EngineKind])
    p_run.add_argument("--zmax", type=float, help="final propagation length (cm)")
    p_run.add_argument("--steps", type=int, help="number of z samples including z=0")
    p_run.add_argument("--bath-sites", type=int, help="bath truncation length")
    p_run.add_argument("--out", help="CSV output path; the summary goes next to it")
    p_run.add_argument("--plot", action="store_true", help="also render a PNG figure")

    p_an = sub.add_parser("analyze", help="print the effective model, spectrum and dark states")
    _add_source(p_an)
    return parser


def _load(args) -> cfg.ExperimentConfig:
    if args.preset:
        doc = cfg.load_preset_dict(args.preset)
    else:
        try:
            with open(args.config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise cfg.ConfigError([f"config: cannot read {args.config}: {exc}"]) from None
        except json.JSONDecodeError as exc:
            raise cfg.ConfigError([f"config: not valid JSON: {exc}"]) from None
    doc = cfg.apply_overrides(
        doc,
        engine=getattr(args, "engine", None),
        z_max=getattr(args, "zmax", None),
        z_steps=getattr(args, "steps", None),
        bath_sites=getattr(args, "bath_sites", None),
        output_path=getattr(args, "out", None),
    )
    return cfg.validate(doc)


def _print_analysis(info: dict) -> None:
    heff = np.array(info["effective_hamiltonian"]["real"]) + 1j * np.array(
        info["effective_hamiltonian"]["imag"]
    )
    with np.printoptions(precision=6, suppress=True, linewidth=120):
        print("effective Hamiltonian:")
        print(heff)
    print(f"k0 = {info['effective_hamiltonian']['k0']:.12g}")
    print(f"spectral factor = {info['effective_hamiltonian']['spectral_factor']:.12g}")
    print("spectrum:")
    for re, im in info["spectrum"]:
        print(f"  {re:+.12f} {im:+.12f}i")
    print(f"APT symmetric: {'yes' if info['apt_symmetric'] else 'no'}")
    certs = info["dark_certificates"]
    print(f"dark certificates: {len(certs)}")
    for c in certs:
        vec = np.array(c["vector_re"]) + 1j * np.array(c["vector_im"])
        re, im = c["eigenvalue"]
        with np.printoptions(precision=6, suppress=True):
            flag = " (defective)" if c["defective"] else ""
            print(f"  eigenvalue {re:.12g}{im:+.3g}i{flag}, vector {vec}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load(args)
        if args.command == "analyze":
            _print_analysis(analysis(config))
            return EXIT_OK
        out = run(config, plot=args.plot)
    except cfg.ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG
    except FilteringFailure as exc:
        print(f"filtering failure: {exc}", file=sys.stderr)
        return EXIT_FILTER
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    final = out.summary["final"]
    print(
        f"{config.engine.value}: z={final['z']:g} purity={final['purity']:.6f} "
        f"d={final['trace_distance']:.3g} P_success={final['success_probability']:.4f}"
    )
    for path in out.files:
        print(f"wrote {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
