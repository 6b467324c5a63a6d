"""Command-line workbench.

Exit codes: 0 when the analyzed set decoheres (or a command succeeds),
2 when it does not (or the oracle deviation exceeds its bound), 1 on any
error.
"""

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

from .config import build_lattice, load_config, region_sets_of
from .exceptions import ConfigError, GQMError
from .pathsum import operator_equivalence_oracle
from .report import emit_report, run_analysis

OUTPUT_DIR_ENV = "GQM_OUTPUT_DIR"
ORACLE_BOUND = 1e-9

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_DECOHERENT = 2


def preset_names():
    return sorted(
        p.name[: -len(".json")]
        for p in resources.files("gqm.zoo").iterdir()
        if p.name.endswith(".json")
    )


def preset_text(name):
    return resources.files("gqm.zoo").joinpath(f"{name}.json").read_text(encoding="utf-8")


def _read_config(ref):
    """Config text from a file path, falling back to a preset name."""
    path = Path(ref)
    if path.is_file():
        return path.read_text(encoding="utf-8"), path.stem
    if ref in preset_names():
        return preset_text(ref), ref
    raise FileNotFoundError(f"no config file or preset named {ref!r}")


def _destination(args, cfg, stem, fmt):
    if args.out:
        return Path(args.out)
    out_dir = os.environ.get(OUTPUT_DIR_ENV)
    if cfg.output_path:
        path = Path(cfg.output_path)
        return Path(out_dir) / path if out_dir and not path.is_absolute() else path
    if out_dir:
        return Path(out_dir) / f"{stem}-report.{fmt}"
    return None


def cmd_analyze(args):
    text, stem = _read_config(args.config)
    cfg = load_config(text)
    report = run_analysis(cfg, args.criterion, args.epsilon)
    fmt = args.format or cfg.output_format
    dest = _destination(args, cfg, stem, fmt)
    out = emit_report(report, fmt, dest)
    if dest is None:
        sys.stdout.write(out)
    else:
        v = report.verdict
        print(
            f"{cfg.name}: {'decoherent' if v['decoherent'] else 'not decoherent'} "
            f"({v['criterion']}, max violation {v['max_violation']:.3e}) -> {dest}"
        )
    return EXIT_OK if report.decoherent else EXIT_NOT_DECOHERENT


def cmd_validate(args):
    text, _ = _read_config(args.config)
    try:
        cfg = load_config(text)
    except ConfigError as exc:
        for path, msg in exc.violations:
            print(f"{path}: {msg}" if path else msg, file=sys.stderr)
        return EXIT_ERROR
    print(f"{cfg.name}: valid {cfg.kind} config ({cfg.formulation} formulation)")
    return EXIT_OK


def cmd_list_models(args):
    for name in preset_names():
        doc = json.loads(preset_text(name))
        print(f"{name:16s} {doc.get('description', '')}")
    return EXIT_OK


def cmd_oracle(args):
    text, _ = _read_config(args.config)
    cfg = load_config(text)
    regions = region_sets_of(cfg)
    if regions is None:
        raise GQMError("the oracle needs a lattice-particle config with a regions partition")
    model = build_lattice(cfg)
    deviation = operator_equivalence_oracle(model, regions)
    print(f"max |D_pathsum - D_operator| = {deviation!r}")
    return EXIT_OK if deviation <= ORACLE_BOUND else EXIT_NOT_DECOHERENT


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(
        prog="gqm", description="Decoherent-histories analysis workbench"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="Compute D, check axioms and decide decoherence")
    p.add_argument("config", help="config file, or a preset name from list-models")
    p.add_argument("--criterion", choices=["medium", "weak", "lp", "linear-positivity"])
    p.add_argument("--epsilon", type=float)
    p.add_argument("--format", choices=["json", "csv"])
    p.add_argument("--out", help=f"output file (default: config output.path, ${OUTPUT_DIR_ENV}, or stdout)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("validate", help="Check a config against the schema")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("list-models", help="List the bundled model presets")
    p.set_defaults(func=cmd_list_models)

    p = sub.add_parser("oracle", help="Compare path-sum and operator decoherence matrices")
    p.add_argument("config")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "epsilon", None) is not None and not args.epsilon > 0:
        print("error: --epsilon must be > 0", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except ConfigError as exc:
        for path, msg in exc.violations:
            print(f"error: {path}: {msg}" if path else f"error: {msg}", file=sys.stderr)
        return EXIT_ERROR
    except (GQMError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
