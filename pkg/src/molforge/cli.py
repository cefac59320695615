"""Command-line surface: one subcommand per pipeline stage.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
Logs go to stderr; every artifact lands in the run directory.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import config as cfgmod
from . import pipeline

log = logging.getLogger("molforge")

COMMANDS = {
    "synth-data": (pipeline.run_synth_data, "synthesize the toy corpus and labeled pairs"),
    "train-actor": (pipeline.run_train_actor, "teacher-forced training of the generator"),
    "train-critic": (pipeline.run_train_critic, "train the pocket/ligand classifier"),
    "grid-search": (pipeline.run_grid_search, "sweep critic hyperparameters"),
    "rl-finetune": (pipeline.run_rl_finetune, "fine-tune the generator against the critic"),
    "generate": (pipeline.run_generate, "sample molecules from the latest generator"),
    "score": (pipeline.run_score, "score generated molecules with the critic"),
    "evaluate": (pipeline.run_evaluate, "filters, set metrics, top-k, plot data"),
    "ablate": (pipeline.run_ablate, "compare reward variants from a shared start"),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser() -> _Parser:
    parser = _Parser(
        prog="molforge",
        description="Scaffold-constrained 3D molecule generation workbench.",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    for name, (_, blurb) in COMMANDS.items():
        sub = subparsers.add_parser(name, help=blurb, description=blurb)
        sub.add_argument("--config", metavar="PATH", help="flat key = value config file")
        sub.add_argument("--seed", type=int, metavar="N", help="override the seed key")
        sub.add_argument(
            "--run-dir", default="run", metavar="PATH",
            help="artifact directory (default: ./run)",
        )
        sub.add_argument(
            "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
            help="override one config key (repeatable)",
        )
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(name)s: %(message)s"
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as err:
        print(err, file=sys.stderr)
        return 1
    except SystemExit as leave:  # argparse --help
        return int(leave.code or 0)

    if args.command is None:
        parser.print_usage(sys.stderr)
        print("molforge: error: a subcommand is required", file=sys.stderr)
        return 1

    try:
        if args.config is not None and not Path(args.config).is_file():
            raise cfgmod.ConfigError(f"--config: no such file: {args.config}")
        cfg = cfgmod.load_config(args.config)
        cfgmod.apply_overrides(cfg, args.overrides)
        if args.seed is not None:
            cfg["seed"] = args.seed
    except cfgmod.ConfigError as err:
        log.error("%s", err)
        return 1

    try:
        COMMANDS[args.command][0](cfg, args.run_dir)
    except Exception as err:
        log.error("%s failed: %s", args.command, err)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
