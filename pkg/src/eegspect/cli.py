"""Command line entry point: ``eegspect {catalog,run,synth}``.

Exit codes are 0 on success, 1 on a fatal error and 2 when the command
finished but had to leave some input files out.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

EXIT_OK, EXIT_FATAL, EXIT_PARTIAL = 0, 1, 2

logger = logging.getLogger("eegspect")


def _cmd_catalog(args) -> int:
    from .edf import build_catalog, save_catalog
    from .pipeline import CATALOG_NAME

    directory = Path(args.directory)
    catalog = build_catalog(directory)
    out = directory / CATALOG_NAME
    save_catalog(catalog, out)
    print(f"{out}: {len(catalog)} recording(s), "
          f"{sum(len(e.seizures) for e in catalog)} seizure(s), {len(catalog.skipped)} skipped")
    return EXIT_PARTIAL if catalog.skipped else EXIT_OK


def _cmd_run(args) -> int:
    from .config import PipelineConfig, load_config
    from .pipeline import run_pipeline

    config = load_config(args.config) if args.config else PipelineConfig()
    if args.print_config:
        sys.stdout.write(config.to_toml())
        return EXIT_OK
    if not args.config:
        raise SystemExit("run: --config is required unless --print-config is given")
    result = run_pipeline(config, jobs=args.jobs)
    print(f"wrote {len(result.files)} file(s) to {result.output_dir}")
    return EXIT_PARTIAL if result.partial else EXIT_OK


def _cmd_synth(args) -> int:
    from .synth import SynthSpec, write_corpus

    paths = write_corpus(args.out, SynthSpec(seed=args.seed))
    print(f"wrote {len(paths)} file(s) to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eegspect", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="index a directory of EDF files and summaries")
    p.add_argument("directory", help="dataset directory; catalog.json is written inside it")
    p.set_defaults(func=_cmd_catalog)

    p = sub.add_parser("run", help="run the experiment described by a TOML config")
    p.add_argument("--config", help="TOML experiment file")
    p.add_argument("--jobs", type=int, default=None,
                   help="worker threads (default: $EEGSPECT_JOBS or 1)")
    p.add_argument("--print-config", action="store_true",
                   help="print the fully resolved config with defaults and exit")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("synth", help="write the synthetic EDF corpus")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        # PipelineError, ConfigError and EdfError all land here
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
