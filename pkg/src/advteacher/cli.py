"""Command-line entry point: ``advteacher {compose,train,eval,group-stats}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .annotations import DatasetError
from .config import ConfigError, RunConfig, load_config
from .metrics import EvalError

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="advteacher", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="run config (JSON)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", help="output directory (overrides output_dir)")

    common(sub.add_parser("compose", help="compose a synthetic or mixed annotation dataset"))
    common(sub.add_parser("train", help="run teacher or uniform sampling against the oracle student"))
    p = sub.add_parser("eval", help="occlusion-binned evaluation of keypoint predictions")
    common(p, config_required=False)
    p.add_argument("--predictions", required=True)
    p.add_argument("--dataset", required=True)
    p = sub.add_parser("group-stats", help="per-group sample counts of a dataset")
    common(p, config_required=False)
    p.add_argument("--dataset", required=True)
    return ap


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out:
        cfg.output_dir = args.out
    return cfg


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    from . import runner

    try:
        cfg = _config(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg.output_dir)
    try:
        if args.command == "compose":
            stats = runner.compose(cfg, out)
            print(f"wrote {stats['records']} records to {out / 'dataset.jsonl'}")
        elif args.command == "train":
            res = runner.train(cfg, out)
            print(json.dumps(res.summary, sort_keys=True))
        elif args.command == "eval":
            rep = runner.evaluate(cfg, args.predictions, args.dataset, out)
            print(rep.to_csv(), end="")
        elif args.command == "group-stats":
            stats = runner.group_stats(cfg, args.dataset)
            out.mkdir(parents=True, exist_ok=True)
            (out / "group_stats.json").write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n")
            print(json.dumps(stats, sort_keys=True))
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, PermissionError, IsADirectoryError) as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (DatasetError, EvalError, ValueError, RuntimeError, FloatingPointError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
