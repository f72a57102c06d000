"""Command-line entry points: replay an event script, parse a single
utterance for debugging, or serve sessions over the wire protocol.

    unitcanvas replay --data colleges.csv --script scenario.jsonl --seed 7 --out snap.json
    unitcanvas parse --data colleges.csv --utterance "Color by region"
    unitcanvas serve --data colleges.csv --port 8765
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import random
import sys
from pathlib import Path

from .dataset import build_lexicon, load_csv
from .nl import Complete, Partial, Unintelligible, parse_all
from .session import replay
from . import service


def _load_dataset(path: str):
    with open(path, "rb") as fh:
        return load_csv(fh.read())


def cmd_replay(args: argparse.Namespace) -> int:
    dataset = _load_dataset(args.data)
    script = Path(args.script).read_text()
    snapshot, log = replay(script, dataset, seed=args.seed)
    out = json.dumps(snapshot, sort_keys=True, indent=None)
    if args.out:
        Path(args.out).write_text(out + "\n")
    else:
        print(out)
    if args.log:
        for i, line in enumerate(log, start=1):
            print(f"{i:4d}  {line}", file=sys.stderr)
    return 0


def cmd_parse(args: argparse.Namespace) -> int:
    dataset = _load_dataset(args.data)
    lexicon = build_lexicon(dataset)
    rng = random.Random(args.seed)
    for outcome in parse_all(args.utterance, lexicon, rng=rng):
        if isinstance(outcome, Complete):
            i = outcome.interpretation
            print(
                json.dumps(
                    {
                        "outcome": "complete",
                        "operation": i.operation.value,
                        "parameters": _jsonable(i.parameters),
                        "target": _spec(i.target_spec),
                        "confidence": round(i.confidence, 3),
                        "ambiguities": [
                            {"slot": a.slot, "candidates": [[str(v), round(s, 3)] for v, s in a.candidates]}
                            for a in i.ambiguities
                        ],
                    },
                    sort_keys=True,
                )
            )
        elif isinstance(outcome, Partial):
            print(
                json.dumps(
                    {
                        "outcome": "partial",
                        "operation_guess": outcome.operation_guess.value
                        if outcome.operation_guess
                        else None,
                        "explanation": outcome.explanation,
                        "example": outcome.example_command,
                    },
                    sort_keys=True,
                )
            )
        else:
            print(json.dumps({"outcome": "unintelligible", "message": outcome.message}))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    dataset = _load_dataset(args.data)
    static_dir = Path(args.static) if args.static else None
    print(f"serving on ws://{args.host}:{args.port} (ctrl-c to stop)", file=sys.stderr)
    try:
        service.serve(
            dataset,
            port=args.port,
            host=args.host,
            seed=args.seed,
            static_dir=static_dir,
        )
    except KeyboardInterrupt:
        pass
    return 0


def _spec(spec) -> dict | None:
    from .commands import spec_to_dict

    return spec_to_dict(spec) if spec is not None else None


def _jsonable(params: dict) -> dict:
    out = {}
    for k, v in params.items():
        out[k] = list(v) if isinstance(v, tuple) else v
    return out


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="unitcanvas")
    sub = parser.add_subparsers(dest="command", required=True)

    p_replay = sub.add_parser("replay", help="replay an event script to a snapshot")
    p_replay.add_argument("--data", required=True)
    p_replay.add_argument("--script", required=True)
    p_replay.add_argument("--seed", type=int, default=None)
    p_replay.add_argument("--out", default=None)
    p_replay.add_argument("--log", action="store_true", help="print feedback log to stderr")
    p_replay.set_defaults(func=cmd_replay)

    p_parse = sub.add_parser("parse", help="parse one utterance and dump the interpretation")
    p_parse.add_argument("--data", required=True)
    p_parse.add_argument("--utterance", required=True)
    p_parse.add_argument("--seed", type=int, default=0)
    p_parse.set_defaults(func=cmd_parse)

    p_serve = sub.add_parser("serve", help="serve sessions over the wire protocol")
    p_serve.add_argument("--data", required=True)
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--seed", type=int, default=0)
    p_serve.add_argument("--static", default=None, help="directory with the UI bundle")
    p_serve.set_defaults(func=cmd_serve)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
