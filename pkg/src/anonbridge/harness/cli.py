"""Command line entry point.

Subcommands:
    run <scenario.json | builtin-name>   execute one scenario
    sweep --depths 4,8,16                cost/capacity sweep over tree depths
    attacks --all                        run the builtin attack matrix
    replay <transcript.jsonl>            re-execute a transcript's config and
                                         confirm the digest matches

Exit status is 0 iff every verdict passed. ANONBRIDGE_SEED overrides the
scenario seed.
"""

import argparse
import json
import os
import sys
from pathlib import Path

from .config import ScenarioConfig
from .metrics import sweep_depths
from .scenarios import ATTACK_MATRIX, BUILTINS, builtin_config, run_scenario
from .transcript import Transcript


def _env_seed(default):
    raw = os.environ.get("ANONBRIDGE_SEED")
    return int(raw) if raw else default


def _load_config(target: str, seed) -> ScenarioConfig:
    path = Path(target)
    if path.exists():
        config = ScenarioConfig.from_json(path.read_text())
        if seed is not None:
            config.seed = seed
        return config.validate()
    if target in BUILTINS:
        return builtin_config(target, seed=seed if seed is not None else 0)
    sys.exit(f"error: {target!r} is neither a scenario file nor a builtin "
             f"(builtins: {', '.join(sorted(BUILTINS))})")


def _write_outputs(result, out_dir: str) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result.transcript.save(out / "transcript.jsonl")
    (out / "metrics.json").write_text(json.dumps(result.metrics, indent=2) + "\n")


def _print_verdicts(name: str, verdicts) -> bool:
    ok = True
    for v in verdicts:
        mark = "PASS" if v.passed else "FAIL"
        detail = f"  ({v.detail})" if v.detail and not v.passed else ""
        print(f"[{mark}] {name}: {v.name}{detail}")
        ok &= v.passed
    return ok


def cmd_run(args) -> int:
    config = _load_config(args.scenario, _env_seed(args.seed))
    result = run_scenario(config)
    if args.out:
        _write_outputs(result, args.out)
        print(f"transcript digest {result.transcript.digest()}")
    return 0 if _print_verdicts(config.name, result.verdicts) else 1


def cmd_sweep(args) -> int:
    depths = [int(d) for d in args.depths.split(",")]
    seed = _env_seed(args.seed) or 0
    rows = sweep_depths(depths, seed=seed)
    cols = list(rows[0])
    print("  ".join(f"{c:>20}" for c in cols))
    for row in rows:
        print("  ".join(f"{row[c]:>20}" for c in cols))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.json").write_text(json.dumps(rows, indent=2) + "\n")
    return 0


def cmd_attacks(args) -> int:
    seed = _env_seed(args.seed) or 0
    names = ATTACK_MATRIX if args.all else args.names
    if not names:
        sys.exit("error: pass --all or scenario names")
    ok = True
    for name in names:
        result = run_scenario(builtin_config(name, seed=seed))
        ok &= _print_verdicts(name, result.verdicts)
        if args.out:
            _write_outputs(result, Path(args.out) / name)
    return 0 if ok else 1


def cmd_replay(args) -> int:
    records = Transcript.load_records(args.transcript)
    header = records[0]
    if header.get("kind") != "header":
        sys.exit("error: transcript has no header record")
    config = ScenarioConfig.from_json(header["config"])
    result = run_scenario(config)
    original = Transcript()
    original.records = records
    match = result.transcript.digest() == original.digest()
    print(f"[{'PASS' if match else 'FAIL'}] replay: transcript digest "
          f"{'matches' if match else 'differs'}")
    ok = _print_verdicts(config.name, result.verdicts) and match
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="anonbridge",
        description="Deterministic simulator for an anonymous cross-chain "
                    "message protocol.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute a scenario file or builtin")
    p.add_argument("scenario")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="directory for transcript/metrics")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="cost/capacity sweep over tree depths")
    p.add_argument("--depths", required=True, help="comma-separated, e.g. 4,8,16")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("attacks", help="run builtin attack scenarios")
    p.add_argument("--all", action="store_true")
    p.add_argument("names", nargs="*")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_attacks)

    p = sub.add_parser("replay", help="re-execute a saved transcript")
    p.add_argument("transcript")
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
