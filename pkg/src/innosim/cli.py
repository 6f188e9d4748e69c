"""Command line front end.

Three subcommands: `run` executes a manifest, `replay` prices a recorded
world directly, `reproduce` runs a registered check against its pinned
expectation.  Output directory resolution, in order: --out flag, the
manifest's `out` entry, the SIM_OUT_DIR environment variable, the current
directory.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import WorldConfig, uniform_profiles
from .errors import ConfigError, IntegrityError, ManifestError, NonConvergence
from .experiments import run_manifest
from .knowledge import knowledge_closure
from .manifest import Manifest
from .network import load_replay
from .payoffs import payoff_profile
from .reproduce import CHECKS, run_check


def _resolve_out(flag, manifest: Manifest | None = None) -> str:
    if flag:
        return flag
    if manifest is not None:
        out = manifest.get("out")
        if out:
            return out
    return os.environ.get("SIM_OUT_DIR") or "."


def cmd_run(args) -> int:
    m = Manifest.load(args.manifest)
    overrides = {}
    for name in ("seed", "reps", "threads"):
        val = getattr(args, name)
        if val is not None:
            overrides[name] = val
    out_dir = _resolve_out(args.out, m)
    for path in run_manifest(m, out_dir, overrides):
        print(path)
    return 0


def cmd_replay(args) -> int:
    net = load_replay(args.file)
    world = WorldConfig(n=net.n, k=args.k, delta=args.delta)
    report = payoff_profile(knowledge_closure(net), net, world,
                            uniform_profiles(net.n, p=0.0, q=0.0))
    out_dir = _resolve_out(args.out)
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.file))[0]
    path = os.path.join(out_dir, stem + ".csv")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report.to_csv())
    print(path)
    return 0


def cmd_reproduce(args) -> int:
    names = sorted(CHECKS) if args.id == "all" else [args.id]
    out_dir = _resolve_out(args.out)
    overrides = {"threads": args.threads} if args.threads else {}
    all_ok = True
    for name in names:
        res = run_check(name, out_dir, overrides)
        print(res.report())
        all_ok = all_ok and res.ok
    return 0 if all_ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sim", description="innovation-network simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a manifest")
    p_run.add_argument("manifest", help="path to a manifest file")
    p_run.add_argument("--seed", type=int, help="override the manifest seed")
    p_run.add_argument("--reps", type=int, help="override replication count")
    p_run.add_argument("--threads", type=int, help="worker threads")
    p_run.add_argument("--out", help="output directory")
    p_run.set_defaults(func=cmd_run)

    p_rep = sub.add_parser("replay", help="price a recorded world")
    p_rep.add_argument("file", help="replay file")
    p_rep.add_argument("--k", type=int, default=3,
                       help="technology complexity (default 3)")
    p_rep.add_argument("--delta", type=float, default=1.0,
                       help="relay probability recorded flags assume")
    p_rep.add_argument("--out", help="output directory")
    p_rep.set_defaults(func=cmd_replay)

    p_chk = sub.add_parser("reproduce", help="run a registered check")
    p_chk.add_argument("id", help="check id, or 'all' "
                       f"(ids: {', '.join(sorted(CHECKS))})")
    p_chk.add_argument("--threads", type=int, help="worker threads")
    p_chk.add_argument("--out", help="output directory")
    p_chk.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ManifestError as exc:
        print(f"sim: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, IntegrityError) as exc:
        print(f"sim: {exc}", file=sys.stderr)
        return 2
    except NonConvergence as exc:
        print(f"sim: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"sim: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
