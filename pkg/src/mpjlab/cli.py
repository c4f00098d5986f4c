"""Command-line front end: run, verify, bench, cover, attack, emit-plot-data.

Exit codes: 0 on success, 1 when verification found failures (or an attack
did not fool its target), 2 on usage/configuration errors. Output is a
pure function of the arguments plus the seed; the default seed comes from
the MPJLAB_SEED environment variable (0 when unset).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from typing import Iterable, Sequence

from .adversary import BoundRefusedError, build_fooling_inputs, verify_fooling
from .bucketing import bucket_width_plan, doubling_plan
from .core import (
    BudgetExceededError,
    Instance,
    LayerFunction,
    Variant,
    enumerate_instances,
    eval_instance,
    instance_from_dict,
    instance_to_dict,
    sample_instance,
    sample_instances,
)
from .covers import build_d_cover, build_sd_cover, verify_d_cover, verify_sd_cover
from .registry import BuiltProtocol, UnknownProtocolError, build_protocol, cost_bound
from .sim import CostRow, cost_profile, cost_rows_to_csv, run, verify

SEED_ENV_VAR = "MPJLAB_SEED"
ATTACK_WIDTH_CAP = 16


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR, "0")
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)


def _json_dump(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True)


def _build(args: argparse.Namespace) -> BuiltProtocol:
    return build_protocol(
        args.protocol,
        n=args.n,
        k=args.k,
        d=args.d,
        perm_protocol=args.perm_protocol,
        seed=args.seed,
    )


def _instances(built: BuiltProtocol, args: argparse.Namespace) -> Iterable[Instance]:
    handle = built.handle
    if args.exhaustive:
        return enumerate_instances(
            args.n, handle.k, built.variant, built.perm_mask, budget=args.budget
        )
    return sample_instances(
        args.n, handle.k, built.variant, built.perm_mask, count=args.samples, seed=args.seed
    )


def _bucket_debug(built: BuiltProtocol, transcript) -> dict:
    plan = (
        doubling_plan(built.handle.n, built.handle.k)
        if built.handle.name == "bucketing-doubling"
        else bucket_width_plan(built.handle.n, built.handle.k)
    )
    n = built.handle.n
    survivors = {}
    for j in range(2, plan.terminal + 1):
        msg = transcript.messages[j - 1]
        survivors[str(j)] = [r for r in range(1, n + 1) if msg.bits[r - 1] == 1]
    return {
        "widths": list(plan.widths[: built.handle.k - 1]),
        "terminal": plan.terminal,
        "survivors": survivors,
    }


def cmd_run(args: argparse.Namespace) -> int:
    built = _build(args)
    if args.instance is not None:
        with open(args.instance, "r", encoding="utf-8") as fh:
            inst = instance_from_dict(json.load(fh))
        if inst.n != args.n:
            raise ValueError(f"instance width {inst.n} does not match --n {args.n}")
    else:
        inst = sample_instance(
            args.n, built.handle.k, built.variant, built.perm_mask, seed=args.seed
        )
    transcript = run(built.handle, inst)
    expected = eval_instance(inst)
    payload = {
        "protocol": built.handle.name,
        "instance": instance_to_dict(inst),
        "messages": [m.to01() for m in transcript.messages],
        "per_player_bits": list(transcript.per_player_bits),
        "total_cost": transcript.total_cost,
        "prefix_cost": transcript.prefix_cost,
        "output": transcript.output,
        "expected": expected,
        "correct": transcript.output == expected,
    }
    if args.emit_buckets:
        if not built.handle.name.startswith("bucketing"):
            raise ValueError("--emit-buckets only applies to the bucketing protocols")
        payload["buckets"] = _bucket_debug(built, transcript)
    _emit(_json_dump(payload), args.output)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    built = _build(args)
    report = verify(built.handle, _instances(built, args))
    bound = cost_bound(args.protocol, n=args.n, k=built.handle.k, d=args.d)
    payload = {
        "protocol": built.handle.name,
        "n": args.n,
        "k": built.handle.k,
        "checked": report.checked,
        "failures": len(report.failures),
        "worst_cost": report.worst_cost,
        "worst_prefix_cost": report.worst_prefix_cost,
        "per_player_max_bits": list(report.per_player_max_bits),
        "bound": bound,
        "bound_ok": None if bound is None else report.worst_prefix_cost <= bound,
    }
    if report.failures:
        first = report.failures[0]
        payload["first_failure"] = {
            "instance": instance_to_dict(first.inst),
            "expected": first.expected,
            "got": first.got,
        }
    if args.format == "json":
        _emit(_json_dump(payload), args.output)
    else:
        lines = [
            f"protocol {built.handle.name}: checked {report.checked} instances, "
            f"{len(report.failures)} failures",
            f"worst cost {report.worst_cost} bits total, {report.worst_prefix_cost} "
            f"before the output message",
            f"per-player max bits: {list(report.per_player_max_bits)}",
        ]
        if bound is not None:
            verdict = "within" if payload["bound_ok"] else "OVER"
            lines.append(f"cost bound {bound:g}: {verdict}")
        if report.failures:
            lines.append(f"first failure: {payload['first_failure']}")
        _emit("\n".join(lines) + "\n", args.output)
    return 1 if report.failures else 0


def _result_rows(args: argparse.Namespace) -> tuple[list[dict], int]:
    rows = []
    k_seen = None
    for n in args.n:
        built = build_protocol(
            args.protocol, n=n, k=args.k, d=args.d,
            perm_protocol=args.perm_protocol, seed=args.seed,
        )
        if k_seen is None:
            k_seen = built.handle.k
        elif built.handle.k != k_seen:
            raise ValueError("one table needs a single player count")
        report = verify(
            built.handle,
            sample_instances(
                n, built.handle.k, built.variant, built.perm_mask,
                count=args.samples, seed=args.seed,
            ),
        )
        bound = cost_bound(args.protocol, n=n, k=built.handle.k, d=args.d)
        rows.append(
            {
                "n": n,
                "k": built.handle.k,
                "protocol": built.handle.name,
                "view": built.handle.view_kind.value,
                "max_cost": report.worst_cost,
                "per_player": list(report.per_player_max_bits),
                "checked": report.checked,
                "failures": len(report.failures),
                "bound": bound,
                "bound_ok": None if bound is None else report.worst_prefix_cost <= bound,
            }
        )
    return rows, k_seen or 0


def cmd_bench(args: argparse.Namespace) -> int:
    rows, k = _result_rows(args)
    if args.format == "json":
        _emit(_json_dump(rows), args.output)
        return 0
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["n", "k", "protocol", "view", "max_cost"]
        + [f"p{j}_bits" for j in range(1, k + 1)]
        + ["checked", "failures", "bound", "bound_ok"]
    )
    for row in rows:
        writer.writerow(
            [row["n"], row["k"], row["protocol"], row["view"], row["max_cost"]]
            + row["per_player"]
            + [row["checked"], row["failures"], row["bound"], row["bound_ok"]]
        )
    _emit(buf.getvalue(), args.output)
    return 0


def cmd_emit_plot_data(args: argparse.Namespace) -> int:
    def factory(n: int):
        return build_protocol(
            args.protocol, n=n, k=args.k, d=args.d,
            perm_protocol=args.perm_protocol, seed=args.seed,
        ).handle

    def sampler(handle, n):
        built = build_protocol(
            args.protocol, n=n, k=args.k, d=args.d,
            perm_protocol=args.perm_protocol, seed=args.seed,
        )
        return sample_instances(
            n, handle.k, built.variant, built.perm_mask,
            count=args.samples, seed=args.seed,
        )

    rows = cost_profile(factory, args.n, sampler)
    _emit(cost_rows_to_csv(rows), args.output)
    return 0


def cmd_cover(args: argparse.Namespace) -> int:
    n = len(args.f)
    f = LayerFunction(n, tuple(args.f))
    if args.s is None:
        cover = build_d_cover(f, args.d)
        ok, witness = verify_d_cover(cover, f, args.d)
    else:
        cover = build_sd_cover(f, args.s, args.d)
        ok, witness = verify_sd_cover(cover, f, args.s, args.d)
    payload = {
        "n": n,
        "f": list(f.values),
        "d": args.d,
        "scope": sorted(args.s) if args.s is not None else None,
        "perms": [list(pi.values) for pi in cover.perms],
        "verified": ok,
        "first_uncovered": witness,
    }
    _emit(_json_dump(payload), args.output)
    return 0 if ok else 1


def cmd_attack(args: argparse.Namespace) -> int:
    if args.n > ATTACK_WIDTH_CAP and not args.allow_large_n:
        raise BoundRefusedError(
            f"attack enumerates all half-weight layers; n={args.n} is over the cap "
            f"{ATTACK_WIDTH_CAP} (pass --allow-large-n to override)"
        )
    built = _build(args)
    pair = build_fooling_inputs(built.handle)
    report = verify_fooling(built.handle, pair.inst0, pair.inst1)
    payload = {
        "protocol": built.handle.name,
        "n": args.n,
        "k": built.handle.k,
        "inst0": instance_to_dict(pair.inst0),
        "inst1": instance_to_dict(pair.inst1),
        "prefix_messages": [m.to01() for m in pair.prefix_messages],
        "report": {
            "prefix_equal": report.prefix_equal,
            "outputs": list(report.outputs),
            "expected": list(report.expected),
            "errors": report.errors,
            "degenerate": report.degenerate,
            "fooled": report.fooled,
        },
    }
    _emit(_json_dump(payload), args.output)
    return 0 if report.fooled else 1


def _add_protocol_args(p: argparse.ArgumentParser, *, seed: int) -> None:
    p.add_argument("--protocol", required=True, help="registry name, e.g. index, bucketing")
    p.add_argument("--k", type=int, default=None, help="player count (protocol default if omitted)")
    p.add_argument("--d", type=int, default=None, help="cover parameter for the sublinear protocols")
    p.add_argument("--perm-protocol", default="naive", choices=["naive"],
                   help="plug-in three-player subprotocol")
    p.add_argument("--seed", type=int, default=seed,
                   help=f"RNG seed (default from ${SEED_ENV_VAR}, else 0)")
    p.add_argument("--output", default=None, help="write here instead of stdout")


def build_parser(seed: int) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mpjlab",
        description="Simulate and verify one-way pointer-jumping protocols.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one protocol on one instance")
    _add_protocol_args(p, seed=seed)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--instance", default=None, help="instance JSON file (sampled if omitted)")
    p.add_argument("--emit-buckets", action="store_true",
                   help="include bucket announcements (bucketing protocols only)")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("verify", help="check a protocol against brute force")
    _add_protocol_args(p, seed=seed)
    p.add_argument("--n", type=int, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--exhaustive", action="store_true")
    group.add_argument("--samples", type=int, default=None)
    p.add_argument("--budget", type=int, default=2_000_000,
                   help="refuse exhaustive sweeps larger than this")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("bench", help="measure worst-case costs across widths")
    _add_protocol_args(p, seed=seed)
    p.add_argument("--n", type=_int_list, required=True, help="comma-separated widths")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("cover", help="build and verify a permutation cover")
    p.add_argument("--f", type=_int_list, required=True, help="layer values, f(1) first")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--s", type=_int_list, default=None, help="scope points (plain cover if omitted)")
    p.add_argument("--output", default=None)
    p.set_defaults(fn=cmd_cover)

    p = sub.add_parser("attack", help="build a fooling pair against a collapsing protocol")
    _add_protocol_args(p, seed=seed)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--allow-large-n", action="store_true",
                   help="lift the n cap (half-weight enumeration grows fast)")
    p.set_defaults(fn=cmd_attack)

    p = sub.add_parser("emit-plot-data", help="fixed-schema cost CSV across widths")
    _add_protocol_args(p, seed=seed)
    p.add_argument("--n", type=_int_list, required=True, help="comma-separated widths")
    p.add_argument("--samples", type=int, required=True)
    p.set_defaults(fn=cmd_emit_plot_data)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        seed = _default_seed()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    parser = build_parser(seed)
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except BudgetExceededError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    except BoundRefusedError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    except (UnknownProtocolError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
