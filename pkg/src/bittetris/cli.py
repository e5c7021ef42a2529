"""Command-line interface: train, eval, bench, and verify.

Artifacts are written under --out (or $BITTETRIS_OUT): JSON reports, CSV
learning curves, rendered figures. Every artifact carries a
reproducibility header of seed, config hash, and package version.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path


USAGE_ERROR = 2


def _version() -> str:
    try:
        from importlib.metadata import version

        return version("bittetris")
    except Exception:
        return "unknown"


def _config_hash(args: argparse.Namespace) -> str:
    record = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    blob = json.dumps(record, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _repro_header(args) -> dict:
    return {
        "seed": getattr(args, "seed", None),
        "config_hash": _config_hash(args),
        "version": _version(),
    }


def _out_dir(args) -> Path:
    out = os.environ.get("BITTETRIS_OUT") or args.out
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n")


def _write_curve_csv(path: Path, curve, xname: str, header: dict) -> None:
    lines = [f"# {k}={v}" for k, v in header.items()]
    lines.append(f"{xname},return,seconds")
    for x, ret, secs in curve:
        lines.append(f"{x},{ret},{secs:.3f}")
    path.write_text("\n".join(lines) + "\n")


def cmd_train(args) -> int:
    from . import plots
    from .training import DEFAULT_HP, TRAINERS, BUFFER_PPO
    from .weights import load_weights, save_weights

    overrides = {}
    for name, attr in [
        ("gamma", "gamma"), ("lam", "lam"), ("clip_eps", "clip"),
        ("lr_actor", "lr_actor"), ("lr_critic", "lr_critic"), ("epochs", "epochs"),
        ("batch_size", "batch_size"), ("mini_batch", "mini_batch"),
        ("total_steps", "total_steps"), ("episodes", "episodes"),
        ("tau0", "tau0"), ("tau_k", "tau_k"), ("probe_episodes", "probe_episodes"),
    ]:
        value = getattr(args, attr)
        if value is not None:
            overrides[name] = value
    if args.no_adv_norm:
        overrides["adv_norm"] = False
    overrides["board_height"] = args.board
    overrides["gen_kind"] = args.gen

    hp = DEFAULT_HP[args.algo](**overrides)
    trainer = TRAINERS[args.algo]
    init_policy = None
    if args.init_weights:
        from .policy import LinearPolicy

        init_policy = LinearPolicy(load_weights(args.init_weights))
    result = trainer(hp, seed=args.seed, init_policy=init_policy)

    out = _out_dir(args)
    header = _repro_header(args)
    save_weights(out / "weights.json", result.policy.weights,
                 critic_bias=result.critic.bias, meta=header)
    xname = "step" if args.algo == BUFFER_PPO else "episode"
    _write_curve_csv(out / "curve.csv", result.curve, xname, header)
    plots.save_learning_curve(out / "learning_curve.png", result.curve, args.algo, xname)
    _write_json(out / "train_report.json", {
        **header,
        "algo": result.algo,
        "env_steps": result.env_steps,
        "updates": result.updates,
        "seconds": result.seconds,
        "final_return": result.curve[-1][1] if result.curve else None,
        "weights": result.policy.weights.tolist(),
    })
    print(f"{args.algo}: {result.env_steps} env steps, {result.updates} updates, "
          f"{result.seconds:.1f}s, final return {result.curve[-1][1]:.1f}")
    print(f"artifacts in {out}")
    return 0


def cmd_eval(args) -> int:
    from . import plots
    from .evaluate import evaluate
    from .weights import load_weights

    weights = load_weights(args.weights)
    report, scores = evaluate(
        weights, args.games, gen_kind=args.gen, height=args.board, seed=args.seed,
        max_steps=args.max_steps, workers=args.workers,
        weights_label=str(args.weights), return_scores=True,
    )
    out = _out_dir(args)
    payload = {**_repro_header(args), **json.loads(report.to_json())}
    _write_json(out / "eval_report.json", payload)
    plots.save_score_histogram(out / "score_hist.png", scores, str(args.weights))
    print(report.row())
    print(json.dumps(payload, indent=2))
    return 0


def cmd_bench(args) -> int:
    from .evaluate import benchmark_throughput

    report = benchmark_throughput(args.steps, seed=args.seed, height=args.board,
                                  with_features=args.with_features)
    print(report.row())
    if args.out:
        out = _out_dir(args)
        _write_json(out / "bench_report.json",
                    {**_repro_header(args), **json.loads(report.to_json())})
    return 0


def cmd_verify(args) -> int:
    from .verify import differential_fuzz

    report = differential_fuzz(args.transitions, seed=args.seed)
    status = "OK" if report.ok else "MISMATCH"
    print(f"{status}: {report.transitions} transitions, {report.boards_checked} "
          f"edge boards, {report.mismatches} mismatches, "
          f"{report.invariant_violations} invariant violations, {report.seconds:.1f}s")
    if not report.ok:
        print(f"first failure: {report.first_failure}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bittetris",
        description="Bitboard Tetris: train, evaluate, benchmark, verify.",
    )
    parser.add_argument("--config", help="JSON file of default option values")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train a linear afterstate policy")
    train.add_argument("--algo", choices=["reinforce", "ppo-traj", "ppo-buffer"],
                       default="ppo-buffer")
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--board", type=int, choices=[10, 20], default=10)
    train.add_argument("--gen", choices=["random", "bag7", "sz"], default="random")
    train.add_argument("--episodes", type=int)
    train.add_argument("--total-steps", type=int, dest="total_steps")
    train.add_argument("--batch-size", type=int, dest="batch_size")
    train.add_argument("--mini-batch", type=int, dest="mini_batch")
    train.add_argument("--epochs", type=int)
    train.add_argument("--gamma", type=float)
    train.add_argument("--lam", type=float)
    train.add_argument("--clip", type=float)
    train.add_argument("--lr-actor", type=float, dest="lr_actor")
    train.add_argument("--lr-critic", type=float, dest="lr_critic")
    train.add_argument("--tau0", type=float)
    train.add_argument("--tau-k", type=float, dest="tau_k")
    train.add_argument("--probe-episodes", type=int, dest="probe_episodes")
    train.add_argument("--no-adv-norm", action="store_true")
    train.add_argument("--init-weights", dest="init_weights")
    train.add_argument("--out", default="runs/train")
    train.set_defaults(func=cmd_train)

    ev = sub.add_parser("eval", help="greedy evaluation of a weight vector")
    ev.add_argument("--weights", required=True,
                    help="preset (dt10, dt20, ppo-best) or weight-file path")
    ev.add_argument("--board", type=int, choices=[10, 20], default=10)
    ev.add_argument("--games", type=int, default=1000)
    ev.add_argument("--gen", choices=["random", "bag7", "sz"], default="random")
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--max-steps", type=int, dest="max_steps", default=10 ** 6)
    ev.add_argument("--workers", type=int)
    ev.add_argument("--out", default="runs/eval")
    ev.set_defaults(func=cmd_eval)

    bench = sub.add_parser("bench", help="random-action stepping throughput")
    bench.add_argument("--steps", type=int, default=10000)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--board", type=int, choices=[10, 20], default=10)
    bench.add_argument("--with-features", action="store_true", dest="with_features")
    bench.add_argument("--out")
    bench.set_defaults(func=cmd_bench)

    ver = sub.add_parser("verify", help="differential fuzz against the grid reference")
    ver.add_argument("--transitions", type=int, default=100000)
    ver.add_argument("--seed", type=int, default=1)
    ver.set_defaults(func=cmd_verify)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Prepend defaults from --config as if typed before the CLI flags."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    try:
        path = argv[i + 1]
    except IndexError:
        parser.error("--config requires a file path")
    try:
        record = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"unreadable config file: {exc}")
    if not isinstance(record, dict):
        parser.error("config file must be a JSON object")
    rest = argv[:i] + argv[i + 2:]
    if not rest:
        parser.error("--config needs a subcommand")
    injected = []
    for key, value in record.items():
        flag = "--" + key.replace("_", "-")
        if value is True:
            injected.append(flag)
        elif value is not None and value is not False:
            injected += [flag, str(value)]
    return [rest[0]] + injected + rest[1:]


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    argv = _apply_config(parser, argv)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
