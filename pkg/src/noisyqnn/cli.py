"""Command-line entry point: ``noisyqnn {train,sweep,noisemap,depthstudy,calibrate,baselines}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .channels import ChannelKind, HardwareCoherence, NoiseSpec, gamma_from_t1, gamma_from_t2, parse_duration
from .data import DataFormatError, default_data_path, file_digest, load_diabetes, prepare
from .experiments import (
    DEFAULT_LAYER_SET,
    DEPTH_HEADER,
    EPOCHAL_HEADER,
    NOISEMAP_HEADER,
    SUMMARY_HEADER,
    GammaGrid,
    SweepResult,
    find_optimum,
    naive_baseline_losses,
    run_depth_study,
    run_noise_map,
    run_noise_sweep,
    write_csv,
    write_manifest,
)
from .qnn import build_ansatz
from .training import TrainConfig, train

log = logging.getLogger("noisyqnn")

DEFAULT_SEED = 21
ALL_CHANNELS = ("ad", "pd", "dp")


def _bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("true", "1", "yes"):
        return True
    if value in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def _channels(text: str) -> tuple:
    if text == "all":
        return ALL_CHANNELS
    out = []
    for part in text.split(","):
        kind = ChannelKind.parse(part)
        out.append("none" if kind is None else kind.value)
    return tuple(out)


def _int_list(text: str) -> tuple:
    return tuple(int(v) for v in text.split(","))


def _add_common(p, out=True):
    p.add_argument("--data", type=Path, default=None, help="diabetes table (default: bundled copy)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="split seed and master seed")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="stdout summary format")
    if out:
        p.add_argument("--out", type=Path, default=Path("results"), help="output directory")


def _add_training(p):
    p.add_argument("--layers", type=int, default=5)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch", type=int, default=20)
    p.add_argument("--lr", type=float, default=0.03)
    p.add_argument("--noise-after-encoding", type=_bool, default=True, metavar="{true,false}")
    p.add_argument("--epoch-metric", choices=("post_epoch", "running"), default="post_epoch")


def _add_grid(p):
    p.add_argument("--grid-min-exp", type=float, default=-5.0)
    p.add_argument("--grid-max-exp", type=float, default=0.0)
    p.add_argument("--grid-step", type=float, default=0.25)
    p.add_argument("--seeds", type=int, default=16, help="model replicas per grid point")
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noisyqnn", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one model and write its epoch curve")
    _add_common(p)
    _add_training(p)
    p.add_argument("--channel", type=lambda t: _channels(t)[0], default="none", help="ad, pd, dp or none")
    p.add_argument("--gamma", type=float, default=0.0)

    for name, help_text in (
        ("sweep", "train replicas over a grid of noise strengths"),
        ("noisemap", "evaluate swept models at every feed-forward noise strength"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        _add_training(p)
        _add_grid(p)
        p.add_argument("--channel", type=_channels, default=("ad",), help="ad, pd, dp, none, a comma list or all")
        if name == "noisemap":
            p.add_argument("--sweep-dir", type=Path, default=None, help="reuse models.json from a previous sweep")

    p = sub.add_parser("depthstudy", help="optimum noise strength across circuit depths")
    _add_common(p)
    _add_training(p)
    _add_grid(p)
    p.add_argument("--channel", type=_channels, default=ALL_CHANNELS)
    p.add_argument("--layers-set", type=_int_list, default=DEFAULT_LAYER_SET, help="comma list, e.g. 3,4,5")

    p = sub.add_parser("calibrate", help="noise strengths from T1, T2 and gate time")
    p.add_argument("--t1", required=True, type=parse_duration, help="e.g. 25us")
    p.add_argument("--t2", required=True, type=parse_duration, help="e.g. 28us")
    p.add_argument("--tgate", required=True, type=parse_duration, help="e.g. 240ns")
    p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("baselines", help="validation loss of the constant predictors 0 and 1")
    _add_common(p, out=False)
    return parser


# --- helpers -------------------------------------------------------------------------


def _load(args):
    path = args.data if args.data is not None else default_data_path()
    raw = load_diabetes(path)
    return prepare(raw, args.seed), file_digest(path)


def _config(args) -> TrainConfig:
    return TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch,
        learning_rate=args.lr,
        seed=args.seed,
        epoch_metric=args.epoch_metric,
    )


def _grid(args) -> GammaGrid:
    return GammaGrid(min_exp=args.grid_min_exp, max_exp=args.grid_max_exp, step=args.grid_step)


def _params(args) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("argv", "verbose")}
    params["argv"] = ["noisyqnn", *args.argv]
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in params.items()}


def _emit(args, line: str, payload: dict):
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        print(line)


def _run_sweeps(args, data):
    sweeps = []
    for ch in args.channel:
        sweeps.append(
            run_noise_sweep(
                ch, _grid(args), data, _config(args), args.seeds, args.layers,
                args.seed, args.noise_after_encoding, args.workers,
            )
        )
    return sweeps


def _write_sweeps(out: Path, sweeps):
    write_csv(out / "epochal.csv", EPOCHAL_HEADER, (r for s in sweeps for r in s.epochal_rows()))
    write_csv(out / "summary.csv", SUMMARY_HEADER, (r for s in sweeps for r in s.summary_rows()))
    (out / "models.json").write_text(json.dumps([s.to_dict() for s in sweeps]) + "\n")


# --- commands ------------------------------------------------------------------------


def cmd_train(args):
    data, digest = _load(args)
    out = args.out
    write_manifest(out / "manifest.json", "train", _params(args), ["epochal.csv", "record.json", "split.json"], digest)
    (out / "split.json").write_text(data.to_json() + "\n")
    noise = NoiseSpec(args.channel, args.gamma)
    model = build_ansatz(args.layers, noise, noise_after_encoding=args.noise_after_encoding)
    record = train(model, data, _config(args))
    write_csv(out / "epochal.csv", EPOCHAL_HEADER, record.rows())
    (out / "record.json").write_text(record.to_json() + "\n")
    _emit(
        args,
        f"train {noise.label} gamma={noise.gamma:g}: final train_mse={record.final_train_mse:.4f} "
        f"val_mse={record.final_val_mse:.4f} -> {out}",
        {"channel": noise.label, "gamma": noise.gamma, "final_train_mse": record.final_train_mse,
         "final_val_mse": record.final_val_mse},
    )


def cmd_sweep(args):
    data, digest = _load(args)
    out = args.out
    outputs = ["epochal.csv", "summary.csv", "models.json", "split.json"]
    write_manifest(out / "manifest.json", "sweep", dict(_params(args), grid=_grid(args).to_dict()), outputs, digest)
    (out / "split.json").write_text(data.to_json() + "\n")
    sweeps = _run_sweeps(args, data)
    _write_sweeps(out, sweeps)
    payload = {}
    for s in sweeps:
        if s.channel == "none":
            continue
        opt = find_optimum(s)
        payload[s.channel] = {"gamma_opt": opt.gamma, "improvement": opt.improvement}
    line = "; ".join(f"{ch}: gamma*={v['gamma_opt']:.3g} improvement={100 * v['improvement']:.1f}%" for ch, v in payload.items())
    _emit(args, f"sweep {line or 'done'} -> {out}", payload)


def cmd_noisemap(args):
    data, digest = _load(args)
    out = args.out
    outputs = ["noisemap.csv", "split.json"]
    if args.sweep_dir is None:
        outputs += ["epochal.csv", "summary.csv", "models.json"]
    write_manifest(out / "manifest.json", "noisemap", dict(_params(args), grid=_grid(args).to_dict()), outputs, digest)
    (out / "split.json").write_text(data.to_json() + "\n")
    if args.sweep_dir is not None:
        stored = json.loads((args.sweep_dir / "models.json").read_text())
        sweeps = [SweepResult.from_dict(d) for d in stored if d["channel"] in args.channel]
        if not sweeps:
            raise ValueError(f"no sweep for channel(s) {args.channel} in {args.sweep_dir}")
    else:
        sweeps = _run_sweeps(args, data)
        _write_sweeps(out, sweeps)
    maps = [run_noise_map(s, data, workers=args.workers) for s in sweeps]
    write_csv(out / "noisemap.csv", NOISEMAP_HEADER, (r for m in maps for r in m.rows()))
    payload = {m.channel: {"gamma_eval": list(m.gammas_eval), "best_gamma_train": list(m.best_train_gamma)} for m in maps}
    _emit(args, f"noisemap {','.join(m.channel for m in maps)} -> {out / 'noisemap.csv'}", payload)


def cmd_depthstudy(args):
    data, digest = _load(args)
    out = args.out
    outputs = ["depth.csv", "depth_aggregate.json", "split.json"] + [f"summary_L{L}.csv" for L in args.layers_set]
    write_manifest(out / "manifest.json", "depthstudy", dict(_params(args), grid=_grid(args).to_dict()), outputs, digest)
    (out / "split.json").write_text(data.to_json() + "\n")
    result = run_depth_study(
        args.channel, data, args.layers_set, _grid(args), _config(args), args.seeds,
        args.seed, args.noise_after_encoding, args.workers,
    )
    write_csv(out / "depth.csv", DEPTH_HEADER, result.rows())
    for L in result.layer_set:
        rows = (r for ch in result.channels for r in result.sweeps[(ch, L)].summary_rows())
        write_csv(out / f"summary_L{L}.csv", SUMMARY_HEADER, rows)
    aggregate = result.aggregate()
    (out / "depth_aggregate.json").write_text(json.dumps(aggregate, indent=2, sort_keys=True) + "\n")
    line = "; ".join(f"{ch}: mean gamma*={v['arithmetic_mean']:.3g} (geo {v['geometric_mean']:.3g})" for ch, v in aggregate.items())
    _emit(args, f"depthstudy {line} -> {out}", aggregate)


def cmd_calibrate(args):
    hw = HardwareCoherence(args.t1, args.t2, args.tgate)
    g_ad, g_pd = gamma_from_t1(hw), gamma_from_t2(hw)
    payload = {"gamma_ad": g_ad, "gamma_pd": g_pd}
    if args.format == "csv":
        print(f"gamma_ad={g_ad:.2e} gamma_pd={g_pd:.2e}")
    print(json.dumps(payload))


def cmd_baselines(args):
    data, _ = _load(args)
    at_zero, at_one = naive_baseline_losses(data)
    _emit(
        args,
        f"loss_at_one={at_one:.4f} loss_at_zero={at_zero:.4f}",
        {"loss_at_one": at_one, "loss_at_zero": at_zero},
    )


COMMANDS = {
    "train": cmd_train,
    "sweep": cmd_sweep,
    "noisemap": cmd_noisemap,
    "depthstudy": cmd_depthstudy,
    "calibrate": cmd_calibrate,
    "baselines": cmd_baselines,
}


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    args.argv = argv
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (DataFormatError, OSError, ValueError, RuntimeError) as exc:
        print(f"noisyqnn {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
