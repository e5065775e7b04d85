"""Command-line entry point: quantize / encode / decode / analyze / eval.

Each subcommand runs one stage of the pipeline (continuous vectors ->
ternary codes -> spike rasters -> decoded codes -> metrics) as a
reproducible batch job.  Every run writes a manifest (resolved config,
input digests, seed, command, version, timestamp) next to its outputs;
two runs with equal manifests produce identical outputs.

Exit codes: 0 success, 2 input error, 3 empty result, 4 config error.
Output files are written to a temp name and atomically renamed, so a
failed run leaves no partial outputs.  Flags can be defaulted through
environment variables prefixed WORD2SPIKE_ (e.g. WORD2SPIKE_SEED=7).
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .corpus_io import (
    CorpusFormatError,
    EmptyResultError,
    load_analogies,
    load_embeddings,
    load_simlex,
    load_wordlist,
    restrict,
)
from .evaluator import full_report
from .quantizer import TernarySet, load_ternary, quantize_all, save_ternary
from .spike_codec import (
    CodecConfig,
    ConfigError,
    PRESETS,
    SpikeRaster,
    decode,
    generate_raster,
    load_codec_config,
    misclassification_probabilities,
    rate_spread,
    rates_from_ternary,
    read_raster_jsonl,
    suggest_threshold,
    write_counts_csv,
    write_raster_jsonl,
)

ENV_PREFIX = "WORD2SPIKE_"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_EMPTY = 3
EXIT_CONFIG = 4


def _env(name: str) -> str | None:
    return os.environ.get(ENV_PREFIX + name.upper())


def _atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".w2s-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_writer(path: str, write_fn) -> None:
    """Run write_fn against a temp path, then atomically rename into place."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".w2s-", suffix=".tmp")
    os.close(fd)
    try:
        write_fn(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def write_manifest(out_dir: str, cfg: CodecConfig | None, inputs: dict[str, str]) -> None:
    manifest = {
        "command": sys.argv,
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config": dataclasses.asdict(cfg) if cfg is not None else None,
        "seed": cfg.seed if cfg is not None else None,
        "inputs": {os.path.basename(p): _sha256(p) for p in inputs.values() if p},
    }
    _atomic_write_text(os.path.join(out_dir, "manifest.json"), json.dumps(manifest, indent=2) + "\n")


def build_config(args) -> CodecConfig:
    """Resolve the codec config: preset or file base, then flag overrides."""
    if getattr(args, "preset", None) and getattr(args, "config", None):
        raise ConfigError("--preset and --config are mutually exclusive")
    if getattr(args, "preset", None):
        base = PRESETS[args.preset]
    elif getattr(args, "config", None):
        base = load_codec_config(args.config)
    else:
        base = CodecConfig()

    overrides = {}
    seed_given = bool(args.config) and "seed" in _config_file_keys(args.config)
    if args.window_ms is not None:
        overrides["window_s"] = args.window_ms / 1000.0
    if args.rate_plus is not None:
        overrides["rate_plus_hz"] = args.rate_plus
    if args.rate_minus is not None:
        overrides["rate_minus_hz"] = args.rate_minus
    if args.threshold is not None:
        overrides["threshold_hz"] = args.threshold
    if args.mode is not None:
        overrides["mode"] = args.mode
    if args.seed is not None:
        overrides["seed"] = args.seed
        seed_given = True
    cfg = dataclasses.replace(base, **overrides)

    if cfg.mode == "stochastic" and args.needs_seed and not seed_given:
        raise ConfigError(
            "stochastic mode requires an explicit --seed (or WORD2SPIKE_SEED); "
            "refusing to run with silent nondeterminism"
        )
    return cfg


def _config_file_keys(path: str) -> list[str]:
    keys = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if "=" in line:
                keys.append(line.split("=")[0].strip())
    return keys


def _load_input_set(args):
    es = load_embeddings(args.embeddings, lowercase=args.lowercase)
    missing = 0
    if args.wordlist:
        wl = load_wordlist(args.wordlist, lowercase=args.lowercase)
        es, missing = restrict(es, wl)
    return es, missing


def cmd_quantize(args) -> int:
    es, missing = _load_input_set(args)
    ternary = quantize_all(es, normalize=args.normalize)
    os.makedirs(args.out_dir, exist_ok=True)
    out = os.path.join(args.out_dir, "ternary.txt")
    gammas = os.path.join(args.out_dir, "gammas.txt")
    def write_gammas(tmp: str) -> None:
        with open(tmp, "w", encoding="utf-8") as fh:
            for w, g in zip(ternary.words, ternary.gammas):
                fh.write(f"{w} {float(g)!r}\n")

    _atomic_writer(out, lambda tmp: save_ternary(ternary, tmp))
    _atomic_writer(gammas, write_gammas)
    write_manifest(args.out_dir, None, {"embeddings": args.embeddings, "wordlist": args.wordlist})
    print(f"quantized {len(ternary)} words (dim {ternary.dim}), {missing} wordlist misses")
    return EXIT_OK


def _encode_rasters(ternary: TernarySet, cfg: CodecConfig, threads: int) -> list[SpikeRaster]:
    def one(i: int) -> SpikeRaster:
        return generate_raster(rates_from_ternary(ternary.values[i], cfg), cfg, stream_id=i)

    if threads <= 1:
        return [one(i) for i in range(len(ternary))]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(len(ternary))))


def cmd_encode(args) -> int:
    cfg = build_config(args)
    if args.ternary:
        ternary = load_ternary(args.ternary)
    else:
        es, _ = _load_input_set(args)
        ternary = quantize_all(es, normalize=args.normalize)
    rasters = _encode_rasters(ternary, cfg, args.threads)

    os.makedirs(args.out_dir, exist_ok=True)
    out = os.path.join(args.out_dir, "rasters.jsonl")
    _atomic_writer(out, lambda tmp: write_raster_jsonl(tmp, ternary.words, rasters))
    if args.counts:
        counts = os.path.join(args.out_dir, "counts.csv")
        _atomic_writer(counts, lambda tmp: write_counts_csv(tmp, ternary.words, rasters))
    if args.plot_word:
        _plot_raster(args, ternary.words, rasters)
    write_manifest(
        args.out_dir, cfg, {"embeddings": args.embeddings, "ternary": args.ternary, "wordlist": args.wordlist}
    )
    print(f"encoded {len(ternary)} words -> {out}")
    return EXIT_OK


def _plot_raster(args, words, rasters) -> None:
    try:
        import matplotlib
        matplotlib.use("svg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise CorpusFormatError("matplotlib is required for --plot-word") from exc
    if args.plot_word not in words:
        raise EmptyResultError(f"--plot-word {args.plot_word!r} not in vocabulary")
    raster = rasters[list(words).index(args.plot_word)]
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.eventplot([t * 1000.0 for t in raster.trains], linewidths=0.8, colors="black")
    ax.set_xlabel("time (ms)")
    ax.set_ylabel("dimension")
    ax.set_title(f"spike raster: {args.plot_word}")
    path = os.path.join(args.out_dir, f"raster_{args.plot_word}.svg")
    _atomic_writer(path, lambda tmp: fig.savefig(tmp, format="svg"))
    plt.close(fig)


def cmd_decode(args) -> int:
    cfg = build_config(args)
    words, rasters = read_raster_jsonl(args.rasters)
    if not words:
        raise EmptyResultError(f"{args.rasters}: no raster records")
    decoded = np.stack([decode(r, cfg).values for r in rasters])
    ternary = TernarySet(tuple(words), decoded, gammas=None)
    os.makedirs(args.out_dir, exist_ok=True)
    out = os.path.join(args.out_dir, "decoded.txt")
    _atomic_writer(out, lambda tmp: save_ternary(ternary, tmp))
    write_manifest(args.out_dir, cfg, {"rasters": args.rasters})
    print(f"decoded {len(words)} words -> {out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = build_config(args)
    analysis = misclassification_probabilities(cfg)
    spread = rate_spread(cfg)
    best_hz, best_err = suggest_threshold(cfg)

    lines = [
        f"window: {cfg.window_s * 1000:.0f} ms   rates: +1 -> {cfg.rate_plus_hz} Hz, "
        f"-1 -> {cfg.rate_minus_hz} Hz   threshold: {cfg.threshold_hz} Hz "
        f"(count >= {analysis.count_threshold})",
        "",
        "rate spread (mean +/- 1 sd):",
    ]
    for level in ("+1", "-1"):
        mean, sd = spread[level]
        lines.append(f"  {level}: {mean:.1f} +/- {sd:.2f} Hz")
    lines += [
        "",
        "exact misclassification probabilities:",
        f"  P(-1 decoded as +1) = {analysis.p_minus_as_plus:.6g}",
        f"  P(-1 decoded as  0) = {analysis.p_minus_as_zero:.6g}",
        f"  P(+1 decoded as -1) = {analysis.p_plus_as_minus:.6g}",
        f"  P(+1 decoded as  0) = {analysis.p_plus_as_zero:.6g}",
        f"  total per-dimension error (sum of level errors) = {analysis.total_error:.6g}",
        "",
        f"suggested threshold: {best_hz:.1f} Hz (total error {best_err:.6g})",
    ]
    if args.composition:
        n_plus, n_minus, n_zero = args.composition
        word_err = analysis.expected_word_error(n_plus, n_minus, n_zero)
        lines.append(
            f"expected word error for composition (+1 x{n_plus}, -1 x{n_minus}, "
            f"0 x{n_zero}) = {word_err:.6g}"
        )
    print("\n".join(lines))

    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        payload = dataclasses.asdict(analysis)
        payload.update(
            rate_spread=spread,
            suggested_threshold_hz=best_hz,
            suggested_threshold_error=best_err,
            total_error=analysis.total_error,
        )
        _atomic_write_text(
            os.path.join(args.out_dir, "analysis.json"), json.dumps(payload, indent=2) + "\n"
        )
        write_manifest(args.out_dir, cfg, {})
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = build_config(args)
    es, _ = _load_input_set(args)
    pairs = load_simlex(args.simlex, lowercase=args.lowercase) if args.simlex else None
    quads = load_analogies(args.analogies, lowercase=args.lowercase) if args.analogies else None
    report = full_report(es, cfg, pairs=pairs, quads=quads)

    os.makedirs(args.out_dir, exist_ok=True)
    _atomic_write_text(os.path.join(args.out_dir, "report.json"), report.to_json() + "\n")
    _atomic_write_text(os.path.join(args.out_dir, "report.txt"), report.to_table() + "\n")
    write_manifest(
        args.out_dir,
        cfg,
        {
            "embeddings": args.embeddings,
            "wordlist": args.wordlist,
            "simlex": args.simlex,
            "analogies": args.analogies,
        },
    )
    print(report.to_table())
    return EXIT_OK


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=_env("config"), help="key-value config file")
    p.add_argument("--preset", choices=sorted(PRESETS), default=_env("preset"))
    p.add_argument("--mode", choices=("stochastic", "lossless"), default=_env("mode"))
    p.add_argument("--seed", type=int, default=_int_env("seed"))
    p.add_argument("--window-ms", type=float, default=_float_env("window_ms"))
    p.add_argument("--rate-plus", type=float, default=_float_env("rate_plus"))
    p.add_argument("--rate-minus", type=float, default=_float_env("rate_minus"))
    p.add_argument("--threshold", type=float, default=_float_env("threshold"))


def _int_env(name: str) -> int | None:
    raw = _env(name)
    return int(raw) if raw is not None else None


def _float_env(name: str) -> float | None:
    raw = _env(name)
    return float(raw) if raw is not None else None


def _add_corpus_flags(p: argparse.ArgumentParser, embeddings_required: bool = True) -> None:
    p.add_argument("--embeddings", required=embeddings_required and _env("embeddings") is None,
                   default=_env("embeddings"))
    p.add_argument("--wordlist", default=_env("wordlist"))
    p.add_argument("--lowercase", action="store_true")
    p.add_argument("--normalize", action="store_true",
                   help="L2-normalize vectors before quantization")


def _parse_composition(raw: str) -> tuple[int, int, int]:
    parts = raw.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("composition must be n_plus,n_minus,n_zero")
    return tuple(int(p) for p in parts)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="word2spike",
        description="Rate-coded Poisson spike codec for word embeddings",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("quantize", help="ternarize an embedding file")
    _add_corpus_flags(p)
    p.add_argument("--out-dir", default=_env("out_dir") or ".")
    p.set_defaults(func=cmd_quantize, needs_seed=False)

    p = sub.add_parser("encode", help="generate spike rasters")
    _add_corpus_flags(p, embeddings_required=False)
    p.add_argument("--ternary", default=_env("ternary"), help="pre-quantized input instead of --embeddings")
    _add_config_flags(p)
    p.add_argument("--out-dir", default=_env("out_dir") or ".")
    p.add_argument("--threads", type=int, default=_int_env("threads") or 1)
    p.add_argument("--counts", action="store_true", help="also write counts.csv")
    p.add_argument("--plot-word", default=None, help="render one word's raster to SVG")
    p.set_defaults(func=cmd_encode, needs_seed=True)

    p = sub.add_parser("decode", help="decode rasters back to ternary codes")
    p.add_argument("--rasters", required=_env("rasters") is None, default=_env("rasters"))
    _add_config_flags(p)
    p.add_argument("--out-dir", default=_env("out_dir") or ".")
    p.set_defaults(func=cmd_decode, needs_seed=False)

    p = sub.add_parser("analyze", help="exact decode-error analysis for a config")
    _add_config_flags(p)
    p.add_argument("--composition", type=_parse_composition, default=None,
                   help="n_plus,n_minus,n_zero for expected word error")
    p.add_argument("--out-dir", default=_env("out_dir"))
    p.set_defaults(func=cmd_analyze, needs_seed=False)

    p = sub.add_parser("eval", help="full metric report over three representations")
    _add_corpus_flags(p)
    p.add_argument("--simlex", default=_env("simlex"))
    p.add_argument("--analogies", default=_env("analogies"))
    _add_config_flags(p)
    p.add_argument("--out-dir", default=_env("out_dir") or ".")
    p.set_defaults(func=cmd_eval, needs_seed=True)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "encode" and not args.ternary and not args.embeddings:
            raise CorpusFormatError("encode needs --embeddings or --ternary")
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EmptyResultError as exc:
        print(f"empty result: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except (CorpusFormatError, FileNotFoundError, IsADirectoryError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
