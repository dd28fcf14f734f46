"""Command-line interface: tokenize, detokenize, report, scape, challenge,
train-model, generate.

Every output file starts with a provenance header: the full run
configuration (defaults included) and a SHA-256 of each input file, so
identical configuration and inputs yield byte-identical outputs.  All
randomness flows from the single --seed flag.
"""

from __future__ import annotations

import argparse
import hashlib
import shlex
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import challenge as chal
from . import metrics, structure
from .corpus import CorpusError, load_corpus
from .midi import write_midi
from .tokenizer import (
    DEFAULT_VOCABULARY,
    DecodedTimeline,
    TokenGrammarError,
    decode_tokens,
    encode_solo,
    read_tokens,
    repair_token_stream,
)

VOCAB = DEFAULT_VOCABULARY


class CliError(RuntimeError):
    pass


# --- provenance -------------------------------------------------------------


def _hash_file(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def provenance_header(config: dict, inputs: Sequence[Path]) -> list[str]:
    lines = ["# swingbench run"]
    for key in sorted(config):
        lines.append(f"# cfg {key}={config[key]}")
    for path in sorted(inputs):
        lines.append(f"# input {path.name} sha256={_hash_file(path)}")
    return lines


def _fmt(value: float | None, decimals: int) -> str:
    return "NA" if value is None else f"{value:.{decimals}f}"


def _parse_bands(text: str) -> list[tuple[int, int | None]]:
    bands = []
    for part in text.split(","):
        lo_text, _, hi_text = part.partition(":")
        bands.append((int(lo_text), int(hi_text) if hi_text else None))
    return bands


def _band_label(band: tuple[int, int | None]) -> str:
    lo, hi = band
    return f"SI_{lo}_{hi}" if hi is not None else f"SI_{lo}"


# --- piece loading ------------------------------------------------------------


@dataclass
class Piece:
    """One analyzable piece: bar contents, chord changes, and a chroma source."""

    piece_id: str
    bars: list[metrics.BarContent]
    chords: list
    chroma_source: object  # Solo or DecodedTimeline


def _pieces_from_corpus(path: Path) -> tuple[list[Piece], list[Path]]:
    solos = load_corpus(path)
    pieces = [
        Piece(
            piece_id=solo.id,
            bars=metrics.bars_from_solo(solo),
            chords=metrics.chord_changes_from_solo(solo),
            chroma_source=solo,
        )
        for solo in solos
    ]
    return pieces, [path]


def _pieces_from_tokens(token_dir: Path) -> tuple[list[Piece], list[Path]]:
    files = sorted(token_dir.glob("*.tokens"))
    if not files:
        raise CliError(f"no .tokens files under {token_dir}")
    pieces = []
    for file in files:
        timeline = decode_tokens(read_tokens(file, VOCAB), VOCAB)
        pieces.append(
            Piece(
                piece_id=file.stem,
                bars=metrics.bars_from_timeline(timeline),
                chords=timeline.chord_changes(),
                chroma_source=timeline,
            )
        )
    return pieces, files


def _load_pieces(args) -> tuple[list[Piece], list[Path]]:
    if args.corpus:
        return _pieces_from_corpus(Path(args.corpus))
    return _pieces_from_tokens(Path(args.tokens_dir))


def _piece_scape(piece: Piece, args) -> np.ndarray:
    kwargs = dict(
        frame_rate=args.frame_rate,
        threshold=args.tau,
        penalty=args.delta,
        stride=args.stride,
    )
    if isinstance(piece.chroma_source, DecodedTimeline):
        return structure.scape_plot_for_timeline(piece.chroma_source, **kwargs)
    return structure.scape_plot_for_solo(piece.chroma_source, **kwargs)


def _token_sequences(args) -> tuple[list[list[int]], list[str], list[Path]]:
    """Token-id sequences for model training / the challenge."""
    if args.corpus:
        path = Path(args.corpus)
        solos = load_corpus(path)
        seqs = [
            VOCAB.tokens_to_ids(encode_solo(solo, include_structure=not args.no_structure))
            for solo in solos
        ]
        return seqs, [s.id for s in solos], [path]
    token_dir = Path(args.tokens_dir)
    files = sorted(token_dir.glob("*.tokens"))
    if not files:
        raise CliError(f"no .tokens files under {token_dir}")
    seqs = [VOCAB.tokens_to_ids(read_tokens(f, VOCAB)) for f in files]
    return seqs, [f.stem for f in files], files


# --- commands ------------------------------------------------------------------


def cmd_tokenize(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus_path = Path(args.corpus)
    solos = load_corpus(corpus_path)
    config = {
        "command": "tokenize",
        "no_structure": args.no_structure,
        "corpus": corpus_path.name,
    }
    header = provenance_header(config, [corpus_path])

    summary_rows = []
    for solo in solos:
        tokens = encode_solo(solo, include_structure=not args.no_structure)
        token_path = out_dir / f"{solo.id}.tokens"
        with token_path.open("w", encoding="utf-8") as fh:
            for line in header:
                fh.write(line + "\n")
            for tok in tokens:
                fh.write(f"{tok}\n")
        summary_rows.append((solo.id, len(solo.notes), len(solo.beats), len(tokens)))

    VOCAB.save(out_dir / "vocab.tsv")
    total_events = sum(r[3] for r in summary_rows)
    with (out_dir / "summary.tsv").open("w", encoding="utf-8") as fh:
        for line in header:
            fh.write(line + "\n")
        fh.write("solo_id\tnotes\tbeats\tevents\n")
        for row in summary_rows:
            fh.write("\t".join(map(str, row)) + "\n")
        fh.write(
            f"TOTAL\t{sum(r[1] for r in summary_rows)}\t"
            f"{sum(r[2] for r in summary_rows)}\t{total_events}\n"
        )
        fh.write(f"# solos={len(solos)} mean_events_per_solo={total_events / len(solos):.1f}\n")
    print(f"tokenized {len(solos)} solos -> {out_dir}")
    return 0


def cmd_detokenize(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = {"command": "detokenize", "chord_register": args.chord_register}
    for file in [Path(p) for p in args.tokens]:
        timeline = decode_tokens(read_tokens(file, VOCAB), VOCAB)
        target = out_dir / (file.stem + ".mid")
        meta = "; ".join(provenance_header(config, [file]))
        write_midi(timeline, target, chord_register=args.chord_register, meta_text=meta)
        print(f"wrote {target}")
    return 0


def cmd_report(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    pieces, input_files = _load_pieces(args)
    bands = _parse_bands(args.bands)
    config = {
        "command": "report",
        "bands": args.bands,
        "tau": args.tau,
        "delta": args.delta,
        "frame_rate": args.frame_rate,
        "stride": args.stride if args.stride is not None else "auto",
        "chord_collapse": True,
        "entropy_windows": "1,4",
        "scape_images": args.scape_images,
        "source": Path(args.corpus or args.tokens_dir).name,
    }
    header = provenance_header(config, input_files)

    rows = []
    for piece in pieces:
        row = metrics.metric_row(piece.piece_id, piece.bars, piece.chords)
        plot = _piece_scape(piece, args)
        indicators = []
        for lo, hi in bands:
            try:
                indicators.append(structure.structureness_indicator(plot, lo, hi))
            except ValueError:
                indicators.append(None)  # piece shorter than the band
        rows.append((row, indicators))
        if args.scape_images:
            structure.write_scape_pgm(plot, out_dir / f"{piece.piece_id}.pgm")

    report_path = out_dir / "report.tsv"
    band_names = [_band_label(b) for b in bands]
    with report_path.open("w", encoding="utf-8") as fh:
        for line in header:
            fh.write(line + "\n")
        fh.write("piece_id\tH1\tH4\tGS\tCPI\t" + "\t".join(band_names) + "\n")
        for row, indicators in rows:
            cells = [
                row.piece_id,
                _fmt(row.entropy_1bar, 4),
                _fmt(row.entropy_4bar, 4),
                _fmt(row.grooving, 4),
                _fmt(row.chord_irregularity, 2),
                *(_fmt(si, 4) for si in indicators),
            ]
            fh.write("\t".join(cells) + "\n")

        def column_mean(values: Iterable[float | None]) -> float | None:
            defined = [v for v in values if v is not None]
            return float(np.mean(defined)) if defined else None

        mean_cells = [
            "MEAN",
            _fmt(column_mean(r.entropy_1bar for r, _ in rows), 4),
            _fmt(column_mean(r.entropy_4bar for r, _ in rows), 4),
            _fmt(column_mean(r.grooving for r, _ in rows), 4),
            _fmt(column_mean(r.chord_irregularity for r, _ in rows), 2),
            *(
                _fmt(column_mean(ind[i] for _, ind in rows), 4)
                for i in range(len(bands))
            ),
        ]
        fh.write("\t".join(mean_cells) + "\n")
    print(f"wrote {report_path} ({len(pieces)} pieces)")
    return 0


def cmd_scape(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    pieces, _ = _load_pieces(args)
    wanted = {p.piece_id: p for p in pieces}
    if args.piece not in wanted:
        raise CliError(f"piece {args.piece!r} not found; have {sorted(wanted)}")
    piece = wanted[args.piece]
    plot = _piece_scape(piece, args)
    structure.write_scape_text(plot, out_dir / f"{piece.piece_id}.scape.txt")
    structure.write_scape_pgm(plot, out_dir / f"{piece.piece_id}.pgm")
    print(f"wrote scape plot for {piece.piece_id} ({plot.shape[0]} frames)")
    return 0


def _build_model(args, sequences: list[list[int]]):
    if args.model == "uniform":
        return chal.UniformModel(VOCAB.size)
    if args.model == "oracle":
        return chal.CorpusOracleModel(sequences, VOCAB.size)
    if args.model == "external":
        if not args.external_cmd:
            raise CliError("--external-cmd is required with --model external")
        return chal.SubprocessModel(shlex.split(args.external_cmd), VOCAB.size)
    if args.model_file:
        return chal.NGramModel.load(args.model_file)
    return chal.train_ngram(sequences, order=args.order, vocab_size=VOCAB.size, alpha=args.alpha)


def cmd_challenge(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    sequences, _, input_files = _token_sequences(args)
    questions = chal.build_questions(
        sequences, count=args.count, seed=args.seed, bar_token_id=VOCAB.bar_token_id
    )
    model = _build_model(args, sequences)
    try:
        result = chal.run_challenge(model, questions, sampled_prefix=args.sampled_prefix)
    finally:
        if isinstance(model, chal.SubprocessModel):
            model.close()

    config = {
        "command": "challenge",
        "model": args.model,
        "order": args.order,
        "alpha": args.alpha,
        "count": args.count,
        "seed": args.seed,
        "sampled_prefix": args.sampled_prefix,
        "no_structure": args.no_structure,
        "source": Path(args.corpus or args.tokens_dir).name,
    }
    path = out_dir / "challenge.tsv"
    with path.open("w", encoding="utf-8") as fh:
        for line in provenance_header(config, input_files):
            fh.write(line + "\n")
        fh.write("question\tP0\tP1\tP2\tP3\tchosen\ttrue\tcorrect\n")
        for row in result.rows:
            scores = "\t".join(f"{p:.6f}" for p in row["scores"])
            fh.write(
                f"{row['question']}\t{scores}\t{row['chosen']}\t{row['true']}\t"
                f"{int(row['correct'])}\n"
            )
        fh.write(f"# accuracy {result.accuracy:.4f}\n")
    print(f"accuracy {result.accuracy:.4f} over {len(questions)} questions -> {path}")
    return 0


def cmd_train_model(args) -> int:
    sequences, _, _ = _token_sequences(args)
    model = chal.train_ngram(
        sequences, order=args.order, vocab_size=VOCAB.size, alpha=args.alpha
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    model.save(out)
    print(f"trained order-{args.order} model on {len(sequences)} pieces -> {out}")
    return 0


def cmd_generate(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    model = chal.NGramModel.load(args.model_file)
    if model.vocab_size != VOCAB.size:
        raise CliError(
            f"model vocabulary ({model.vocab_size}) does not match this build ({VOCAB.size})"
        )
    config = {
        "command": "generate",
        "model_file": Path(args.model_file).name,
        "bars": args.bars,
        "count": args.count,
        "temperature": args.temperature,
        "seed": args.seed,
    }
    header = provenance_header(config, [Path(args.model_file)])
    for i in range(args.count):
        ids = chal.generate_tokens(
            model,
            primer=[VOCAB.bar_token_id],
            target_bars=args.bars,
            bar_token_id=VOCAB.bar_token_id,
            temperature=args.temperature,
            seed=args.seed + i,
            max_tokens=args.max_tokens,
        )
        tokens, dropped = repair_token_stream(VOCAB.ids_to_tokens(ids), VOCAB)
        path = out_dir / f"gen-{i:03d}.tokens"
        with path.open("w", encoding="utf-8") as fh:
            for line in header:
                fh.write(line + "\n")
            fh.write(f"# piece {i} repaired_drops={dropped}\n")
            for tok in tokens:
                fh.write(f"{tok}\n")
    print(f"generated {args.count} pieces of {args.bars} bars -> {out_dir}")
    return 0


# --- parser --------------------------------------------------------------------


def _add_source_args(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--corpus", help="JSONL corpus file")
    group.add_argument("--tokens-dir", help="directory of .tokens files")
    p.add_argument(
        "--no-structure",
        action="store_true",
        help="drop Phrase/MLU/Part/Rep events when encoding from a corpus",
    )


def _add_scape_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tau", type=float, default=structure.DEFAULT_SSM_THRESHOLD,
                   help="SSM similarity threshold (default %(default)s)")
    p.add_argument("--delta", type=float, default=structure.DEFAULT_SSM_PENALTY,
                   help="penalty replacing sub-threshold similarities (default %(default)s)")
    p.add_argument("--frame-rate", type=float, default=1.0,
                   help="chroma frames per second (default %(default)s)")
    p.add_argument("--stride", type=int, default=None,
                   help="scape grid stride (default: 1, or 2 above 400 frames)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swingbench",
        description="Lead-sheet event codec and objective evaluation battery.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tokenize", help="encode a corpus into token files")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-structure", action="store_true")
    p.set_defaults(fn=cmd_tokenize)

    p = sub.add_parser("detokenize", help="decode token files into MIDI")
    p.add_argument("--tokens", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--chord-register", type=int, default=60)
    p.set_defaults(fn=cmd_detokenize)

    p = sub.add_parser("report", help="full metric table per piece")
    _add_source_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--bands", default="3:8,8:15,15:",
                   help="structureness duration bands lo:hi,... (default %(default)s)")
    p.add_argument("--scape-images", action="store_true")
    _add_scape_args(p)
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("scape", help="scape plot of one piece")
    _add_source_args(p)
    p.add_argument("--piece", required=True)
    p.add_argument("--out", required=True)
    _add_scape_args(p)
    p.set_defaults(fn=cmd_scape)

    p = sub.add_parser("challenge", help="continuation prediction challenge")
    _add_source_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--model", choices=("ngram", "uniform", "oracle", "external"),
                   default="ngram")
    p.add_argument("--model-file", help="pretrained n-gram model JSON")
    p.add_argument("--external-cmd", help="command for the line-protocol model")
    p.add_argument("--order", type=int, default=5)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sampled-prefix", action="store_true",
                   help="condition on sampled tokens instead of teacher forcing")
    p.set_defaults(fn=cmd_challenge)

    p = sub.add_parser("train-model", help="train the n-gram baseline")
    _add_source_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--order", type=int, default=5)
    p.add_argument("--alpha", type=float, default=0.01)
    p.set_defaults(fn=cmd_train_model)

    p = sub.add_parser("generate", help="sample token sequences from a model")
    p.add_argument("--model-file", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--bars", type=int, default=32)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--temperature", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-tokens", type=int, default=20000)
    p.set_defaults(fn=cmd_generate)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (
        CliError,
        CorpusError,
        TokenGrammarError,
        chal.ChallengeError,
        chal.GenerationError,
        chal.ModelProtocolError,
        metrics.MetricError,
        ValueError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
