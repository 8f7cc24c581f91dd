"""Command-line interface: ``gdc-adapter generate`` and ``gdc-adapter encode``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import (
    DEFAULT_DIFFUSION_MODEL,
    DEFAULT_ENCODER,
    AdapterConfig,
)
from .encode import encode_images
from .errors import AdapterError, BackendUnavailable
from .generate import generate_references

EXIT_INPUT = 2
EXIT_BACKEND = 3


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--diffusion-model", default=DEFAULT_DIFFUSION_MODEL)
    parser.add_argument("--encoder", default=DEFAULT_ENCODER)
    parser.add_argument("--generation-size", type=int, default=512)
    parser.add_argument("--encoder-size", type=int, default=224)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--batch-size", type=int, default=8)


def _config(args) -> AdapterConfig:
    return AdapterConfig(
        diffusion_model=args.diffusion_model,
        encoder=args.encoder,
        generation_size=args.generation_size,
        encoder_size=args.encoder_size,
        device=args.device,
        batch_size=args.batch_size,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gdc-adapter",
        description="Generate reference images from a manifest and encode "
                    "image trees into embedding archives.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate",
                         help="manifest -> class-partitioned image tree")
    gen.add_argument("--manifest", required=True)
    gen.add_argument("--out-dir", required=True)
    _add_config_flags(gen)

    enc = sub.add_parser("encode",
                         help="image tree -> GDCE embedding archive")
    enc.add_argument("--images", required=True)
    enc.add_argument("--out", required=True)
    _add_config_flags(enc)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "generate":
            report = generate_references(args.manifest, _config(args),
                                         args.out_dir)
            print(f"generated {report.written} images "
                  f"({report.skipped_existing} already present, "
                  f"{len(report.failures)} failures)")
            return 0 if not report.failures else EXIT_BACKEND
        report = encode_images(args.images, _config(args), args.out)
        total = sum(n for _, n in report.classes)
        print(f"encoded {total} images in {len(report.classes)} classes "
              f"(d={report.d}, {len(report.skipped)} skipped) -> {args.out}")
        return 0
    except BackendUnavailable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (AdapterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
