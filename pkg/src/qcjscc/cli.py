"""Command-line front end: code generation, frame codec, BER sweeps, image demo.

Exit codes: 0 success, 1 usage error, 2 data error, 3 self-test failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import construction, pbm
from .channel import ChannelParams, add_noise, demodulate_llr, modulate
from .construction import ConstructionInfeasible, ParseError, QcCode
from .decoder import DecodeConfig, DecoderGraph, decode, decode_batch
from .encoder import EncoderContext
from .fixedpoint import Q6, build_tanh_lut, lut_to_hex
from .interleaver import InterleaverSpec, deinterleave, interleave
from .sweep import SweepConfig, gnuplot_script, records_to_csv, run_sweep

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SELFTEST = 0, 1, 2, 3


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _load_code(path) -> QcCode:
    try:
        with open(path) as fh:
            return construction.parse(fh.read())
    except OSError as exc:
        raise DataError(f"cannot read code file: {exc}") from exc
    except ParseError as exc:
        raise DataError(f"{path}: {exc}") from exc


def _read_bits(path, expected=None) -> np.ndarray:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    chars = [c for c in text if not c.isspace()]
    if set(chars) - {"0", "1"}:
        raise DataError(f"{path}: bit files may contain only 0/1 and whitespace")
    bits = np.array([int(c) for c in chars], dtype=np.uint8)
    if expected is not None and bits.size != expected:
        raise DataError(f"{path}: expected {expected} bits, got {bits.size}")
    return bits


def _write_bits(path, bits):
    with open(path, "w") as fh:
        fh.write("".join(str(int(b)) for b in bits) + "\n")


def _interleaver_spec(kind, n, seed) -> InterleaverSpec | None:
    return None if kind == "none" else InterleaverSpec(kind=kind, n=n, seed=seed)


#: accepted --engine spellings, normalized to the DecodeConfig names
_ENGINE_ALIASES = {"float": "float64", "float64": "float64", "q6": "fixed6", "fixed6": "fixed6"}


def _engine(name: str) -> str:
    return _ENGINE_ALIASES[name]


def cmd_construct(args) -> int:
    try:
        code = construction.build_code(
            seed=args.seed, z=args.z, require_girth=not args.allow_4cycles
        )
    except ConstructionInfeasible as exc:
        raise DataError(f"construction infeasible: {exc}") from exc
    with open(args.out, "w") as fh:
        fh.write(construction.serialize(code))
    print(
        f"wrote {args.out}: z={code.z}, "
        f"source H {code.n_compressed}x{code.n_source}, "
        f"channel H {code.n_parity}x{code.n_code}, "
        f"girth>=6: {construction.check_girth(code)}"
    )
    return EXIT_OK


def cmd_encode(args) -> int:
    code = _load_code(args.code)
    enc = EncoderContext(code)
    s = _read_bits(args.infile, expected=code.n_source)
    _write_bits(args.out, enc.encode(s))
    return EXIT_OK


def cmd_decode(args) -> int:
    code = _load_code(args.code)
    try:
        llr = np.loadtxt(args.infile, dtype=np.float64).ravel()
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read LLR file {args.infile}: {exc}") from exc
    if llr.size != code.n_code:
        raise DataError(f"{args.infile}: expected {code.n_code} LLRs, got {llr.size}")
    cfg = DecodeConfig(max_iters=args.max_iters, engine=_engine(args.engine), source_p=args.p)
    res = decode(llr, code, cfg)
    _write_bits(args.out, res.s_hat)
    print(
        f"iterations={res.iterations_used} parity_ok={res.parity_ok} "
        f"source_consistent={res.source_consistent}"
    )
    return EXIT_OK


def cmd_ber_sweep(args) -> int:
    code = _load_code(args.code)
    try:
        ebn0 = tuple(float(v) for v in args.ebn0_list.split(","))
    except ValueError as exc:
        raise DataError(f"bad --ebn0-list: {exc}") from exc
    engines = ("float64", "fixed6") if args.engine == "both" else (_engine(args.engine),)
    cfg = SweepConfig(
        ebn0_list=ebn0,
        source_p=args.p,
        frames=args.frames,
        max_iters=args.max_iters,
        engines=engines,
        seed=args.seed,
        interleaver=_interleaver_spec(args.interleaver, code.n_source, args.seed),
        workers=args.workers,
    )
    records = run_sweep(code, cfg)
    text = records_to_csv(records)
    with open(args.out, "w") as fh:
        fh.write(text)
    print(text, end="")
    return EXIT_OK


def cmd_image_demo(args) -> int:
    code = _load_code(args.code)
    try:
        image = pbm.read_pbm(args.image)
    except (OSError, ValueError) as exc:
        raise DataError(str(exc)) from exc
    if image.size != code.n_source:
        raise DataError(
            f"image is {image.shape[1]}x{image.shape[0]}; need "
            f"{code.n_source} pixels to fill one source frame"
        )
    density = image.mean()
    if density > 0.04:
        print(f"warning: ones-density {density:.4f} exceeds the 0.04 design point", file=sys.stderr)
    s = image.ravel()
    ilv = _interleaver_spec(args.interleaver, code.n_source, args.seed)
    tx = interleave(s, ilv) if ilv is not None else s
    enc = EncoderContext(code)
    params = ChannelParams(args.ebn0, seed=args.seed)
    y = add_noise(modulate(enc.encode(tx)), params)
    cfg = DecodeConfig(max_iters=args.max_iters, engine=_engine(args.engine), source_p=args.p)
    res = decode(demodulate_llr(y, params), code, cfg)
    s_hat = deinterleave(res.s_hat, ilv) if ilv is not None else res.s_hat
    received = s_hat.reshape(image.shape)
    pbm.write_pbm(args.out, received)
    errors = int((received != image).sum())
    print(
        f"ebn0={args.ebn0:g} dB engine={args.engine} pixel_errors={errors} "
        f"iterations={res.iterations_used} parity_ok={res.parity_ok}"
    )
    return EXIT_OK


def cmd_roundtrip(args) -> int:
    code = _load_code(args.code)
    enc = EncoderContext(code)
    graph = DecoderGraph(code)
    rng = np.random.default_rng(args.seed)
    sources = (rng.random((args.frames, code.n_source)) < args.p).astype(np.uint8)
    codewords = enc.encode_batch(sources)
    failures = []
    # channel parity and source consistency of every codeword
    from .gf2 import mat_vec_mul

    for i in range(args.frames):
        if mat_vec_mul(enc.hc, codewords[i]).any():
            failures.append(f"frame {i}: Hc*c != 0")
        if not np.array_equal(enc.compress(sources[i]), codewords[i][code.n_parity :]):
            failures.append(f"frame {i}: b-slice mismatch")
    # noiseless recovery through both engines
    llr = modulate(codewords) * 400.0
    for engine in ("float64", "fixed6"):
        res = decode_batch(llr, graph, DecodeConfig(max_iters=50, engine=engine, source_p=args.p))
        bad = np.flatnonzero((res.s_hat != sources).any(axis=1))
        for i in bad:
            failures.append(f"frame {i}: noiseless {engine} recovery failed")
    if failures:
        for f in failures[:20]:
            print(f"FAIL {f}")
        print(f"roundtrip: {len(failures)} failure(s) over {args.frames} frames")
        return EXIT_SELFTEST
    print(f"roundtrip: all checks passed over {args.frames} frames")
    return EXIT_OK


def cmd_lut_dump(args) -> int:
    text = lut_to_hex(build_tanh_lut(Q6))
    if args.out == "-":
        print(text, end="")
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return EXIT_OK


def cmd_plot_script(args) -> int:
    with open(args.out, "w") as fh:
        fh.write(gnuplot_script(args.csv))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qcjscc", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build a code and write its code file")
    c.add_argument("--seed", type=int, default=1)
    c.add_argument("--z", type=int, default=160)
    c.add_argument(
        "--allow-4cycles",
        action="store_true",
        help="skip the girth requirement (needed for toy lifting factors)",
    )
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_construct)

    c = sub.add_parser("encode", help="encode a source bit file")
    c.add_argument("--code", required=True)
    c.add_argument("--in", dest="infile", required=True)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_encode)

    c = sub.add_parser("decode", help="decode a channel LLR file")
    c.add_argument("--code", required=True)
    c.add_argument("--in", dest="infile", required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--engine", choices=("float64", "fixed6", "float", "q6"), default="float64")
    c.add_argument("--max-iters", type=int, default=50)
    c.add_argument("--p", type=float, default=0.04)
    c.set_defaults(func=cmd_decode)

    c = sub.add_parser("ber-sweep", help="Monte-Carlo BER sweep, CSV output")
    c.add_argument("--code", required=True)
    c.add_argument("--ebn0-list", default="-2,-1.5,-1,-0.5,0")
    c.add_argument("--frames", type=int, default=100_000)
    c.add_argument("--max-iters", type=int, default=5)
    c.add_argument("--engine", choices=("float64", "fixed6", "float", "q6", "both"), default="both")
    c.add_argument("--p", type=float, default=0.04)
    c.add_argument("--seed", type=int, default=1)
    c.add_argument("--interleaver", choices=("none", "regular-uep", "random"), default="none")
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_ber_sweep)

    c = sub.add_parser("image-demo", help="transmit a binary feature image")
    c.add_argument("--code", required=True)
    c.add_argument("--image", required=True)
    c.add_argument("--ebn0", type=float, required=True)
    c.add_argument("--engine", choices=("float64", "fixed6", "float", "q6"), default="float64")
    c.add_argument("--max-iters", type=int, default=50)
    c.add_argument("--p", type=float, default=0.04)
    c.add_argument("--seed", type=int, default=1)
    c.add_argument("--interleaver", choices=("none", "regular-uep", "random"), default="regular-uep")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_image_demo)

    c = sub.add_parser("roundtrip", help="full-chain self test")
    c.add_argument("--code", required=True)
    c.add_argument("--frames", type=int, default=100)
    c.add_argument("--p", type=float, default=0.04)
    c.add_argument("--seed", type=int, default=1)
    c.set_defaults(func=cmd_roundtrip)

    c = sub.add_parser("lut-dump", help="dump the 6-bit tanh LUT as hex text")
    c.add_argument("--out", default="-")
    c.set_defaults(func=cmd_lut_dump)

    c = sub.add_parser("plot-script", help="emit a gnuplot script for a sweep CSV")
    c.add_argument("--csv", required=True)
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_plot_script)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
