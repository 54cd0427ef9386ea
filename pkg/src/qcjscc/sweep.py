"""Monte-Carlo BER sweeps over the full transmit/receive chain.

Every frame is seeded by (master seed, point index, frame index), so the
multiset of per-frame outcomes is independent of worker count and batch
size, and both decoding engines see identical source bits and noise.
"""

from __future__ import annotations

import csv
import io
import multiprocessing
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelParams, demodulate_llr, modulate
from .construction import QcCode
from .decoder import DecodeConfig, DecoderGraph, decode_batch
from .encoder import EncoderContext
from .interleaver import InterleaverSpec, deinterleave, interleave

CSV_COLUMNS = ("ebn0_db", "engine", "frames", "bit_errors", "ber", "frame_errors", "avg_iters")


@dataclass(frozen=True)
class SweepConfig:
    ebn0_list: tuple = (-2.0, -1.5, -1.0, -0.5, 0.0)
    source_p: float = 0.04
    frames: int = 100_000
    max_iters: int = 5
    engines: tuple = ("float64", "fixed6")
    seed: int = 1
    rate: float = 0.8
    interleaver: InterleaverSpec | None = None
    workers: int = 1
    batch_size: int = 256

    def __post_init__(self):
        if self.frames < 1:
            raise ValueError("frames must be >= 1")
        if not all(np.isfinite(e) for e in self.ebn0_list):
            raise ValueError("every Eb/N0 point must be finite")
        if self.workers < 1 or self.batch_size < 1:
            raise ValueError("workers and batch_size must be >= 1")


@dataclass
class BerRecord:
    ebn0_db: float
    engine: str
    frames: int
    bit_errors: int
    ber: float
    frame_errors: int
    avg_iters: float


def generate_frames(cfg: SweepConfig, point_idx: int, frame_indices, n_source, n_code, sigma):
    """Per-frame-seeded source bits and noise for a batch of frame indices."""
    sources = np.empty((len(frame_indices), n_source), dtype=np.uint8)
    noise = np.empty((len(frame_indices), n_code))
    for row, i in enumerate(frame_indices):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, point_idx, int(i)]))
        sources[row] = rng.random(n_source) < cfg.source_p
        noise[row] = sigma * rng.standard_normal(n_code)
    return sources, noise


def _decode_chunk(enc: EncoderContext, graph: DecoderGraph, cfg: SweepConfig, point_idx: int, frame_indices):
    params = ChannelParams(cfg.ebn0_list[point_idx], rate=cfg.rate)
    sources, noise = generate_frames(
        cfg, point_idx, frame_indices, graph.n_source, graph.n_code, params.sigma
    )
    ilv = cfg.interleaver
    tx = interleave(sources, ilv) if ilv is not None else sources
    codewords = enc.encode_batch(tx)
    y = modulate(codewords) + noise
    llr = demodulate_llr(y, params)
    counts = {}
    for engine in cfg.engines:
        dcfg = DecodeConfig(max_iters=cfg.max_iters, engine=engine, source_p=cfg.source_p)
        res = decode_batch(llr, graph, dcfg)
        s_hat = deinterleave(res.s_hat, ilv) if ilv is not None else res.s_hat
        errors = (s_hat != sources).sum(axis=1)
        counts[engine] = (
            int(errors.sum()),
            int((errors > 0).sum()),
            int(res.iterations_used.sum()),
        )
    return counts


_WORKER = {}


def _worker_init(code: QcCode, cfg: SweepConfig):
    _WORKER["enc"] = EncoderContext(code)
    _WORKER["graph"] = DecoderGraph(code)
    _WORKER["cfg"] = cfg


def _worker_task(args):
    point_idx, lo, hi = args
    cfg = _WORKER["cfg"]
    return point_idx, _decode_chunk(
        _WORKER["enc"], _WORKER["graph"], cfg, point_idx, range(lo, hi)
    )


def run_sweep(code: QcCode, cfg: SweepConfig, enc: EncoderContext | None = None) -> list:
    """Run the sweep and return one BerRecord per (Eb/N0, engine)."""
    tasks = []
    for point_idx in range(len(cfg.ebn0_list)):
        for lo in range(0, cfg.frames, cfg.batch_size):
            tasks.append((point_idx, lo, min(lo + cfg.batch_size, cfg.frames)))

    totals = {
        (pi, eng): [0, 0, 0] for pi in range(len(cfg.ebn0_list)) for eng in cfg.engines
    }
    if cfg.workers == 1:
        if enc is None:
            enc = EncoderContext(code)
        graph = DecoderGraph(code)
        results = (
            (pi, _decode_chunk(enc, graph, cfg, pi, range(lo, hi))) for pi, lo, hi in tasks
        )
        for point_idx, counts in results:
            for eng, (be, fe, its) in counts.items():
                t = totals[(point_idx, eng)]
                t[0] += be
                t[1] += fe
                t[2] += its
    else:
        with multiprocessing.Pool(
            cfg.workers, initializer=_worker_init, initargs=(code, cfg)
        ) as pool:
            for point_idx, counts in pool.imap_unordered(_worker_task, tasks):
                for eng, (be, fe, its) in counts.items():
                    t = totals[(point_idx, eng)]
                    t[0] += be
                    t[1] += fe
                    t[2] += its

    n_source = code.n_source
    records = []
    for point_idx, ebn0 in enumerate(cfg.ebn0_list):
        for eng in cfg.engines:
            be, fe, its = totals[(point_idx, eng)]
            records.append(
                BerRecord(
                    ebn0_db=float(ebn0),
                    engine=eng,
                    frames=cfg.frames,
                    bit_errors=be,
                    ber=be / (cfg.frames * n_source),
                    frame_errors=fe,
                    avg_iters=its / cfg.frames,
                )
            )
    return records


def records_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow(
            [
                f"{r.ebn0_db:g}",
                r.engine,
                r.frames,
                r.bit_errors,
                f"{r.ber:.8e}",
                r.frame_errors,
                f"{r.avg_iters:.4f}",
            ]
        )
    return buf.getvalue()


def gnuplot_script(csv_path: str) -> str:
    """A plain-text gnuplot script for the sweep CSV (no plotting deps here)."""
    return "\n".join(
        [
            "set datafile separator ','",
            "set logscale y",
            "set xlabel 'Eb/N0 (dB)'",
            "set ylabel 'source BER'",
            "set grid",
            "set key bottom left",
            f"plot '< awk -F, ''$2==\"float64\"'' {csv_path}' using 1:5 with linespoints title 'float64', \\",
            f"     '< awk -F, ''$2==\"fixed6\"'' {csv_path}' using 1:5 with linespoints title 'fixed6'",
            "",
        ]
    )
