"""Layered joint sum-product decoder over the two-sided Tanner graph.

Per iteration the 30 channel layers run first (variable-node then
check-node update per layer, messages consumed immediately), the
channel-to-source cross messages are refreshed, then the 20 source
layers run with the cross coupling; hard decision and the stopping rule
close the iteration. Both a float64 engine and a 6-bit quantized engine
(integer datapath, LUT check-node core) share this control flow.

Frames are decoded in batches: all per-layer updates are vectorized over
the batch and the 160 checks of a layer, which is what makes large
Monte-Carlo sweeps tractable in numpy.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .construction import QcCode
from .fixedpoint import Q6, FixedFormat, build_tanh_lut, quantize_to_code

#: LLR magnitude cap: tanh(19.07/2) rounds to 1.0 at double precision, so
#: check-node products are clipped to +-tanh(19.07/2) before atanh.
LLR_CLIP = 19.07
_PMAX = math.tanh(LLR_CLIP / 2.0)

ENGINES = ("float64", "fixed6")
SCHEDULES = ("channel-first", "source-first")

_LUT_CACHE: dict = {}


def _cached_lut(fmt: FixedFormat) -> np.ndarray:
    lut = _LUT_CACHE.get(fmt)
    if lut is None:
        lut = build_tanh_lut(fmt).astype(np.int32)
        lut.setflags(write=False)
        _LUT_CACHE[fmt] = lut
    return lut


@dataclass(frozen=True)
class DecodeConfig:
    max_iters: int = 50
    schedule: str = "channel-first"
    early_stop: bool = True
    engine: str = "float64"
    source_p: float = 0.04
    channel_only: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.schedule not in SCHEDULES:
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if self.engine not in ENGINES:
            raise ValueError(f"unknown engine {self.engine!r}")
        if not 0.0 < self.source_p < 0.5:
            raise ValueError("source prior probability must lie in (0, 0.5)")


@dataclass
class DecodeResult:
    s_hat: np.ndarray
    c_hat: np.ndarray
    iterations_used: int
    parity_ok: bool
    source_consistent: bool
    source_llr: np.ndarray
    code_llr: np.ndarray
    trace_sha256: str | None = None


@dataclass
class BatchDecodeResult:
    s_hat: np.ndarray
    c_hat: np.ndarray
    iterations_used: np.ndarray
    parity_ok: np.ndarray
    source_consistent: np.ndarray


class DecoderGraph:
    """Flattened layer structures of a lifted code, shared across frames.

    Neighbor order within every check node is ascending variable-node
    group index; the quantized engine's LUT folds follow this order.
    """

    def __init__(self, code: QcCode):
        self.code = code
        z = code.z
        ms, mc, ns, nc = code.base.dims
        self.z = z
        self.n_source = code.n_source
        self.n_code = code.n_code
        self.n_pair = code.n_compressed
        self.n_parity = code.n_parity
        base = code.base.matrix
        shifts = code.shifts
        t = np.arange(z)

        def layer(row, col_lo, col_hi):
            cols = [c for c in range(col_lo, col_hi) if base[row, c]]
            idx = np.empty((z, len(cols)), dtype=np.int64)
            for e, c in enumerate(cols):
                idx[:, e] = (c - col_lo) * z + (t + shifts[row, c]) % z
            return idx

        self.channel_layers = [layer(ms + r, ns, ns + nc) for r in range(mc)]
        # source layers exclude the link column; the decoder models that edge
        # as the cross-message pair instead
        self.source_layers = [layer(r, 0, ns) for r in range(ms)]


def _extrinsic_products(t: np.ndarray):
    """Per-edge products of all other tanh values plus the full product."""
    prefix = np.cumprod(t, axis=-1)
    suffix = np.cumprod(t[..., ::-1], axis=-1)[..., ::-1]
    ext = np.ones_like(t)
    ext[..., 1:] = prefix[..., :-1]
    ext[..., :-1] *= suffix[..., 1:]
    return ext, prefix[..., -1]


def _alpha_from_products(p: np.ndarray) -> np.ndarray:
    return 2.0 * np.arctanh(np.clip(p, -_PMAX, _PMAX))


class _FloatEngine:
    def __init__(self, llr, graph: DecoderGraph, cfg: DecodeConfig):
        batch = llr.shape[0]
        self.graph = graph
        self.cfg = cfg
        self.prior = math.log((1.0 - cfg.source_p) / cfg.source_p)
        self.acc_cc = llr.astype(np.float64, copy=True)
        self.acc_sc = np.full((batch, graph.n_source), self.prior)
        self.ch_alpha = [np.zeros((batch, graph.z, idx.shape[1])) for idx in graph.channel_layers]
        self.src_alpha = [np.zeros((batch, graph.z, idx.shape[1])) for idx in graph.source_layers]
        self.isc = np.zeros((batch, graph.n_pair))
        self.icc = np.zeros((batch, graph.n_pair))

    def _channel_pass(self):
        for idx, alpha in zip(self.graph.channel_layers, self.ch_alpha):
            flat = idx.ravel()
            beta = self.acc_cc[:, flat].reshape(alpha.shape) - alpha
            ext, _ = _extrinsic_products(np.tanh(0.5 * beta))
            alpha_new = _alpha_from_products(ext)
            self.acc_cc[:, flat] += (alpha_new - alpha).reshape(len(alpha), -1)
            alpha[:] = alpha_new

    def _cross_update(self):
        # full (not extrinsic) channel-side sum: intrinsic LLR plus all C2V
        self.icc = self.acc_cc[:, self.graph.n_parity :] - self.isc

    def _source_pass(self):
        z = self.graph.z
        for j, (idx, alpha) in enumerate(zip(self.graph.source_layers, self.src_alpha)):
            flat = idx.ravel()
            beta = self.acc_sc[:, flat].reshape(alpha.shape) - alpha
            ext, full = _extrinsic_products(np.tanh(0.5 * beta))
            cross = np.tanh(0.5 * self.icc[:, j * z : (j + 1) * z])
            alpha_new = _alpha_from_products(cross[:, :, None] * ext)
            self.acc_sc[:, flat] += (alpha_new - alpha).reshape(len(alpha), -1)
            alpha[:] = alpha_new
            isc_new = _alpha_from_products(full)
            sl = slice(j * z, (j + 1) * z)
            self.acc_cc[:, self.graph.n_parity + j * z : self.graph.n_parity + (j + 1) * z] += (
                isc_new - self.isc[:, sl]
            )
            self.isc[:, sl] = isc_new

    def iterate(self):
        if self.cfg.channel_only:
            self._channel_pass()
        elif self.cfg.schedule == "channel-first":
            self._channel_pass()
            self._cross_update()
            self._source_pass()
        else:
            self._cross_update()
            self._source_pass()
            self._channel_pass()

    def decisions(self):
        return (self.acc_sc < 0).astype(np.uint8), (self.acc_cc < 0).astype(np.uint8)

    def posteriors(self):
        return self.acc_sc, self.acc_cc

    def select(self, keep):
        self.acc_cc = self.acc_cc[keep]
        self.acc_sc = self.acc_sc[keep]
        self.ch_alpha = [a[keep] for a in self.ch_alpha]
        self.src_alpha = [a[keep] for a in self.src_alpha]
        self.isc = self.isc[keep]
        self.icc = self.icc[keep]

    def trace_bytes(self):
        parts = [a.tobytes() for a in self.ch_alpha + self.src_alpha]
        parts += [self.isc.tobytes(), self.icc.tobytes()]
        return b"".join(parts)


class _Q6Engine:
    """Quantized mirror of the float engine.

    Every stored LLR, message, and cross message is a 6-bit code; the
    per-variable accumulators are wider integers (a single VNP sum may
    use a wide accumulator; its outgoing messages saturate on store).
    Check nodes fold the 64x64 tanh LUT left-to-right in neighbor order,
    the source side starting from the incoming cross message.
    """

    def __init__(self, llr, graph: DecoderGraph, cfg: DecodeConfig, fmt: FixedFormat = Q6):
        batch = llr.shape[0]
        self.graph = graph
        self.cfg = cfg
        self.fmt = fmt
        self.lut = _cached_lut(fmt)
        self.off = -fmt.min_code
        prior = int(quantize_to_code(math.log((1.0 - cfg.source_p) / cfg.source_p), fmt))
        self.acc_cc = quantize_to_code(llr, fmt).astype(np.int32)
        self.acc_sc = np.full((batch, graph.n_source), prior, dtype=np.int32)
        self.ch_alpha = [
            np.zeros((batch, graph.z, idx.shape[1]), dtype=np.int32)
            for idx in graph.channel_layers
        ]
        self.src_alpha = [
            np.zeros((batch, graph.z, idx.shape[1]), dtype=np.int32)
            for idx in graph.source_layers
        ]
        self.isc = np.zeros((batch, graph.n_pair), dtype=np.int32)
        self.icc = np.zeros((batch, graph.n_pair), dtype=np.int32)

    def _sat(self, x):
        return np.clip(x, self.fmt.min_code, self.fmt.max_code)

    def _fold_extrinsic(self, beta):
        """Left LUT fold per edge over the other edges, in index order."""
        deg = beta.shape[-1]
        out = np.empty_like(beta)
        for k in range(deg):
            acc = None
            for e in range(deg):
                if e == k:
                    continue
                acc = beta[..., e] if acc is None else self.lut[acc + self.off, beta[..., e] + self.off]
            out[..., k] = self.fmt.max_code if acc is None else acc
        return out

    def _fold_all(self, beta, start=None):
        acc = start
        for e in range(beta.shape[-1]):
            acc = beta[..., e] if acc is None else self.lut[acc + self.off, beta[..., e] + self.off]
        return acc

    def _channel_pass(self):
        for idx, alpha in zip(self.graph.channel_layers, self.ch_alpha):
            flat = idx.ravel()
            beta = self._sat(self.acc_cc[:, flat].reshape(alpha.shape) - alpha)
            alpha_new = self._fold_extrinsic(beta)
            self.acc_cc[:, flat] += (alpha_new - alpha).reshape(len(alpha), -1)
            alpha[:] = alpha_new

    def _cross_update(self):
        self.icc = self._sat(self.acc_cc[:, self.graph.n_parity :] - self.isc)

    def _source_pass(self):
        z = self.graph.z
        for j, (idx, alpha) in enumerate(zip(self.graph.source_layers, self.src_alpha)):
            flat = idx.ravel()
            beta = self._sat(self.acc_sc[:, flat].reshape(alpha.shape) - alpha)
            cross = self.icc[:, j * z : (j + 1) * z]
            deg = beta.shape[-1]
            alpha_new = np.empty_like(beta)
            for k in range(deg):
                acc = cross
                for e in range(deg):
                    if e == k:
                        continue
                    acc = self.lut[acc + self.off, beta[..., e] + self.off]
                alpha_new[..., k] = acc
            self.acc_sc[:, flat] += (alpha_new - alpha).reshape(len(alpha), -1)
            alpha[:] = alpha_new
            isc_new = self._fold_all(beta)
            sl = slice(j * z, (j + 1) * z)
            self.acc_cc[:, self.graph.n_parity + j * z : self.graph.n_parity + (j + 1) * z] += (
                isc_new - self.isc[:, sl]
            )
            self.isc[:, sl] = isc_new

    def iterate(self):
        if self.cfg.channel_only:
            self._channel_pass()
        elif self.cfg.schedule == "channel-first":
            self._channel_pass()
            self._cross_update()
            self._source_pass()
        else:
            self._cross_update()
            self._source_pass()
            self._channel_pass()

    def decisions(self):
        return (self.acc_sc < 0).astype(np.uint8), (self.acc_cc < 0).astype(np.uint8)

    def posteriors(self):
        step = self.fmt.step
        return (
            self._sat(self.acc_sc).astype(np.float64) * step,
            self._sat(self.acc_cc).astype(np.float64) * step,
        )

    def select(self, keep):
        self.acc_cc = self.acc_cc[keep]
        self.acc_sc = self.acc_sc[keep]
        self.ch_alpha = [a[keep] for a in self.ch_alpha]
        self.src_alpha = [a[keep] for a in self.src_alpha]
        self.isc = self.isc[keep]
        self.icc = self.icc[keep]

    def trace_bytes(self):
        parts = [a.astype(np.int8).tobytes() for a in self.ch_alpha + self.src_alpha]
        parts += [self.isc.astype(np.int8).tobytes(), self.icc.astype(np.int8).tobytes()]
        return b"".join(parts)


def _frame_checks(graph: DecoderGraph, s_bits, c_bits):
    batch = c_bits.shape[0]
    parity_ok = np.ones(batch, dtype=bool)
    for idx in graph.channel_layers:
        syndrome = c_bits[:, idx.ravel()].reshape(batch, graph.z, -1).sum(axis=2) & 1
        parity_ok &= ~syndrome.any(axis=1)
    src_ok = np.ones(batch, dtype=bool)
    for j, idx in enumerate(graph.source_layers):
        sums = s_bits[:, idx.ravel()].reshape(batch, graph.z, -1).sum(axis=2)
        b_slice = c_bits[:, graph.n_parity + j * graph.z : graph.n_parity + (j + 1) * graph.z]
        src_ok &= ~(((sums + b_slice) & 1).astype(bool)).any(axis=1)
    return parity_ok, src_ok


def decode_batch(y_llr, graph, config: DecodeConfig | None = None) -> BatchDecodeResult:
    """Decode a batch of frames; rows are independent decoding attempts."""
    if config is None:
        config = DecodeConfig()
    if isinstance(graph, QcCode):
        graph = DecoderGraph(graph)
    y_llr = np.atleast_2d(np.asarray(y_llr, dtype=np.float64))
    if y_llr.shape[1] != graph.n_code:
        raise ValueError(f"expected LLR frames of length {graph.n_code}, got {y_llr.shape[1]}")
    batch = y_llr.shape[0]
    engine_cls = _Q6Engine if config.engine == "fixed6" else _FloatEngine
    eng = engine_cls(y_llr, graph, config)

    s_out = np.zeros((batch, graph.n_source), dtype=np.uint8)
    c_out = np.zeros((batch, graph.n_code), dtype=np.uint8)
    iters = np.full(batch, config.max_iters, dtype=np.int64)
    pok = np.zeros(batch, dtype=bool)
    sok = np.zeros(batch, dtype=bool)
    active = np.arange(batch)

    for it in range(1, config.max_iters + 1):
        eng.iterate()
        s_bits, c_bits = eng.decisions()
        par, src = _frame_checks(graph, s_bits, c_bits)
        done = par if config.channel_only else par & src
        last = it == config.max_iters
        if config.early_stop and not last and done.any():
            idx = active[done]
            s_out[idx], c_out[idx] = s_bits[done], c_bits[done]
            iters[idx] = it
            pok[idx], sok[idx] = par[done], src[done]
            keep = ~done
            active = active[keep]
            eng.select(keep)
            if active.size == 0:
                break
        elif last:
            s_out[active], c_out[active] = s_bits, c_bits
            iters[active] = it
            pok[active], sok[active] = par, src
    return BatchDecodeResult(s_out, c_out, iters, pok, sok)


def decode(y_llr, graph, config: DecodeConfig | None = None, collect_trace: bool = False) -> DecodeResult:
    """Decode one frame of channel LLRs into a :class:`DecodeResult`."""
    if config is None:
        config = DecodeConfig()
    if isinstance(graph, QcCode):
        graph = DecoderGraph(graph)
    y_llr = np.asarray(y_llr, dtype=np.float64).reshape(1, -1)
    if y_llr.shape[1] != graph.n_code:
        raise ValueError(f"expected an LLR frame of length {graph.n_code}, got {y_llr.shape[1]}")
    engine_cls = _Q6Engine if config.engine == "fixed6" else _FloatEngine
    eng = engine_cls(y_llr, graph, config)
    hasher = hashlib.sha256() if collect_trace else None

    it_used = config.max_iters
    par = src = np.array([False])
    for it in range(1, config.max_iters + 1):
        eng.iterate()
        if hasher is not None:
            hasher.update(eng.trace_bytes())
        s_bits, c_bits = eng.decisions()
        par, src = _frame_checks(graph, s_bits, c_bits)
        it_used = it
        done = (par if config.channel_only else par & src)[0]
        if config.early_stop and done:
            break
    lsc, lcc = eng.posteriors()
    if hasher is not None:
        hasher.update(s_bits.tobytes() + c_bits.tobytes())
    return DecodeResult(
        s_hat=s_bits[0],
        c_hat=c_bits[0],
        iterations_used=it_used,
        parity_ok=bool(par[0]),
        source_consistent=bool(src[0]),
        source_llr=lsc[0],
        code_llr=lcc[0],
        trace_sha256=hasher.hexdigest() if hasher is not None else None,
    )
