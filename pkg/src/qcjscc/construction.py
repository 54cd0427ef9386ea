"""Lifted QC code construction: base graph, circulant shifts, girth check.

The base graph is a (ms+mc) x (ns+nc) binary template partitioned as

    [ Hs | HL ]      HL = [0 | I], one identity column group per source
    [ 0  | Hc ]      check-node group, pairing it with a channel bit group

and lifted by a factor z: each 1 becomes a circulant permutation block
whose shift is drawn from a per-row Golomb ruler so the expanded Tanner
graph has no 4-cycles. Default profile: ms=20, mc=30, ns=40, nc=50, z=160.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gf2 import ZERO, expand_circulant, gf2_rank

FILE_MAGIC = "JSCC-QC v1"


class ConstructionInfeasible(RuntimeError):
    pass


class ParseError(ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


@dataclass(frozen=True)
class BaseGraph:
    """Binary template matrix with the (source | link ; 0 | channel) partition."""

    matrix: np.ndarray
    source_rows: int = 20
    channel_rows: int = 30
    source_cols: int = 40
    channel_cols: int = 50

    def __post_init__(self):
        m = np.ascontiguousarray(self.matrix, dtype=np.uint8)
        object.__setattr__(self, "matrix", m)
        ms, mc, ns, nc = self.dims
        if m.shape != (ms + mc, ns + nc):
            raise ValueError(f"matrix shape {m.shape} != partition {(ms + mc, ns + nc)}")
        if m.max(initial=0) > 1:
            raise ValueError("base graph entries must be 0/1")
        if ms > nc:
            raise ValueError("link identity does not fit in the channel columns")
        link = m[:ms, ns:]
        expect = np.zeros((ms, nc), dtype=np.uint8)
        expect[:, nc - ms :] = np.eye(ms, dtype=np.uint8)
        if not np.array_equal(link, expect):
            raise ValueError("link region must be [0 | I]")
        if m[ms:, :ns].any():
            raise ValueError("lower-left block must be all zero")
        if not (m[:ms, :ns].sum(axis=1) >= 1).all() or not (
            m[:ms, :ns].sum(axis=0) >= 1
        ).all():
            raise ValueError("source partition has an empty row or column")
        if not (m[ms:, ns:].sum(axis=1) >= 1).all() or not (
            m[ms:, ns:].sum(axis=0) >= 1
        ).all():
            raise ValueError("channel partition has an empty row or column")

    @property
    def dims(self) -> tuple:
        return (self.source_rows, self.channel_rows, self.source_cols, self.channel_cols)


@dataclass(frozen=True)
class QcCode:
    """A lifted code: base graph, lifting factor, and circulant shift table."""

    base: BaseGraph
    z: int
    shifts: np.ndarray

    def __post_init__(self):
        s = np.ascontiguousarray(self.shifts, dtype=np.int32)
        object.__setattr__(self, "shifts", s)
        if self.z < 1:
            raise ValueError("lifting factor must be positive")
        m = self.base.matrix
        if s.shape != m.shape:
            raise ValueError("shift table shape does not match the base graph")
        if ((m == 0) != (s == ZERO)).any():
            raise ValueError("shift table zero pattern does not match the base graph")
        active = s[m == 1]
        if active.size and (active.min() < 0 or active.max() >= self.z):
            raise ValueError(f"shifts must lie in [0, {self.z})")
        ms, _, ns, nc = self.base.dims
        link = s[:ms, ns + nc - ms :]
        if (link[np.eye(ms, dtype=bool)] != 0).any():
            raise ValueError("link identity blocks must have shift 0")

    @property
    def n_source(self) -> int:
        return self.base.source_cols * self.z

    @property
    def n_compressed(self) -> int:
        return self.base.source_rows * self.z

    @property
    def n_code(self) -> int:
        return self.base.channel_cols * self.z

    @property
    def n_parity(self) -> int:
        return self.n_code - self.n_compressed


def _pick_rows(rng, degree, row_weight, used_pairs, forbidden_pairs, excluded=frozenset(), tries=200):
    """Choose `degree` rows balancing weight while avoiding repeated row pairs."""
    nrows = len(row_weight)
    for _ in range(tries):
        chosen = []
        pool = [r for r in range(nrows) if r not in excluded]
        order = sorted(pool, key=lambda r: (row_weight[r], rng.random()))
        for r in order:
            if all(
                (min(r, c), max(r, c)) not in used_pairs
                and (min(r, c), max(r, c)) not in forbidden_pairs
                for c in chosen
            ):
                chosen.append(r)
                if len(chosen) == degree:
                    break
        if len(chosen) == degree:
            return chosen
    raise ConstructionInfeasible("cannot place column without a base-graph 4-cycle")


def default_base_graph(
    seed: int, *, dims=(20, 30, 40, 50), source_degrees=(2, 3, 3, 3), channel_degree: int = 2
) -> BaseGraph:
    """Seeded PEG-style base graph honoring the partition invariants.

    Source columns split over the degrees in `source_degrees` in
    proportion to how often each value appears there (random column
    order); channel information columns get weight `channel_degree`.
    Columns are placed greedily to balance row weights while keeping the
    base graph free of 4-cycles, and the channel parity block is
    dual-diagonal so the lifted H1 is block lower-triangular and
    therefore invertible.

    The default profile mixes degree-2 and degree-3 source columns:
    uniform degree 3 converges error-free below -2 dB, uniform degree 2
    has a high error floor, and the 1:3 mix puts the waterfall of the
    joint decoder inside the -2..0 dB evaluation window. When they fit,
    the minimum-degree columns are placed on pairwise disjoint rows, so
    no source check touches two of them. Chains of degree-2 variables
    through shared checks are weak spots for the quantized engine: its
    LLR range is only ~2.4x the source prior, so a correcting message
    dies out after two hops along such a chain and a noiseless frame can
    stall in a stable wrong fixed point. Keeping the degree-2 columns
    row-disjoint removes those chains.
    """
    ms, mc, ns, nc = dims
    rng = np.random.default_rng(seed)
    m = np.zeros((ms + mc, ns + nc), dtype=np.uint8)
    # link identity
    m[:ms, ns + nc - ms :] = np.eye(ms, dtype=np.uint8)

    # source block: ns columns with the mixed degree profile into ms rows
    used = set()
    weights = [0] * ms
    degrees = [source_degrees[i * len(source_degrees) // ns] for i in range(ns)]
    rng.shuffle(degrees)
    low = min(degrees)
    # keep minimum-degree columns on disjoint rows where that is possible
    spread_low = len(set(degrees)) > 1 and degrees.count(low) * low <= ms
    low_rows: set = set()
    for col in sorted(range(ns), key=lambda c: degrees[c]):
        excluded = low_rows if spread_low and degrees[col] == low else frozenset()
        rows = _pick_rows(rng, degrees[col], weights, used, set(), excluded)
        if degrees[col] == low:
            low_rows.update(rows)
        for a in rows:
            weights[a] += 1
            m[a, col] = 1
        for i, a in enumerate(rows):
            for b in rows[i + 1 :]:
                used.add((min(a, b), max(a, b)))

    # channel parity block: dual diagonal over the first (nc - ms) columns
    npar = nc - ms
    for i in range(npar):
        m[ms + i, ns + i] = 1
        if i + 1 < mc:
            m[ms + i + 1, ns + i] = 1
    forbidden = {(i, i + 1) for i in range(npar - 1)}

    # channel information columns (the compressed-bit groups)
    used_c = set()
    weights_c = [int(m[ms + r, ns : ns + npar].sum()) for r in range(mc)]
    for col in range(ns + npar, ns + nc):
        rows = _pick_rows(rng, channel_degree, weights_c, used_c, forbidden)
        for a in rows:
            weights_c[a] += 1
            m[ms + a, col] = 1
        for i, a in enumerate(rows):
            for b in rows[i + 1 :]:
                used_c.add((min(a, b), max(a, b)))
    return BaseGraph(m, *dims)


def _golomb_ruler(rng, size: int, z: int, tries: int = 400) -> list:
    """Greedy Golomb ruler mod z containing 0 (all pairwise diffs distinct)."""
    for _ in range(tries):
        ruler = [0]
        diffs = set()
        candidates = rng.permutation(np.arange(1, z))
        for c in candidates:
            new = set()
            ok = True
            for r in ruler:
                d1, d2 = (c - r) % z, (r - c) % z
                if d1 in diffs or d2 in diffs or d1 in new or d2 in new or d1 == 0:
                    ok = False
                    break
                new.update((d1, d2))
            if ok:
                ruler.append(int(c))
                diffs |= new
                if len(ruler) == size:
                    return ruler
    raise ConstructionInfeasible(
        f"no Golomb ruler of order {size} exists mod {z} (z too small)"
    )


def assign_shifts(
    base: BaseGraph, z: int, seed: int, max_attempts: int = 50, require_girth: bool = True
) -> QcCode:
    """Assign per-row Golomb-ruler shifts; retries until the girth check passes.

    With require_girth=False the shifts are drawn uniformly instead (the
    link identity stays pinned to 0) and 4-cycles are tolerated. Small
    lifting factors cannot host Golomb rulers of the needed order, so this
    is the only way to get toy-scale codes for oracle tests.
    """
    if z < 4:
        raise ConstructionInfeasible(f"lifting factor {z} < 4")
    ms, mc, ns, nc = base.dims
    m = base.matrix
    for attempt in range(max_attempts if require_girth else 1):
        rng = np.random.default_rng(np.random.SeedSequence([seed, attempt]))
        shifts = np.full(m.shape, ZERO, dtype=np.int32)
        for r in range(m.shape[0]):
            cols = list(np.flatnonzero(m[r]))
            # the link identity column (present in every source row) is pinned to 0
            link_col = ns + nc - ms + r if r < ms else -1
            if require_girth:
                ruler = _golomb_ruler(rng, len(cols), z)
                values = [v for v in ruler if not (v == 0 and link_col in cols)]
                rng.shuffle(values)
            else:
                values = [int(v) for v in rng.integers(0, z, size=len(cols))]
            for c in cols:
                shifts[r, c] = 0 if c == link_col else values.pop()
        code = QcCode(base, z, shifts)
        if not require_girth or check_girth(code):
            return code
    raise ConstructionInfeasible(
        f"no 4-cycle-free shift assignment found in {max_attempts} attempts"
    )


def check_girth(code: QcCode) -> bool:
    """True iff the expanded Tanner graph has no 4-cycles.

    Standard circulant condition: for every pair of rows and pair of
    columns where all four blocks are nonzero, the alternating shift sum
    must be nonzero mod z.
    """
    m = code.base.matrix
    s = code.shifts.astype(np.int64)
    nrows = m.shape[0]
    for j1 in range(nrows):
        for j2 in range(j1 + 1, nrows):
            common = np.flatnonzero(m[j1] & m[j2])
            if len(common) < 2:
                continue
            d = (s[j1, common] - s[j2, common]) % code.z
            if len(np.unique(d)) < len(d):
                return False
    return True


def expand(code: QcCode) -> tuple:
    """Expand to the dense (Hs, Hc) pair used for encoding and oracles."""
    ms, mc, ns, nc = code.base.dims
    z = code.z

    def region(rows, cols):
        out = np.zeros((len(rows) * z, len(cols) * z), dtype=np.uint8)
        for bi, r in enumerate(rows):
            for bj, c in enumerate(cols):
                if code.base.matrix[r, c]:
                    out[bi * z : (bi + 1) * z, bj * z : (bj + 1) * z] = expand_circulant(
                        z, int(code.shifts[r, c])
                    )
        return out

    hs = region(range(ms), range(ns))
    hc = region(range(ms, ms + mc), range(ns, ns + nc))
    return hs, hc


def serialize(code: QcCode) -> str:
    rows, cols = code.base.matrix.shape
    lines = [f"{FILE_MAGIC} z={code.z} rows={rows} cols={cols}"]
    for r in code.base.matrix:
        lines.append("".join(str(int(b)) for b in r))
    for r in code.shifts:
        lines.append(" ".join(str(int(v)) for v in r))
    return "\n".join(lines) + "\n"


def parse(text: str) -> QcCode:
    lines = text.splitlines()
    if not lines:
        raise ParseError(1, "empty file")
    header = lines[0].split()
    if " ".join(header[:2]) != FILE_MAGIC or len(header) != 5:
        raise ParseError(1, f"bad header {lines[0]!r}")
    try:
        z = int(header[2].removeprefix("z="))
        rows = int(header[3].removeprefix("rows="))
        cols = int(header[4].removeprefix("cols="))
    except ValueError:
        raise ParseError(1, f"unparsable header fields in {lines[0]!r}") from None
    if rows % 5 or cols % 9:
        raise ParseError(1, f"dimensions {rows}x{cols} do not fit the 2:3 / 4:5 partition")
    dims = (2 * rows // 5, 3 * rows // 5, 4 * cols // 9, 5 * cols // 9)
    if len(lines) < 1 + 2 * rows:
        raise ParseError(len(lines) + 1, f"expected {1 + 2 * rows} lines, file is shorter")
    base = np.zeros((rows, cols), dtype=np.uint8)
    for i in range(rows):
        line = lines[1 + i].strip()
        if len(line) != cols or set(line) - {"0", "1"}:
            raise ParseError(2 + i, f"base row must be {cols} chars of 0/1")
        base[i] = [int(c) for c in line]
    shifts = np.zeros((rows, cols), dtype=np.int32)
    for i in range(rows):
        parts = lines[1 + rows + i].split()
        if len(parts) != cols:
            raise ParseError(2 + rows + i, f"expected {cols} shift values, got {len(parts)}")
        for j, p in enumerate(parts):
            try:
                v = int(p)
            except ValueError:
                raise ParseError(2 + rows + i, f"column {j}: not an integer: {p!r}") from None
            if v != ZERO and not 0 <= v < z:
                raise ParseError(2 + rows + i, f"column {j}: shift {v} outside [0, {z})")
            shifts[i, j] = v
    try:
        return QcCode(BaseGraph(base, *dims), z, shifts)
    except ValueError as exc:
        raise ParseError(1, f"invariant violation: {exc}") from None


def build_code(
    seed: int = 1, z: int = 160, max_retries: int = 25, require_girth: bool = True
) -> QcCode:
    """Construct a full code: seeded base graph, shifts, verified-invertible H1."""
    base = default_base_graph(seed)
    ms, mc, ns, nc = base.dims
    npar = (nc - ms) * z
    for attempt in range(max_retries):
        code = assign_shifts(base, z, seed + 1000 * attempt, require_girth=require_girth)
        _, hc = expand(code)
        if gf2_rank(hc[:, :npar]) == npar:
            return code
    raise ConstructionInfeasible(f"H1 singular for {max_retries} shift draws")
