import numpy as np
import pytest

from qcjscc import EncoderContext, build_code
from qcjscc.construction import BaseGraph, QcCode, assign_shifts, default_base_graph
from qcjscc.decoder import DecoderGraph

FIXTURES = __file__.rsplit("/", 1)[0] + "/fixtures"


@pytest.fixture(scope="session")
def default_code():
    return build_code(seed=1, z=160)


@pytest.fixture(scope="session")
def default_enc(default_code):
    return EncoderContext(default_code)


@pytest.fixture(scope="session")
def default_graph(default_code):
    return DecoderGraph(default_code)


@pytest.fixture(scope="session")
def toy4_code():
    """Full base graph at lifting factor 4 (160 source bits, 200 code bits).

    z=4 cannot host Golomb rulers of the required order, so the shifts
    are drawn uniformly and 4-cycles are tolerated.
    """
    base = default_base_graph(2)
    return assign_shifts(base, 4, 5, require_girth=False)


@pytest.fixture(scope="session")
def toy4_enc(toy4_code):
    return EncoderContext(toy4_code)


@pytest.fixture(scope="session")
def toy4_graph(toy4_code):
    return DecoderGraph(toy4_code)


def make_micro_code():
    """Hand-built 8-source-bit code: dims (2, 3, 4, 5), z=2."""
    m = np.array(
        [
            # Hs (4 cols)      | parity (3) | link I / b (2)
            [1, 1, 0, 1,         0, 0, 0,     1, 0],
            [0, 1, 1, 1,         0, 0, 0,     0, 1],
            [0, 0, 0, 0,         1, 0, 0,     1, 0],
            [0, 0, 0, 0,         1, 1, 0,     0, 1],
            [0, 0, 0, 0,         0, 1, 1,     1, 1],
        ],
        dtype=np.uint8,
    )
    base = BaseGraph(m, 2, 3, 4, 5)
    rng = np.random.default_rng(11)
    shifts = np.where(m == 1, rng.integers(0, 2, size=m.shape, dtype=np.int32), -1)
    shifts = shifts.astype(np.int32)
    shifts[0, 7] = 0
    shifts[1, 8] = 0
    return QcCode(base, 2, shifts)


@pytest.fixture(scope="session")
def micro_code():
    return make_micro_code()


@pytest.fixture(scope="session")
def micro_enc(micro_code):
    return EncoderContext(micro_code)


@pytest.fixture(scope="session")
def micro_graph(micro_code):
    return DecoderGraph(micro_code)


@pytest.fixture(scope="session")
def micro_codebook(micro_code, micro_enc):
    """All 256 source vectors of the micro code with their codewords."""
    k = micro_code.n_source
    sources = ((np.arange(1 << k)[:, None] >> np.arange(k)) & 1).astype(np.uint8)
    return sources, micro_enc.encode_batch(sources)
