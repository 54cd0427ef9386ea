import numpy as np
import pytest

from qcjscc.cli import main
from qcjscc.construction import parse, serialize
from qcjscc.fixedpoint import Q6, build_tanh_lut, lut_to_hex
from qcjscc.interleaver import InterleaverSpec
from qcjscc.pbm import read_pbm, write_pbm
from qcjscc.sweep import CSV_COLUMNS, BerRecord, SweepConfig, records_to_csv, run_sweep
from conftest import FIXTURES


@pytest.fixture(scope="module")
def toy4_file(tmp_path_factory, toy4_code):
    path = tmp_path_factory.mktemp("codes") / "toy4.code"
    path.write_text(serialize(toy4_code))
    return str(path)


@pytest.fixture(scope="module")
def micro_file(tmp_path_factory, micro_code):
    path = tmp_path_factory.mktemp("codes") / "micro.code"
    path.write_text(serialize(micro_code))
    return str(path)


class TestSweep:
    def test_record_layout_and_determinism(self, toy4_code, toy4_enc):
        cfg = SweepConfig(ebn0_list=(2.0, 6.0), frames=16, max_iters=5, seed=3, batch_size=8)
        records = run_sweep(toy4_code, cfg, enc=toy4_enc)
        assert len(records) == 4  # 2 points x 2 engines
        assert [(r.ebn0_db, r.engine) for r in records] == [
            (2.0, "float64"),
            (2.0, "fixed6"),
            (6.0, "float64"),
            (6.0, "fixed6"),
        ]
        again = run_sweep(toy4_code, cfg, enc=toy4_enc)
        assert records_to_csv(records) == records_to_csv(again)

    def test_batch_size_does_not_change_results(self, toy4_code, toy4_enc):
        base = SweepConfig(ebn0_list=(4.0,), frames=24, max_iters=5, seed=4, batch_size=24)
        split = SweepConfig(ebn0_list=(4.0,), frames=24, max_iters=5, seed=4, batch_size=7)
        a = run_sweep(toy4_code, base, enc=toy4_enc)
        b = run_sweep(toy4_code, split, enc=toy4_enc)
        assert records_to_csv(a) == records_to_csv(b)

    def test_workers_do_not_change_results(self, micro_code):
        serial = SweepConfig(ebn0_list=(4.0,), frames=40, max_iters=5, seed=5, batch_size=10)
        parallel = SweepConfig(
            ebn0_list=(4.0,), frames=40, max_iters=5, seed=5, batch_size=10, workers=2
        )
        a = run_sweep(micro_code, serial)
        b = run_sweep(micro_code, parallel)
        assert records_to_csv(a) == records_to_csv(b)

    def test_interleaver_roundtrips_through_sweep(self, toy4_code, toy4_enc):
        ilv = InterleaverSpec(kind="regular-uep", n=toy4_code.n_source, seed=1)
        cfg = SweepConfig(ebn0_list=(6.0,), frames=16, max_iters=30, seed=6, interleaver=ilv)
        records = run_sweep(toy4_code, cfg, enc=toy4_enc)
        # at 6 dB the toy code corrects everything; interleaving must not break that
        assert all(r.bit_errors == 0 for r in records)

    def test_csv_format(self):
        rec = BerRecord(-2.0, "float64", 100000, 123, 123 / (100000 * 6400), 45, 7.25)
        text = records_to_csv([rec])
        lines = text.splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert lines[1] == "-2,float64,100000,123,1.92187500e-07,45,7.2500"

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SweepConfig(frames=0)
        with pytest.raises(ValueError):
            SweepConfig(ebn0_list=(np.inf,))
        with pytest.raises(ValueError):
            SweepConfig(workers=0)


class TestCli:
    def test_usage_error_exit_code(self, capsys):
        assert main([]) == 1
        assert main(["decode"]) == 1
        assert main(["no-such-command"]) == 1
        capsys.readouterr()

    def test_construct_writes_valid_file(self, tmp_path, capsys):
        out = tmp_path / "toy.code"
        rc = main(["construct", "--z", "8", "--allow-4cycles", "--seed", "2", "--out", str(out)])
        assert rc == 0
        code = parse(out.read_text())
        assert code.z == 8
        assert "girth" in capsys.readouterr().out

    def test_construct_infeasible_z(self, tmp_path, capsys):
        rc = main(["construct", "--z", "2", "--out", str(tmp_path / "x.code")])
        assert rc == 2
        assert "error" in capsys.readouterr().err

    def test_encode_decode_roundtrip(self, tmp_path, capsys, toy4_file, toy4_code):
        rng = np.random.default_rng(1)
        s = (rng.random(toy4_code.n_source) < 0.04).astype(np.uint8)
        sfile = tmp_path / "s.bits"
        sfile.write_text("".join(map(str, s)))
        cfile = tmp_path / "c.bits"
        assert main(["encode", "--code", toy4_file, "--in", str(sfile), "--out", str(cfile)]) == 0
        c = np.array([int(ch) for ch in cfile.read_text().strip()], dtype=np.uint8)
        assert c.size == toy4_code.n_code
        # noiseless LLRs, then decode with each engine spelling
        lfile = tmp_path / "llr.txt"
        np.savetxt(lfile, (1.0 - 2.0 * c) * 400.0)
        for engine in ("float64", "q6"):
            out = tmp_path / f"shat-{engine}.bits"
            rc = main(
                ["decode", "--code", toy4_file, "--in", str(lfile), "--engine", engine,
                 "--out", str(out)]
            )
            assert rc == 0
            s_hat = np.array([int(ch) for ch in out.read_text().strip()], dtype=np.uint8)
            assert np.array_equal(s_hat, s)
        assert "parity_ok=True" in capsys.readouterr().out

    def test_decode_rejects_wrong_length(self, tmp_path, capsys, toy4_file):
        lfile = tmp_path / "short.txt"
        np.savetxt(lfile, np.zeros(7))
        rc = main(["decode", "--code", toy4_file, "--in", str(lfile), "--out", str(tmp_path / "o")])
        assert rc == 2
        capsys.readouterr()

    def test_encode_rejects_bad_bits(self, tmp_path, capsys, toy4_file):
        sfile = tmp_path / "bad.bits"
        sfile.write_text("012")
        rc = main(["encode", "--code", toy4_file, "--in", str(sfile), "--out", str(tmp_path / "o")])
        assert rc == 2
        capsys.readouterr()

    def test_bad_code_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.code"
        bad.write_text("JSCC-QC v1 z=8 rows=5 cols=9\nnonsense\n")
        rc = main(["encode", "--code", str(bad), "--in", str(bad), "--out", str(tmp_path / "o")])
        assert rc == 2
        assert "line" in capsys.readouterr().err

    def test_ber_sweep_csv(self, tmp_path, capsys, toy4_file):
        out = tmp_path / "sweep.csv"
        rc = main(
            ["ber-sweep", "--code", toy4_file, "--ebn0-list", "4", "--frames", "8",
             "--max-iters", "4", "--out", str(out)]
        )
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 3  # both engines
        assert capsys.readouterr().out.splitlines()[0] == lines[0]

    def test_image_demo(self, tmp_path, capsys, toy4_file, toy4_code):
        rng = np.random.default_rng(2)
        img = (rng.random((10, 16)) < 0.03).astype(np.uint8)
        ifile = tmp_path / "img.pbm"
        write_pbm(ifile, img)
        out = tmp_path / "received.pbm"
        rc = main(
            ["image-demo", "--code", toy4_file, "--image", str(ifile), "--ebn0", "6",
             "--out", str(out)]
        )
        assert rc == 0
        assert "pixel_errors=0" in capsys.readouterr().out
        assert np.array_equal(read_pbm(out), img)

    def test_image_demo_wrong_size(self, tmp_path, capsys, toy4_file):
        ifile = tmp_path / "img.pbm"
        write_pbm(ifile, np.zeros((4, 4), dtype=np.uint8))
        rc = main(
            ["image-demo", "--code", toy4_file, "--image", str(ifile), "--ebn0", "0",
             "--out", str(tmp_path / "o.pbm")]
        )
        assert rc == 2
        capsys.readouterr()

    def test_image_demo_density_warning(self, tmp_path, capsys, toy4_file):
        rng = np.random.default_rng(3)
        img = (rng.random((10, 16)) < 0.2).astype(np.uint8)
        ifile = tmp_path / "img.pbm"
        write_pbm(ifile, img)
        rc = main(
            ["image-demo", "--code", toy4_file, "--image", str(ifile), "--ebn0", "6",
             "--out", str(tmp_path / "o.pbm")]
        )
        assert rc == 0
        assert "density" in capsys.readouterr().err

    def test_roundtrip_selftest(self, capsys, micro_file):
        assert main(["roundtrip", "--code", micro_file, "--frames", "20"]) == 0
        assert "all checks passed" in capsys.readouterr().out

    def test_lut_dump_matches_library_and_fixture(self, tmp_path, capsys):
        out = tmp_path / "lut.hex"
        assert main(["lut-dump", "--out", str(out)]) == 0
        assert out.read_text() == lut_to_hex(build_tanh_lut(Q6))
        assert out.read_text() == open(f"{FIXTURES}/tanh_lut_q6.hex").read()
        assert main(["lut-dump"]) == 0
        assert capsys.readouterr().out == out.read_text()

    def test_plot_script(self, tmp_path):
        out = tmp_path / "plot.gp"
        assert main(["plot-script", "--csv", "sweep.csv", "--out", str(out)]) == 0
        assert "logscale" in out.read_text()
