import json
import subprocess
import sys

import numpy as np
import pytest

from rotrectify import fileio, imaging, metrics
from rotrectify.cli import bench_inputs, main
from rotrectify.pipeline import apply_to_matches

SCENE = ["--points", "40"]


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def _eval_row(capsys, matches, homs):
    capsys.readouterr()
    assert main(["eval", "--matches", str(matches), "--homographies", str(homs)]) == 0
    header, row = capsys.readouterr().out.strip().splitlines()
    assert header == "vae,nvd_left,nvd_right,n"
    vae, nl, nr, n = row.split(",")
    return float(vae), float(nl), float(nr), int(n)


def test_synth_then_eval_truth(workdir, capsys):
    assert main(["synth", "--out-prefix", "s", *SCENE]) == 0
    assert (workdir / "s_matches.csv").read_text().startswith("x1,y1,x2,y2\n")
    vae, nl, nr, n = _eval_row(capsys, "s_matches.csv", "s_truth.json")
    assert vae < 1e-9 and n == 40


def test_synth_is_byte_identical(workdir):
    main(["synth", "--out-prefix", "a"])
    main(["synth", "--out-prefix", "b"])
    for suffix in ("_matches.csv", "_truth.json"):
        assert (workdir / f"a{suffix}").read_bytes() == (workdir / f"b{suffix}").read_bytes()


def test_zero_motion_synth_rows_aligned(workdir):
    main(["synth", "--roll-deg", "0", "--pitch-deg", "0", "--out-prefix", "z"])
    m = np.loadtxt("z_matches.csv", delimiter=",", skiprows=1)
    assert np.array_equal(m[:, 1], m[:, 3])


def test_synth_unrealizable_exit_3(workdir, capsys):
    code = main(["synth", "--focal", "5000", "--roll-deg", "45", "--pitch-deg", "0", "--depth-max", "0.5"])
    assert code == 3
    assert "error:" in capsys.readouterr().err


def test_bad_flag_exit_2(workdir):
    with pytest.raises(SystemExit) as info:
        main(["synth", "--roll-deg", "abc"])
    assert info.value.code == 2
    assert main(["synth", "--roll-deg", "60"]) == 2


def test_round_trip_vae(workdir, capsys):
    main(["synth", "--noise-px", "0.5", "--out-prefix", "s"])
    assert main(["rectify", "--matches", "s_matches.csv", "--width", "960", "--height", "720", "--seed", "3"]) == 0
    doc = json.loads((workdir / "homographies.json").read_text())
    assert set(doc) == {"width", "height", "frame", "H1", "H2", "vae", "nvd"}
    assert doc["frame"] == "centered" and doc["H1"][8] == 1.0
    # full precision through the files, 9 significant digits on stdout
    homs = fileio.read_homographies("homographies.json")
    matches = fileio.read_matches("s_matches.csv", homs["dims"])
    again = metrics.vae(apply_to_matches(homs["H1"], homs["H2"], matches))
    assert abs(again - doc["vae"]) < 1e-9
    vae, nl, nr, _ = _eval_row(capsys, "s_matches.csv", "homographies.json")
    assert vae == pytest.approx(doc["vae"], rel=1e-8)
    assert (nl, nr) == pytest.approx(doc["nvd"], abs=1e-8)


def test_rectify_noiseless_and_deterministic(workdir, capsys):
    main(["synth", "--out-prefix", "s"])
    args = ["rectify", "--matches", "s_matches.csv", "--width", "960", "--height", "720", "--iters", "200"]
    main([*args, "--out", "a.json"])
    main([*args, "--out", "b.json"])
    assert (workdir / "a.json").read_bytes() == (workdir / "b.json").read_bytes()
    assert json.loads((workdir / "a.json").read_text())["vae"] < 1e-6


def test_rectify_two_rows(workdir):
    (workdir / "m.csv").write_text("x1,y1,x2,y2\n100,200,90,210\n600,400,580,380\n")
    assert main(["rectify", "--matches", "m.csv", "--width", "960", "--height", "720"]) == 0
    assert json.loads((workdir / "homographies.json").read_text())["vae"] < 1e-9


def test_rectify_degenerate_exit_4(workdir):
    (workdir / "m.csv").write_text("x1,y1,x2,y2\n100,200,90,210\n100,200,90,210\n")
    assert main(["rectify", "--matches", "m.csv", "--width", "960", "--height", "720"]) == 4


def test_rectify_writes_warped_images(workdir):
    main(["synth", "--width", "160", "--height", "120", "--focal", "150", "--out-prefix", "s"])
    img = imaging.GrayImage(np.random.default_rng(0).integers(0, 256, (120, 160), dtype=np.uint8))
    imaging.write_pgm("l.pgm", img)
    imaging.write_pgm("r.pgm", img)
    args = ["rectify", "--matches", "s_matches.csv", "--width", "160", "--height", "120"]
    assert main([*args, "--left", "l.pgm", "--right", "r.pgm", "--out-prefix", "p"]) == 0
    a, b = imaging.read_pgm("p_left.pgm"), imaging.read_pgm("p_right.pgm")
    assert a.dims == b.dims
    assert main([*args, "--left", "l.pgm"]) == 2
    imaging.write_pgm("small.pgm", imaging.GrayImage(img.pixels[:-1]))
    assert main([*args, "--left", "small.pgm", "--right", "r.pgm"]) == 2


def test_eval_identity_file(workdir, capsys):
    (workdir / "m.csv").write_text("x1,y1,x2,y2\n1,3,5,1\n2,7,9,5\n4,0,4,1\n")
    fileio.write_homographies("id.json", np.eye(3), np.eye(3), (640, 480), 0.0, (0.0, 0.0))
    vae, nl, nr, n = _eval_row(capsys, "m.csv", "id.json")
    assert vae == pytest.approx(5 / 3, abs=1e-8) and (nl, nr, n) == (0.0, 0.0, 3)


def test_eval_frame_mismatch_exit_2(workdir, capsys):
    (workdir / "m.csv").write_text("x1,y1,x2,y2\n1,3,5,1\n2,7,9,5\n")
    fileio.write_homographies("h.json", np.eye(3), np.eye(3), (640, 480), 0.0, (0.0, 0.0))
    doc = json.loads((workdir / "h.json").read_text())
    doc["frame"] = "top-left"
    (workdir / "h.json").write_text(json.dumps(doc))
    assert main(["eval", "--matches", "m.csv", "--homographies", "h.json"]) == 2
    assert "frame" in capsys.readouterr().err


def test_missing_file_names_it(workdir, capsys):
    fileio.write_homographies("h.json", np.eye(3), np.eye(3), (640, 480), 0.0, (0.0, 0.0))
    assert main(["eval", "--matches", "nope.csv", "--homographies", "h.json"]) == 2
    assert "nope.csv" in capsys.readouterr().err


@pytest.mark.parametrize(
    "body,fragment",
    [
        ("x1,y1,x2,y2\n1,2,3,4\n1,nan,3,4\n", ":3:"),
        ("x1,y1,x2,y2\n1,2,3,4\n5,6,7,8\ninf,2,3,4\n", ":4:"),
        ("x1,y1,x2,y2\n1,2,3\n", ":2:"),
        ("a,b,c,d\n1,2,3,4\n", "header"),
        ("x1,y1,x2,y2\n1,2,3,4\n", "at least 2"),
    ],
)
def test_match_file_errors(workdir, capsys, body, fragment):
    (workdir / "m.csv").write_text(body)
    assert main(["rectify", "--matches", "m.csv", "--width", "640", "--height", "480"]) == 2
    assert fragment in capsys.readouterr().err


def test_match_file_round_trip(workdir):
    from rotrectify.synth import SceneConfig, generate

    pair = generate(SceneConfig(noise_px=0.3))
    fileio.write_matches("m.csv", pair.matches, (960, 720))
    back = fileio.read_matches("m.csv", (960, 720))
    np.testing.assert_allclose(back.left, pair.matches.left, atol=1e-12, rtol=0)
    np.testing.assert_allclose(back.right, pair.matches.right, atol=1e-12, rtol=0)


def test_depth_command(workdir, capsys):
    rng = np.random.default_rng(1)
    base = rng.integers(0, 256, (60, 110), dtype=np.uint8)
    imaging.write_pgm("l.pgm", imaging.GrayImage(base[:, :100]))
    imaging.write_pgm("r.pgm", imaging.GrayImage(base[:, 6:106]))
    assert main(["depth", "--left", "l.pgm", "--right", "r.pgm", "--block", "7", "--max-disp", "12", "--out", "d.pgm"]) == 0
    raw = np.load("d.npy")
    v = raw[np.isfinite(raw)]
    assert np.mean(np.abs(v - 6) <= 1) >= 0.95
    shown = imaging.read_pgm("d.pgm").pixels
    assert np.all(shown[np.isfinite(raw)] == np.round(raw[np.isfinite(raw)] * 255 / 12))

    assert main(["depth", "--left", "l.pgm", "--right", "l.pgm", "--max-disp", "8", "--out", "z.pgm"]) == 0
    assert imaging.read_pgm("z.pgm").pixels.max() == 0

    assert main(["depth", "--left", "l.pgm", "--right", "r.pgm", "--block", "6", "--out", "x.pgm"]) == 2
    imaging.write_pgm("s.pgm", imaging.GrayImage(base[:50, :100]))
    assert main(["depth", "--left", "l.pgm", "--right", "s.pgm", "--out", "x.pgm"]) == 2


def test_bench_single_repeat(workdir, capsys):
    assert main(["bench", "--repeat", "1", "--out", "b.csv", "--figure", "b.png"]) == 0
    lines = (workdir / "b.csv").read_text().splitlines()
    assert lines[0] == "repeat,median_ms,mean_ms,p99_ms,min_ms"
    values = [float(v) for v in lines[1].split(",")]
    assert values[0] == 1 and all(v > 0 for v in values[1:])
    assert (workdir / "b.png").read_bytes()[:4] == b"\x89PNG"


def test_bench_inputs_fixed_by_seed():
    assert bench_inputs(50, 3) == bench_inputs(50, 3)
    assert bench_inputs(50, 3) != bench_inputs(50, 4)


def test_sweep_command(workdir):
    args = ["sweep", "--grid-size", "2", "--trials", "2", "--iters", "50", "--noise-px", "0.5"]
    assert main([*args, "--out", "a.csv", "--figure", "a.png"]) == 0
    assert main([*args, "--out", "b.csv", "--figure", "b.png"]) == 0
    assert (workdir / "a.csv").read_bytes() == (workdir / "b.csv").read_bytes()
    assert (workdir / "a.png").read_bytes() == (workdir / "b.png").read_bytes()
    rows = (workdir / "a.csv").read_text().splitlines()
    assert len(rows) == 9 and rows[0].startswith("cell,depth_min")
    assert main([*args, "--trials", "0"]) == 2


def test_module_entry_point(workdir):
    proc = subprocess.run([sys.executable, "-m", "rotrectify", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for cmd in ("synth", "rectify", "eval", "depth", "bench", "sweep"):
        assert cmd in proc.stdout
