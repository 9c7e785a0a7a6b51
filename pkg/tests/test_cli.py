import pytest
from PIL import Image

from pccseg.cli import main
from pccseg.imgio import load_ground_truth, save_scribbles
from pccseg.synthetic import save_ground_truth, two_block_fixture


@pytest.fixture(scope="module")
def block_files(tmp_path_factory):
    out = tmp_path_factory.mktemp("blocks")
    img, scr, gt = two_block_fixture()
    Image.fromarray(img.data, mode="RGB").save(out / "img.png")
    save_scribbles(scr, out / "scr.png")
    save_ground_truth(gt, out / "gt.png")
    return out


def test_missing_required_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["segment", "--image", "x.png", "--out-mask", "m.png"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_unreadable_image_exits_3(tmp_path, capsys):
    rc = main(
        [
            "segment",
            "--image", str(tmp_path / "missing.png"),
            "--scribbles", str(tmp_path / "missing2.png"),
            "--out-mask", str(tmp_path / "mask.png"),
        ]
    )
    assert rc == 3
    assert "error:" in capsys.readouterr().err


def test_segment_writes_mask_and_prints_error_rate(block_files, tmp_path, capsys):
    mask = tmp_path / "mask.png"
    overlay = tmp_path / "overlay.png"
    rc = main(
        [
            "segment",
            "--image", str(block_files / "img.png"),
            "--scribbles", str(block_files / "scr.png"),
            "--gt", str(block_files / "gt.png"),
            "--out-mask", str(mask),
            "--out-overlay", str(overlay),
            "--seed", "1",
        ]
    )
    assert rc == 0
    out = capsys.readouterr().out
    line = next(l for l in out.splitlines() if l.startswith("error_rate="))
    assert float(line.split("=", 1)[1]) <= 0.01
    assert mask.exists() and overlay.exists()
    decoded = load_ground_truth(mask)
    assert decoded.labels.shape == (64, 64)


def test_segment_reference_mode(block_files, tmp_path):
    mask = tmp_path / "mask.png"
    rc = main(
        [
            "segment",
            "--image", str(block_files / "img.png"),
            "--scribbles", str(block_files / "scr.png"),
            "--mode", "reference",
            "--max-ite", "2000", "--max-stop", "1000",
            "--out-mask", str(mask),
        ]
    )
    assert rc == 0
    assert mask.exists()


def test_make_fixtures_then_benchmark(tmp_path, capsys):
    data_dir = tmp_path / "data"
    rc = main(
        ["make-fixtures", "--out", str(data_dir), "--images", "1", "--width", "96", "--height", "80"]
    )
    assert rc == 0
    manifest = data_dir / "manifest.json"
    assert manifest.exists()

    report = tmp_path / "report.csv"
    rc = main(
        [
            "benchmark",
            "--manifest", str(manifest),
            "--runs", "1",
            "--mode", "proposed",
            "--report", str(report),
            "--max-pixels", "2000",
        ]
    )
    assert rc == 0
    assert report.exists()
    assert report.with_suffix(".summary.json").exists()
    assert report.with_suffix(".scatter.csv").exists()
    out = capsys.readouterr().out
    assert "proposed: mean_error=" in out


def test_benchmark_unreadable_manifest_exits_3(tmp_path, capsys):
    rc = main(
        [
            "benchmark",
            "--manifest", str(tmp_path / "missing.json"),
            "--runs", "1",
            "--report", str(tmp_path / "r.csv"),
        ]
    )
    assert rc == 3


def test_bad_mode_value_exits_2(block_files, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(
            [
                "segment",
                "--image", str(block_files / "img.png"),
                "--scribbles", str(block_files / "scr.png"),
                "--mode", "fancy",
                "--out-mask", str(tmp_path / "m.png"),
            ]
        )
    assert exc.value.code == 2
