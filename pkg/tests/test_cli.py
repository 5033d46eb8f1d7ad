import csv
import json

import pytest

from priorfree.acceptance import TRIAL_COLUMNS
from priorfree.cli import PRESETS, main


def _write(tmp_path, **over):
    raw = {"protocol": "sw1", "inputs": {"kind": "iid", "joint": [[0.45, 0.05], [0.05, 0.45]]},
           "params": {"n": 6, "delta": 0.2}, "trials": 30, "seed": 9}
    raw.update(over)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(raw))
    return str(path)


def test_verify_types(tmp_path, capsys):
    assert main(["verify-types", "--n-max", "3", "--out", str(tmp_path)]) == 0
    assert "0 violations" in capsys.readouterr().out
    assert json.loads((tmp_path / "verify_types.json").read_text())["violations"] == []


def test_zero_trials_header_only(tmp_path):
    out = tmp_path / "o"
    assert main(["slepian-wolf", "--config", _write(tmp_path, trials=0), "--out", str(out)]) == 0
    rows = list(csv.reader(open(out / "trials.csv")))
    assert rows == [list(TRIAL_COLUMNS)]
    assert json.loads((out / "summary.json").read_text())["stats"]["failure_rate"] is None


def test_unknown_key_exits_2(tmp_path, capsys):
    assert main(["slepian-wolf", "--config", _write(tmp_path, bogus=1)]) == 2
    assert "bogus" in capsys.readouterr().err


def test_wrong_family_exits_2(tmp_path):
    cfg = _write(tmp_path, protocol="rst1", channels=["bsc(0.1)"],
                 inputs={"kind": "fixed", "x": [0] * 6, "y": [0] * 6})
    assert main(["slepian-wolf", "--config", cfg]) == 2


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as err:
        main(["teleport"])
    assert err.value.code == 2


def test_byte_identical_reruns(tmp_path):
    cfg = _write(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    main(["slepian-wolf", "--config", cfg, "--out", str(a)])
    main(["slepian-wolf", "--config", cfg, "--out", str(b)])
    assert (a / "trials.csv").read_bytes() == (b / "trials.csv").read_bytes()
    sa = json.loads((a / "summary.json").read_text())
    sb = json.loads((b / "summary.json").read_text())
    sa.pop("metadata"), sb.pop("metadata")
    assert sa == sb


def test_seed_changes_output(tmp_path):
    cfg = _write(tmp_path)
    a, b = tmp_path / "a", tmp_path / "b"
    main(["slepian-wolf", "--config", cfg, "--out", str(a)])
    main(["slepian-wolf", "--config", cfg, "--out", str(b), "--seed", "10"])
    assert (a / "trials.csv").read_bytes() != (b / "trials.csv").read_bytes()


@pytest.mark.parametrize("family", sorted(PRESETS))
def test_presets_run(tmp_path, family):
    out = tmp_path / family
    code = main([family, "--trials", "20", "--out", str(out)])
    assert code in (0, 1)
    rows = list(csv.DictReader(open(out / "trials.csv")))
    assert len(rows) == 20
    assert all(r["status"] in ("success", "abort") for r in rows)


def test_newman_mode_preset(tmp_path):
    out = tmp_path / "nm"
    main(["slepian-wolf", "--trials", "10", "--mode", "newman", "--out", str(out)])
    summary = json.loads((out / "summary.json").read_text())
    assert summary["newman"]["verified"] is False
