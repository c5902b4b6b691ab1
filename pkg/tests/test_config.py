import pytest

from pamt.config import PRESETS, HyperParams, dump_config, load_config, parse_config


def test_presets():
    cora = HyperParams.preset("cora_ml")
    assert (cora.dim, cora.alpha, cora.wd, cora.lr, cora.beta, cora.K, cora.drop, cora.t_u) == (
        128, 0.10, 0.025, 0.05, 0.50, 10, 0.20, 30)
    pub = HyperParams.preset("pubmed")
    assert (pub.dim, pub.alpha, pub.wd, pub.lr, pub.beta, pub.K, pub.drop, pub.t_u) == (
        128, 0.10, 0.015, 0.10, 0.10, 10, 0.35, 10)
    assert HyperParams.preset("ms_academic").dim == 256
    assert set(PRESETS) == {"cora_ml", "citeseer", "pubmed", "ms_academic"}


def test_empty_override_equals_preset():
    assert parse_config("", "citeseer") == HyperParams.preset("citeseer")
    assert parse_config("preset = citeseer\n# nothing else\n") == HyperParams.preset("citeseer")


def test_overrides_and_types():
    hp = parse_config("preset = cora_ml\nK = 12  # longer\nalpha=0.2\nmasked_inference = true\n")
    assert hp.K == 12 and hp.alpha == 0.2 and hp.masked_inference is True
    assert hp.lr == 0.05


def test_unknown_key():
    with pytest.raises(ValueError, match="unknown key"):
        parse_config("preset = cora_ml\nlearning_rate = 0.1\n")


def test_missing_tuned_keys():
    with pytest.raises(ValueError, match="missing required key"):
        parse_config("alpha = 0.1\n")


def test_bad_values():
    with pytest.raises(ValueError, match="bad value"):
        parse_config("K = ten", "cora_ml")
    with pytest.raises(ValueError, match="alpha"):
        parse_config("alpha = 2", "cora_ml")
    with pytest.raises(ValueError, match="unknown preset"):
        HyperParams.preset("reddit")


def test_dump_round_trip(tmp_path):
    hp = HyperParams.preset("pubmed", seed=5, renormalize_mask=True)
    path = tmp_path / "c.txt"
    path.write_text(dump_config(hp))
    assert load_config(path) == hp
    with pytest.raises(FileNotFoundError, match="missing file"):
        load_config(tmp_path / "absent.txt")
