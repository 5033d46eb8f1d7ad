import json

import numpy as np
import pytest
from pydantic import ValidationError

from priorfree.config import ChannelConfig, ExperimentConfig, load_config


def _base(**over):
    raw = {"protocol": "rst1", "channels": ["bsc(0.2)"],
           "inputs": {"kind": "fixed", "x": [0, 1, 0, 1], "y": [1, 1, 0, 0]},
           "params": {"n": 4}}
    raw.update(over)
    return raw


class TestChannelConfig:
    def test_presets(self):
        c = ChannelConfig.parse("BSC( 0.25 )")
        assert c.kind == "bsc" and c.flip == 0.25
        assert ChannelConfig.parse("identity").kind == "identity"
        with pytest.raises(ValueError):
            ChannelConfig.parse("erasure(0.1)")

    def test_flip_range(self):
        with pytest.raises(ValidationError):
            ChannelConfig(kind="bsc", flip=1.5)

    def test_table_shape_checked(self):
        c = ChannelConfig(kind="table", table=[[0.5, 0.5], [0.1, 0.9]])
        assert c.build(2).input_arities == (2,)
        with pytest.raises(ValueError):
            c.build(3)

    def test_build_extends_with_earlier_messages(self):
        ch = ChannelConfig.parse("bsc(0.1)").build(2, (2, 3))
        assert ch.input_arities == (2, 2, 3)


class TestExperimentConfig:
    def test_valid(self):
        cfg = ExperimentConfig.model_validate(_base())
        assert cfg.params.build().n == 4 and cfg.trials == 100

    def test_unknown_key_rejected(self):
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(_base(colour="blue"))
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(_base(params={"n": 4, "eps": 0.1}))

    def test_channel_count(self):
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(_base(channels=[]))
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(_base(protocol="int2", channels=[]))

    def test_lengths_and_alphabet(self):
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(
                _base(inputs={"kind": "fixed", "x": [0, 1], "y": [0, 1]}))
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(
                _base(inputs={"kind": "fixed", "x": [0, 2, 0, 0], "y": [0, 0, 0, 0]}))

    def test_iid_joint(self):
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(_base(inputs={"kind": "iid", "joint": [[0.5, 0.6]]}))
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate(_base(inputs={"kind": "iid", "joint": [[1.0]]}))

    def test_spec_alternates_parties(self):
        cfg = ExperimentConfig.model_validate(
            _base(protocol="int2", y_size=3, channels=["bsc(0.2)", "identity"],
                  inputs={"kind": "fixed", "x": [0] * 4, "y": [2] * 4}))
        spec = cfg.spec()
        assert spec.channels[0].input_arities == (2,)
        assert spec.channels[1].input_arities == (3, 2)

    def test_load(self, tmp_path):
        p = tmp_path / "c.json"
        p.write_text(json.dumps(_base(seed=5)))
        assert load_config(p).seed == 5

    def test_frozen(self):
        cfg = ExperimentConfig.model_validate(_base())
        with pytest.raises(ValidationError):
            cfg.trials = 3
        assert np.asarray(cfg.inputs.x).sum() == 2
