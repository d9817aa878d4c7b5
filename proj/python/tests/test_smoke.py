# Copyright (C) 2026 The tbdelay Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
import json
import pathlib

import numpy as np
import pytest

import tbdelay

JOBS = pathlib.Path(__file__).resolve().parents[2] / "jobs"


def test_version_and_defaults():
    assert tbdelay.__version__
    job = tbdelay.resolve_job()
    assert job["params"]["beta"] == 100
    assert job["grid"]["n_steps"] == 2500
    assert len(tbdelay.job_hash()) == 16
    assert tbdelay.job_hash({"params": {"beta": 99}}) != tbdelay.job_hash()


def test_equilibria_reference_values():
    eq = tbdelay.equilibria({"params": {"beta": 100}})
    assert eq["r0"]["value"] == pytest.approx(2.202067, rel=1e-5)
    assert eq["endemic"]["state"]["S"] == pytest.approx(8407.668384, rel=1e-3)
    assert tbdelay.equilibria({"params": {"beta": 40}})["endemic"] is None


def test_simulate_conserves_population():
    res = tbdelay.simulate({"grid": {"n_steps": 500}})
    assert res.columns[:6] == ["t", "S", "L1", "I", "L2", "R"]
    assert res.data.shape == (501, 8)
    total = res.data[:, 1:6].sum(axis=1)
    assert np.max(np.abs(total - 30000)) < 1e-6 * 30000
    assert res.column("t")[-1] == 5.0


def test_classify_dfe_at_beta_40():
    v = tbdelay.classify({"params": {"beta": 40}}, "dfe", 0.1)
    assert v["kind"] == "StableAtGivenDelay"
    assert len(v["real_roots"]) == 5


def test_optimize_nondelayed_reference():
    res = tbdelay.optimize(JOBS / "nondelayed_l1_w50.json")
    assert res.summary["objective"] == pytest.approx(28390.73, rel=5e-3)
    assert res.summary["schedule"]["u1"]["switches"][0] == pytest.approx(3.67725, abs=0.05)
    assert res.data.shape[0] == 2501


def test_iop_hessian_positive_definite():
    res = tbdelay.iop(JOBS / "nondelayed_l1_w50.json")
    assert res.summary["hessian"]["positive_definite"]
    assert res.summary["objective"] == pytest.approx(28390.73, rel=5e-3)


def test_validation_errors_raise():
    with pytest.raises(tbdelay.ValidationError):
        tbdelay.resolve_job({"params": {"betta": 1}})
    with pytest.raises(tbdelay.ValidationError):
        tbdelay.classify(None, "neither", 0.1)
    with pytest.raises(tbdelay.TbdelayError):
        tbdelay.resolve_job({"grid": {"n_steps": -1}})


def test_job_round_trip(tmp_path):
    path = tmp_path / "job.json"
    path.write_text(json.dumps(tbdelay.resolve_job({"delays": {"d_i": 0.1}})))
    assert tbdelay.job_hash(path) == tbdelay.job_hash({"delays": {"d_i": 0.1}})
