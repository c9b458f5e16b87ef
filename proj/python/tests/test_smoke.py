# Copyright 2026 The ZSTCI Lab Authors. All Rights Reserved.
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

import math
import os
import subprocess

import pytest

import zstci

TINY = {
    "stream.num_tasks": 2,
    "stream.classes_per_task": 2,
    "stream.samples_per_class": 10,
    "stream.input_dim": 4,
    "embedding.hidden_dims": 8,
    "embedding.embed_dim": 4,
    "embedding.epochs": 2,
    "transition.hidden_dim": 8,
    "transition.epochs": 2,
}


def test_run_returns_one_record_per_seed():
    records = zstci.run(overrides=dict(TINY, **{"experiment.zstci": "full"}), seeds=[1, 2])
    assert [r["seed"] for r in records] == [1, 2]
    for r in records:
        assert r["status"] == "ok"
        assert r["label"] == "E-FT+ZSTCI"
        assert len(r["accuracy_matrix"]) == 2
        assert r["F"][0] is None
        assert all(0.0 <= a <= 1.0 for a in r["A"])


def test_runs_replay_and_summarize():
    a = zstci.run(overrides=TINY, seeds=[3], raw=True)
    b = zstci.run(overrides=TINY, seeds=[3], raw=True)
    assert a == b
    summary = zstci.summarize(a + zstci.run(overrides=TINY, seeds=[4], raw=True))
    assert summary[0]["label"] == "E-FT"
    assert summary[0]["seeds"] == 2
    assert len(summary[0]["accuracy"]) == 2


def test_config_helpers():
    text = zstci.render_config()
    assert text.startswith("[stream]")
    assert zstci.config_hash(overrides={"experiment.seeds": "1,2"}) == zstci.config_hash()
    assert zstci.config_hash(overrides={"embedding.epochs": 99}) != zstci.config_hash()
    assert zstci.method_label("lwf", "zs-only") == "E-LwF+ZS"


def test_errors_carry_their_category():
    with pytest.raises(zstci.ZstciError, match="^config"):
        zstci.config_hash(overrides={"embedding.nope": "1"})
    with pytest.raises(zstci.ZstciError, match="^config"):
        zstci.config_hash(path="/nonexistent/zstci.ini")


def test_metrics_and_ncm():
    rows = [[1.0], [0.5, 1.0], [0.25, 0.5, 1.0]]
    assert zstci.average_incremental_accuracy(rows, 2) == 0.75
    assert zstci.average_forgetting(rows, 3) == pytest.approx((0.75 + 0.5) / 2)
    protos = {3: [0.0, 0.0], 1: [1.0, 1.0]}
    # The midpoint is a tie and goes to the smaller id.
    assert zstci.ncm_classify([[0.1, 0.0], [0.9, 1.2], [0.5, 0.5]], protos) == [3, 1, 1]


def test_triplets():
    assert zstci.mine_triplets([0, 0, 1]) == [(0, 1, 2), (1, 0, 2)]
    # Anchor-positive distance 0, negative at distance 1, margin 2: hinge 1 each.
    assert zstci.triplet_loss([[0.0], [0.0], [1.0]], [0, 0, 1], 2.0) == pytest.approx(1.0)
    assert math.isclose(zstci.triplet_loss([[0.0], [0.0], [5.0]], [0, 0, 1], 1.0), 0.0)


@pytest.mark.skipif("ZSTCI_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_help():
    out = subprocess.run([os.environ["ZSTCI_CLI"], "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "run" in out.stdout
