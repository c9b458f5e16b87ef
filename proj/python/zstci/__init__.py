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
"""Python front end for the ZSTCI C++ core."""

import json

from . import _zstci
from ._zstci import (
    ZstciError,
    average_forgetting,
    average_incremental_accuracy,
    method_label,
    mine_triplets,
    ncm_classify,
    summarize,
    triplet_loss,
)

__all__ = [
    "ZstciError",
    "average_forgetting",
    "average_incremental_accuracy",
    "config_hash",
    "method_label",
    "mine_triplets",
    "ncm_classify",
    "render_config",
    "run",
    "summarize",
    "triplet_loss",
]


def _strings(overrides):
    return {k: str(v) for k, v in (overrides or {}).items()}


def render_config(path=None, overrides=None):
    """INI text of the default or loaded configuration after overrides."""
    return _zstci.render_config(path, _strings(overrides))


def config_hash(path=None, overrides=None):
    return _zstci.config_hash(path, _strings(overrides))


def run(path=None, overrides=None, seeds=None, raw=False):
    """Run one configuration over its seeds.

    Returns parsed result records, or the JSON lines themselves with raw=True.
    """
    seeds = list(seeds) if seeds is not None else None
    lines = _zstci.run(path, _strings(overrides), seeds)
    return lines if raw else [json.loads(line) for line in lines]
