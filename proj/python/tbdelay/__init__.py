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
"""Delayed TB treatment model: simulation, stability and optimal control.

Jobs are plain dictionaries with the same layout as the command-line job
files; omitted fields take the reference values. Every function also
accepts a path to a JSON job file.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Any, Mapping, Union

import numpy as np

from . import _core
from ._core import NumericError, TbdelayError, ValidationError

__version__ = _core.__version__

Job = Union[Mapping[str, Any], str, os.PathLike, None]


@dataclass
class TableResult:
    """A summary document plus a numeric table (one row per node or sweep point)."""

    summary: dict
    columns: list
    data: np.ndarray

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]


def _text(job: Job) -> str:
    if job is None:
        return "{}"
    if isinstance(job, (str, os.PathLike)):
        with open(job, encoding="utf-8") as fh:
            return fh.read()
    return json.dumps(job)


def _table(raw) -> TableResult:
    summary, columns, data = raw
    return TableResult(json.loads(summary), list(columns), np.asarray(data))


def resolve_job(job: Job = None) -> dict:
    """The validated job with every default filled in."""
    return json.loads(_core.resolve_job(_text(job)))


def job_hash(job: Job = None) -> str:
    return _core.job_hash(_text(job))


def equilibria(job: Job = None) -> dict:
    """R0 breakdown and both equilibria; `endemic` is None when R0 <= 1."""
    return json.loads(_core.equilibria(_text(job)))


def simulate(job: Job = None) -> TableResult:
    """Integrate the model with zero controls, or the job's bang-bang schedule."""
    return _table(_core.simulate(_text(job)))


def classify(job: Job = None, equilibrium: str = "dfe", delay: float = 0.0) -> dict:
    """Stability verdict of the chosen equilibrium ("dfe" or "endemic") at a delay."""
    return json.loads(_core.classify(_text(job), equilibrium, float(delay)))


def optimize(job: Job = None) -> TableResult:
    """Optimal control by direct transcription; the table holds states, controls, adjoints and phi."""
    return _table(_core.optimize(_text(job)))


def iop(job: Job = None, hessian: bool = True) -> TableResult:
    """Switching-time optimisation, optionally with the Hessian certificate."""
    return _table(_core.iop(_text(job), hessian))


def sweep(job: Job = None) -> TableResult:
    """Continuation of the optimum over the transmission coefficient."""
    return _table(_core.sweep(_text(job)))


__all__ = [
    "NumericError",
    "TableResult",
    "TbdelayError",
    "ValidationError",
    "classify",
    "equilibria",
    "iop",
    "job_hash",
    "optimize",
    "resolve_job",
    "simulate",
    "sweep",
]
