# Copyright 2026 The ratecon Authors.
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
"""Python front end for the ratecon C++ core.

Configs and constraint lists may be passed as dicts; they are serialized to
JSON for the extension.
"""

import json as _json

import numpy as _np

from . import _ratecon
from ._ratecon import (
    RateconError,
    covering_centers,
    generate_simulated,
    measure_swap_regret,
    project_nonneg_l1_ball,
    project_simplex,
    shrink,
    solve_lp,
    stationary_distribution,
    swap_regret_bound,
    swap_update,
)

__all__ = [
    "RateconError",
    "covering_centers",
    "evaluate",
    "generate_simulated",
    "measure_swap_regret",
    "project_nonneg_l1_ball",
    "project_simplex",
    "run_experiment",
    "shrink",
    "solve_lp",
    "stationary_distribution",
    "swap_regret_bound",
    "swap_update",
    "train",
]


def _as_json(obj):
    return obj if isinstance(obj, str) else _json.dumps(obj)


def _groups(g, n):
    if g is None:
        return _np.zeros((n, 0))
    return _np.asarray(g, dtype=float).reshape(n, -1)


def evaluate(constraints, params, x, y, groups=None, group_names=(), hidden_units=0, objective="error_rate"):
    x = _np.asarray(x, dtype=float)
    return _ratecon.evaluate(_as_json(constraints), _np.asarray(params, dtype=float), hidden_units, x,
                             _np.asarray(y, dtype=float), _groups(groups, len(x)), list(group_names), objective)


def train(constraints, solver, train_data, val_data, group_names=(), hidden_units=0, objective="error_rate",
          l2=0.0, seed=0):
    """Runs one solver. train_data and val_data are (x, y) or (x, y, groups)."""

    def unpack(d):
        x = _np.asarray(d[0], dtype=float)
        g = d[2] if len(d) > 2 else None
        return x, _np.asarray(d[1], dtype=float), _groups(g, len(x))

    xt, yt, gt = unpack(train_data)
    xv, yv, gv = unpack(val_data)
    return _ratecon.train(_as_json(constraints), _as_json(solver), hidden_units, xt, yt, gt, xv, yv, gv,
                          list(group_names), objective, l2, seed)


def run_experiment(config, output_dir="", workers=1):
    """Runs a full experiment and returns the summary as a dict."""
    return _json.loads(_ratecon.run_experiment(_as_json(config), str(output_dir), workers))
