# Copyright 2026 The hitl-workbench Authors.
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
"""Python front end for the hitl-workbench C++ core."""

import json

from hitl_workbench import _core
from hitl_workbench._core import (
    ConfigError,
    ContractViolation,
    GenerationError,
    MazeEnv,
    TaxiEnv,
    derive_seed,
    episodes_to_threshold,
    replay,
    trimmed_mean,
)

__version__ = _core.__version__

__all__ = [
    "ConfigError",
    "ContractViolation",
    "GenerationError",
    "LiveSession",
    "MazeEnv",
    "TaxiEnv",
    "aggregate",
    "curves",
    "derive_seed",
    "episodes_to_threshold",
    "generate_maze",
    "replay",
    "run_experiment",
    "trimmed_mean",
]


def generate_maze(layout_seed):
    """Returns the maze layout for `layout_seed` as a dict."""
    return json.loads(_core.generate_maze_json(layout_seed))


def run_experiment(config, write_files=True):
    """Runs every (agent, layout, seed) run described by `config`.

    `config` uses the same schema as the JSON files accepted by `hitl run`.
    Returns one dict per run with per-episode returns, steps and feedback
    counts. Artifacts go to config["output_dir"] unless write_files is False.
    """
    return json.loads(_core.run_experiment_json(json.dumps(config), write_files))


def aggregate(in_dir):
    """Reloads the runs of an experiment directory."""
    return json.loads(_core.aggregate_json(str(in_dir)))


def curves(in_dir):
    """Trimmed-mean learning curves and quartiles per agent."""
    return json.loads(_core.curves_json(str(in_dir)))


class LiveSession:
    """Transport-free live session; see docs/protocol.md for message shapes."""

    def __init__(self, session_id="default", **config):
        self._session = _core.Session(session_id, json.dumps(config))

    def tick(self):
        """Runs one step if running; returns the snapshot dict or None."""
        text = self._session.tick()
        return None if text is None else json.loads(text)

    def send(self, message):
        """Handles one client message (dict) and returns the reply dict."""
        return json.loads(self._session.handle_message(json.dumps(message)))

    def feedback(self, polarity, client_ts=None):
        message = {"type": "feedback", "polarity": polarity}
        if client_ts is not None:
            message["client_ts"] = client_ts
        return self.send(message)

    def control(self, command, **args):
        return self.send({"type": "control", "command": command, **args})

    def snapshot(self):
        return json.loads(self._session.latest_snapshot())

    @property
    def tick_ms(self):
        return self._session.tick_ms

    @property
    def feedback_replay_size(self):
        return self._session.feedback_replay_size
