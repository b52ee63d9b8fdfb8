"""Episodic MDP wrapper around one simulation world.

Observation: 18 normalized scalars (layout below).  Actions: 0 dispatch a
regular all-zone cycle, 1/2 dispatch to that zone, 3 hold.  Reward: minus the
number of requests newly rejected during the decision period.

Observation layout (version ``sod-state-v1``)::

    [0]      running vehicles (not at the terminus)
    [1]      available controllable vehicles at the terminus
    [2]      15-min demand forecast, all segments
    [3+3z]   unassigned requests in category z   (z = 0 regular, 1, 2)
    [4+3z]   scheduled flexible seconds committed to category z
    [5+3z]   assigned, unexecuted boarding/alighting processes in category z
    [12..14] time since the last departure serving each category
    [15..17] 15-min demand forecast per category
"""

from __future__ import annotations

import copy

import numpy as np

from .corridor import Segment
from .demand import RequestState, forecast_demand, segment_shares
from .dispatch import DispatchController, PolicyKind
from .fleet import FleetClass, VehicleStatus
from .matching import match_step
from .scenario import build_world

STATE_LAYOUT_VERSION = "sod-state-v1"
STATE_DIM = 18
N_ACTIONS = 4

_SEGMENT_OF_CATEGORY = {0: Segment.FIXED, 1: Segment.ZONE1, 2: Segment.ZONE2}


def normalize(raw, ranges):
    """Elementwise (x - min) / (max - min), clamped to [0, 1]."""
    raw = np.asarray(raw, dtype=float)
    lo = np.array([r[0] for r in ranges], dtype=float)
    hi = np.array([r[1] for r in ranges], dtype=float)
    if np.any(hi <= lo):
        raise ValueError("every range needs min < max")
    return np.clip((raw - lo) / (hi - lo), 0.0, 1.0)


def denormalize(x, ranges):
    lo = np.array([r[0] for r in ranges], dtype=float)
    hi = np.array([r[1] for r in ranges], dtype=float)
    return lo + np.asarray(x, dtype=float) * (hi - lo)


class ZonalDispatchEnv:
    """reset/step interface over the SoD world with RL zonal control."""

    def __init__(self, scenario, net=None):
        scenario.validate()
        self.scenario = scenario
        self.net = net if net is not None else scenario.network()
        self.episode_len = scenario.n_steps // scenario.rl_period
        self.world = None
        self.controller = None
        self.t = 0
        self.done = True
        n = scenario.norm
        self.ranges = (
            [(0.0, float(n.fleet_size)), (0.0, float(n.controllable)),
             (0.0, n.forecast_cap)]
            + [(0.0, n.request_cap), (0.0, n.flex_commit_cap),
               (0.0, n.request_cap)] * 3
            + [(0.0, n.time_cap)] * 3
            + [(0.0, n.forecast_cap)] * 3
        )
        self._seg_shares = None

    def reset(self, seed):
        self.world = build_world(self.scenario, PolicyKind.RL_ZONAL, seed,
                                 net=self.net)
        self.controller = DispatchController(self.world, PolicyKind.RL_ZONAL,
                                             self.scenario.dispatch)
        self._seg_shares = segment_shares(self.net, self.scenario.demand)
        self.t = 0
        self.done = False
        return self.observe()

    def step(self, action):
        """Advance one decision period: override, action, matching, movement."""
        if self.done:
            raise RuntimeError("step() called on a finished episode")
        w = self.world
        rejected_before = w.rejected_total
        self.controller.baseline_dispatch()
        self.controller.apply_action(int(action))
        infos = []
        for _ in range(self.scenario.rl_period):
            match_step(w, walk_speed=self.scenario.demand.walk_speed,
                       walk_cap=self.scenario.demand.walk_cap)
            rep = w.advance_step()
            infos.append(rep)
        reward = -(w.rejected_total - rejected_before)
        self.t += 1
        self.done = self.t >= self.episode_len
        return self.observe(), float(reward), self.done, {"reports": infos}

    # ---- observation -------------------------------------------------------

    def _category_forecast(self, cat):
        share = self._seg_shares[_SEGMENT_OF_CATEGORY[cat]]
        return self._total_forecast * share

    def observe(self):
        w = self.world
        now = w.now
        running = sum(1 for v in w.vehicles
                      if v.status != VehicleStatus.AT_TERMINUS)
        available = sum(1 for v in w.available_vehicles()
                        if v.fleet_class == FleetClass.CONTROLLABLE)
        self._total_forecast = forecast_demand(
            self.net, self.scenario.demand, self.scenario.horizon, now, 900.0)

        unassigned = [0.0, 0.0, 0.0]
        for r in w.pending_requests():
            unassigned[w.category_of(r)] += 1

        commit = [0.0, 0.0, 0.0]
        for v in w.vehicles:
            if v.window_open_idx is None or not v.schedule:
                continue
            open_dep = v.schedule[v.window_open_idx].departure
            close_arr = v.schedule[v.window_close_idx].arrival
            remaining = max(0.0, close_arr - max(now, open_dep))
            cats = (0, 1, 2) if v.zone == 0 else (v.zone,)
            for c in cats:
                commit[c] += remaining

        processes = [0.0, 0.0, 0.0]
        for r in w.requests:
            cat = None
            if r.state == RequestState.ASSIGNED:
                cat = w.category_of(r)
                processes[cat] += 2    # boarding and alighting both pending
            elif r.state == RequestState.RIDING:
                processes[w.category_of(r)] += 1

        since = []
        for c in (0, 1, 2):
            last = w.last_departure[c]
            since.append(self.scenario.norm.time_cap if last is None
                         else now - last)

        forecasts = [self._category_forecast(c) for c in (0, 1, 2)]

        raw = [float(running), float(available), self._total_forecast]
        for c in (0, 1, 2):
            raw += [unassigned[c], commit[c], processes[c]]
        raw += since + forecasts
        return normalize(raw, self.ranges)

    # ---- checkpoint/restore (Markov bookkeeping) ---------------------------

    def snapshot(self):
        return copy.deepcopy((self.world, self.controller.__dict__.copy(),
                              self.t, self.done))

    def restore(self, snap):
        world, cstate, t, done = copy.deepcopy(snap)
        self.world = world
        self.controller = DispatchController(self.world, PolicyKind.RL_ZONAL,
                                             self.scenario.dispatch)
        for k, v in cstate.items():
            if k not in ("world",):
                setattr(self.controller, k, v)
        self.controller.world = self.world
        self.t = t
        self.done = done
