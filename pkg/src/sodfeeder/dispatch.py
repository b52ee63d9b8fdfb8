"""The four control types: fixed route, SoD, nominal zonal and RL zonal.

Baseline policies dispatch on fixed headways.  Zonal policies keep a reserved
sub-fleet on regular all-zone cycles (the minimum-service override) while the
controllable sub-fleet is driven either by a fixed zone rotation (nominal) or
by an external action stream (RL).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .fleet import FleetClass


class PolicyKind(Enum):
    FIXED_ROUTE = "fixed_route"
    SOD = "sod"
    NOMINAL_ZONAL = "nominal_zonal"
    RL_ZONAL = "rl_zonal"

    @property
    def split_fleet(self):
        return self in (PolicyKind.NOMINAL_ZONAL, PolicyKind.RL_ZONAL)

    @property
    def fixed_only(self):
        return self is PolicyKind.FIXED_ROUTE


@dataclass
class DispatchConfig:
    full_headway: float = 300.0       # FixedRoute / SoD departures
    reserved_headway: float = 600.0   # minimum-service override period
    nominal_period: float = 600.0     # controllable departures, NominalZonal
    nominal_offset: float = 300.0     # offset from the reserved departures

    def validate(self):
        if min(self.full_headway, self.reserved_headway,
               self.nominal_period) <= 0:
            raise ValueError("headways must be positive")


class DispatchController:
    """Per-run dispatch state for one world."""

    def __init__(self, world, kind, config=None):
        self.world = world
        self.kind = kind
        self.config = config or DispatchConfig()
        self.config.validate()
        self._full_due = 0.0
        self._reserved_due = 0.0
        self._nominal_due = self.config.nominal_offset
        self._nominal_next_zone = 1

    def _dispatch(self, vehicle, z, source):
        w = self.world
        w.dispatch_vehicle(vehicle.id, z)
        w.dispatch_log.append((w.step_k, vehicle.id, source, z))

    def baseline_dispatch(self):
        """Run the headway-based departures due at the current time."""
        w = self.world
        if self.kind in (PolicyKind.FIXED_ROUTE, PolicyKind.SOD):
            while w.now >= self._full_due - 1e-9:
                avail = w.available_vehicles()
                if avail:
                    self._dispatch(avail[0], 0, "baseline")
                else:
                    w.lateness_skips += 1
                self._full_due += self.config.full_headway
            return

        # zonal kinds: the reserved-fleet override
        while w.now >= self._reserved_due - 1e-9:
            avail = w.available_vehicles(FleetClass.RESERVED)
            if avail:
                self._dispatch(avail[0], 0, "override")
            else:
                w.lateness_skips += 1
            self._reserved_due += self.config.reserved_headway

        if self.kind is PolicyKind.NOMINAL_ZONAL:
            while w.now >= self._nominal_due - 1e-9:
                avail = w.available_vehicles(FleetClass.CONTROLLABLE)
                if avail:
                    self._dispatch(avail[0], self._nominal_next_zone, "baseline")
                else:
                    w.lateness_skips += 1
                self._nominal_next_zone = 3 - self._nominal_next_zone
                self._nominal_due += self.config.nominal_period

    def apply_action(self, action):
        """RL action: 0-2 dispatch a controllable vehicle with that zone
        semantics, 3 holds.  Degrades to a no-op when no vehicle is free."""
        if self.kind is not PolicyKind.RL_ZONAL:
            raise ValueError("actions only apply to the RL zonal policy")
        if action not in (0, 1, 2, 3):
            raise ValueError("action must be in {0, 1, 2, 3}")
        if action == 3:
            return False
        avail = self.world.available_vehicles(FleetClass.CONTROLLABLE)
        if not avail:
            return False
        self._dispatch(avail[0], action, "rl")
        return True
