"""Independent reference implementations used only by the tests.

Everything here is deliberately naive (double loops, full recomputation) and
shares no decision logic with the package.
"""

import math

from sodfeeder.corridor import Segment
from sodfeeder.demand import RequestState
from sodfeeder.fleet import Stop, StopKind, VehicleStatus


def bellman_ford_time(net, src):
    """O(V*E) shortest-path times; the slow but obviously-correct oracle."""
    n = net.n_nodes
    dist = [math.inf] * n
    dist[src] = 0.0
    edges = [(u, v, t) for u in range(n) for v, t, _ in net.adj[u]]
    for _ in range(n - 1):
        changed = False
        for u, v, t in edges:
            if dist[u] + t < dist[v] - 1e-15:
                dist[v] = dist[u] + t
                changed = True
        if not changed:
            break
    return dist


def gae_direct(deltas, discount, lam, dones):
    """Direct double-loop evaluation of the exponentially weighted advantage
    sum, cutting at episode boundaries."""
    T = len(deltas)
    out = [0.0] * T
    for t in range(T):
        acc = 0.0
        w = 1.0
        for k in range(t, T):
            acc += w * deltas[k]
            if dones[k]:
                break
            w *= discount * lam
        out[t] = acc
    return out


# ---- brute-force insertion oracle ------------------------------------------

def _oracle_dwell(stop, dwell_base, dwell_per_pax):
    npax = len(stop.board) + len(stop.alight)
    if stop.kind in (StopKind.FIXED, StopKind.FLEX):
        return dwell_base + dwell_per_pax * npax
    if stop.kind == StopKind.TURNAROUND:
        return dwell_per_pax * npax
    return 0.0


def _oracle_retime(stops, status, next_idx, net, dwell_base, dwell_per_pax):
    if status == VehicleStatus.BOARDING:
        j = 1
    else:
        s = stops[next_idx]
        if next_idx == len(stops) - 1:
            s.departure = s.arrival
        else:
            s.departure = s.arrival + _oracle_dwell(s, dwell_base, dwell_per_pax)
        j = next_idx + 1
    while j < len(stops):
        prev, s = stops[j - 1], stops[j]
        s.arrival = prev.departure + net.travel_time(prev.node, s.node)
        if j == len(stops) - 1:
            s.departure = s.arrival
        else:
            s.departure = s.arrival + _oracle_dwell(s, dwell_base, dwell_per_pax)
        j += 1


def _oracle_times(stops):
    pick, drop = {}, {}
    for s in stops:
        for rid in s.board:
            pick[rid] = s.departure if s.kind == StopKind.TERMINUS_DEPART \
                else s.arrival
        for rid in s.alight:
            drop[rid] = s.arrival
    return pick, drop


def _oracle_cost_terms(world, stops, extra_request=None, extra_fixed=False):
    """(small-magnitude cost, n_requests, n_fixed_served)."""
    c = world.params.coeffs
    dist = 0.0
    for a, b in zip(stops, stops[1:]):
        dist += world.net.travel_distance(a.node, b.node)
    cost = c.gamma_o / 1000.0 * dist
    n_r = n_s = 0
    pick, drop = _oracle_times(stops)
    for rid, dr in drop.items():
        req = extra_request if (extra_request is not None
                                and rid == extra_request.id) \
            else world.requests[rid]
        cost += c.gamma_t / 3600.0 * (dr - req.t_r)
        n_r += 1
        fixed = extra_fixed if (extra_request is not None
                                and rid == extra_request.id) \
            else req.served_at_fixed_stop
        if fixed:
            n_s += 1
    return cost, n_r, n_s


def _oracle_feasible(world, v, stops, close_idx, request, direct):
    lim = world.params.limits
    if v.window_open_idx is not None and close_idx is not None:
        if (stops[close_idx].arrival - stops[v.window_open_idx].departure
                > lim.flex_window + 1e-6):
            return False
    load = len(v.onboard)
    start = 0 if v.status == VehicleStatus.BOARDING else v.next_idx
    for s in stops[start:]:
        load -= len(s.alight)
        load += len(s.board)
        if load > v.capacity:
            return False
    pick, drop = _oracle_times(stops)
    for rid, dr in drop.items():
        if request is not None and rid == request.id:
            req, dt = request, direct
            riding = False
        else:
            req, dt = world.requests[rid], world.requests[rid].direct_time
            riding = req.state == RequestState.RIDING
        pk = req.pickup_time if riding else pick.get(rid)
        if pk is None:
            continue
        if not riding and pk - req.t_r > lim.max_wait + 1e-6:
            return False
        if dt is not None and dr - pk > lim.max_ride(dt) + 1e-6:
            return False
    return True


def oracle_best_insertion(world, request, plan):
    """Try every (vehicle, pickup placement, dropoff placement) combination
    from scratch and return the feasible one with minimum cost increase.

    Returns (vehicle_id, pickup_idx, dropoff_idx, delta) or None.
    """
    net = world.net
    p = world.params
    snap = {net.terminus} | set(world.fixed_stop_nodes)
    direct = net.travel_time(plan.pickup_node, plan.dropoff_node)
    best = None

    for v in world.vehicles:
        if not v.schedule or v.zone is None:
            continue
        # zone compatibility, restated naively
        ok = True
        for node in (plan.pickup_node, plan.dropoff_node):
            if node in snap:
                continue
            if v.fixed_only:
                ok = False
                break
            zone = 1 if net.labels[node] == Segment.ZONE1 else 2
            if v.zone not in (0, zone):
                ok = False
                break
        if not ok:
            continue
        c = world.params.coeffs
        base_cost, base_nr, base_ns = _oracle_cost_terms(world, v.schedule)
        last = len(v.schedule) - 1
        free_stop = 0 if v.status == VehicleStatus.BOARDING else v.next_idx
        free_ins = 1 if v.status == VehicleStatus.BOARDING else v.next_idx + 1

        # every way to place the pickup
        pickup_ways = []
        if plan.pickup_node == net.terminus:
            if v.status == VehicleStatus.BOARDING:
                pickup_ways.append(("at", 0))
        elif plan.pickup_node in snap:
            for i in range(max(free_stop, 1), last):
                if (v.schedule[i].node == plan.pickup_node
                        and v.schedule[i].kind == StopKind.FIXED):
                    pickup_ways.append(("at", i))
        elif v.window_open_idx is not None:
            for pos in range(max(v.window_open_idx + 1, free_ins),
                             v.window_close_idx + 1):
                pickup_ways.append(("ins", pos))

        for pway in pickup_ways:
            dropoff_ways = []
            if plan.dropoff_node == net.terminus:
                dropoff_ways.append(("at", last))
            elif plan.dropoff_node in snap:
                lo = pway[1] + 1
                for i in range(max(lo, free_stop), last):
                    if (v.schedule[i].node == plan.dropoff_node
                            and v.schedule[i].kind == StopKind.FIXED):
                        dropoff_ways.append(("at", i))
            elif v.window_open_idx is not None:
                lo = max(v.window_open_idx + 1, free_ins, pway[1] + 1)
                for pos in range(lo, v.window_close_idx + 1):
                    dropoff_ways.append(("ins", pos))

            for dway in dropoff_ways:
                stops = [Stop(s.node, s.kind, list(s.board), list(s.alight),
                              s.arrival, s.departure) for s in v.schedule]
                close = v.window_close_idx
                pk_idx = pway[1]
                if pway[0] == "ins":
                    stops.insert(pk_idx, Stop(plan.pickup_node, StopKind.FLEX,
                                              board=[request.id]))
                    if close is not None and pk_idx <= close:
                        close += 1
                else:
                    stops[pk_idx].board.append(request.id)
                dr_idx = dway[1]
                if dway[0] == "ins":
                    stops.insert(dr_idx, Stop(plan.dropoff_node, StopKind.FLEX,
                                              alight=[request.id]))
                    if close is not None and dr_idx <= close:
                        close += 1
                else:
                    if pway[0] == "ins" and dr_idx >= pk_idx:
                        dr_idx += 1
                    stops[dr_idx].alight.append(request.id)
                _oracle_retime(stops, v.status, v.next_idx, net,
                               p.dwell_base, p.dwell_per_pax)
                if not _oracle_feasible(world, v, stops, close, request,
                                        direct):
                    continue
                cost, n_r, n_s = _oracle_cost_terms(world, stops, request,
                                                    plan.served_at_fixed)
                delta = (cost - base_cost - c.gamma_r * (n_r - base_nr)
                         - c.gamma_s * (n_s - base_ns))
                key = (delta, v.id, pk_idx, dr_idx)
                if best is None or key < best[0]:
                    best = (key, v.id, pk_idx, dr_idx, stops, close)
    return best


class OraclePlan:
    def __init__(self, pickup_node, dropoff_node, access, served_at_fixed,
                 feasible):
        self.pickup_node = pickup_node
        self.dropoff_node = dropoff_node
        self.access_time = access
        self.served_at_fixed = served_at_fixed
        self.feasible = feasible


def _oracle_nearest_stop(world, node, walk_speed):
    best, best_t = None, None
    for stop_node in [world.net.terminus] + world.fixed_stop_nodes:
        t = world.net.euclidean(node, stop_node) / walk_speed
        if best_t is None or t < best_t - 1e-9:
            best, best_t = stop_node, t
    return best, best_t


def oracle_resolve(world, request, walk_speed, walk_cap):
    term = world.net.terminus
    access = 0.0
    feasible = True
    nodes = []
    fixed_flags = []
    for node, seg in ((request.origin, request.origin_segment),
                      (request.destination, request.destination_segment)):
        if node == term:
            nodes.append(term)
            fixed_flags.append(False)
            continue
        if seg == Segment.FIXED or world.fixed_only:
            snap, wt = _oracle_nearest_stop(world, node, walk_speed)
            if world.fixed_only and seg != Segment.FIXED \
                    and wt > walk_cap + 1e-6:
                feasible = False
                nodes.append(node)
                fixed_flags.append(False)
                continue
            access += wt
            nodes.append(snap)
            fixed_flags.append(True)
            continue
        nodes.append(node)
        fixed_flags.append(False)
    return OraclePlan(nodes[0], nodes[1], access, any(fixed_flags), feasible)


def oracle_match(world, walk_speed=1.25, walk_cap=600.0):
    """Sequential greedy matching round against the brute-force enumerator,
    applied to ``world`` (which the caller should deep-copy first).

    Returns {"assigned": [(rid, vid, pickup_idx, dropoff_idx, delta)],
             "rejected": [rid], "pending": [rid]}.
    """
    lim = world.params.limits
    out = {"assigned": [], "rejected": [], "pending": []}

    def visible_pending():
        return [r for r in world.requests
                if r.state == RequestState.PENDING and r.t_r <= world.now]

    for req in visible_pending():
        if world.now - req.t_r > lim.max_wait + 1e-6:
            req.transition(RequestState.REJECTED)
            world.rejected_total += 1
            out["rejected"].append(req.id)

    for req in visible_pending():
        plan = oracle_resolve(world, req, walk_speed, walk_cap)
        if not plan.feasible:
            req.transition(RequestState.REJECTED)
            world.rejected_total += 1
            out["rejected"].append(req.id)
            continue
        best = oracle_best_insertion(world, req, plan)
        if best is None:
            out["pending"].append(req.id)
            continue
        _, vid, pk_idx, dr_idx, stops, close = best
        v = world.vehicles[vid]
        v.schedule = stops
        if close is not None:
            v.window_close_idx = close
        v.assigned.add(req.id)
        req.transition(RequestState.ASSIGNED)
        req.vehicle = vid
        req.assign_time = world.now
        req.pickup_node = plan.pickup_node
        req.dropoff_node = plan.dropoff_node
        req.access_time = plan.access_time
        req.served_at_fixed_stop = plan.served_at_fixed
        req.direct_time = world.net.travel_time(plan.pickup_node,
                                                plan.dropoff_node)
        out["assigned"].append((req.id, vid, pk_idx, dr_idx, best[0][0]))
    return out
