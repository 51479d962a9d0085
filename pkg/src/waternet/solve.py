"""Exact enumerative solver for the mixed-integer network model.

The model's binaries are the edge activations and the mixing-part
ladders. Every two-inlet component contributes a small set of joint
states (idle, one inlet alone, or one of the K-1 pinned ratios); the
solver walks the cross product of those states and the remaining free
activations depth first, propagating the activity implications the DAG
structure forces along the way.

No row of the model couples flow variables with concentration
variables. With all binaries fixed, concentrations are therefore pinned
constants (mix shares are known), and what remains is a flow-only LP.
Each leaf is processed that way: propagate concentrations, check the
quality bounds, then price the surviving flow polytope with the simplex.
An exhausted walk proves optimality; hitting the time limit reports the
incumbent honestly.
"""

from __future__ import annotations

import json
import os
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np

from .milp import MilpModel
from .network import Network, Role, classify
from .oracle import propagate_quality, topo_order
from .simplex import EQ, GE, LE, solve_lp

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
TIMED_OUT = "timed_out"

_SENSE_CODE = {"<=": LE, ">=": GE, "=": EQ}


class BudgetExceeded(RuntimeError):
    pass


class MissingSolver(RuntimeError):
    pass


class SolverCrash(RuntimeError):
    pass


class SolutionParseError(ValueError):
    pass


@dataclass
class SolveLimits:
    max_time: float = 90.0
    max_gap: float = 0.01
    budget: int = 1 << 20


@dataclass
class Solution:
    status: str
    objective: float | None = None
    gap: float | None = None
    flows: dict[str, float] = field(default_factory=dict)
    concentrations: dict[str, float] = field(default_factory=dict)
    edge_active: dict[str, int] = field(default_factory=dict)
    mix_parts: dict[str, int] = field(default_factory=dict)
    solve_time: float = 0.0
    leaf_count: int = 0

    def to_obj(self) -> dict:
        # wall time stays out: identical runs must serialize identically
        return {
            "status": self.status,
            "objective": None if self.objective is None else float(self.objective),
            "gap": None if self.gap is None else float(self.gap),
            "leaf_count": int(self.leaf_count),
            "flows": {k: float(v) for k, v in sorted(self.flows.items())},
            "concentrations": {k: float(v) for k, v in sorted(self.concentrations.items())},
            "edge_active": {k: int(v) for k, v in sorted(self.edge_active.items())},
            "mix_parts": {k: int(v) for k, v in sorted(self.mix_parts.items())},
        }

    def to_text(self) -> str:
        return json.dumps(self.to_obj(), indent=2) + "\n"


class _TimeUp(Exception):
    pass


class _Abort(Exception):
    """Carries a terminal status discovered mid-walk (unbounded leaf)."""

    def __init__(self, status: str):
        self.status = status


@dataclass
class _State:
    assigns: list[tuple[int, int]]
    share_first: float | None     # fraction of the mix from the first inlet; None = idle
    part: int                     # rung of the first inlet's ladder


def _blend_states(bp, parts: int) -> list[_State]:
    states = []

    def z_assigns(pos1: int, pos2: int) -> list[tuple[int, int]]:
        out = []
        for k, v in enumerate(bp.z_first):
            out.append((v, 1 if k == pos1 else 0))
        for k, v in enumerate(bp.z_second):
            out.append((v, 1 if k == pos2 else 0))
        return out

    states.append(_State(z_assigns(0, 0) + [(bp.y_first, 0), (bp.y_second, 0)], None, 0))
    states.append(_State(z_assigns(0, parts) + [(bp.y_first, 0), (bp.y_second, 1)], 0.0, 0))
    for k in range(1, parts):
        states.append(_State(
            z_assigns(k, parts - k) + [(bp.y_first, 1), (bp.y_second, 1)],
            k / parts, k))
    states.append(_State(z_assigns(parts, 0) + [(bp.y_first, 1), (bp.y_second, 0)], 1.0, parts))
    return states


class _Enumerator:
    def __init__(self, model: MilpModel, limits: SolveLimits):
        self.model = model
        self.limits = limits
        net = model.net
        self.net = net

        nv = len(model.variables)
        self.ub = np.array([min(v.ub, 1.0) if v.binary else v.ub for v in model.variables])
        self.is_bin = np.array([v.binary for v in model.variables])
        self.bin_idx = np.where(self.is_bin)[0]
        self.bin_pos = {int(v): i for i, v in enumerate(self.bin_idx)}
        self.x_idx = [i for i, v in enumerate(model.variables) if v.kind == "flow"]
        self.x_pos = {v: i for i, v in enumerate(self.x_idx)}
        self.x_ub = self.ub[self.x_idx]
        self.edge_of_x = [model.variables[i].ref[1] for i in self.x_idx]

        flow_kinds = {"flow"}
        rows_flow = []
        rows_purebin = []
        for r in model.rows:
            kinds = {model.variables[i].kind for i in r.coeffs}
            cont = kinds - {"active", "part", "option"}
            if not cont:
                rows_purebin.append(r)
            elif cont <= flow_kinds:
                rows_flow.append(r)
            else:
                # concentration rows are resolved by constant propagation
                assert cont <= {"quality"}, f"row {r.tag} mixes variable kinds"
        nb = len(self.bin_idx)
        self.Af_x = np.zeros((len(rows_flow), len(self.x_idx)))
        self.Af_b = np.zeros((len(rows_flow), nb))
        self.bf = np.zeros(len(rows_flow))
        self.sf = np.zeros(len(rows_flow), dtype=np.int8)
        self.flow_row_bins: list[list[int]] = []
        for ri, r in enumerate(rows_flow):
            bins = []
            for vi, a in r.coeffs.items():
                if self.is_bin[vi]:
                    self.Af_b[ri, self.bin_pos[vi]] = a
                    bins.append(self.bin_pos[vi])
                else:
                    self.Af_x[ri, self.x_pos[vi]] = a
            self.bf[ri] = r.rhs
            self.sf[ri] = _SENSE_CODE[r.sense]
            self.flow_row_bins.append(bins)
        pos = np.clip(self.Af_x, 0.0, None)
        negc = np.clip(self.Af_x, None, 0.0)
        self.row_max = pos @ self.x_ub
        self.row_min = negc @ self.x_ub

        self.Ab = np.zeros((len(rows_purebin), nb))
        self.bb = np.zeros(len(rows_purebin))
        self.sb = np.zeros(len(rows_purebin), dtype=np.int8)
        for ri, r in enumerate(rows_purebin):
            for vi, a in r.coeffs.items():
                self.Ab[ri, self.bin_pos[vi]] = a
            self.bb[ri] = r.rhs
            self.sb[ri] = _SENSE_CODE[r.sense]

        self.c_x = np.zeros(len(self.x_idx))
        self.c_b = np.zeros(nb)
        for vi, a in model.objective.items():
            if self.is_bin[vi]:
                self.c_b[self.bin_pos[vi]] += a
            else:
                assert model.variables[vi].kind == "flow"
                self.c_x[self.x_pos[vi]] += a
        self.minimize = model.sense != "max"

        # structural facts for propagation and the quality walk
        roles = classify(net)
        self.order = topo_order(net)
        order_pos = {cid: i for i, cid in enumerate(self.order)}
        self.blends = sorted(model.blends, key=lambda b: order_pos[b.node])
        self.states = [_blend_states(bp, model.parts) for bp in self.blends]
        self.blend_nodes = {bp.node: i for i, bp in enumerate(self.blends)}

        y_of = {}
        for i, v in enumerate(model.variables):
            if v.kind == "active":
                y_of[v.ref[1]] = i
        self.y_of = y_of
        self.in_y = {cid: [y_of[e.key] for e in net.in_edges(cid)] for cid in net.components}
        self.out_y = {cid: [y_of[e.key] for e in net.out_edges(cid)] for cid in net.components}
        self.roles = roles
        self.edge_src = {e.key: e.src for e in net.edges}
        self.edge_dst = {e.key: e.dst for e in net.edges}
        self.var_edge = {y: k for k, y in y_of.items()}

        self.need_feed = set()       # intermediates: no inflow means no outflow
        self.need_drain = set()      # intermediates that cannot sit on flow
        for cid, comp in net.components.items():
            if roles[cid] is not Role.INTERMEDIATE:
                continue
            self.need_feed.add(cid)
            if comp.outflow_fixed is not None:
                if comp.outflow_fixed > 0:
                    self.need_drain.add(cid)
            elif (comp.outflow_rate if comp.outflow_rate is not None else 1.0) > 0:
                self.need_drain.add(cid)
        self.at_least_one: list[list[int]] = []
        for cid, comp in net.components.items():
            if roles[cid] is Role.PROVIDER and comp.supply is not None and comp.supply > 0:
                self.at_least_one.append(self.out_y[cid])
            if roles[cid] is Role.RECEIVER and comp.demand is not None and comp.demand > 0:
                self.at_least_one.append(self.in_y[cid])
        self.alo_of_var: dict[int, list[int]] = {}
        for gi, grp in enumerate(self.at_least_one):
            for v in grp:
                self.alo_of_var.setdefault(v, []).append(gi)

        self.w_of_edge: dict[int, int] = {}
        self.members_of_w: dict[int, list[int]] = {}
        for name, wi in model.option_vars.items():
            members = [y_of[k] for k in model.option_members[name]]
            self.members_of_w[wi] = members
            for m in members:
                self.w_of_edge[m] = wi
        self.w_all = sorted(model.option_vars.values())

        blend_edge_y = set()
        for bp in self.blends:
            blend_edge_y.add(bp.y_first)
            blend_edge_y.add(bp.y_second)
        self.free_vars = self.w_all + sorted(
            y for k, y in y_of.items() if y not in blend_edge_y)

        # quality propagation tables
        self.pids = net.pollutant_ids()
        self.node_info = {}
        for cid in self.order:
            comp = net.components[cid]
            ins = net.in_edges(cid)
            self.node_info[cid] = {
                "provider": roles[cid] is Role.PROVIDER,
                "ins": [(e.key, e.src, y_of[e.key]) for e in ins],
                "rf": comp.exit_quality,
                "rr": comp.removal_rate,
                "lo": comp.quality_min,
                "hi": comp.quality_max,
                "quality": comp.quality,
                "blend": self.blend_nodes.get(cid),
            }

        self.vals = np.full(nv, -1, dtype=np.int8)
        self.current_state: list[int] = [-1] * len(self.blends)

    # --- propagation ------------------------------------------------------

    def _set(self, var: int, val: int, trail: list[int]) -> bool:
        stack = [(var, val)]
        while stack:
            v, value = stack.pop()
            cur = self.vals[v]
            if cur == value:
                continue
            if cur != -1:
                return False
            self.vals[v] = value
            trail.append(v)
            if v in self.members_of_w:            # an option selector
                if value == 1:
                    for other in self.w_all:
                        if other != v:
                            stack.append((other, 0))
                else:
                    for m in self.members_of_w[v]:
                        stack.append((m, 0))
                continue
            edge = self.var_edge.get(v)
            if edge is None:
                continue
            src, dst = self.edge_src[edge], self.edge_dst[edge]
            if value == 1:
                w = self.w_of_edge.get(v)
                if w is not None:
                    stack.append((w, 1))
                if src in self.need_feed:
                    ins = self.in_y[src]
                    if all(self.vals[u] == 0 for u in ins):
                        return False
                    if not any(self.vals[u] == 1 for u in ins):
                        unset = [u for u in ins if self.vals[u] == -1]
                        if len(unset) == 1:
                            stack.append((unset[0], 1))
            else:
                if dst in self.need_feed and all(self.vals[u] == 0 for u in self.in_y[dst]):
                    for o in self.out_y[dst]:
                        stack.append((o, 0))
                if src in self.need_drain and all(self.vals[o] == 0 for o in self.out_y[src]):
                    for u in self.in_y[src]:
                        stack.append((u, 0))
                for gi in self.alo_of_var.get(v, ()):
                    grp = self.at_least_one[gi]
                    if any(self.vals[u] == 1 for u in grp):
                        continue
                    unset = [u for u in grp if self.vals[u] == -1]
                    if not unset:
                        return False
                    if len(unset) == 1:
                        stack.append((unset[0], 1))
        return True

    def _undo(self, trail: list[int], mark: int) -> None:
        while len(trail) > mark:
            self.vals[trail.pop()] = -1

    # --- leaf handling ------------------------------------------------------

    def _quality_ok(self) -> bool:
        eps = 1e-9
        conc: dict[tuple[str, str], float] = {}
        for cid in self.order:
            info = self.node_info[cid]
            if info["provider"]:
                for pid in self.pids:
                    conc[(cid, pid)] = info["quality"][pid]
                continue
            ins = info["ins"]
            if not ins:
                continue
            active = [(key, src) for key, src, yv in ins if self.vals[yv] == 1]
            if not active:
                continue
            bi = info["blend"]
            share: dict[str, float] = {}
            if bi is not None and self.current_state[bi] >= 0:
                st = self.states[bi][self.current_state[bi]]
                bp = self.blends[bi]
                if st.share_first is None:
                    continue
                share[self.edge_src[bp.first]] = st.share_first
                share[self.edge_src[bp.second]] = 1.0 - st.share_first
            else:
                share[active[0][1]] = 1.0
            for pid in self.pids:
                entry = 0.0
                defined = True
                for src, frac in share.items():
                    if frac == 0.0:
                        continue
                    up = conc.get((src, pid))
                    if up is None:
                        defined = False
                        break
                    entry += frac * up
                if not defined:
                    return False      # active inlet from an idle node: flow-infeasible anyway
                rf = info["rf"].get(pid)
                out = rf if rf is not None else info["rr"].get(pid, 1.0) * entry
                conc[(cid, pid)] = out
                lo = info["lo"].get(pid)
                hi = info["hi"].get(pid)
                if self.model.entry_limits:
                    if lo is not None and entry < lo - eps * (1 + lo):
                        return False
                    if hi is not None and entry > hi + eps * (1 + hi):
                        return False
                if self.model.exit_limits and rf is None:
                    rr = info["rr"].get(pid, 1.0)
                    if lo is not None and out < lo * rr - eps * (1 + abs(lo * rr)):
                        return False
                    if hi is not None and out > hi * rr + eps * (1 + abs(hi * rr)):
                        return False
        return True

    def _flow_lp(self, feasibility_only: bool, row_mask: np.ndarray | None = None):
        valsf = self.vals[self.bin_idx].astype(np.float64)
        rhs = self.bf - self.Af_b @ valsf
        if row_mask is None:
            row_mask = np.ones(rhs.size, dtype=bool)
        keep = []
        for ri in np.where(row_mask)[0]:
            s = self.sf[ri]
            lo, hi, r = self.row_min[ri], self.row_max[ri], rhs[ri]
            scale = 1e-7 * (1.0 + abs(r))
            if s == LE:
                if lo > r + scale:
                    return None
                if hi <= r + 1e-11:
                    continue
            elif s == GE:
                if hi < r - scale:
                    return None
                if lo >= r - 1e-11:
                    continue
            else:
                if r < lo - scale or r > hi + scale:
                    return None
            keep.append(ri)
        keep = np.array(keep, dtype=np.int64)
        c = np.zeros(len(self.x_idx)) if feasibility_only else self.c_x
        res = solve_lp(c, self.Af_x[keep], self.sf[keep], rhs[keep], ub=self.x_ub,
                       maximize=not (feasibility_only or self.minimize))
        if res.status == "infeasible":
            return None
        return res

    def _leaf(self) -> None:
        self.leaf_count += 1
        if time.monotonic() - self.t0 > self.limits.max_time:
            raise _TimeUp
        lhs = self.Ab @ self.vals[self.bin_idx].astype(np.float64)
        bad = ((self.sb == LE) & (lhs > self.bb + 1e-6)) | \
              ((self.sb == GE) & (lhs < self.bb - 1e-6)) | \
              ((self.sb == EQ) & (np.abs(lhs - self.bb) > 1e-6))
        if bad.any():
            return
        if not self._quality_ok():
            return
        res = self._flow_lp(feasibility_only=False)
        if res is None:
            return
        if res.status == "unbounded":
            raise _Abort(UNBOUNDED)
        total = float(res.objective) + float(self.c_b @ self.vals[self.bin_idx])
        better = (self.best_obj is None or
                  (total < self.best_obj if self.minimize else total > self.best_obj))
        if better:
            self.best_obj = total
            self.best_x = res.x.copy()
            self.best_vals = self.vals.copy()
            self.best_parts = list(self.current_state)

    # --- search ------------------------------------------------------------

    def _subtree_leaves(self, depth: int) -> float:
        est = 1.0
        for i in range(depth, len(self.blends)):
            est *= len(self.states[i])
        unset_free = sum(1 for v in self.free_vars if self.vals[v] == -1)
        return est * (2.0 ** unset_free)

    def _dfs_free(self, idx: int, trail: list[int]) -> None:
        while idx < len(self.free_vars) and self.vals[self.free_vars[idx]] != -1:
            idx += 1
        if idx == len(self.free_vars):
            self._leaf()
            return
        var = self.free_vars[idx]
        for val in (0, 1):
            mark = len(trail)
            if self._set(var, val, trail):
                self._dfs_free(idx + 1, trail)
            self._undo(trail, mark)

    def _dfs_blend(self, depth: int, trail: list[int]) -> None:
        if time.monotonic() - self.t0 > self.limits.max_time:
            raise _TimeUp
        if depth == len(self.blends):
            self._dfs_free(0, trail)
            return
        for si, st in enumerate(self.states[depth]):
            mark = len(trail)
            ok = True
            for var, val in st.assigns:
                if not self._set(var, val, trail):
                    ok = False
                    break
            if ok:
                self.current_state[depth] = si
                if depth + 1 < len(self.blends) and self._subtree_leaves(depth + 1) >= 512:
                    eligible = np.array(
                        [all(self.vals[self.bin_idx[b]] != -1 for b in bins)
                         for bins in self.flow_row_bins], dtype=bool)
                    probe = self._flow_lp(feasibility_only=True, row_mask=eligible)
                    if probe is None:
                        self.current_state[depth] = -1
                        self._undo(trail, mark)
                        continue
                self._dfs_blend(depth + 1, trail)
                self.current_state[depth] = -1
            self._undo(trail, mark)

    def run(self) -> Solution:
        self.t0 = time.monotonic()
        self.leaf_count = 0
        self.best_obj = None
        self.best_x = None
        self.best_vals = None
        self.best_parts = None

        est = 1.0
        for sts in self.states:
            est *= len(sts)
        est *= (len(self.w_all) + 1) if self.w_all else 1
        est *= 2.0 ** (len(self.free_vars) - len(self.w_all))
        if est > self.limits.budget:
            raise BudgetExceeded(
                f"enumeration needs up to {est:.0f} leaf programs, budget is {self.limits.budget}")

        trail: list[int] = []
        status = OPTIMAL
        try:
            ok = True
            for grp in self.at_least_one:
                if len(grp) == 1 and self.vals[grp[0]] == -1:
                    ok = self._set(grp[0], 1, trail)
                    if not ok:
                        break
            for cid, comp in self.net.components.items():
                if not ok:
                    break
                if self.roles[cid] is Role.PROVIDER and comp.supply == 0:
                    for o in self.out_y[cid]:
                        ok = ok and self._set(o, 0, trail)
                if self.roles[cid] is Role.INTERMEDIATE and comp.outflow_fixed is None \
                        and comp.outflow_rate == 0:
                    for o in self.out_y[cid]:
                        ok = ok and self._set(o, 0, trail)
            if ok:
                self._dfs_blend(0, trail)
        except _TimeUp:
            status = TIMED_OUT
        except _Abort as abort:
            return self._finish(Solution(abort.status), time.monotonic() - self.t0)

        elapsed = time.monotonic() - self.t0
        if self.best_obj is None:
            return self._finish(
                Solution(INFEASIBLE if status == OPTIMAL else TIMED_OUT), elapsed)
        sol = Solution(
            status=status,
            objective=self.best_obj,
            gap=0.0 if status == OPTIMAL else None,
        )
        flows = {}
        for pos, key in enumerate(self.edge_of_x):
            flows[key] = float(self.best_x[pos])
        sol.flows = flows
        sol.edge_active = {
            self.var_edge[y]: int(self.best_vals[y]) for y in self.y_of.values()}
        parts = {}
        for bi, bp in enumerate(self.blends):
            st = self.states[bi][self.best_parts[bi]]
            parts[bp.first] = st.part
        sol.mix_parts = parts
        conc, _ = propagate_quality(self.net, flows)
        sol.concentrations = conc
        return self._finish(sol, elapsed)

    def _finish(self, sol: Solution, elapsed: float) -> Solution:
        sol.solve_time = elapsed
        sol.leaf_count = self.leaf_count
        return sol


def solve_exact(model: MilpModel, limits: SolveLimits | None = None) -> Solution:
    """Prove the model's optimum by exhausting the mixing-state space."""
    return _Enumerator(model, limits or SolveLimits()).run()


def solve_external(model: MilpModel, limits: SolveLimits | None = None,
                   command: str | None = None) -> Solution:
    """Hand the model to the solver named by SOLVER_CMD and read its answer.

    The command template receives {model}, {solution}, {gap} and {time}.
    The solution file must hold ``status``/``objective``/``gap`` header
    lines followed by ``<variable> <value>`` pairs.
    """
    from . import lpio

    limits = limits or SolveLimits()
    command = command if command is not None else os.environ.get("SOLVER_CMD", "")
    if not command:
        raise MissingSolver("SOLVER_CMD is not set and no command was given")
    t0 = time.monotonic()
    with tempfile.TemporaryDirectory(prefix="waternet_") as tmp:
        model_path = os.path.join(tmp, "model.lp")
        sol_path = os.path.join(tmp, "model.sol")
        with open(model_path, "w") as fh:
            fh.write(lpio.export_lp(model))
        argv = [a.format(model=model_path, solution=sol_path,
                         gap=limits.max_gap, time=limits.max_time)
                for a in shlex.split(command)]
        try:
            proc = subprocess.run(
                argv, capture_output=True, text=True, timeout=limits.max_time + 60)
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise SolverCrash(f"{argv[0]}: {exc}") from exc
        if proc.returncode != 0:
            raise SolverCrash(
                f"{argv[0]} exited {proc.returncode}: {proc.stderr.strip()[-500:]}")
        if not os.path.exists(sol_path):
            raise SolverCrash(f"{argv[0]} wrote no solution file")
        with open(sol_path) as fh:
            status, objective, gap, values = lpio.parse_solution(fh.read())
    elapsed = time.monotonic() - t0

    by_name = {v.name: v for v in model.variables}
    for name in values:
        if name not in by_name:
            raise SolutionParseError(f"solution names unknown variable {name!r}")
    sol = Solution(status=status, objective=objective, gap=gap, solve_time=elapsed)
    if status in (INFEASIBLE, UNBOUNDED):
        return sol
    flows = {}
    active = {}
    parts: dict[str, int] = {}
    for v in model.variables:
        val = values.get(v.name, 0.0)
        if v.kind == "flow":
            flows[v.ref[1]] = float(val)
        elif v.kind == "active":
            active[v.ref[1]] = int(round(val))
    for bp in model.blends:
        for k, zv in enumerate(bp.z_first):
            if values.get(model.variables[zv].name, 0.0) > 0.5:
                parts[bp.first] = k
                break
    sol.flows = flows
    sol.edge_active = active
    sol.mix_parts = parts
    conc, _ = propagate_quality(model.net, flows)
    sol.concentrations = conc
    return sol


def solve(model: MilpModel, backend: str = "exact",
          limits: SolveLimits | None = None) -> Solution:
    if backend == "exact":
        return solve_exact(model, limits)
    if backend == "external":
        return solve_external(model, limits)
    raise ValueError(f"unknown backend {backend!r}")


def option_groups_of(net: Network) -> dict[str, list[str]]:
    groups: dict[str, list[str]] = {}
    for e in net.edges:
        if e.option:
            groups.setdefault(e.option, []).append(e.key)
    return groups


def solve_network(net: Network, parts: int = 8, limits: SolveLimits | None = None,
                  backend: str = "exact", conflict_mode: str = "exclusive",
                  entry_limits: bool = True, exit_limits: bool = True) -> Solution:
    """Full pipeline: fold wide inlets, build, solve, map flows back to
    the caller's edges. Mixing parts stay keyed by the folded edges."""
    from .milp import build_model
    from .preprocess import canonicalize, uncanonicalize

    canon = canonicalize(net)
    model = build_model(
        canon.net, parts=parts,
        option_groups=option_groups_of(canon.net) or None,
        conflict_mode=conflict_mode,
        emit_entry_limits=entry_limits, emit_exit_limits=exit_limits)
    sol = solve(model, backend=backend, limits=limits)
    if sol.flows:
        flows, conc = uncanonicalize(canon, sol.flows, sol.concentrations)
        sol.flows = flows
        sol.concentrations = conc
        mu = model.policy.mu
        sol.edge_active = {e.key: (1 if flows.get(e.key, 0.0) > mu / 2 else 0)
                           for e in net.edges}
    return sol
