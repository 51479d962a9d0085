"""LP-format interchange for the network model.

Writes a deterministic LP text file (rows in the model's sorted order,
terms in variable order), reads the same subset back, and speaks a tiny
solution-file dialect: ``status``/``objective``/``gap`` header lines
followed by ``<variable> <value>`` pairs. A file-based branch walker on
top of the parser lets the package act as its own external solver.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field

import numpy as np

from .network import ParseError
from .simplex import EQ, GE, LE, solve_lp

_NAME_OK = re.compile(r"[^A-Za-z0-9_]")
_VAR_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")
_SENSE_CODE = {"<=": LE, ">=": GE, "=": EQ}


def _num(v: float) -> str:
    return repr(float(v))


def _terms(coeffs: dict[int, float], names: list[str]) -> str:
    parts = []
    for vi in sorted(coeffs):
        a = coeffs[vi]
        if a == 0:
            continue
        sign = "-" if a < 0 else "+"
        parts.append(f"{sign} {_num(abs(a))} {names[vi]}")
    if not parts:
        return "0 " + names[0]
    return " ".join(parts).lstrip("+ ")


def export_lp(model) -> str:
    names = [v.name for v in model.variables]
    out = []
    out.append("\\ waternet model export")
    out.append("Maximize" if model.sense == "max" else "Minimize")
    out.append(" obj: " + _terms(model.objective, names))
    out.append("Subject To")
    for i, row in enumerate(model.rows):
        elem = _NAME_OK.sub("_", row.element)[:80]
        rname = f"{row.tag}_{i}_{elem}" if elem else f"{row.tag}_{i}"
        out.append(f" {rname}: {_terms(row.coeffs, names)} {row.sense} {_num(row.rhs)}")
    bounds = []
    for v in model.variables:
        if not v.binary and v.ub != float("inf"):
            bounds.append(f" {v.name} <= {_num(v.ub)}")
    if bounds:
        out.append("Bounds")
        out.extend(bounds)
    binaries = [v.name for v in model.variables if v.binary]
    if binaries:
        out.append("Binary")
        out.extend(" " + n for n in binaries)
    out.append("End")
    return "\n".join(out) + "\n"


@dataclass
class LpProblem:
    sense: str = "min"
    objective: dict[str, float] = field(default_factory=dict)
    rows: list[tuple[str, dict[str, float], str, float]] = field(default_factory=list)
    upper: dict[str, float] = field(default_factory=dict)
    binaries: list[str] = field(default_factory=list)


_SECTIONS = {
    "minimize": "obj-min", "minimise": "obj-min", "min": "obj-min",
    "maximize": "obj-max", "maximise": "obj-max", "max": "obj-max",
    "subject": "rows", "such": "rows", "st": "rows", "s.t.": "rows",
    "bounds": "bounds", "bound": "bounds",
    "binary": "binary", "binaries": "binary", "bin": "binary",
    "general": "general", "generals": "general",
    "end": "end",
}


def _tokenize(text: str) -> list[str]:
    lines = []
    for line in text.splitlines():
        cut = line.find("\\")
        lines.append(line if cut < 0 else line[:cut])
    joined = "\n".join(lines)
    for op in ("<=", ">=", "=<", "=>"):
        joined = joined.replace(op, f" {op[0] if op[0] in '<>' else op[1]}= ")
    joined = re.sub(r"(?<![<>=])=(?![<>=])", " = ", joined)
    joined = joined.replace(":", " : ")
    return joined.split()


def _is_num(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def parse_lp(text: str) -> LpProblem:
    toks = _tokenize(text)
    prob = LpProblem()
    i = 0
    section = None

    def section_of(tok: str) -> str | None:
        key = _SECTIONS.get(tok.lower())
        if key == "rows" and tok.lower() in ("subject", "such"):
            return "rows-two-word"
        return key

    def read_linear(start: int) -> tuple[dict[str, float], int]:
        coeffs: dict[str, float] = {}
        sign = 1.0
        pending: float | None = None
        j = start
        while j < len(toks):
            t = toks[j]
            if t in ("+", "-"):
                sign = sign * (-1.0 if t == "-" else 1.0)
                j += 1
            elif t in ("<=", ">=", "="):
                break
            elif _is_num(t):
                pending = (pending if pending is not None else 1.0) * float(t)
                j += 1
            elif section_of(t) and pending is None and sign == 1.0 and toks[j - 1] not in ("+", "-"):
                break
            else:
                # a bare "3x" is a dialect mistake, not a variable
                if not _VAR_NAME.match(t):
                    raise ParseError(f"not a variable name: {t!r}")
                coef = sign * (pending if pending is not None else 1.0)
                coeffs[t] = coeffs.get(t, 0.0) + coef
                sign, pending = 1.0, None
                j += 1
        return coeffs, j

    while i < len(toks):
        tok = toks[i]
        sec = section_of(tok)
        if sec == "rows-two-word":
            i += 2
            section = "rows"
            continue
        if sec in ("obj-min", "obj-max"):
            prob.sense = "min" if sec == "obj-min" else "max"
            i += 1
            if i + 1 < len(toks) and toks[i + 1] == ":":
                i += 2
            prob.objective, i = read_linear(i)
            continue
        if sec in ("rows", "bounds", "binary", "general", "end"):
            section = sec
            i += 1
            continue
        if section == "rows":
            name = f"r{len(prob.rows)}"
            if i + 1 < len(toks) and toks[i + 1] == ":":
                name = tok
                i += 2
            coeffs, i = read_linear(i)
            if i >= len(toks) or toks[i] not in ("<=", ">=", "="):
                raise ParseError(f"row {name!r} has no comparison operator")
            op = toks[i]
            i += 1
            sign = 1.0
            while i < len(toks) and toks[i] in ("+", "-"):
                sign = sign * (-1.0 if toks[i] == "-" else 1.0)
                i += 1
            if i >= len(toks) or not _is_num(toks[i]):
                raise ParseError(f"row {name!r} has no right-hand side")
            prob.rows.append((name, coeffs, op, sign * float(toks[i])))
            i += 1
        elif section == "bounds":
            lo = None
            if _is_num(tok):
                lo = float(tok)
                if i + 1 >= len(toks) or toks[i + 1] != "<=":
                    raise ParseError("malformed bound")
                i += 2
                tok = toks[i]
            name = tok
            i += 1
            if i < len(toks) and toks[i] in ("<=", ">=", "="):
                op = toks[i]
                if i + 1 >= len(toks) or not _is_num(toks[i + 1]):
                    raise ParseError(f"malformed bound for {name!r}")
                val = float(toks[i + 1])
                i += 2
                if op in ("<=", "="):
                    prob.upper[name] = val
                if op in (">=", "=") and val != 0.0:
                    raise ParseError(f"only zero lower bounds are supported ({name!r})")
            if lo is not None and lo != 0.0:
                raise ParseError(f"only zero lower bounds are supported ({name!r})")
        elif section in ("binary", "general"):
            if section == "binary":
                prob.binaries.append(tok)
            i += 1
        elif section == "end" or section is None:
            i += 1
        else:
            i += 1
    return prob


# --- file-based solving ------------------------------------------------------


def solve_problem(prob: LpProblem, max_time: float = 90.0,
                  budget: int = 1 << 20) -> tuple[str, float | None, float | None, dict[str, float]]:
    """Enumerate the problem's binaries and price each leaf LP.

    Recognizes pick-exactly-one rows among the binaries and walks those
    as single choices; everything else branches 0/1. Small models only.
    """
    order: list[str] = []
    seen = set()
    for name in list(prob.objective) + [n for _, cs, _, _ in prob.rows for n in cs] \
            + list(prob.upper) + prob.binaries:
        if name not in seen:
            seen.add(name)
            order.append(name)
    idx = {n: i for i, n in enumerate(order)}
    nv = len(order)
    is_bin = np.zeros(nv, dtype=bool)
    for n in prob.binaries:
        is_bin[idx[n]] = True
    ub = np.full(nv, np.inf)
    for n, v in prob.upper.items():
        ub[idx[n]] = v
    ub[is_bin] = np.minimum(ub[is_bin], 1.0)

    c = np.zeros(nv)
    for n, a in prob.objective.items():
        c[idx[n]] += a
    A = np.zeros((len(prob.rows), nv))
    b = np.zeros(len(prob.rows))
    sense = np.zeros(len(prob.rows), dtype=np.int8)
    for ri, (_, coeffs, op, rhs) in enumerate(prob.rows):
        for n, a in coeffs.items():
            A[ri, idx[n]] += a
        b[ri] = rhs
        sense[ri] = _SENSE_CODE[op]

    bin_cols = np.where(is_bin)[0]
    cont_cols = np.where(~is_bin)[0]
    A_bin = A[:, bin_cols]
    A_cont = A[:, cont_cols]
    cont_ub = ub[cont_cols]
    pure_bin = ~np.any(A_cont != 0.0, axis=1)
    pos = np.clip(A_cont, 0.0, None)
    neg = np.clip(A_cont, None, 0.0)
    fin_ub = np.where(np.isfinite(cont_ub), cont_ub, 0.0)
    row_max = np.where((pos != 0.0) & ~np.isfinite(cont_ub), np.inf, pos * fin_ub).sum(axis=1)
    row_min = np.where((neg != 0.0) & ~np.isfinite(cont_ub), -np.inf, neg * fin_ub).sum(axis=1)

    groups: list[list[int]] = []
    claimed: set[int] = set()
    for ri in np.where(pure_bin)[0]:
        coeffs = A_bin[ri]
        nz = np.where(coeffs != 0.0)[0]
        if sense[ri] == EQ and b[ri] == 1.0 and len(nz) >= 2 and np.all(coeffs[nz] == 1.0):
            members = [int(v) for v in nz]
            if not claimed.intersection(members):
                groups.append(members)
                claimed.update(members)
    free = [int(v) for v in range(len(bin_cols)) if v not in claimed]

    est = float(2.0 ** len(free))
    for g in groups:
        est *= len(g)
    if est > budget:
        raise RuntimeError(f"enumeration needs up to {est:.0f} leaves, budget is {budget}")

    minimize = prob.sense == "min"
    t0 = time.monotonic()
    vals = np.zeros(len(bin_cols))
    best: tuple[float, np.ndarray, np.ndarray] | None = None
    status_box = {"timed_out": False, "unbounded": False}

    def leaf() -> None:
        lhs = A_bin[pure_bin] @ vals
        rb = b[pure_bin]
        sb = sense[pure_bin]
        if np.any(((sb == LE) & (lhs > rb + 1e-6)) | ((sb == GE) & (lhs < rb - 1e-6))
                  | ((sb == EQ) & (np.abs(lhs - rb) > 1e-6))):
            return
        rhs = b - A_bin @ vals
        keep = []
        for ri in np.where(~pure_bin)[0]:
            s, r = sense[ri], rhs[ri]
            scale = 1e-7 * (1.0 + abs(r))
            if s == LE:
                if row_min[ri] > r + scale:
                    return
                if row_max[ri] <= r + 1e-11:
                    continue
            elif s == GE:
                if row_max[ri] < r - scale:
                    return
                if row_min[ri] >= r - 1e-11:
                    continue
            else:
                if r < row_min[ri] - scale or r > row_max[ri] + scale:
                    return
            keep.append(ri)
        res = solve_lp(c[cont_cols], A_cont[keep], sense[keep], rhs[keep],
                       ub=cont_ub, maximize=not minimize)
        if res.status == "infeasible":
            return
        if res.status == "unbounded":
            status_box["unbounded"] = True
            return
        total = float(res.objective) + float(c[bin_cols] @ vals)
        nonlocal_best(total, res.x)

    best_holder: list = [None]

    def nonlocal_best(total: float, x: np.ndarray) -> None:
        cur = best_holder[0]
        if cur is None or (total < cur[0] if minimize else total > cur[0]):
            best_holder[0] = (total, x.copy(), vals.copy())

    def walk(gi: int, fi: int) -> None:
        if status_box["unbounded"]:
            return
        if time.monotonic() - t0 > max_time:
            status_box["timed_out"] = True
            return
        if gi < len(groups):
            for member in groups[gi]:
                for m in groups[gi]:
                    vals[m] = 1.0 if m == member else 0.0
                walk(gi + 1, fi)
            return
        if fi < len(free):
            for v in (0.0, 1.0):
                vals[free[fi]] = v
                walk(gi, fi + 1)
            vals[free[fi]] = 0.0
            return
        leaf()

    walk(0, 0)

    if status_box["unbounded"]:
        return "unbounded", None, None, {}
    if best_holder[0] is None:
        return ("timed_out" if status_box["timed_out"] else "infeasible"), None, None, {}
    total, x, bvals = best_holder[0]
    values = {}
    for pos_i, col in enumerate(cont_cols):
        values[order[col]] = float(x[pos_i])
    for pos_i, col in enumerate(bin_cols):
        values[order[col]] = float(bvals[pos_i])
    if status_box["timed_out"]:
        return "timed_out", total, None, values
    return "optimal", total, 0.0, values


def write_solution(status: str, objective: float | None, gap: float | None,
                   values: dict[str, float]) -> str:
    out = [f"status {status}",
           f"objective {'none' if objective is None else repr(float(objective))}",
           f"gap {'none' if gap is None else repr(float(gap))}"]
    for name in sorted(values):
        out.append(f"{name} {repr(float(values[name]))}")
    return "\n".join(out) + "\n"


def parse_solution(text: str) -> tuple[str, float | None, float | None, dict[str, float]]:
    status: str | None = None
    objective: float | None = None
    gap: float | None = None
    values: dict[str, float] = {}
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"solution line {ln}: expected two fields, got {line!r}")
        key, val = parts
        if key == "status":
            status = val
            continue
        try:
            num = None if val.lower() == "none" else float(val)
        except ValueError as exc:
            raise ParseError(f"solution line {ln}: bad value for {key!r}") from exc
        if key == "objective":
            objective = num
        elif key == "gap":
            gap = num
        elif num is None:
            raise ParseError(f"solution line {ln}: bad value for {key!r}")
        else:
            values[key] = num
    if status is None:
        raise ParseError("solution file has no status line")
    return status, objective, gap, values
