"""Independent reference implementations used to certify the package.

Everything here is deliberately naive: exhaustive partition enumeration,
dense linear algebra assembled straight from constraint rows, and a
projected-gradient QP solver.  None of it shares code paths with the
package's structured kernels.
"""

from __future__ import annotations

import numpy as np

from bcsdp.graphs import TimetablingInstance, class_violations
from bcsdp.relax import SdpModel


def enumerate_chi_m(inst: TimetablingInstance, cap: int | None = None) -> int:
    """Minimum class count over all valid partitions, by full backtracking."""
    n = inst.graph.n
    if n == 0:
        return 0
    adj = inst.graph.adjacency_bitsets()
    weights = [inst.vertex_weight(v) for v in range(n)]
    simple = (
        set(inst.room_capacities) == {max(inst.room_capacities)}
        and inst.feature_count == 0
        and max(inst.event_sizes) <= max(inst.room_capacities)
    )
    pre_of: dict[int, int] = {}
    for idx, cls in enumerate(inst.precolouring):
        for v in cls:
            pre_of[v] = idx
    best = [cap if cap is not None else n]
    classes: list[list[int]] = []
    bits: list[int] = []
    class_w: list[int] = []
    pre_home: dict[int, int] = {}  # pre-class id -> class index

    def feasible(ci: int, v: int) -> bool:
        if bits[ci] & (1 << v):
            return False
        if class_w[ci] + weights[v] > inst.m:
            return False
        if not simple and class_violations(inst, classes[ci] + [v]):
            return False
        return True

    def place(v: int) -> None:
        if len(classes) >= best[0]:
            return
        if v == n:
            best[0] = len(classes)
            return
        home = pre_home.get(pre_of.get(v, -1), None) if v in pre_of else None
        candidates = range(len(classes)) if home is None else [home]
        for ci in candidates:
            if not feasible(ci, v):
                continue
            classes[ci].append(v)
            saved = bits[ci]
            bits[ci] |= adj[v]
            class_w[ci] += weights[v]
            place(v + 1)
            class_w[ci] -= weights[v]
            bits[ci] = saved
            classes[ci].pop()
        if home is None and len(classes) + 1 < best[0]:
            if v in pre_of:
                pre_home[pre_of[v]] = len(classes)
            classes.append([v])
            bits.append(adj[v])
            class_w.append(weights[v])
            place(v + 1)
            classes.pop()
            bits.pop()
            class_w.pop()
            if v in pre_of:
                del pre_home[pre_of[v]]

    place(0)
    return best[0]


def dense_blocks(model: SdpModel):
    """Constraint matrices, right-hand sides and Grams assembled densely."""
    a1 = [row.dense(model.dim) for row in model.eq_graph]
    b1 = np.array([row.rhs for row in model.eq_graph])
    a2 = [row.dense(model.dim) for row in model.eq_other]
    b2 = np.array([row.rhs for row in model.eq_other])
    spans = model.ineq_groups or (
        (("generic", 0, len(model.ineq)),) if model.ineq else ()
    )
    groups = []
    for kind, a, b in spans:
        mats = [row.dense(model.dim) for row in model.ineq[a:b]]
        rhs = np.array([row.rhs for row in model.ineq[a:b]])
        groups.append((kind, mats, rhs))
    return a1, b1, a2, b2, groups


def gram_of(mats) -> np.ndarray:
    k = len(mats)
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            out[i, j] = float(np.sum(mats[i] * mats[j]))
    return out


def op_apply(mats, x) -> np.ndarray:
    return np.array([float(np.sum(m * x)) for m in mats])


def adjoint(mats, y) -> np.ndarray:
    if not mats:
        return 0.0
    out = np.zeros_like(mats[0])
    for m, c in zip(mats, y):
        out += c * m
    return out


def dense_y_reference(model: SdpModel, X, y1, y2, v, S, mu):
    """The sequential y1, y2 minimization with dense Grams and numpy solves."""
    a1, b1, a2, b2, groups = dense_blocks(model)
    sign = 1.0 if model.sense == "min" else -1.0
    C = sign * model.objective
    all_ineq = [m for (_, mats, _) in groups for m in mats]
    bv = adjoint(all_ineq, v) if all_ineq else 0.0
    y1_new = y1
    if a1:
        q = adjoint(a2, y2) + bv + S - C
        rhs = mu * (op_apply(a1, X) - b1) + op_apply(a1, q)
        y1_new = -np.linalg.solve(gram_of(a1), rhs)
    y2_new = y2
    if a2:
        q = adjoint(a1, y1_new) + bv + S - C
        rhs = mu * (op_apply(a2, X) - b2) + op_apply(a2, q)
        y2_new = -np.linalg.solve(gram_of(a2), rhs)
    return y1_new, y2_new


def qp_kkt_residual(g: np.ndarray, gram: np.ndarray, mu: float,
                    v: np.ndarray) -> float:
    """Exact stationarity/complementarity residual of the nonnegative QP."""
    grad = g + gram @ v / mu
    res = 0.0
    for i in range(len(v)):
        if v[i] > 1e-12:
            res = max(res, abs(grad[i]))
        else:
            res = max(res, max(0.0, -grad[i]))
    return res


def projected_gradient_qp(g: np.ndarray, gram: np.ndarray, mu: float,
                          iters: int = 200000, tol: float = 1e-13) -> np.ndarray:
    """FISTA on min_{v>=0} g'v + (1/2mu) v'Gram v, run to high precision."""
    k = len(g)
    if k == 0:
        return np.zeros(0)
    lip = float(np.linalg.eigvalsh(gram).max()) / mu + 1e-12
    v = np.zeros(k)
    z = v.copy()
    t = 1.0
    for _ in range(iters):
        grad = g + gram @ z / mu
        v_new = np.maximum(0.0, z - grad / lip)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        z = v_new + ((t - 1.0) / t_new) * (v_new - v)
        if np.max(np.abs(v_new - v)) < tol and qp_kkt_residual(g, gram, mu, v_new) < 1e-11:
            return v_new
        v, t = v_new, t_new
    return v


def dense_v_reference(model: SdpModel, X, y1, y2, v, S, mu):
    """Sequential per-group QP minimization with dense algebra and FISTA."""
    a1, b1, a2, b2, groups = dense_blocks(model)
    sign = 1.0 if model.sense == "min" else -1.0
    C = sign * model.objective
    sizes = [len(g[1]) for g in groups]
    offsets = np.cumsum([0] + sizes)
    v = v.copy()
    base = adjoint(a1, y1) + adjoint(a2, y2) + S - C
    for i, (kind, mats, rhs) in enumerate(groups):
        if not mats:
            continue
        others = np.zeros_like(C)
        for j, (k2, mats2, _) in enumerate(groups):
            if j != i and mats2:
                others = others + adjoint(mats2, v[offsets[j]:offsets[j + 1]])
        q = base + others
        g_lin = op_apply(mats, X) - rhs + op_apply(mats, q) / mu
        gram = gram_of(mats)
        sol = projected_gradient_qp(g_lin, gram, mu)
        v[offsets[i]:offsets[i + 1]] = sol
    return v
