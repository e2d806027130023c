"""Recover feasible timetables from relaxation solutions.

Two recovery routes: hyperplane-cap randomized rounding over the Gram
vectors of the solution matrix, and iterative eigenvalue rounding that
re-solves progressively smaller SDPs while fixing settled eigenspaces.
Both always return partitions that pass validate_partition; a saturation
greedy provides warm starts and the fallback upper bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .graphs import (
    Partition,
    TimetablingInstance,
    class_violations,
    validate_partition,
)
from .linalg import cholesky_psd
from .relax import SdpModel, SymRow, reduce_precolouring_atoms

__all__ = [
    "RoundingConfig",
    "RoundingDiagnostics",
    "kms_round",
    "iterative_round",
    "greedy_colouring",
    "assign_rooms",
]


@dataclass(frozen=True)
class RoundingConfig:
    attempts: int = 50
    seed: int = 0
    delta: float = 1e-6

    def __post_init__(self) -> None:
        if self.attempts < 1:
            raise ValueError("attempts must be >= 1")
        if not 0.0 < self.delta < 0.5:
            raise ValueError("delta must lie in (0, 0.5)")


@dataclass(frozen=True)
class RoundingDiagnostics:
    constraint_violations: tuple[float, ...]
    violation_bound: float
    rounds: int
    notes: tuple[str, ...] = ()


class _AtomView:
    """Pre-colouring classes treated as indivisible rounding units."""

    def __init__(self, inst: TimetablingInstance):
        _, _, members = reduce_precolouring_atoms(
            inst.graph, inst.m, inst.precolouring
        )
        self.inst = inst
        self.members = members
        self.k = len(members)
        adj = inst.graph.adjacency_bitsets()
        self.masks = []
        for mem in members:
            mask = 0
            for v in mem:
                mask |= adj[v]
            self.masks.append(mask)
        self.vertex_bits = [
            sum(1 << v for v in mem) for mem in members
        ]

    def conflicts(self, a: int, chosen_bits: int) -> bool:
        return bool(self.masks[a] & chosen_bits)

    def class_ok(self, members: list[int], extra: int) -> bool:
        verts = [v for a in members for v in self.members[a]]
        verts += list(self.members[extra])
        return not class_violations(self.inst, verts)


def greedy_colouring(inst: TimetablingInstance, seed: int = 0) -> Partition:
    """Saturation-degree greedy respecting bound, capacities, features, pre-classes.

    The seed breaks ties among equally saturated vertices so that repeated
    calls can diversify warm starts.
    """
    atoms = _AtomView(inst)
    if atoms.k == 0:
        return Partition.from_lists([])
    rng = np.random.default_rng(seed)
    jitter = rng.random(atoms.k)
    for a in range(atoms.k):
        if class_violations(inst, atoms.members[a]):
            raise ValueError(
                f"infeasible: events {atoms.members[a]} fit no room arrangement"
            )
    degree = [atoms.masks[a].bit_count() for a in range(atoms.k)]
    classes: list[list[int]] = []
    class_bits: list[int] = []
    placed: dict[int, int] = {}
    while len(placed) < atoms.k:
        best_a, best_key = -1, None
        for a in range(atoms.k):
            if a in placed:
                continue
            sat = sum(
                1 for bits in class_bits if atoms.masks[a] & bits
            )
            key = (sat, degree[a], jitter[a])
            if best_key is None or key > best_key:
                best_a, best_key = a, key
        a = best_a
        done = False
        for ci in range(len(classes)):
            if atoms.conflicts(a, class_bits[ci]):
                continue
            if atoms.class_ok(classes[ci], a):
                classes[ci].append(a)
                class_bits[ci] |= atoms.vertex_bits[a]
                placed[a] = ci
                done = True
                break
        if not done:
            classes.append([a])
            class_bits.append(atoms.vertex_bits[a])
            placed[a] = len(classes) - 1
    part = Partition.from_lists(
        [[v for a in cls for v in atoms.members[a]] for cls in classes]
    )
    rooms = assign_rooms(inst, part)
    return Partition(part.classes, rooms)


def assign_rooms(inst: TimetablingInstance, part: Partition) -> Optional[dict[int, int]]:
    """Per-class event-room matching (augmenting paths); None when trivial."""
    caps = set(inst.room_capacities)
    if len(caps) == 1 and inst.feature_count == 0 and min(caps) >= max(inst.event_sizes):
        return None
    assignment: dict[int, int] = {}
    for cls in part.classes:
        match_room: dict[int, int] = {}

        def try_place(v: int, seen: set[int]) -> bool:
            for r in inst.compatible_rooms(v):
                if r in seen:
                    continue
                seen.add(r)
                if r not in match_room or try_place(match_room[r], seen):
                    match_room[r] = v
                    return True
            return False

        ok = True
        for v in sorted(cls, key=lambda u: -inst.event_sizes[u]):
            if not try_place(v, set()):
                ok = False
                break
        if not ok:
            return None
        for r, v in match_room.items():
            assignment[v] = r
    return assignment


def _kms_threshold(k: int, max_degree: int) -> float:
    if max_degree <= 1 or k <= 2:
        return 0.0
    return math.sqrt(2.0 * (k - 2) / (k * math.log(max_degree)))


def kms_round(x: np.ndarray, inst: TimetablingInstance,
              cfg: Optional[RoundingConfig] = None) -> Partition:
    """Hyperplane-cap rounding of a solution matrix into a valid partition.

    Gram vectors come from a Cholesky factorization of x.  Each round draws a
    standard-normal direction, admits vertices scoring at least the cap
    threshold in descending order subject to independence, the class-size
    bound, capacity and feature counts; leftovers wait for later rounds.  The
    best of cfg.attempts attempts is returned (fewest classes, then earliest
    attempt); a top-scorer is admitted when a round would otherwise stall, so
    termination with a valid partition is unconditional.
    """
    cfg = cfg or RoundingConfig()
    atoms = _AtomView(inst)
    n = inst.graph.n
    if atoms.k == 0:
        return Partition.from_lists([])
    diag = np.clip(np.diag(x), 0.0, None)
    t_hat = float(np.mean(diag)) if n else 1.0
    k_bound = max(int(math.ceil(t_hat - 1e-6)), 1)
    L = cholesky_psd(x)
    norms = np.linalg.norm(L, axis=1)
    norms[norms == 0] = 1.0
    unit = L / norms[:, None]
    atom_vec = np.zeros((atoms.k, unit.shape[1]))
    for a, mem in enumerate(atoms.members):
        vec = unit[list(mem)].sum(axis=0)
        nv = np.linalg.norm(vec)
        atom_vec[a] = vec / nv if nv > 0 else vec
    best: Optional[list[list[int]]] = None
    for attempt in range(cfg.attempts):
        rng = np.random.default_rng((cfg.seed, attempt))
        classes = _kms_attempt(atoms, atom_vec, k_bound, rng)
        classes = _compact(atoms, classes)
        if best is None or len(classes) < len(best):
            best = classes
    part = Partition.from_lists(
        [[v for a in cls for v in atoms.members[a]] for cls in best]
    )
    rooms = assign_rooms(inst, part)
    return Partition(part.classes, rooms)


def _kms_attempt(atoms: _AtomView, atom_vec: np.ndarray, k_bound: int,
                 rng: np.random.Generator) -> list[list[int]]:
    remaining = set(range(atoms.k))
    classes: list[list[int]] = []
    inst = atoms.inst
    while remaining:
        rem = sorted(remaining)
        deg = {
            a: sum(
                1 for b in rem if b != a and atoms.masks[a] & atoms.vertex_bits[b]
            )
            for a in rem
        }
        cap = _kms_threshold(k_bound, max(deg.values(), default=0))
        r = rng.standard_normal(atom_vec.shape[1])
        scores = {a: float(atom_vec[a] @ r) for a in rem}
        order = sorted(rem, key=lambda a: (-scores[a], a))
        chosen: list[int] = []
        chosen_bits = 0
        weight = 0
        for a in order:
            if scores[a] < cap and chosen:
                break
            if atoms.conflicts(a, chosen_bits):
                continue
            w = sum(inst.vertex_weight(v) for v in atoms.members[a])
            if weight + w > inst.m:
                continue
            if not atoms.class_ok(chosen, a):
                continue
            chosen.append(a)
            chosen_bits |= atoms.vertex_bits[a]
            weight += w
            if scores[a] < cap:
                break  # stall guard admitted a single top scorer
        classes.append(chosen)
        remaining -= set(chosen)
    return classes


def _class_bits(atoms: _AtomView, cls: Sequence[int]) -> int:
    bits = 0
    for a in cls:
        bits |= atoms.vertex_bits[a]
    return bits


def _compact(atoms: _AtomView, classes: list[list[int]]) -> list[list[int]]:
    """Deterministic post-pass: merge whole classes, then dissolve small ones
    by relocating members, until no move reduces the class count."""
    inst = atoms.inst
    classes = [sorted(c) for c in classes]
    changed = True
    while changed:
        changed = False
        classes.sort(key=lambda c: (len(c), c))
        for i in range(len(classes)):
            merged = False
            for j in range(len(classes)):
                if i == j:
                    continue
                bits_j = _class_bits(atoms, classes[j])
                if any(atoms.masks[a] & bits_j for a in classes[i]):
                    continue
                union = [v for a in classes[i] + classes[j] for v in atoms.members[a]]
                if class_violations(inst, union):
                    continue
                classes[j] = sorted(classes[j] + classes[i])
                del classes[i]
                merged = changed = True
                break
            if merged:
                break
        if changed:
            continue
        for i in range(len(classes)):
            trial = [list(c) for c in classes]
            emptied = True
            for a in list(trial[i]):
                placed = False
                for j in range(len(trial)):
                    if j == i:
                        continue
                    if atoms.masks[a] & _class_bits(atoms, trial[j]):
                        continue
                    if atoms.class_ok(trial[j], a):
                        trial[j].append(a)
                        placed = True
                        break
                if not placed:
                    emptied = False
                    break
            if emptied:
                del trial[i]
                classes = [sorted(c) for c in trial]
                changed = True
                break
    return classes


def iterative_round(
    model: SdpModel,
    x: np.ndarray,
    inst: TimetablingInstance,
    cfg: Optional[RoundingConfig] = None,
    subsolver: Optional[Callable] = None,
) -> tuple[Partition, RoundingDiagnostics]:
    """Eigenvalue fixing over the box form 0 <= X <= I with bounded trace.

    The bounded-colouring solution is rescaled to the class-normalized lift
    (classes contribute rank-one blocks with unit eigenvalues).  Rounds
    classify eigenvalues of the current iterate against delta: low ones
    retire to F0, high ones to F1, and only if fractional ones remain is the
    reduced SDP re-solved on the middle frame; constraints whose reduced
    inner product falls under delta are dropped.  Classes are reconstructed
    by clustering rows of F1 F1', with a validity-repairing fallback, so the
    returned partition always validates.
    """
    from . import solver as solver_mod

    cfg = cfg or RoundingConfig()
    n = inst.graph.n
    if model.dim < n:
        raise ValueError("model order smaller than the instance's vertex count")
    # x is in shifted coordinates (diagonal t - 1); recover the bound scale
    t_hat = float(np.mean(np.diag(x)[:n])) + 1.0
    box = _to_box_form(x[:n, :n], max(t_hat, 1.0))
    upper = greedy_colouring(inst, seed=cfg.seed)
    trace_cap = float(upper.num_classes)
    eq_rows, rows = _box_constraints(inst)
    f0: list[np.ndarray] = []
    f1: list[np.ndarray] = []
    frame = np.eye(n)
    current = box.copy()
    active = list(range(len(rows)))
    violations = [0.0] * len(rows)
    notes: list[str] = []
    rounds = 0
    delta = cfg.delta
    while frame.shape[1] > 0 and rounds < n + 8:
        rounds += 1
        lam, vec = np.linalg.eigh(0.5 * (current + current.T))
        low = lam < delta
        high = lam > 1.0 - delta
        mid = ~(low | high)
        if mid.all() and rounds > 1:
            # non-extreme inner optimum: widen the rounding band to force
            # progress rather than re-solving the same subproblem
            delta = min(0.49, max(delta * 8.0, 0.02))
            low = lam < delta
            high = lam > 1.0 - delta
            mid = ~(low | high)
        for col in vec.T[low]:
            f0.append(frame @ col)
        for col in vec.T[high]:
            f1.append(frame @ col)
        if not mid.any():
            break
        mid_vec = vec[:, mid]
        x_frac = (mid_vec * lam[mid]) @ mid_vec.T
        keep = []
        for idx in active:
            val = rows[idx].value(frame @ x_frac @ frame.T)
            if abs(val) >= delta:
                keep.append(idx)
        active = keep
        frame = frame @ mid_vec
        r = frame.shape[1]
        f1_mat = np.column_stack(f1) if f1 else np.zeros((n, 0))
        sub, ok = _reduced_model(
            eq_rows, rows, active, frame, f1_mat, trace_cap, n, r
        )
        if not ok:
            notes.append("trace budget exhausted; remaining frame dropped")
            break
        runner = subsolver or (
            lambda mdl: solver_mod.solve(
                mdl, None, solver_mod.SolverConfig(max_iter=1200, eps=1e-5)
            )
        )
        res = runner(sub)
        if res.status == "diverged":
            diag_out = RoundingDiagnostics(
                tuple(violations), _violation_bound(rows, n), rounds,
                ("subsolver diverged; partial diagnostics",),
            )
            fallback = greedy_colouring(inst, seed=cfg.seed)
            return fallback, diag_out
        current = 0.5 * (res.X_final[:r, :r] + res.X_final[:r, :r].T)
        if res.status == "max_iter":
            delta = min(0.49, delta * 4 + 1e-3)
    f1_mat = np.column_stack(f1) if f1 else np.zeros((n, 0))
    part = _classes_from_frame(inst, f1_mat, notes)
    rooms = assign_rooms(inst, part)
    part = Partition(part.classes, rooms)
    gram = f1_mat @ f1_mat.T
    for idx, row in enumerate(rows):
        violations[idx] = max(0.0, row.rhs - row.value(gram))
    diag_out = RoundingDiagnostics(
        tuple(violations), _violation_bound(rows, n), rounds, tuple(notes)
    )
    return part, diag_out


def _to_box_form(x: np.ndarray, t_hat: float) -> np.ndarray:
    """Class-normalized lift: block indicators map to orthogonal projectors."""
    y = (x + np.ones_like(x)) / max(t_hat, 1e-9)  # back to Y/t, entries in [0,1]
    row_sums = y.sum(axis=1)
    scale = np.where(row_sums > 1e-9, 1.0 / row_sums, 1.0)
    z = y * np.sqrt(np.outer(scale, scale))
    w, v = np.linalg.eigh(0.5 * (z + z.T))
    w = np.clip(w, 0.0, 1.0)
    return (v * w) @ v.T


def _box_constraints(inst: TimetablingInstance) -> tuple[list[SymRow], list[SymRow]]:
    """Box-form system: (edge equalities, >= rows: class mass and size caps)."""
    n = inst.graph.n
    eq = [
        SymRow.from_entries({(u, w): 0.5}, 0.0) for u, w in sorted(inst.graph.edges)
    ]
    ineq = []
    for v in range(n):
        entries = {(min(u, v), max(u, v)): 0.5 for u in range(n) if u != v}
        entries[(v, v)] = 1.0
        ineq.append(SymRow.from_entries(entries, 1.0))  # class mass >= 1
    for v in range(n):
        ineq.append(SymRow.from_entries({(v, v): 1.0}, 1.0 / inst.m))
    return eq, ineq


def _reduce_row(row: SymRow, frame: np.ndarray, proj: np.ndarray,
                n: int, r: int) -> Optional[SymRow]:
    dense = row.dense(n)
    red = frame.T @ dense @ frame
    rhs = row.rhs - float(np.sum(dense * proj))
    entries = {}
    for i in range(r):
        for j in range(i, r):
            c = red[i, j]
            if abs(c) > 1e-12:
                entries[(i, j)] = c
    if not entries:
        return None
    return SymRow.from_entries(entries, rhs)


def _reduced_model(eq_rows, rows, active, frame, f1_mat, trace_cap, n, r):
    cap = trace_cap - (f1_mat.shape[1] if f1_mat.size else 0)
    if cap < -1e-9:
        return None, False
    proj = f1_mat @ f1_mat.T if f1_mat.size else np.zeros((n, n))
    # box 0 <= X <= I via a slack block: X + X' = I on a 2r variable
    dim = 2 * r
    obj = np.zeros((dim, dim))
    obj[:r, :r] = np.eye(r)
    eq_other = []
    for i in range(r):
        for j in range(i, r):
            c = 1.0 if i == j else 0.5
            eq_other.append(
                SymRow.from_entries(
                    {(i, j): c, (r + i, r + j): c}, 1.0 if i == j else 0.0
                )
            )
    for row in eq_rows:
        red = _reduce_row(row, frame, proj, n, r)
        if red is not None:
            eq_other.append(red)
    ineq = []
    for idx in active:
        red = _reduce_row(rows[idx], frame, proj, n, r)
        if red is not None:
            ineq.append(red)
    trace_entries = {(i, i): -1.0 for i in range(r)}
    ineq.append(SymRow.from_entries(trace_entries, -cap))
    from .relax import SdpModel as _SdpModel, StructureTags as _Tags

    model = _SdpModel(
        dim=dim,
        objective=obj,
        eq_graph=(),
        eq_other=tuple(eq_other),
        ineq=tuple(ineq),
        sense="min",
        structure=_Tags(),
        ineq_groups=(("generic", 0, len(ineq)),),
    )
    return model, True


def _violation_bound(rows: Sequence[SymRow], n: int) -> float:
    """Largest-singular-value bound over sampled constraint subsets."""
    if not rows:
        return 0.0
    rng = np.random.default_rng(0)
    m = len(rows)
    best = 0.0
    sizes = sorted({1, min(2, m), min(8, m), m})
    for size in sizes:
        for _ in range(3):
            pick = rng.choice(m, size=size, replace=False)
            avg = np.zeros((n, n))
            for idx in pick:
                avg += rows[idx].dense(n)
            avg /= size
            sv = np.linalg.svd(avg, compute_uv=False)
            take = int(math.floor(math.sqrt(2 * size) + 1))
            best = max(best, float(np.sum(sv[:take])))
    return best


def _classes_from_frame(inst: TimetablingInstance, f1_mat: np.ndarray,
                        notes: list[str]) -> Partition:
    n = inst.graph.n
    gram = f1_mat @ f1_mat.T if f1_mat.size else np.zeros((n, n))
    classes: list[list[int]] = []
    used = [False] * n
    for v in range(n):
        if used[v]:
            continue
        cluster = [v]
        used[v] = True
        for u in range(v + 1, n):
            if used[u]:
                continue
            if np.max(np.abs(gram[u] - gram[v])) <= 1e-6 and gram[u, v] > 1e-6:
                cluster.append(u)
                used[u] = True
        classes.append(cluster)
    part = Partition.from_lists(classes)
    if validate_partition(inst, part).ok:
        return part
    notes.append("frame clustering ambiguous; greedy validity repair applied")
    # greedy repair: re-pack clusters respecting all class rules
    repaired: list[list[int]] = []
    adj = inst.graph.adjacency_bitsets()
    for cluster in classes:
        for v in sorted(cluster):
            placed = False
            for cls in repaired:
                if any(adj[v] & (1 << u) for u in cls):
                    continue
                if not class_violations(inst, cls + [v]):
                    cls.append(v)
                    placed = True
                    break
            if not placed:
                repaired.append([v])
    return Partition.from_lists(repaired)
