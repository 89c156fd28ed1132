"""Equivalence and preorder checking over finite LTSs: strong bisimulation,
rooted weak bisimulation (observational congruence), and weak trace inclusion.

Weak relations are computed as strong bisimulation over the tau-saturated
transition relation (p =a=> q means tau* a tau* for visible a, tau* for tau);
termination is matched weakly (a terminating state matches one that can reach
termination through silent steps).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .kernel import ActionLabel, Lts


@dataclass
class VerdictReport:
    """Outcome of an equivalence or inclusion check.

    Exactly one of ``witness`` (relation holds) and ``counterexample``
    (it does not) is set.
    """

    related: bool
    relation: str
    witness: dict[int, int] | None = None
    counterexample: tuple[tuple[int, int], list[str]] | None = None
    warnings: list[str] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def summary(self) -> str:
        if self.related:
            return f"related ({self.relation})"
        pair, labels = self.counterexample or ((-1, -1), [])
        trace = ", ".join(labels) if labels else "termination"
        return f"not related ({self.relation}); distinguished after <{trace}> at states {pair}"

    def machine_line(self) -> str:
        status = "RELATED" if self.related else "NOT-RELATED"
        extra = ""
        if self.counterexample:
            extra = " trace=" + "|".join(self.counterexample[1])
        return f"{self.relation} {status}{extra}"


class _Union:
    """Disjoint union of two LTSs with integer labels."""

    def __init__(self, l1: Lts, l2: Lts):
        self.n1 = l1.n_states
        self.n = l1.n_states + l2.n_states
        self.init1 = l1.initial
        self.init2 = self.n1 + l2.initial
        self.label_ids: dict[str, int] = {"tau": 0}
        self.label_names: list[str] = ["tau"]
        self.trans: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        self.term = [False] * self.n
        for lts, off in ((l1, 0), (l2, self.n1)):
            for s in lts.terminating:
                self.term[off + s] = True
            for src, label, dst in lts.transitions:
                self.trans[off + src].append((self._label_id(label), off + dst))

    def _label_id(self, label: ActionLabel) -> int:
        text = "tau" if label.is_tau else label.text()
        lid = self.label_ids.get(text)
        if lid is None:
            lid = len(self.label_names)
            self.label_ids[text] = lid
            self.label_names.append(text)
        return lid

    def tau_closure(self) -> list[set[int]]:
        closure: list[set[int]] = []
        for s in range(self.n):
            seen = {s}
            stack = [s]
            while stack:
                cur = stack.pop()
                for lid, dst in self.trans[cur]:
                    if lid == 0 and dst not in seen:
                        seen.add(dst)
                        stack.append(dst)
            closure.append(seen)
        return closure

    def saturate(self) -> tuple[list[list[tuple[int, int]]], list[bool]]:
        """Weak transition relation and weak termination flags."""
        closure = self.tau_closure()
        sat: list[set[tuple[int, int]]] = [set() for _ in range(self.n)]
        for p in range(self.n):
            for q in closure[p]:
                sat[p].add((0, q))
            for p1 in closure[p]:
                for lid, p2 in self.trans[p1]:
                    if lid == 0:
                        continue
                    for q in closure[p2]:
                        sat[p].add((lid, q))
        wterm = [any(self.term[q] for q in closure[p]) for p in range(self.n)]
        return [sorted(s) for s in sat], wterm


def _refine(
    n: int, trans: list[list[tuple[int, int]]], term: list[bool]
) -> tuple[list[int], list[list[int]]]:
    """Signature-based partition refinement.

    Returns the stable block assignment and the assignment history per round
    (used to build distinguishing sequences).
    """
    blocks = [1 if term[s] else 0 for s in range(n)]
    history = [list(blocks)]
    while True:
        signatures: dict[tuple, int] = {}
        new_blocks = [0] * n
        for s in range(n):
            sig = (blocks[s], frozenset((lid, blocks[dst]) for lid, dst in trans[s]))
            bid = signatures.setdefault(sig, len(signatures))
            new_blocks[s] = bid
        if len(set(new_blocks)) == len(set(blocks)):
            return new_blocks, history
        blocks = new_blocks
        history.append(list(blocks))


def _distinguish(
    p: int,
    q: int,
    trans: list[list[tuple[int, int]]],
    history: list[list[int]],
    names: list[str],
) -> list[str]:
    """A short action sequence after which p and q have no matching moves."""
    level = None
    for k, assignment in enumerate(history):
        if assignment[p] != assignment[q]:
            level = k
            break
    if level is None:
        level = len(history)
    if level == 0:
        return []  # distinguished by termination alone
    prev = history[level - 1]
    moves_q: dict[int, set[int]] = {}
    for lid, dst in trans[q]:
        moves_q.setdefault(lid, set()).add(prev[dst])
    for lid, dst in trans[p]:
        if prev[dst] not in moves_q.get(lid, set()):
            best: tuple[int, int] | None = None
            for lid2, qdst in trans[q]:
                if lid2 != lid:
                    continue
                depth = 0
                for k2, assignment in enumerate(history):
                    if assignment[dst] != assignment[qdst]:
                        depth = k2
                        break
                if best is None or depth > best[0]:
                    best = (depth, qdst)
            seq = [names[lid]]
            if best is not None:
                seq += _distinguish(dst, best[1], trans, history, names)
            return seq
    # symmetric direction
    moves_p: dict[int, set[int]] = {}
    for lid, dst in trans[p]:
        moves_p.setdefault(lid, set()).add(prev[dst])
    for lid, dst in trans[q]:
        if prev[dst] not in moves_p.get(lid, set()):
            best = None
            for lid2, pdst in trans[p]:
                if lid2 != lid:
                    continue
                depth = 0
                for k2, assignment in enumerate(history):
                    if assignment[pdst] != assignment[dst]:
                        depth = k2
                        break
                if best is None or depth > best[0]:
                    best = (depth, pdst)
            seq = [names[lid]]
            if best is not None:
                seq += _distinguish(best[1], dst, trans, history, names)
            return seq
    return []


def strong_bisim(l1: Lts, l2: Lts) -> VerdictReport:
    """Strong bisimilarity of the initial states, by partition refinement."""
    u = _Union(l1, l2)
    blocks, history = _refine(u.n, u.trans, list(u.term))
    if blocks[u.init1] == blocks[u.init2]:
        return VerdictReport(True, "strong", witness=dict(enumerate(blocks)))
    seq = _distinguish(u.init1, u.init2, u.trans, history, u.label_names)
    return VerdictReport(
        False, "strong", counterexample=((u.init1, u.init2 - u.n1), seq)
    )


def weak_blocks(l1: Lts, l2: Lts):
    u = _Union(l1, l2)
    sat, wterm = u.saturate()
    blocks, history = _refine(u.n, sat, wterm)
    return u, sat, wterm, blocks, history


def weak_bisim(l1: Lts, l2: Lts) -> VerdictReport:
    """Plain weak bisimilarity (no root condition); used by the rooted check."""
    u, sat, _wterm, blocks, history = weak_blocks(l1, l2)
    if blocks[u.init1] == blocks[u.init2]:
        return VerdictReport(True, "weak", witness=dict(enumerate(blocks)))
    seq = _distinguish(u.init1, u.init2, sat, history, u.label_names)
    return VerdictReport(False, "weak", counterexample=((u.init1, u.init2 - u.n1), seq))


def rooted_weak_bisim(l1: Lts, l2: Lts) -> VerdictReport:
    """Rooted weak bisimulation: weak bisimilarity plus the root condition
    (an initial move, including tau, must be answered by at least one move)."""
    u, sat, wterm, blocks, history = weak_blocks(l1, l2)

    def tau_plus(root: int) -> set[int]:
        # at least one real tau step, then tau*
        out: set[int] = set()
        for lid, dst in u.trans[root]:
            if lid == 0:
                out |= {q for l2id, q in sat[dst] if l2id == 0}
        return out

    def sat_moves(root: int, lid: int) -> set[int]:
        return {dst for l2id, dst in sat[root] if l2id == lid}

    def root_matches(p0: int, q0: int) -> list[str] | None:
        if wterm[p0] != wterm[q0]:
            return []
        for lid, p1 in u.trans[p0]:
            candidates = tau_plus(q0) if lid == 0 else sat_moves(q0, lid)
            if not any(blocks[q1] == blocks[p1] for q1 in candidates):
                label = u.label_names[lid]
                best: int | None = None
                depth = -1
                for q1 in candidates:
                    d = 0
                    for k, assignment in enumerate(history):
                        if assignment[p1] != assignment[q1]:
                            d = k
                            break
                    if d > depth:
                        depth, best = d, q1
                seq = [label]
                if best is not None:
                    seq += _distinguish(p1, best, sat, history, u.label_names)
                return seq
        return None

    fail = root_matches(u.init1, u.init2)
    if fail is None:
        swapped = root_matches(u.init2, u.init1)
        if swapped is None:
            return VerdictReport(True, "rooted-weak", witness=dict(enumerate(blocks)))
        fail = swapped
    return VerdictReport(
        False, "rooted-weak", counterexample=((l1.initial, l2.initial), fail)
    )


def weak_trace_included(l1: Lts, l2: Lts, bound: int = 512) -> VerdictReport:
    """Every observable trace of l1 (up to ``bound`` visible actions) is a
    trace of l2.  The counterexample is a shortest failing trace."""
    u = _Union(l1, l2)
    closure = u.tau_closure()
    start_q = frozenset(closure[u.init2])
    seen: set[tuple[int, frozenset[int]]] = set()
    queue: list[tuple[int, frozenset[int], tuple[str, ...]]] = []
    for p in closure[u.init1]:
        item = (p, start_q, ())
        if (p, start_q) not in seen:
            seen.add((p, start_q))
            queue.append(item)
    head = 0
    while head < len(queue):
        p, qset, trace = queue[head]
        head += 1
        if len(trace) >= bound:
            continue
        for lid, p1 in u.trans[p]:
            if lid == 0:
                for p2 in closure[p1]:
                    if (p2, qset) not in seen:
                        seen.add((p2, qset))
                        queue.append((p2, qset, trace))
                continue
            q_next: set[int] = set()
            for q in qset:
                for l2id, q1 in u.trans[q]:
                    if l2id == lid:
                        q_next |= closure[q1]
            new_trace = trace + (u.label_names[lid],)
            if not q_next:
                return VerdictReport(
                    False,
                    "trace-inclusion",
                    counterexample=((l1.initial, l2.initial), list(new_trace)),
                )
            fq = frozenset(q_next)
            for p2 in closure[p1]:
                if (p2, fq) not in seen:
                    seen.add((p2, fq))
                    queue.append((p2, fq, new_trace))
    return VerdictReport(True, "trace-inclusion", witness={})
