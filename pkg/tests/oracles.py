"""Independent oracles: naive greatest-fixed-point bisimulations and
brute-force trace enumeration.  Deliberately separate from the package's
partition-refinement implementation."""

from __future__ import annotations

from paw.kernel import Lts


def _edges(lts: Lts, offset: int):
    out: dict[int, list[tuple[str, int]]] = {}
    for src, label, dst in lts.transitions:
        text = "tau" if label.is_tau else label.text()
        out.setdefault(src + offset, []).append((text, dst + offset))
    return out


def _combine(l1: Lts, l2: Lts):
    n1 = l1.n_states
    edges = _edges(l1, 0)
    edges.update(_edges(l2, n1))
    term = {s for s in l1.terminating} | {s + n1 for s in l2.terminating}
    n = n1 + l2.n_states
    return n, edges, term, l1.initial, n1 + l2.initial


def naive_strong_related(l1: Lts, l2: Lts) -> bool:
    n, edges, term, i1, i2 = _combine(l1, l2)
    rel = {
        (p, q)
        for p in range(n)
        for q in range(n)
        if (p in term) == (q in term)
    }
    changed = True
    while changed:
        changed = False
        for p, q in sorted(rel):
            ok = True
            for a, p1 in edges.get(p, []):
                if not any(b == a and (p1, q1) in rel for b, q1 in edges.get(q, [])):
                    ok = False
                    break
            if ok:
                for a, q1 in edges.get(q, []):
                    if not any(b == a and (p1, q1) in rel for b, p1 in edges.get(p, [])):
                        ok = False
                        break
            if not ok:
                rel.discard((p, q))
                changed = True
    return (i1, i2) in rel


def _tau_closure(n, edges):
    closure = []
    for s in range(n):
        seen = {s}
        stack = [s]
        while stack:
            cur = stack.pop()
            for a, dst in edges.get(cur, []):
                if a == "tau" and dst not in seen:
                    seen.add(dst)
                    stack.append(dst)
        closure.append(seen)
    return closure


def _saturate(n, edges):
    closure = _tau_closure(n, edges)
    sat: dict[int, set[tuple[str, int]]] = {s: set() for s in range(n)}
    for p in range(n):
        for q in closure[p]:
            sat[p].add(("tau", q))
        for p1 in closure[p]:
            for a, p2 in edges.get(p1, []):
                if a == "tau":
                    continue
                for q in closure[p2]:
                    sat[p].add((a, q))
    return sat, closure


def _naive_weak_relation(n, edges, term):
    sat, closure = _saturate(n, edges)
    wterm = [any(q in term for q in closure[p]) for p in range(n)]
    rel = {(p, q) for p in range(n) for q in range(n) if wterm[p] == wterm[q]}
    changed = True
    while changed:
        changed = False
        for p, q in sorted(rel):
            ok = True
            for a, p1 in sat[p]:
                if not any(b == a and (p1, q1) in rel for b, q1 in sat[q]):
                    ok = False
                    break
            if ok:
                for a, q1 in sat[q]:
                    if not any(b == a and (p1, q1) in rel for b, p1 in sat[p]):
                        ok = False
                        break
            if not ok:
                rel.discard((p, q))
                changed = True
    return rel, sat, closure


def naive_weak_related(l1: Lts, l2: Lts) -> bool:
    n, edges, term, i1, i2 = _combine(l1, l2)
    rel, _, _ = _naive_weak_relation(n, edges, term)
    return (i1, i2) in rel


def naive_rooted_weak_related(l1: Lts, l2: Lts) -> bool:
    n, edges, term, i1, i2 = _combine(l1, l2)
    rel, sat, closure = _naive_weak_relation(n, edges, term)

    def tau_plus(q):
        out = set()
        for a, q1 in edges.get(q, []):
            if a == "tau":
                out |= closure[q1]
        return out

    def root_ok(p, q):
        if (any(t in term for t in closure[p])) != (any(t in term for t in closure[q])):
            return False
        for a, p1 in edges.get(p, []):
            if a == "tau":
                cands = tau_plus(q)
            else:
                cands = {q1 for b, q1 in sat[q] if b == a}
            if not any((p1, q1) in rel for q1 in cands):
                return False
        return True

    return root_ok(i1, i2) and root_ok(i2, i1)


def observable_traces(lts: Lts, depth: int) -> set[tuple[str, ...]]:
    """All tau-free observable traces up to the given length."""
    edges = _edges(lts, 0)
    out: set[tuple[str, ...]] = set()
    stack = [(lts.initial, ())]
    seen: set[tuple[int, tuple[str, ...]]] = set()
    while stack:
        state, trace = stack.pop()
        if (state, trace) in seen:
            continue
        seen.add((state, trace))
        out.add(trace)
        if len(trace) >= depth:
            continue
        for a, dst in edges.get(state, []):
            if a == "tau":
                stack.append((dst, trace))
            else:
                stack.append((dst, trace + (a,)))
    return out


def traces_included(l1: Lts, l2: Lts, depth: int) -> bool:
    return observable_traces(l1, depth) <= observable_traces(l2, depth)
