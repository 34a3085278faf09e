"""Canonical atom ranking and SMILES writing.

Ranks come from iterative neighborhood refinement seeded with local atom
invariants; remaining ties are broken by splitting one atom out of the
lowest tied class and re-refining. The writer then walks the graph in rank
order, so the output string is independent of input atom order.
"""

from __future__ import annotations

from .mol import (
    ALLOWED_VALENCES,
    AROMATIC,
    DOUBLE,
    SINGLE,
    TRIPLE,
    Molecule,
)
from .smiles import infer_hydrogens

_BOND_TOKEN = {SINGLE: "-", DOUBLE: "=", TRIPLE: "#", AROMATIC: ":"}


def canonical_ranks(mol: Molecule, extra: list | None = None) -> list[int]:
    """Per-atom canonical rank in [0, n). extra adds per-atom seed invariants."""
    n = len(mol.atoms)
    if n == 0:
        return []
    ring_membership = [False] * n
    for ring in mol.rings:
        for i in ring:
            ring_membership[i] = True

    seeds = []
    for a in mol.atoms:
        order_sum = 0
        for b in mol.bonds_of(a.index):
            order_sum += 3 if b.order == AROMATIC else 2 * b.order
        seed = (
            a.element,
            mol.degree(a.index),
            order_sum,
            a.formal_charge,
            a.implicit_h,
            a.aromatic,
            ring_membership[a.index],
        )
        if extra is not None:
            seed = seed + (extra[a.index],)
        seeds.append(seed)

    ranks = _ranks_from_keys(seeds)
    neigh = [[] for _ in range(n)]
    for b in mol.bonds:
        neigh[b.a].append((b.order, b.b))
        neigh[b.b].append((b.order, b.a))

    ranks = _refine(ranks, neigh)
    # tie-break: isolate one member of the lowest multi-atom class
    while len(set(ranks)) < n:
        counts: dict[int, int] = {}
        for r in ranks:
            counts[r] = counts.get(r, 0) + 1
        tied = min(r for r, c in counts.items() if c > 1)
        chosen = min(i for i in range(n) if ranks[i] == tied)
        keys = [(ranks[i], 0 if i == chosen else 1) for i in range(n)]
        ranks = _refine(_ranks_from_keys(keys), neigh)
    return ranks


def _ranks_from_keys(keys) -> list[int]:
    order = sorted(set(keys))
    lookup = {k: i for i, k in enumerate(order)}
    return [lookup[k] for k in keys]


def _refine(ranks: list[int], neigh) -> list[int]:
    n = len(ranks)
    while True:
        keys = [
            (ranks[i], tuple(sorted((o, ranks[j]) for o, j in neigh[i])))
            for i in range(n)
        ]
        new_ranks = _ranks_from_keys(keys)
        if len(set(new_ranks)) == len(set(ranks)):
            return new_ranks
        ranks = new_ranks


def write_canonical_smiles(mol: Molecule) -> str:
    """Deterministic SMILES, invariant under relabeling of input atoms."""
    if not mol.atoms:
        return ""
    ranks = canonical_ranks(mol)
    parts = []
    for comp in mol.components():
        parts.append(_write_component(mol, ranks, comp))
    parts.sort()
    return ".".join(parts)


def _write_component(mol: Molecule, ranks: list[int], comp: list[int]) -> str:
    start = min(comp, key=lambda i: ranks[i])

    # DFS in rank order, splitting edges into tree edges and ring closures.
    visited = {start}
    tree_children: dict[int, list[int]] = {i: [] for i in comp}
    closures: list[tuple[int, int]] = []
    closure_seen: set[tuple[int, int]] = set()
    stack = [(start, iter(sorted(mol.neighbors(start), key=lambda j: ranks[j])))]
    parent = {start: None}
    while stack:
        u, it = stack[-1]
        advanced = False
        for v in it:
            if v not in visited:
                visited.add(v)
                parent[v] = u
                tree_children[u].append(v)
                stack.append((v, iter(sorted(mol.neighbors(v), key=lambda j: ranks[j]))))
                advanced = True
                break
            elif v != parent[u]:
                key = (min(u, v), max(u, v))
                if key not in closure_seen:
                    closure_seen.add(key)
                    closures.append((u, v))
        if not advanced:
            stack.pop()

    digit_of: dict[tuple[int, int], int] = {}
    open_digits: dict[int, list[int]] = {i: [] for i in comp}
    close_digits: dict[int, list[tuple[int, int]]] = {i: [] for i in comp}
    free = list(range(1, 100))
    # digits assigned in DFS-discovery order of the closing atom
    discovery = {a: t for t, a in enumerate(_preorder(start, tree_children))}
    closures.sort(key=lambda uv: (discovery[uv[0]], discovery[uv[1]]))
    for u, v in closures:
        if not free:
            raise ValueError("more than 99 ring closures in one component")
        num = free.pop(0)
        digit_of[(u, v)] = num
        open_digits[v].append(num)  # v was discovered earlier, so it opens
        close_digits[u].append((num, v))

    out: list[str] = []
    _emit(mol, ranks, start, None, tree_children, open_digits, close_digits, out)
    return "".join(out)


def _preorder(start, tree_children):
    order = []
    stack = [start]
    while stack:
        u = stack.pop()
        order.append(u)
        for v in reversed(tree_children[u]):
            stack.append(v)
    return order


def _emit(mol, ranks, u, parent, tree_children, open_digits, close_digits, out):
    if parent is not None:
        out.append(_bond_token(mol, parent, u))
    out.append(_atom_token(mol, u))
    for num in open_digits[u]:
        out.append(_digit_token(num))
    for num, v in close_digits[u]:
        out.append(_bond_token(mol, u, v))
        out.append(_digit_token(num))
    children = tree_children[u]
    for i, v in enumerate(children):
        last = i == len(children) - 1
        if not last:
            out.append("(")
        _emit(mol, ranks, v, u, tree_children, open_digits, close_digits, out)
        if not last:
            out.append(")")


def _digit_token(num: int) -> str:
    return str(num) if num < 10 else f"%{num:02d}"


def _bond_token(mol: Molecule, u: int, v: int) -> str:
    b = mol.bond_between(u, v)
    au, av = mol.atoms[u], mol.atoms[v]
    if b.order == AROMATIC:
        return ""  # implicit between two aromatic atoms
    if b.order == SINGLE:
        # single between two aromatics must be explicit or it would re-parse
        # as an aromatic candidate
        if au.aromatic and av.aromatic:
            return "-"
        return ""
    return _BOND_TOKEN[b.order]


def _atom_token(mol: Molecule, idx: int) -> str:
    a = mol.atoms[idx]
    symbol = a.element.lower() if a.aromatic else a.element
    needs_bracket = a.formal_charge != 0 or a.element == "H"
    if not needs_bracket:
        try:
            inferred = infer_hydrogens(mol, idx)
        except Exception:
            inferred = -1
        needs_bracket = inferred != a.implicit_h
    if not needs_bracket:
        return symbol
    h = ""
    if a.implicit_h == 1:
        h = "H"
    elif a.implicit_h > 1:
        h = f"H{a.implicit_h}"
    q = ""
    if a.formal_charge == 1:
        q = "+"
    elif a.formal_charge == -1:
        q = "-"
    elif a.formal_charge > 1:
        q = f"+{a.formal_charge}"
    elif a.formal_charge < -1:
        q = f"-{-a.formal_charge}"
    return f"[{symbol}{h}{q}]"
