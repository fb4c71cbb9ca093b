from __future__ import annotations

import networkx as nx

from ..errors import StratificationError
from .ast import Program


def dependency_graph(program: Program) -> nx.DiGraph:
    """Edges run from body predicate to head predicate; ``negative`` marks negation."""
    g = nx.DiGraph()
    for key in sorted(program.predicates()):
        g.add_node(key)
    for rule in program.rules:
        head = rule.head.key
        for lit in rule.body:
            if lit.is_builtin:
                continue
            neg = g.edges[lit.key, head]["negative"] if g.has_edge(lit.key, head) else False
            g.add_edge(lit.key, head, negative=neg or lit.negated)
    return g


def stratify(program: Program) -> list[set[str]]:
    """Partition every predicate (extensional ones included) into strata.

    Strata come back in evaluation order. A head sits in a stratum no lower
    than its positive body predicates and strictly above its negated ones.
    An empty program has no strata.
    """
    g = dependency_graph(program)
    if not g:
        return []
    comp = nx.condensation(g)
    members = nx.get_node_attributes(comp, "members")
    for c, preds in members.items():
        for u, v, neg in g.subgraph(preds).edges(data="negative"):
            if neg:
                back = nx.shortest_path(g.subgraph(preds), v, u)
                raise StratificationError([u, *back])
    level: dict[int, int] = {}
    for c in nx.topological_sort(comp):
        best = 0
        for pred_c in comp.predecessors(c):
            step = 0
            for u in members[pred_c]:
                for v in members[c]:
                    if g.has_edge(u, v) and g.edges[u, v]["negative"]:
                        step = 1
            best = max(best, level[pred_c] + step)
        level[c] = best
    strata: dict[int, set[str]] = {}
    for c, lv in level.items():
        strata.setdefault(lv, set()).update(members[c])
    return [strata[k] for k in sorted(strata)]
