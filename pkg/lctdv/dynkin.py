'''ADE singularity types with their exceptional-curve labelings.

Labelings are fixed:
  A_n  chain E1 - E2 - ... - En
  D_n  E1 and E2 both on E3, then chain E3 - E4 - ... - En
  E_n  main chain E1 - E2 - E3 - E5 - ... - En with E4 hanging off E3
'''

import itertools
import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, FrozenSet, List, Tuple

import networkx as nx

from lctdv.errors import InvalidRank, ParseError
from lctdv.exactlin import QMatrix, QVector

logger = logging.getLogger(__name__)

_TYPE_RE = re.compile(r'^([ADE])(\d+)$')
KIND_ORDER = {'E': 0, 'D': 1, 'A': 2}


@dataclass(frozen=True, order=True)
class SingularityType:
    kind: str
    rank: int

    def __post_init__(self):
        if self.kind == 'A' and self.rank >= 1:
            return
        if self.kind == 'D' and self.rank >= 4:
            return
        if self.kind == 'E' and self.rank in (6, 7, 8):
            return
        raise InvalidRank(f"no Du Val singularity of type {self.kind}{self.rank}")

    @classmethod
    def parse(cls, text: str) -> 'SingularityType':
        match = _TYPE_RE.match(text.strip())
        if match is None:
            raise ParseError(f"bad singularity type {text!r}")
        return cls(match.group(1), int(match.group(2)))

    def sort_key(self) -> Tuple[int, int]:
        '''E before D before A, larger rank first.'''
        return KIND_ORDER[self.kind], -self.rank

    def __str__(self) -> str:
        return f"{self.kind}{self.rank}"


@dataclass(frozen=True)
class DynkinGraph:
    node_labels: Tuple[str, ...]
    edges: FrozenSet[FrozenSet[str]]

    def __post_init__(self):
        graph = self.to_networkx()
        if not nx.is_tree(graph):
            raise InvalidRank(f"Dynkin graph on {self.node_labels} is not a tree")
        if max(dict(graph.degree()).values(), default=0) > 3:
            raise InvalidRank(f"Dynkin graph on {self.node_labels} has a vertex of degree > 3")

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(self.node_labels)
        graph.add_edges_from(tuple(sorted(e)) for e in self.edges)
        return graph

    def adjacent(self, a: str, b: str) -> bool:
        return frozenset((a, b)) in self.edges

    def index_edges(self) -> List[Tuple[int, int]]:
        '''Edges as sorted (i, j) index pairs, in label order.'''
        position = {label: i for i, label in enumerate(self.node_labels)}
        pairs = [tuple(sorted(position[x] for x in e)) for e in self.edges]
        return sorted(pairs)


def _edge_indices(t: SingularityType) -> List[Tuple[int, int]]:
    n = t.rank
    if t.kind == 'A':
        return [(i, i + 1) for i in range(1, n)]
    if t.kind == 'D':
        return [(1, 3), (2, 3)] + [(i, i + 1) for i in range(3, n)]
    chain = [1, 2, 3] + list(range(5, n + 1))
    return [(3, 4)] + list(zip(chain, chain[1:]))


def dynkin_graph(t: SingularityType, letter: str = 'E') -> DynkinGraph:
    labels = tuple(f"{letter}{i}" for i in range(1, t.rank + 1))
    edges = frozenset(frozenset((f"{letter}{i}", f"{letter}{j}")) for i, j in _edge_indices(t))
    return DynkinGraph(labels, edges)


@lru_cache(maxsize=None)
def intersection_matrix(t: SingularityType) -> QMatrix:
    n = t.rank
    rows = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        rows[i][i] = Fraction(-2)
    for i, j in _edge_indices(t):
        rows[i - 1][j - 1] = Fraction(1)
        rows[j - 1][i - 1] = Fraction(1)
    return QMatrix.of(rows)


@lru_cache(maxsize=None)
def fundamental_cycle(t: SingularityType) -> QVector:
    '''Laufer's algorithm: start from the reduced cycle, raise E_i while z·E_i > 0.'''
    M = intersection_matrix(t)
    z = [Fraction(1)] * t.rank
    while True:
        products = M.matvec(QVector(tuple(z)))
        positive = next((i for i, p in enumerate(products) if p > 0), None)
        if positive is None:
            break
        z[positive] += 1
    logger.debug(f"fundamental cycle of {t}: {z}")
    return QVector(tuple(z))


def fundamental_cycle_profile(t: SingularityType) -> QVector:
    '''Intersections Z̃·E_i of the anticanonical member through the point.'''
    return -intersection_matrix(t).matvec(fundamental_cycle(t))


def is_anti_nef(t: SingularityType, cycle: Tuple[int, ...]) -> bool:
    M = intersection_matrix(t)
    return all(p <= 0 for p in M.matvec(QVector.of(cycle)))


def brute_force_minimal_cycles(t: SingularityType, cap: int = 6) -> List[Tuple[int, ...]]:
    '''Componentwise-minimal anti-nef cycles with entries in [1, cap].

    Depth-first over the whole box. A branch is cut once a curve and all of
    its neighbours carry values and the curve meets the cycle positively.
    '''
    n = t.rank
    M = intersection_matrix(t)
    rows = [[int(M[i, j]) for j in range(n)] for i in range(n)]
    ready: Dict[int, List[int]] = {}
    for i, row in enumerate(rows):
        ready.setdefault(max(j for j, m in enumerate(row) if m), []).append(i)
    valid: List[Tuple[int, ...]] = []
    cycle = [0] * n

    def extend(k: int) -> None:
        if k == n:
            valid.append(tuple(cycle))
            return
        for value in range(1, cap + 1):
            cycle[k] = value
            if all(sum(m * x for m, x in zip(rows[i], cycle)) <= 0 for i in ready.get(k, ())):
                extend(k + 1)

    extend(0)
    valid.sort(key=sum)
    logger.debug(f"{t}: {len(valid)} anti-nef cycles with entries up to {cap}")
    return [
        c for c in valid
        if not any(o != c and all(x <= y for x, y in zip(o, c)) for o in valid)
    ]


def all_types(max_rank: int = 8) -> List[SingularityType]:
    types = [SingularityType('A', n) for n in range(1, max_rank + 1)]
    types += [SingularityType('D', n) for n in range(4, max_rank + 1)]
    types += [SingularityType('E', n) for n in (6, 7, 8) if n <= max_rank]
    return types


_PART_RE = re.compile(r'^(\d*)([ADE]\d+)$')


def signature(types) -> str:
    '''Canonical singularity string, e.g. ``2A3+A1``; ``smooth`` when empty.'''
    ordered = sorted(types, key=lambda t: t.sort_key())
    parts = []
    for t, group in itertools.groupby(ordered):
        count = len(list(group))
        parts.append(f"{count}{t}" if count > 1 else str(t))
    return '+'.join(parts) if parts else 'smooth'


def parse_signature(text: str) -> List[SingularityType]:
    text = text.strip()
    if text == 'smooth':
        return []
    types: List[SingularityType] = []
    for part in text.replace(' ', '').split('+'):
        match = _PART_RE.match(part)
        if match is None:
            raise ParseError(f"bad singularity list {text!r}")
        count = int(match.group(1) or 1)
        types.extend([SingularityType.parse(match.group(2))] * count)
    return types
