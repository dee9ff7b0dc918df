"""Rational preperiodic structures and the symmetry-locus catalogs.

Bounded search for the rational preperiodic graph of a map, classification
of the twists of z^2 and 1/z^2 into their finitely many preperiodic
structures, and the root-of-unity catalogs of low-degree preperiodic
points for the two power maps via exponent dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Dict, Hashable, List, NamedTuple, Optional, Tuple

from sympy import totient

from quadpcf.exact_arith import (
    INFINITY,
    ExtendedRational,
    PointValue,
    Rat,
    RationalLike,
    _as_rat,
    enumerate_rationals,
    point_sort_key,
    squarefree_part,
)
from quadpcf.pcfverify import point_size
from quadpcf.projmap import NormalizedQuadMap


class CatalogMatchError(RuntimeError):
    """A computed structure matches no catalog class; this would falsify
    the classification and is treated as a hard failure."""


class TypeTag(NamedTuple):
    """A point entering an m-cycle after exactly n steps has type (m, n)."""

    m: int
    n: int

    def __str__(self):
        return f"{self.m}_{self.n}"


# ----------------------------------------------------------------------
# functional graphs
# ----------------------------------------------------------------------

def vertex_sort_key(v):
    if isinstance(v, RootOfUnityPoint):
        return v.sort_key()
    return point_sort_key(v)


class FunctionalGraph:
    """A finite set with one successor per element, closed under the map."""

    def __init__(self, successor: Dict[Hashable, Hashable],
                 unresolved: Tuple = ()):
        for v, w in successor.items():
            if w not in successor:
                raise ValueError(f"graph not closed: {v} -> {w} leaves the vertex set")
        self.successor = dict(successor)
        self.unresolved = tuple(unresolved)
        self._cycles: Optional[List[Tuple]] = None

    # -- basic views -------------------------------------------------------

    @property
    def vertices(self) -> Tuple:
        return tuple(sorted(self.successor, key=vertex_sort_key))

    def __len__(self):
        return len(self.successor)

    def __contains__(self, v):
        return v in self.successor

    def __eq__(self, other):
        if not isinstance(other, FunctionalGraph):
            return NotImplemented
        return self.successor == other.successor

    def edges(self) -> List[Tuple]:
        return sorted(self.successor.items(), key=lambda kv: vertex_sort_key(kv[0]))

    def edge_lines(self) -> List[str]:
        return [f"{p} -> {q}" for p, q in self.edges()]

    def to_dot(self, name: str = "preperiodic") -> str:
        lines = [f"digraph {name} {{"]
        for v in self.vertices:
            lines.append(f'  "{v}";')
        for p, q in self.edges():
            lines.append(f'  "{p}" -> "{q}";')
        lines.append("}")
        return "\n".join(lines)

    # -- cycle structure -----------------------------------------------------

    def cycles(self) -> List[Tuple]:
        """All cycles, each as a successor-ordered tuple starting at its
        least vertex."""
        if self._cycles is not None:
            return self._cycles
        color: Dict[Hashable, int] = {}
        cycles = []
        for start in self.vertices:
            if start in color:
                continue
            path = []
            pos = {}
            cur = start
            while cur not in color and cur not in pos:
                pos[cur] = len(path)
                path.append(cur)
                cur = self.successor[cur]
            if cur in pos:
                cyc = tuple(path[pos[cur]:])
                k = min(range(len(cyc)), key=lambda i: vertex_sort_key(cyc[i]))
                cycles.append(cyc[k:] + cyc[:k])
            for v in path:
                color[v] = 2
        cycles.sort(key=lambda c: (len(c), [vertex_sort_key(v) for v in c]))
        self._cycles = cycles
        return cycles

    def cycle_vertices(self) -> set:
        return {v for c in self.cycles() for v in c}

    def type_of(self, point) -> TypeTag:
        if point not in self.successor:
            raise KeyError(f"point {point} is not in the graph")
        cyc = self.cycle_vertices()
        n = 0
        cur = point
        while cur not in cyc:
            cur = self.successor[cur]
            n += 1
        m = next(len(c) for c in self.cycles() if cur in c)
        return TypeTag(m, n)

    def points_of_type(self, tag: TypeTag) -> Tuple:
        return tuple(v for v in self.vertices if self.type_of(v) == tag)

    # -- shape ----------------------------------------------------------------

    def components(self) -> List["FunctionalGraph"]:
        parent: Dict[Hashable, Hashable] = {v: v for v in self.successor}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for v, w in self.successor.items():
            parent[find(v)] = find(w)
        groups: Dict[Hashable, Dict] = {}
        for v, w in self.successor.items():
            groups.setdefault(find(v), {})[v] = w
        comps = [FunctionalGraph(g) for g in groups.values()]
        comps.sort(key=lambda g: (len(g), g.canonical_form()))
        return comps

    def canonical_form(self):
        """Isomorphism invariant: per component, the cycle length together
        with the minimal rotation of the tuple of canonical rooted-tree
        encodings hanging off the cycle."""
        cyc_set = self.cycle_vertices()
        children: Dict[Hashable, List] = {v: [] for v in self.successor}
        for v, w in self.successor.items():
            if v not in cyc_set:
                children[w].append(v)

        def tree_enc(v):
            return tuple(sorted(tree_enc(ch) for ch in children[v]))

        comps = []
        for cycle in self.cycles():
            encs = [tree_enc(v) for v in cycle]
            rots = [tuple(encs[i:] + encs[:i]) for i in range(len(encs))]
            comps.append((len(cycle), min(rots)))
        return tuple(sorted(comps))

    def is_isomorphic_to(self, other: "FunctionalGraph") -> bool:
        return self.canonical_form() == other.canonical_form()


def type_of(graph: FunctionalGraph, point) -> TypeTag:
    return graph.type_of(point)


# ----------------------------------------------------------------------
# bounded rational preperiodic search
# ----------------------------------------------------------------------

DEFAULT_HEIGHT_BOUND = 16
DEFAULT_STEP_BUDGET = 32
DEFAULT_SIZE_CUTOFF = 10 ** 4


def rational_preperiodic_graph(phi: NormalizedQuadMap,
                               height_bound: int = DEFAULT_HEIGHT_BOUND,
                               step_budget: int = DEFAULT_STEP_BUDGET,
                               size_cutoff: int = DEFAULT_SIZE_CUTOFF) -> FunctionalGraph:
    """Graph induced on the rational preperiodic points found by bounded search.

    Every rational of height <= height_bound (plus infinity) is iterated up
    to step_budget steps: an exact repeat classifies the whole trajectory
    preperiodic, escaping past size_cutoff classifies it divergent.  The
    returned graph is forward-closed; candidates the budget could not
    resolve are reported on the .unresolved attribute.
    """
    if phi.resultant() == 0:
        raise ValueError("degenerate map (resultant 0)")
    fate: Dict[PointValue, bool] = {}
    succ: Dict[PointValue, PointValue] = {}
    unresolved: List[PointValue] = []
    candidates: List[PointValue] = [INFINITY, *enumerate_rationals(height_bound)]
    for start in candidates:
        if start in fate:
            continue
        path = [start]
        local = {start}
        verdict: Optional[bool] = None
        cur = start
        for _ in range(step_budget):
            nxt = succ.get(cur, None)
            if nxt is None:
                nxt = phi.apply(cur)
            if nxt in fate:
                path.append(nxt)
                verdict = fate[nxt]
                break
            if nxt in local:
                path.append(nxt)
                verdict = True
                break
            if point_size(nxt) > size_cutoff:
                path.append(nxt)
                verdict = False
                break
            path.append(nxt)
            local.add(nxt)
            cur = nxt
        if verdict is None:
            unresolved.append(start)
            continue
        if verdict:
            for a, b in zip(path, path[1:]):
                succ[a] = b
            for v in path:
                fate[v] = True
        else:
            for v in path:
                fate[v] = False
    graph = {v: w for v, w in succ.items() if fate.get(v)}
    return FunctionalGraph(graph, unresolved=tuple(unresolved))


# ----------------------------------------------------------------------
# twists of z^2
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class StructureClass:
    """One catalog entry: a named preperiodic structure with its reference
    graph (computed from the class representative)."""

    id: str
    description: str
    representative: NormalizedQuadMap
    graph: FunctionalGraph


def sq_twist_map(b: RationalLike) -> NormalizedQuadMap:
    """The twist z/2 + b/z of the squaring map, as (z^2 + 2b) / (2z)."""
    b = _as_rat(b)
    if b.is_zero():
        raise ValueError("b must be nonzero")
    return NormalizedQuadMap((Rat(1), Rat(0), b + b), (Rat(0), Rat(2), Rat(0)))


def _is_rational_square(x: ExtendedRational) -> bool:
    """Membership in (Q^x)^2: positive with squarefree part 1."""
    if x.is_infinity() or x <= 0:
        return False
    return squarefree_part(x.num * x.den)[1] == 1


_SQ_CLASS_REPS = {
    "sq-generic": ("no finite rational preperiodic points beyond 0 -> inf",
                   Rat(1)),
    "sq-fixed": ("two finite rational fixed points", Rat(1, 2)),
    "sq-2cycle": ("a rational 2-cycle with one tail point each", Rat(-3, 2)),
    "sq-type12": ("two rational points falling onto the tail of infinity",
                  Rat(-1, 2)),
}

_sq_catalog_cache: Dict[str, StructureClass] = {}


def _sq_class(class_id: str) -> StructureClass:
    if class_id not in _sq_catalog_cache:
        desc, rep_b = _SQ_CLASS_REPS[class_id]
        rep = sq_twist_map(rep_b)
        _sq_catalog_cache[class_id] = StructureClass(
            id=class_id, description=desc, representative=rep,
            graph=rational_preperiodic_graph(rep))
    return _sq_catalog_cache[class_id]


def classify_psi1_twist(b: RationalLike) -> StructureClass:
    """Catalog class of the twist z/2 + b/z, decided by square-class tests.

    2b a square puts b in the fixed-point class, -6b in the 2-cycle class,
    -2b in the tail class; otherwise the structure is the generic one.  The
    three conditions are mutually exclusive (their pairwise ratios -3, -1,
    3 are non-squares), which is asserted at runtime.
    """
    b = _as_rat(b)
    if b.is_zero():
        raise ValueError("b must be nonzero")
    hits = [cid for cid, mult in (
        ("sq-fixed", 2), ("sq-2cycle", -6), ("sq-type12", -2),
    ) if _is_rational_square(b * mult)]
    assert len(hits) <= 1, f"square classes overlap for b={b}: {hits}"
    return _sq_class(hits[0] if hits else "sq-generic")


# ----------------------------------------------------------------------
# twists of 1/z^2
# ----------------------------------------------------------------------

def invsq_twist_from_t(t: RationalLike) -> NormalizedQuadMap:
    """The twist t/z^2 (these are exactly the twists with a rational 2-cycle)."""
    t = _as_rat(t)
    if t.is_zero():
        raise ValueError("t must be nonzero")
    return NormalizedQuadMap((Rat(0), Rat(0), t), (Rat(1), Rat(0), Rat(0)))


def invsq_twist_from_dk(d: RationalLike, k: RationalLike) -> NormalizedQuadMap:
    """Normal-form twist (k z^2 - 2 d z + d k) / (z^2 - 2 k z + d)."""
    d = _as_rat(d)
    k = _as_rat(k)
    if d.is_zero():
        raise ValueError("d must be nonzero")
    if k * k == d:
        raise ValueError("k^2 must differ from d")
    return NormalizedQuadMap((k, -(d + d), d * k), (Rat(1), -(k + k), d))


_INVSQ_SIGMAS = (Rat(-6), Rat(12))

_INVSQ_CLASS_REPS: Dict[str, Tuple[str, NormalizedQuadMap]] = {}


def _invsq_reps() -> Dict[str, Tuple[str, NormalizedQuadMap]]:
    if not _INVSQ_CLASS_REPS:
        _INVSQ_CLASS_REPS.update({
            "invsq-2cycle-fixed": (
                "rational 2-cycle plus a fixed point with its tail",
                invsq_twist_from_t(1)),
            "invsq-2cycle": (
                "rational 2-cycle and nothing else",
                invsq_twist_from_t(2)),
            "invsq-empty": (
                "no rational preperiodic points",
                invsq_twist_from_dk(2, 1)),
            "invsq-fixed": (
                "one rational fixed point with its tail",
                invsq_twist_from_dk(2, 0)),
            "invsq-fixed-type12": (
                "fixed point, tail point, and two second-level tail points",
                NormalizedQuadMap((-1, 2, 1), (1, 2, -1))),
            "invsq-three-fixed": (
                "three rational fixed points, each with one tail point",
                NormalizedQuadMap((-1, 2, 0), (0, 2, -1))),
            "invsq-3cycle": (
                "rational 3-cycle with one tail point each",
                NormalizedQuadMap((0, 2, -1), (1, 0, -1))),
        })
    return _INVSQ_CLASS_REPS


_invsq_catalog_cache: Dict[str, StructureClass] = {}


def invsq_catalog() -> List[StructureClass]:
    out = []
    for cid, (desc, rep) in _invsq_reps().items():
        if cid not in _invsq_catalog_cache:
            _invsq_catalog_cache[cid] = StructureClass(
                id=cid, description=desc, representative=rep,
                graph=rational_preperiodic_graph(rep))
        out.append(_invsq_catalog_cache[cid])
    return out


def classify_psi2_map(phi: Optional[NormalizedQuadMap] = None, *,
                      t: Optional[RationalLike] = None,
                      d: Optional[RationalLike] = None,
                      k: Optional[RationalLike] = None,
                      height_bound: int = DEFAULT_HEIGHT_BOUND,
                      step_budget: int = DEFAULT_STEP_BUDGET) -> StructureClass:
    """Catalog class of a map conjugate to 1/z^2.

    The map may be given directly, as the parameter t of t/z^2, or as the
    pair (d, k) of the rational normal form.  The computed preperiodic
    graph is matched against the seven reference structures up to
    functional-graph isomorphism; failure to match any is a hard error
    since the classification proves the list complete.
    """
    modes = sum([phi is not None, t is not None, d is not None or k is not None])
    if modes != 1:
        raise ValueError("give exactly one of: a map, t, or the pair (d, k)")
    if t is not None:
        phi = invsq_twist_from_t(t)
    elif d is not None or k is not None:
        if d is None or k is None:
            raise ValueError("the (d, k) form needs both d and k")
        phi = invsq_twist_from_dk(d, k)
    assert phi is not None
    if phi.sigma_invariants() != _INVSQ_SIGMAS:
        raise ValueError(
            f"map {phi} is not conjugate to 1/z^2 "
            f"(sigma invariants {phi.sigma_invariants()} != {_INVSQ_SIGMAS})")
    graph = rational_preperiodic_graph(phi, height_bound=height_bound,
                                       step_budget=step_budget)
    form = graph.canonical_form()
    for cls in invsq_catalog():
        if cls.graph.canonical_form() == form:
            return cls
    raise CatalogMatchError(
        f"preperiodic structure of {phi} matches no catalog class; "
        f"canonical form {form}")


# ----------------------------------------------------------------------
# power maps on roots of unity
# ----------------------------------------------------------------------

SQUARE = "square"
INVERSE_SQUARE = "inverse_square"


class RootOfUnityPoint:
    """0, infinity, or the root of unity zeta_order^exp with gcd(exp, order)=1.

    The stored order is the exact multiplicative order, so the algebraic
    degree is totient(order).
    """

    __slots__ = ("kind", "order", "exp")

    ZERO_KIND, INF_KIND, ROOT_KIND = "zero", "inf", "root"

    def __init__(self, kind: str, order: int = 0, exp: int = 0):
        self.kind = kind
        if kind == self.ROOT_KIND:
            if order < 1:
                raise ValueError("order must be positive")
            exp %= order
            g = gcd(exp, order) if exp else order
            self.order = order // g
            self.exp = exp // g
        else:
            self.order = 0
            self.exp = 0

    @staticmethod
    def zero() -> "RootOfUnityPoint":
        return RootOfUnityPoint(RootOfUnityPoint.ZERO_KIND)

    @staticmethod
    def inf() -> "RootOfUnityPoint":
        return RootOfUnityPoint(RootOfUnityPoint.INF_KIND)

    @staticmethod
    def root(order: int, exp: int) -> "RootOfUnityPoint":
        return RootOfUnityPoint(RootOfUnityPoint.ROOT_KIND, order, exp)

    def degree(self) -> int:
        if self.kind == self.ROOT_KIND:
            return int(totient(self.order))
        return 1

    def sort_key(self):
        return (3, self.kind, self.order, self.exp)

    def __eq__(self, other):
        if not isinstance(other, RootOfUnityPoint):
            return NotImplemented
        return (self.kind, self.order, self.exp) == (other.kind, other.order, other.exp)

    def __hash__(self):
        return hash((self.kind, self.order, self.exp))

    def __repr__(self):
        if self.kind == self.ZERO_KIND:
            return "0"
        if self.kind == self.INF_KIND:
            return "inf"
        if self.order == 1:
            return "1"
        if self.order == 2:
            return "-1"
        return f"zeta{self.order}^{self.exp}"


def _power_step(pt: RootOfUnityPoint, variant: str) -> RootOfUnityPoint:
    if pt.kind == RootOfUnityPoint.ZERO_KIND:
        return pt if variant == SQUARE else RootOfUnityPoint.inf()
    if pt.kind == RootOfUnityPoint.INF_KIND:
        return pt if variant == SQUARE else RootOfUnityPoint.zero()
    mult = 2 if variant == SQUARE else -2
    return RootOfUnityPoint.root(pt.order, (mult * pt.exp) % pt.order)


def power_map_low_degree_preperiodic(variant: str, max_degree: int) -> List[FunctionalGraph]:
    """Components of the preperiodic set of degree <= max_degree for z^2 or 1/z^2.

    Finite nonzero preperiodic points of the power maps are roots of unity;
    the dynamics is the exponent map j -> 2j (or -2j) mod N.  The point set
    is all primitive N-th roots with totient(N) <= max_degree, plus 0 and
    infinity, and it is forward-closed since totient respects divisors.
    """
    if variant not in (SQUARE, INVERSE_SQUARE):
        raise ValueError(f"variant must be {SQUARE!r} or {INVERSE_SQUARE!r}")
    if max_degree < 1:
        raise ValueError("max_degree must be >= 1")
    points: List[RootOfUnityPoint] = [RootOfUnityPoint.zero(), RootOfUnityPoint.inf()]
    scan_bound = max(6, max_degree * max_degree) + 1
    for order in range(1, scan_bound):
        if totient(order) <= max_degree:
            for j in range(order):
                if order == 1 or gcd(j, order) == 1:
                    if order == 1 and j != 0:
                        continue
                    points.append(RootOfUnityPoint.root(order, j))
    succ = {pt: _power_step(pt, variant) for pt in points}
    return FunctionalGraph(succ).components()
