"""Zigzag persistent homology over GF(2) for temporal complex sequences.

The sequence alternates snapshot complexes (odd positions) with union
complexes (even positions), length 2T-1. Positions are encoded integers
s in 1..2T-1; odd s is snapshot time (s+1)/2, even s is the union between
times s/2 and s/2+1 (real time s/2 + 0.5).

Two independent routes are provided: `zigzag_persistence` runs a
simplex-wise insertion/deletion reduction, and `interval_multiplicity_oracle`
recovers the same decomposition from generalized ranks of limit-to-colimit
maps, by brute-force linear algebra. They must agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import _gf2
from .errors import ComputationError, ContractViolation, ValidationError
from .filtration import SimplicialComplex, clique_complex
from .graph_model import NodeId, Snapshot

Simplex = tuple[NodeId, ...]


# ---------------------------------------------------------------------------
# index encoding


class ZigzagIndex(NamedTuple):
    """Encoded position in a zigzag sequence of length 2T-1."""

    s: int

    @property
    def time(self) -> float:
        """Real time: t for odd s, t + 0.5 for even s."""
        return (self.s + 1) / 2

    @classmethod
    def from_time(cls, t: float) -> "ZigzagIndex":
        s = round(2 * t) - 1
        if s < 1 or abs(2 * t - round(2 * t)) > 1e-12:
            raise ContractViolation(f"time {t} is not on the half-integer lattice from 1")
        return cls(s)


def index_to_time(s: int) -> float:
    return (s + 1) / 2


# ---------------------------------------------------------------------------
# sequence and diagram types


@dataclass(frozen=True)
class ZigzagComplexSequence:
    """Complexes at positions 1..2T-1; even positions contain both neighbors."""

    complexes: tuple[SimplicialComplex, ...]

    def __post_init__(self):
        n = len(self.complexes)
        if n == 0 or n % 2 == 0:
            raise ValidationError(f"sequence length must be odd and positive, got {n}")
        maxdims = {c.maxdim for c in self.complexes}
        if len(maxdims) != 1:
            raise ValidationError("all complexes in a sequence must share maxdim")
        for i in range(1, n, 2):
            up = self.complexes[i]
            if not self.complexes[i - 1].is_subcomplex_of(up) or not self.complexes[
                i + 1
            ].is_subcomplex_of(up):
                raise ValidationError(f"position {i + 1} must contain both neighbors")

    @property
    def length(self) -> int:
        return len(self.complexes)

    @property
    def T(self) -> int:
        return (len(self.complexes) + 1) // 2

    @property
    def maxdim(self) -> int:
        return self.complexes[0].maxdim

    def at(self, s: int) -> SimplicialComplex:
        if not 1 <= s <= self.length:
            raise ContractViolation(f"position {s} outside 1..{self.length}")
        return self.complexes[s - 1]


class ZigzagPoint(NamedTuple):
    """Closed interval [birth, death] in encoded positions, in one dimension."""

    birth: int
    death: int
    dim: int
    right_open: bool


@dataclass(frozen=True)
class ZigzagDiagram:
    """Multiset of interval summands of the zigzag homology module."""

    points: tuple[ZigzagPoint, ...]
    length: int
    maxdim: int

    def __post_init__(self):
        for p in self.points:
            if not 1 <= p.birth <= p.death <= self.length:
                raise ValidationError(f"interval {p} outside 1..{self.length}")
            if p.right_open and p.death != self.length:
                raise ValidationError(f"right-open interval {p} must end at {self.length}")
            if not 0 <= p.dim <= self.maxdim:
                raise ValidationError(f"interval {p} has dim outside 0..{self.maxdim}")

    def in_dim(self, k: int) -> tuple[ZigzagPoint, ...]:
        return tuple(p for p in self.points if p.dim == k)

    def betti_curve(self, k: int) -> list[int]:
        """Pointwise interval counts: entry s-1 counts intervals containing s."""
        out = [0] * self.length
        for p in self.in_dim(k):
            for s in range(p.birth, p.death + 1):
                out[s - 1] += 1
        return out

    def real_pairs(self, k: int | None = None) -> np.ndarray:
        """(n, 2) float array of (birth, death) real times, optionally per dim.

        Right-open intervals close at the last position, so no special
        casing is needed downstream.
        """
        pts = self.points if k is None else self.in_dim(k)
        if not pts:
            return np.zeros((0, 2))
        return np.array([[index_to_time(p.birth), index_to_time(p.death)] for p in pts])

    def restrict(self, k: int) -> "ZigzagDiagram":
        return ZigzagDiagram(points=self.in_dim(k), length=self.length, maxdim=self.maxdim)

    def multiset(self, k: int) -> dict[tuple[int, int], int]:
        out: dict[tuple[int, int], int] = {}
        for p in self.in_dim(k):
            out[(p.birth, p.death)] = out.get((p.birth, p.death), 0) + 1
        return out


def _sorted_points(points: Iterable[ZigzagPoint]) -> tuple[ZigzagPoint, ...]:
    return tuple(sorted(points, key=lambda p: (p.dim, p.birth, p.death)))


# ---------------------------------------------------------------------------
# sequence construction


def build_zigzag_sequence(
    complexes_at_t: Sequence[SimplicialComplex],
    T: int | None = None,
    union_mode: str = "union-graph",
) -> ZigzagComplexSequence:
    """Interleave snapshot complexes with unions.

    union-graph: even positions are clique complexes of the union of the
    neighbors' 1-skeletons. simplex-union: even positions are plain simplex
    set unions. Both contain each neighbor, since neighbors are face-closed
    and their simplices are cliques of the union graph.
    """
    if len(complexes_at_t) == 0:
        raise ValidationError("at least one snapshot complex required")
    if T is not None and T != len(complexes_at_t):
        raise ContractViolation(f"declared T={T} but got {len(complexes_at_t)} complexes")
    if union_mode not in ("union-graph", "simplex-union"):
        raise ContractViolation(f"unknown union mode {union_mode!r}")
    maxdim = complexes_at_t[0].maxdim
    seq: list[SimplicialComplex] = []
    for t, c in enumerate(complexes_at_t):
        if t > 0:
            prev = complexes_at_t[t - 1]
            if union_mode == "simplex-union":
                seq.append(SimplicialComplex.union(prev, c))
            else:
                v1, e1 = prev.one_skeleton()
                v2, e2 = c.one_skeleton()
                edges = [(u, v, 1.0) for (u, v) in sorted(e1 | e2)]
                g = Snapshot.build(1, edges, extra_nodes=v1 | v2)
                seq.append(clique_complex(g, maxdim))
        seq.append(c)
    return ZigzagComplexSequence(tuple(seq))


# ---------------------------------------------------------------------------
# engine: simplex-wise insertion/deletion reduction

# Chains are sets of simplices (GF(2) supports); XOR is symmetric difference.
# Per dimension k the engine maintains:
#   lives[k]: bars with birth position, birth type, and a representative
#             cycle; classes of live reps form a basis of H_k.
#   pairs[k]: (b, w) with boundary(w) = b, the b's a basis of B_k held in
#             echelon form keyed by max-simplex pivot.
# Death tie-break, derived from Hom spaces of interval modules over the
# alternating quiver: an insertion death removes the youngest insertion-born
# candidate, else the oldest deletion-born; a deletion death removes the
# youngest deletion-born candidate, else the oldest insertion-born.


class _Bar:
    __slots__ = ("birth", "del_born", "rep")

    def __init__(self, birth: int, del_born: bool, rep: set):
        self.birth = birth
        self.del_born = del_born
        self.rep = rep


class _RawBar(NamedTuple):
    birth: int
    death: int
    dim: int
    right_open: bool


def _facets(simplex: Simplex) -> set[Simplex]:
    if len(simplex) == 1:
        return set()
    return {simplex[:i] + simplex[i + 1 :] for i in range(len(simplex))}


class _Engine:
    def __init__(self, maxdim: int):
        self.maxdim = maxdim
        self.pos = 0
        self.lives: dict[int, list[_Bar]] = {k: [] for k in range(maxdim + 1)}
        self.pairs: dict[int, list[list[set]]] = {k: [] for k in range(maxdim + 1)}
        self.pivots: dict[int, dict[Simplex, int]] = {k: {} for k in range(maxdim + 1)}
        self.finished: list[_RawBar] = []

    # -- basis plumbing

    def _append_pair(self, k: int, b: set, w: set) -> None:
        piv = self.pivots[k]
        pairs = self.pairs[k]
        b = set(b)
        w = set(w)
        while b:
            p = max(b)
            if p not in piv:
                break
            other = pairs[piv[p]]
            b ^= other[0]
            w ^= other[1]
        if not b:
            raise ComputationError("dependent boundary appended; engine invariant broken")
        piv[max(b)] = len(pairs)
        pairs.append([b, w])

    def _reechelon(self, k: int) -> None:
        old = self.pairs[k]
        self.pairs[k] = []
        self.pivots[k] = {}
        for b, w in old:
            self._append_pair(k, b, w)

    def _reduce_by_pairs(self, k: int, v: set, witness: set | None = None) -> set:
        piv = self.pivots[k]
        pairs = self.pairs[k]
        v = set(v)
        while v:
            p = max(v)
            if p not in piv:
                break
            b, w = pairs[piv[p]]
            v ^= b
            if witness is not None:
                witness ^= w
        return v

    def _express_over_lives(self, k: int, v: set) -> list[int]:
        """Indices S of live bars with v = sum of their reps modulo B_k."""
        temp: list[tuple[set, set]] = []
        temp_piv: dict[Simplex, int] = {}
        for i, bar in enumerate(self.lives[k]):
            vec = self._reduce_by_pairs(k, set(bar.rep))
            ids = {i}
            while vec:
                p = max(vec)
                if p in self.pivots[k]:
                    vec ^= self.pairs[k][self.pivots[k][p]][0]
                elif p in temp_piv:
                    j = temp_piv[p]
                    vec ^= temp[j][0]
                    ids ^= temp[j][1]
                else:
                    temp_piv[p] = len(temp)
                    temp.append((vec, ids))
                    break
            else:
                raise ComputationError("live representative dependent on boundaries")
        combo: set[int] = set()
        v = set(v)
        while v:
            p = max(v)
            if p in self.pivots[k]:
                v ^= self.pairs[k][self.pivots[k][p]][0]
            elif p in temp_piv:
                j = temp_piv[p]
                v ^= temp[j][0]
                combo ^= temp[j][1]
            else:
                raise ComputationError("vector not in the cycle space of the current complex")
        return sorted(combo)

    # -- bar bookkeeping

    def _birth(self, k: int, rep: set, del_born: bool) -> None:
        self.lives[k].append(_Bar(self.pos, del_born, rep))

    def _close(self, k: int, idx: int) -> None:
        # birth < pos always: a bar cannot be born and killed by one event
        bar = self.lives[k].pop(idx)
        self.finished.append(_RawBar(bar.birth, self.pos - 1, k, False))

    def _select_insertion_death(self, k: int, cand: list[int]) -> int:
        lives = self.lives[k]
        ins = [i for i in cand if not lives[i].del_born]
        if ins:
            return max(ins, key=lambda i: lives[i].birth)
        return min(cand, key=lambda i: lives[i].birth)

    def _select_deletion_death(self, k: int, cand: list[int]) -> int:
        lives = self.lives[k]
        dels = [i for i in cand if lives[i].del_born]
        if dels:
            return max(dels, key=lambda i: lives[i].birth)
        return min(cand, key=lambda i: lives[i].birth)

    # -- events

    def insert(self, simplex: Simplex) -> None:
        self.pos += 1
        q = len(simplex) - 1
        if q == 0:
            self._birth(0, {simplex}, del_born=False)
            return
        boundary = _facets(simplex)
        witness: set = set()
        residual = self._reduce_by_pairs(q - 1, boundary, witness)
        if not residual:
            # boundary already bounded: a q-cycle through the new simplex is born
            self._birth(q, {simplex} ^ witness, del_born=False)
            return
        # the class of the new boundary dies in H_{q-1}
        cand = self._express_over_lives(q - 1, residual)
        if not cand:
            raise ComputationError("death event with empty candidate set")
        j = self._select_insertion_death(q - 1, cand)
        self._close(q - 1, j)
        self._append_pair(q - 1, boundary, {simplex})

    def delete(self, simplex: Simplex) -> None:
        self.pos += 1
        q = len(simplex) - 1
        cand = [i for i, bar in enumerate(self.lives[q]) if simplex in bar.rep]
        if cand:
            # some q-cycle needs the simplex: death in H_q
            j = self._select_deletion_death(q, cand)
            dying = self.lives[q][j].rep
            for i in cand:
                if i != j:
                    self.lives[q][i].rep ^= dying
            if q >= 1:
                for pair in self.pairs[q - 1]:
                    if simplex in pair[1]:
                        pair[1] ^= dying
            self._close(q, j)
            return
        # no q-cycle touches it: deleting unbinds its boundary class in H_{q-1}
        if q == 0:
            raise ComputationError("isolated vertex with no live component; invariant broken")
        touching = [pair for pair in self.pairs[q - 1] if simplex in pair[1]]
        if not touching:
            raise ComputationError("boundary witness for deleted simplex missing")
        pivot_pair = touching[0]
        for pair in touching[1:]:
            pair[0] ^= pivot_pair[0]
            pair[1] ^= pivot_pair[1]
        self.pairs[q - 1] = [p for p in self.pairs[q - 1] if p is not pivot_pair]
        self._reechelon(q - 1)
        self._birth(q - 1, _facets(simplex), del_born=True)

    def finish(self) -> list[_RawBar]:
        for k in range(self.maxdim + 1):
            for bar in self.lives[k]:
                self.finished.append(_RawBar(bar.birth, self.pos, k, True))
        return self.finished


def _run_engine(seq: ZigzagComplexSequence) -> tuple[list[_RawBar], list[int]]:
    engine = _Engine(seq.maxdim)
    samples: list[int] = []
    prev: frozenset[Simplex] = frozenset()
    for c in seq.complexes:
        cur = c.simplices
        removed = sorted(prev - cur, key=lambda s: (-len(s), s))
        added = sorted(cur - prev, key=lambda s: (len(s), s))
        for s in removed:
            engine.delete(s)
        for s in added:
            engine.insert(s)
        samples.append(engine.pos)
        prev = cur
    return engine.finish(), samples


def _project(raw: list[_RawBar], samples: list[int]) -> list[ZigzagPoint]:
    points: list[ZigzagPoint] = []
    n = len(samples)
    for bar in raw:
        alive = [s + 1 for s in range(n) if bar.birth <= samples[s] <= bar.death]
        if not alive:
            continue
        points.append(ZigzagPoint(alive[0], alive[-1], bar.dim, bar.right_open and alive[-1] == n))
    return points


def zigzag_diagrams(seq: ZigzagComplexSequence) -> ZigzagDiagram:
    """Interval decomposition of H_k for every k in 0..maxdim at once."""
    raw, samples = _run_engine(seq)
    return ZigzagDiagram(
        points=_sorted_points(_project(raw, samples)),
        length=seq.length,
        maxdim=seq.maxdim,
    )


def zigzag_persistence(seq: ZigzagComplexSequence, k: int) -> ZigzagDiagram:
    """Interval decomposition of the dimension-k zigzag homology module.

    Reported dimensions run 0..maxdim-1; use zigzag_diagrams for the top
    dimension as well.
    """
    if not 0 <= k <= seq.maxdim - 1:
        raise ContractViolation(f"k={k} outside 0..{seq.maxdim - 1}")
    full = zigzag_diagrams(seq)
    return ZigzagDiagram(points=full.in_dim(k), length=seq.length, maxdim=seq.maxdim)


# ---------------------------------------------------------------------------
# oracles: rank-based homology and limit/colimit generalized rank


def _boundary_matrix(c: SimplicialComplex, k: int) -> np.ndarray:
    """GF(2) boundary matrix with rows over (k-1)-simplices, cols over k-simplices."""
    cols = c.dim_simplices(k)
    if k == 0:
        return np.zeros((0, len(cols)), dtype=np.uint8)
    rows = c.dim_simplices(k - 1)
    index = {s: i for i, s in enumerate(rows)}
    mat = np.zeros((len(rows), len(cols)), dtype=np.uint8)
    for j, s in enumerate(cols):
        for f in _facets(s):
            mat[index[f], j] = 1
    return mat


def homology_dimension_oracle(c: SimplicialComplex, k: int) -> int:
    """dim H_k over GF(2) by boundary ranks: nullity(d_k) - rank(d_{k+1})."""
    if k < 0:
        raise ContractViolation(f"k must be >= 0, got {k}")
    n_k = len(c.dim_simplices(k))
    if n_k == 0:
        return 0
    rank_k = _gf2.rank(_boundary_matrix(c, k))
    rank_k1 = _gf2.rank(_boundary_matrix(c, k + 1)) if k + 1 <= c.maxdim else 0
    return n_k - rank_k - rank_k1


class _SequenceHomology:
    """Homology bases and induced arrow matrices for one sequence and dimension.

    Position s gets an explicit cycle basis of H_k; every arrow (inclusion
    of the smaller complex into the larger) becomes a matrix between the
    homology coordinate spaces.
    """

    def __init__(self, seq: ZigzagComplexSequence, k: int):
        self.length = seq.length
        self.dims: list[int] = []
        self._simplices: list[list[Simplex]] = []
        self._hb: list[np.ndarray] = []  # [H | B] solve matrix per position
        self._h: list[np.ndarray] = []  # homology representative columns
        for c in seq.complexes:
            simp = c.dim_simplices(k)
            self._simplices.append(simp)
            d_k = _boundary_matrix(c, k)
            d_k1 = _boundary_matrix(c, k + 1) if k + 1 <= c.maxdim else np.zeros(
                (len(simp), 0), dtype=np.uint8
            )
            cycles = _gf2.nullspace(d_k)
            bounds = _gf2.column_space(d_k1)
            h = _gf2.extend_basis(bounds, cycles)
            self.dims.append(h.shape[1])
            self._h.append(h)
            self._hb.append(np.concatenate([h, bounds], axis=1))
        # forward[i]: map position i+1 -> i+2 when i is even (0-based arrows)
        # backward  : map position i+2 -> i+1 when i is odd
        self.arrows: list[np.ndarray] = []
        for i in range(self.length - 1):
            if i % 2 == 0:
                self.arrows.append(self._induced(i, i + 1))
            else:
                self.arrows.append(self._induced(i + 1, i))

    def _induced(self, src: int, dst: int) -> np.ndarray:
        """Matrix of H_k(src) -> H_k(dst) induced by chain inclusion."""
        src_simp = self._simplices[src]
        dst_index = {s: i for i, s in enumerate(self._simplices[dst])}
        d_dst = self.dims[dst]
        out = np.zeros((d_dst, self.dims[src]), dtype=np.uint8)
        for col in range(self.dims[src]):
            vec = np.zeros(len(dst_index), dtype=np.uint8)
            for row in np.nonzero(self._h[src][:, col])[0]:
                vec[dst_index[src_simp[row]]] = 1
            x = _gf2.solve(self._hb[dst], vec)
            if x is None:
                raise ComputationError("included cycle not in the target cycle space")
            out[:, col] = x[:d_dst]
        return out

    def generalized_rank(self, i: int, j: int) -> int:
        """Rank of the canonical map lim -> colim over positions [i, j], 1-based."""
        lo, hi = i - 1, j - 1
        dims = self.dims[lo : hi + 1]
        total = sum(dims)
        offsets = np.concatenate([[0], np.cumsum(dims)]).astype(int)
        if total == 0:
            return 0

        # lim: kernel of the compatibility constraints over the direct sum
        constraint_rows: list[np.ndarray] = []
        relation_cols: list[np.ndarray] = []
        for a in range(lo, hi):
            mat = self.arrows[a]
            p = a - lo
            if a % 2 == 0:
                # forward f: V_p -> V_{p+1}; constraint x_{p+1} = f x_p
                block = np.zeros((dims[p + 1], total), dtype=np.uint8)
                block[:, offsets[p] : offsets[p + 1]] = mat
                block[:, offsets[p + 1] : offsets[p + 2]] = np.eye(dims[p + 1], dtype=np.uint8)
                constraint_rows.append(block)
                # colim relation: e_p(v) ~ e_{p+1}(f v) for v in basis of V_p
                rel = np.zeros((total, dims[p]), dtype=np.uint8)
                rel[offsets[p] : offsets[p + 1], :] = np.eye(dims[p], dtype=np.uint8)
                rel[offsets[p + 1] : offsets[p + 2], :] = mat
                relation_cols.append(rel)
            else:
                # backward g: V_{p+1} -> V_p; constraint x_p = g x_{p+1}
                block = np.zeros((dims[p], total), dtype=np.uint8)
                block[:, offsets[p] : offsets[p + 1]] = np.eye(dims[p], dtype=np.uint8)
                block[:, offsets[p + 1] : offsets[p + 2]] = mat
                constraint_rows.append(block)
                rel = np.zeros((total, dims[p + 1]), dtype=np.uint8)
                rel[offsets[p] : offsets[p + 1], :] = mat
                rel[offsets[p + 1] : offsets[p + 2], :] = np.eye(dims[p + 1], dtype=np.uint8)
                relation_cols.append(rel)

        if constraint_rows:
            constraints = np.concatenate(constraint_rows, axis=0)
            lim_basis = _gf2.nullspace(constraints)
        else:
            lim_basis = np.eye(total, dtype=np.uint8)
        if lim_basis.shape[1] == 0:
            return 0

        # canonical map embeds the first coordinate block of each lim vector
        proj = np.zeros((total, lim_basis.shape[1]), dtype=np.uint8)
        proj[offsets[0] : offsets[1], :] = lim_basis[offsets[0] : offsets[1], :]
        if relation_cols:
            relations = np.concatenate(relation_cols, axis=1)
            return _gf2.rank(np.concatenate([proj, relations], axis=1)) - _gf2.rank(relations)
        return _gf2.rank(proj)


def generalized_rank_oracle(seq: ZigzagComplexSequence, k: int, i: int, j: int) -> int:
    """Number of interval summands of H_k covering [i, j], via lim -> colim."""
    if not 0 <= k <= seq.maxdim:
        raise ContractViolation(f"k={k} outside 0..{seq.maxdim}")
    if not 1 <= i <= j <= seq.length:
        raise ContractViolation(f"interval [{i}, {j}] outside 1..{seq.length}")
    return _SequenceHomology(seq, k).generalized_rank(i, j)


def interval_multiplicity_oracle(seq: ZigzagComplexSequence, k: int) -> ZigzagDiagram:
    """Interval decomposition recovered from generalized ranks.

    multiplicity[b, d] = rk(b, d) - rk(b-1, d) - rk(b, d+1) + rk(b-1, d+1)
    with out-of-range ranks 0. Negative multiplicities mean an internal
    inconsistency and raise.
    """
    if not 0 <= k <= seq.maxdim:
        raise ContractViolation(f"k={k} outside 0..{seq.maxdim}")
    functor = _SequenceHomology(seq, k)
    n = seq.length
    table: dict[tuple[int, int], int] = {}

    def rk(i: int, j: int) -> int:
        if i < 1 or j > n or i > j:
            return 0
        if (i, j) not in table:
            table[(i, j)] = functor.generalized_rank(i, j)
        return table[(i, j)]

    points: list[ZigzagPoint] = []
    for b in range(1, n + 1):
        for d in range(b, n + 1):
            mult = rk(b, d) - rk(b - 1, d) - rk(b, d + 1) + rk(b - 1, d + 1)
            if mult < 0:
                raise ComputationError(f"negative multiplicity {mult} at [{b}, {d}]")
            for _ in range(mult):
                points.append(ZigzagPoint(b, d, k, d == n))
    diagram = ZigzagDiagram(points=_sorted_points(points), length=n, maxdim=seq.maxdim)
    if diagram.betti_curve(k) != functor.dims:
        raise ComputationError("pointwise dimensions disagree with interval multiplicities")
    return diagram
