"""Partition entropies on finite probability spaces with rational masses.

Real logarithms are never evaluated.  ``log(1/p)`` for a positive rational
``p`` is represented by its exponent vector over the primes that occur in
the space (``log 2, log 3, ...`` are linearly independent over Q), so every
entropy value is an exact rational vector in those coordinates.  A linear
map of the reals over Q is modelled by a rational matrix acting on these
coordinates.

Atoms are indexed from 0; sets of atoms are frozensets.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Protocol, Sequence

from sympy import factorint

from .cocycle import Cocycle2
from .coboundary import solve
from .conedomain import ConeDomain
from .errors import ContractError, DomainError, RejectedInput
from .exactq import LinearSystem, Q, QMatrix, QVector, format_q, to_q, vsum
from .report import Report, merge


def _subset_sums(probs) -> set:
    sums = {Q(0)}
    for p in probs:
        sums |= {s + p for s in sums}
    return sums


def _primes_of(x) -> set:
    out = set()
    for n in (int(x.numerator), int(x.denominator)):
        if n > 1:
            out |= set(factorint(n))
    return out


@dataclass(frozen=True)
class FiniteSpace:
    """Finite probability space given by its atom masses.

    ``prime_basis`` defaults to the primes dividing the numerator or
    denominator of some subset measure, which is exactly what partition
    blocks can produce (``3/4 = 1/4 + 1/4 + 1/4`` brings in the prime 3).
    """

    probs: tuple
    prime_basis: tuple = None

    def __post_init__(self):
        probs = tuple(to_q(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if not probs:
            raise ContractError("a space needs at least one atom")
        if any(p < 0 for p in probs):
            raise ContractError("atom probabilities must be nonnegative")
        if sum(probs, Q(0)) != 1:
            raise ContractError(f"atom probabilities sum to {format_q(sum(probs, Q(0)))}, not 1")
        needed = set()
        for s in _subset_sums(probs):
            if s:
                needed |= _primes_of(s)
        if self.prime_basis is None:
            object.__setattr__(self, "prime_basis", tuple(sorted(needed)))
        else:
            basis = tuple(int(p) for p in self.prime_basis)
            if list(basis) != sorted(set(basis)) or not needed <= set(basis):
                raise ContractError(
                    f"prime basis must be sorted and contain {sorted(needed)}"
                )
            object.__setattr__(self, "prime_basis", basis)

    @classmethod
    def uniform(cls, n: int) -> "FiniteSpace":
        return cls(tuple(Q(1, n) for _ in range(n)))

    @property
    def n_atoms(self) -> int:
        return len(self.probs)

    @property
    def log_dim(self) -> int:
        return len(self.prime_basis)

    def measure(self, atoms) -> "Q":
        return sum((self.probs[i] for i in atoms), Q(0))

    def null_atoms(self) -> list[int]:
        return [i for i, p in enumerate(self.probs) if p == 0]

    @cached_property
    def _subsets(self) -> list[frozenset]:
        n = self.n_atoms
        return [frozenset(i for i in range(n) if mask >> i & 1) for mask in range(1 << n)]

    def subsets(self) -> list[frozenset]:
        """All ``2^n`` atom sets, ordered by bitmask."""
        return self._subsets

    @cached_property
    def measure_classes(self) -> dict:
        """Measure value -> atom sets of that measure, in bitmask order."""
        classes: dict = {}
        for s in self._subsets:
            classes.setdefault(self.measure(s), []).append(s)
        return classes

    def partition(self, blocks) -> "Partition":
        return Partition(blocks, self.n_atoms)

    def to_json(self) -> dict:
        return {"probs": [format_q(p) for p in self.probs]}

    @classmethod
    def from_json(cls, data) -> "FiniteSpace":
        try:
            probs = data["probs"]
        except (KeyError, TypeError) as exc:
            raise ContractError("space file needs a 'probs' list") from exc
        return cls(tuple(to_q(p) for p in probs), data.get("prime_basis"))


@dataclass(frozen=True)
class Partition:
    blocks: tuple
    n_atoms: int

    def __post_init__(self):
        blocks = tuple(frozenset(int(i) for i in b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        seen: set = set()
        for b in blocks:
            if not b:
                raise ContractError("empty partition block")
            if b & seen:
                raise ContractError("partition blocks overlap")
            if any(i < 0 or i >= self.n_atoms for i in b):
                raise ContractError(f"atom index out of range in block {sorted(b)}")
            seen |= b
        if len(seen) != self.n_atoms:
            raise ContractError("partition blocks do not cover every atom")

    def to_json(self) -> list:
        return [sorted(b) for b in self.blocks]

    @classmethod
    def from_json(cls, data, n_atoms: int) -> "Partition":
        if not isinstance(data, list):
            raise ContractError("a partition is a list of atom-index lists")
        return cls(tuple(data), n_atoms)


def log_coords(space: FiniteSpace, p) -> QVector:
    """Exponent vector ``e`` with ``log(1/p) = sum e_j log(prime_j)``."""
    p = to_q(p)
    if p <= 0:
        raise ContractError("log coordinates need a positive rational")
    pos = {q: i for i, q in enumerate(space.prime_basis)}
    coords = [0] * space.log_dim
    for n, sign in ((int(p.numerator), -1), (int(p.denominator), 1)):
        if n > 1:
            for prime, k in factorint(n).items():
                if prime not in pos:
                    raise ContractError(f"prime {prime} is not in the space's basis")
                coords[pos[prime]] += sign * k
    return QVector(coords)


class AtomSetFunction:
    """Finitely additive ``m`` given by one matrix per atom.

    Each matrix maps log-prime coordinates (``space.log_dim``) to
    ``Q^out_dim``.  Atoms of probability zero must carry the zero matrix.
    """

    def __init__(self, space: FiniteSpace, matrices: Sequence):
        if space.log_dim == 0:
            raise ContractError("every block measure is 0 or 1, so all log coordinates vanish")
        mats = [m if isinstance(m, QMatrix) else QMatrix(m) for m in matrices]
        if len(mats) != space.n_atoms:
            raise ContractError(f"expected {space.n_atoms} atom matrices, got {len(mats)}")
        shapes = {m.shape for m in mats}
        if len(shapes) != 1:
            raise ContractError("atom matrices must share one shape")
        out_dim, cols = shapes.pop()
        if cols != space.log_dim:
            raise ContractError(f"atom matrices need {space.log_dim} columns (one per basis prime)")
        for i, (p, m) in enumerate(zip(space.probs, mats)):
            if p == 0 and not m.is_zero():
                raise RejectedInput(f"atom {i} has probability 0 but a nonzero matrix")
        self.space = space
        self.matrices = tuple(mats)
        self.out_dim = out_dim

    def __call__(self, atoms) -> QMatrix:
        total = QMatrix.zeros(self.out_dim, self.space.log_dim)
        for i in atoms:
            total = total + self.matrices[i]
        return total

    def to_json(self) -> dict:
        return {"out_dim": self.out_dim, "atoms": [[format_q(x) for x in m.flat()] for m in self.matrices]}

    @classmethod
    def from_json(cls, space: FiniteSpace, data) -> "AtomSetFunction":
        try:
            out_dim = data["out_dim"]
            mats = [QMatrix.from_flat(out_dim, space.log_dim, [to_q(x) for x in flat])
                    for flat in data["atoms"]]
        except (KeyError, TypeError) as exc:
            raise ContractError(f"malformed set-function file: {exc}") from exc
        return cls(space, mats)


def eval_Lm(space: FiniteSpace, m: AtomSetFunction, A: Partition) -> QVector:
    """``sum_i m(A_i) log(1/P(A_i))``; null blocks contribute nothing."""
    total = QVector.zeros(m.out_dim)
    for block in A.blocks:
        p = space.measure(block)
        if p:
            total = total + m(block) @ log_coords(space, p)
    return total


def shannon_H(space: FiniteSpace, A: Partition) -> QVector:
    total = QVector.zeros(space.log_dim)
    for block in A.blocks:
        p = space.measure(block)
        if p:
            total = total + log_coords(space, p) * p
    return total


def combined_entropy(space: FiniteSpace, m: AtomSetFunction, A: Partition) -> QVector:
    """``H(A) + L_m(A)``; needs ``m`` to map log coordinates to themselves."""
    if m.out_dim != space.log_dim:
        raise ContractError("combined entropy needs out_dim equal to the log-basis size")
    return shannon_H(space, A) + eval_Lm(space, m, A)


def independent(space: FiniteSpace, A: Partition, B: Partition) -> bool:
    for a in A.blocks:
        pa = space.measure(a)
        for b in B.blocks:
            if space.measure(a & b) != pa * space.measure(b):
                return False
    return True


def join(A: Partition, B: Partition) -> Partition:
    if A.n_atoms != B.n_atoms:
        raise ContractError("partitions of different spaces")
    blocks = [a & b for a in A.blocks for b in B.blocks if a & b]
    return Partition(tuple(blocks), A.n_atoms)


def check_additivity(space: FiniteSpace, m: AtomSetFunction, A: Partition, B: Partition) -> Report:
    if not independent(space, A, B):
        raise ContractError("additivity is only claimed for independent partitions")
    joint = eval_Lm(space, m, join(A, B))
    parts = eval_Lm(space, m, A) + eval_Lm(space, m, B)
    if joint != parts:
        return Report("Lm-additivity", False, 1, {
            "A": A.to_json(), "B": B.to_json(), "L(join)": joint, "L(A)+L(B)": parts,
        })
    return Report("Lm-additivity", True, 1)


# -- difference functions and the recovery of m ------------------------------


class DeltaEvaluator(Protocol):
    out_dim: int

    def __call__(self, V: frozenset, W: frozenset) -> QVector:
        ...


class DeltaFromAtoms:
    """Ground-truth fixture ``Delta(V, W) = m*(W) - m*(V)`` for atom vectors ``m*``."""

    def __init__(self, space: FiniteSpace, atom_values: Sequence):
        vals = [v if isinstance(v, QVector) else QVector(v) for v in atom_values]
        if len(vals) != space.n_atoms:
            raise ContractError(f"expected {space.n_atoms} atom vectors")
        if len({len(v) for v in vals}) != 1:
            raise ContractError("atom vectors must share one length")
        for i in space.null_atoms():
            if not vals[i].is_zero():
                raise RejectedInput(f"ground-truth m is nonzero on null atom {i}")
        self.space = space
        self.atom_values = tuple(vals)
        self.out_dim = len(vals[0])

    def m(self, V) -> QVector:
        return vsum((self.atom_values[i] for i in V), self.out_dim)

    def __call__(self, V, W):
        return self.m(W) - self.m(V)

    def to_json(self) -> dict:
        return {"ground_truth_m": {"out_dim": self.out_dim,
                                   "atoms": [v.to_json() for v in self.atom_values]}}


def delta_key(V, W) -> str:
    return ",".join(map(str, sorted(V))) + "|" + ",".join(map(str, sorted(W)))


def _parse_set(text: str) -> frozenset:
    text = text.strip()
    return frozenset(int(t) for t in text.split(",")) if text else frozenset()


class DeltaTable:
    """Explicit table keyed by ``"i,j|k,l"`` (sorted atom indices of V and W)."""

    def __init__(self, out_dim: int, table: dict):
        self.out_dim = out_dim
        self.table = {}
        for key, val in table.items():
            if isinstance(key, str):
                v_text, _, w_text = key.partition("|")
                key = (_parse_set(v_text), _parse_set(w_text))
            val = val if isinstance(val, QVector) else QVector(val)
            if len(val) != out_dim:
                raise ContractError(f"table value for {delta_key(*key)} has the wrong length")
            self.table[(frozenset(key[0]), frozenset(key[1]))] = val

    def __call__(self, V, W):
        V, W = frozenset(V), frozenset(W)
        hit = self.table.get((V, W))
        if hit is not None:
            return hit
        if V == W:
            return QVector.zeros(self.out_dim)
        raise ContractError(f"difference table has no entry for {delta_key(V, W)}")

    def to_json(self) -> dict:
        return {"out_dim": self.out_dim,
                "table": {delta_key(v, w): val.to_json() for (v, w), val in sorted(
                    self.table.items(), key=lambda kv: delta_key(*kv[0]))}}


def delta_from_json(space: FiniteSpace, data) -> DeltaEvaluator:
    if not isinstance(data, dict):
        raise ContractError("difference-function file must be a JSON object")
    if "ground_truth_m" in data:
        gt = data["ground_truth_m"]
        try:
            return DeltaFromAtoms(space, [QVector.from_json(v) for v in gt["atoms"]])
        except (KeyError, TypeError) as exc:
            raise ContractError(f"malformed ground_truth_m: {exc}") from exc
    if "table" in data:
        try:
            return DeltaTable(int(data["out_dim"]), data["table"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ContractError(f"malformed difference table: {exc}") from exc
    raise ContractError("difference-function file needs 'table' or 'ground_truth_m'")


def _disjoint_pairs(n: int):
    """All ordered pairs of disjoint atom sets as bitmasks."""
    full = (1 << n) - 1
    for a in range(1 << n):
        rest = full & ~a
        b = rest
        while True:
            yield a, b
            if b == 0:
                break
            b = (b - 1) & rest


def check_delta_contract(space: FiniteSpace, delta: DeltaEvaluator, samples: int = 200,
                         seed: int = 0) -> Report:
    """Sample the chain, disjoint-additivity and null-invariance conditions."""
    rng = random.Random(seed)
    classes = [c for c in space.measure_classes.values()]
    nulls = space.null_atoms()
    zero = QVector.zeros(delta.out_dim)
    reports = []

    rep = Report("delta-chain", True, samples)
    for i in range(samples):
        cls = rng.choice(classes)
        U, V, W = (rng.choice(cls) for _ in range(3))
        lhs, rhs = delta(U, W), delta(U, V) + delta(V, W)
        if lhs != rhs:
            rep = Report("delta-chain", False, i, {"U": U, "V": V, "W": W, "lhs": lhs, "rhs": rhs})
            break
    reports.append(rep)

    rep = Report("delta-disjoint", True, samples)
    for i in range(samples):
        cls = rng.choice(classes)
        V, W = rng.choice(cls), rng.choice(cls)
        A = frozenset(x for x in V if rng.getrandbits(1))
        target = space.measure(A)
        wl = sorted(W)
        options = [frozenset(c) for k in range(len(wl) + 1) for c in itertools.combinations(wl, k)
                   if space.measure(c) == target]
        if not options:
            continue
        A2 = rng.choice(options)
        lhs = delta(V, W)
        rhs = delta(A, A2) + delta(V - A, W - A2)
        if lhs != rhs:
            rep = Report("delta-disjoint", False, i, {
                "V": V, "W": W, "A": A, "A'": A2, "lhs": lhs, "rhs": rhs,
            })
            break
    reports.append(rep)

    rep = Report("delta-null", True, samples if nulls else 0)
    if nulls:
        for i in range(samples):
            cls = rng.choice(classes)
            V, W = rng.choice(cls), rng.choice(cls)
            V2 = V ^ frozenset(x for x in nulls if rng.getrandbits(1))
            W2 = W ^ frozenset(x for x in nulls if rng.getrandbits(1))
            if delta(V, W) != delta(V2, W2):
                rep = Report("delta-null", False, i, {"V": V, "W": W, "V'": V2, "W'": W2})
                break
    reports.append(rep)

    self_rep = Report("delta-self", True, len(classes))
    for cls in classes:
        if delta(cls[0], cls[0]) != zero:
            self_rep = Report("delta-self", False, 0, {"V": cls[0]})
            break
    reports.append(self_rep)
    return merge("delta-contract", reports)


class _MeasureTableCocycle(Cocycle2):
    """Binary cocycle on [0, 1] read off a table of realizable measure pairs."""

    def __init__(self, table: dict, out_dim: int):
        self.table = table
        self.dim = 1
        self.out_dim = out_dim

    def __call__(self, a, b):
        hit = self.table.get((a[0], b[0]))
        if hit is None:
            raise DomainError(f"no pair of disjoint sets has measures ({format_q(a[0])}, {format_q(b[0])})")
        return hit


@dataclass
class RecoveredM:
    """Output of :func:`recover_m`: ``m`` on every atom set plus diagnostics."""

    space: FiniteSpace
    values: dict
    h: dict
    method: str
    report: Report = None
    reference_sets: dict = field(default_factory=dict)

    def __call__(self, V) -> QVector:
        return self.values[frozenset(V)]

    def atom_values(self) -> list[QVector]:
        return [self.values[frozenset([i])] for i in range(self.space.n_atoms)]

    def to_json(self) -> dict:
        return {
            "method": self.method,
            "atoms": [v.to_json() for v in self.atom_values()],
            "h": {format_q(k): v.to_json() for k, v in sorted(self.h.items())},
            "values": {",".join(map(str, sorted(s))): v.to_json()
                       for s, v in sorted(self.values.items(), key=lambda kv: sorted(kv[0]))},
            "report": self.report.to_json() if self.report else None,
        }


def _grid_complete(space: FiniteSpace, f_table: dict) -> bool:
    D = 1
    for p in space.probs:
        D = D * int(p.denominator) // _gcd(D, int(p.denominator))
    return all((Q(j, D), Q(k, D)) in f_table for j in range(D + 1) for k in range(D + 1 - j))


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def recover_m(
    space: FiniteSpace,
    delta: DeltaEvaluator,
    samples: int = 200,
    seed: int = 0,
    method: str = "auto",
) -> RecoveredM:
    """Find a finitely additive ``m`` with ``Delta(V, W) = m(W) - m(V)``.

    Pipeline: reference sets ``V_t`` (lexicographically least set of each
    measure) get ``m1(V_t) = 0`` and ``m1(W) = Delta(V_t, W)``; the defect
    ``m1(A + B) - m1(A) - m1(B)`` is tabulated for every disjoint pair and
    must depend only on the two measures; a potential ``h`` for that table
    is found and ``m = m1 - h(P(.))``.

    The potential comes from the cone solver on the one-dimensional domain
    ``[0, 1]`` when every pair of grid values ``j/D, k/D`` is realizable by
    disjoint sets (``method="tower"``), otherwise from the exact linear
    system on the realizable measures (``method="linear"``).
    """
    n = space.n_atoms
    if n > 12:
        raise ContractError("recover_m enumerates all subsets; at most 12 atoms")
    if method not in ("auto", "tower", "linear"):
        raise ContractError(f"unknown method {method!r}")
    contract = check_delta_contract(space, delta, samples, seed)
    if not contract.passed:
        raise RejectedInput("difference function violates its contract", contract)

    subsets = space.subsets()
    measures = [space.measure(s) for s in subsets]
    refs = {theta: min(cls, key=lambda s: tuple(sorted(s)))
            for theta, cls in space.measure_classes.items()}
    zero = QVector.zeros(delta.out_dim)
    m1 = []
    for s, theta in zip(subsets, measures):
        ref = refs[theta]
        m1.append(zero if s == ref else delta(ref, s))
    for mask, s in enumerate(subsets):
        if measures[mask] == 0 and m1[mask] != zero:
            raise RejectedInput(f"Delta gives a nonzero value on the null set {sorted(s)}")

    f_table: dict = {}
    witness: dict = {}
    for a, b in _disjoint_pairs(n):
        key = (measures[a], measures[b])
        val = m1[a | b] - m1[a] - m1[b]
        prev = f_table.get(key)
        if prev is None:
            f_table[key] = val
            witness[key] = (a, b)
        elif prev != val:
            a0, b0 = witness[key]
            raise RejectedInput("defect of m1 depends on more than the measures", Report(
                "measure-dependence", False, 0, {
                    "pair1": [sorted(subsets[a0]), sorted(subsets[b0])],
                    "pair2": [sorted(subsets[a]), sorted(subsets[b])],
                    "values": [prev, val],
                }))

    if method == "auto":
        method = "tower" if _grid_complete(space, f_table) else "linear"
    if method == "tower":
        h = _potential_by_tower(space, f_table, delta.out_dim)
    else:
        h = _potential_by_system(f_table, delta.out_dim)

    values = {s: m1[i] - h[measures[i]] for i, s in enumerate(subsets)}
    out = RecoveredM(space, values, h, method, reference_sets=refs)
    out.report = check_recovery(space, delta, out, exhaustive=n <= 8, seed=seed)
    return out


def _potential_by_tower(space: FiniteSpace, f_table: dict, out_dim: int) -> dict:
    if not _grid_complete(space, f_table):
        raise RejectedInput("tower method needs every grid pair to be realizable")
    for (a, b), v in f_table.items():
        if f_table.get((b, a)) != v:
            raise RejectedInput("measure defect table is not symmetric")
    grid = sorted({k[0] for k in f_table})
    for a in grid:
        for b in grid:
            for c in grid:
                if a + b + c > 1:
                    break
                lhs = f_table[(a, b + c)] + f_table[(b, c)]
                rhs = f_table[(a + b, c)] + f_table[(a, b)]
                if lhs != rhs:
                    raise RejectedInput("measure defect table is not a cocycle", Report(
                        "cocycle2", False, 0, {"a": a, "b": b, "c": c, "lhs": lhs, "rhs": rhs}))
    domain = ConeDomain(1, (QVector([1]),), QVector([1]))
    tower = solve(domain, _MeasureTableCocycle(f_table, out_dim), validate=False)
    thetas = sorted(space.measure_classes)
    return {t: tower.eval_h(QVector._raw([t])) for t in thetas}


def _potential_by_system(f_table: dict, out_dim: int) -> dict:
    thetas = sorted({t for k in f_table for t in k} | {a + b for a, b in f_table})
    index = {t: i for i, t in enumerate(thetas)}
    system = LinearSystem(len(thetas), rhs_zero=QVector.zeros(out_dim))
    keys = sorted(f_table)
    for a, b in keys:
        row: dict = {}
        for t, c in ((a + b, 1), (a, -1), (b, -1)):
            row[index[t]] = row.get(index[t], 0) + c
        if not system.add(row, f_table[(a, b)]):
            raise RejectedInput("no potential fits the measure defects", Report(
                "potential-system", False, keys.index((a, b)), {"a": a, "b": b}))
    sol = system.solution()
    return dict(zip(thetas, sol))


def check_recovery(space: FiniteSpace, delta: DeltaEvaluator, m, exhaustive: bool = True,
                   samples: int = 2000, seed: int = 0) -> Report:
    """Check ``m`` (callable on atom sets) against the three recovery claims.

    Exhaustive mode walks every equal-measure pair, every disjoint pair and
    every null set; otherwise ``samples`` random instances of each.
    """
    n = space.n_atoms
    subsets = space.subsets()
    zero = QVector.zeros(delta.out_dim)
    rng = random.Random(seed)
    reports = []

    if exhaustive:
        eq_pairs = ((V, W) for cls in space.measure_classes.values() for V in cls for W in cls)
        dis_pairs = ((subsets[a], subsets[b]) for a, b in _disjoint_pairs(n))
    else:
        classes = list(space.measure_classes.values())
        eq_pairs = ((rng.choice(c), rng.choice(c)) for c in (rng.choice(classes) for _ in range(samples)))

        def _dis():
            for _ in range(samples):
                labels = [rng.randrange(3) for _ in range(n)]
                yield (frozenset(i for i in range(n) if labels[i] == 0),
                       frozenset(i for i in range(n) if labels[i] == 1))
        dis_pairs = _dis()

    count, rep = 0, None
    for V, W in eq_pairs:
        count += 1
        if delta(V, W) != m(W) - m(V):
            rep = Report("recover-difference", False, count, {"V": V, "W": W})
            break
    reports.append(rep or Report("recover-difference", True, count))

    count, rep = 0, None
    for A, B in dis_pairs:
        count += 1
        if m(A | B) != m(A) + m(B):
            rep = Report("recover-additive", False, count, {"A": A, "B": B})
            break
    reports.append(rep or Report("recover-additive", True, count))

    nulls = space.measure_classes.get(Q(0), [])
    bad = next((V for V in nulls if m(V) != zero), None)
    reports.append(Report("recover-null", bad is None, len(nulls), None if bad is None else {"V": bad}))
    return merge("recover-m", reports)


# -- atom-measure dependence -----------------------------------------------


def is_measure_multiple(space: FiniteSpace, m: AtomSetFunction) -> Optional[QMatrix]:
    """The matrix ``T`` with ``m({w}) == P(w) * T`` for every atom, if any."""
    pos = next(i for i, p in enumerate(space.probs) if p > 0)
    T = m.matrices[pos] * (1 / space.probs[pos])
    for p, mat in zip(space.probs, m.matrices):
        if mat != T * p:
            return None
    return T


def set_partitions(n: int):
    """All partitions of ``range(n)`` via restricted growth strings."""
    if n == 0:
        yield ()
        return
    labels = [0] * n

    def rec(i, top):
        if i == n:
            blocks: dict = {}
            for atom, lab in enumerate(labels):
                blocks.setdefault(lab, []).append(atom)
            yield tuple(frozenset(b) for b in blocks.values())
            return
        for lab in range(top + 2):
            labels[i] = lab
            yield from rec(i + 1, max(top, lab))

    labels[0] = 0
    yield from rec(1, 0)


def atom_measure_dependence_witness(space: FiniteSpace, m: AtomSetFunction):
    """Two partitions with equal block-measure multisets but different ``L_m``.

    Exhaustive over all set partitions (at most 10 atoms); None if ``L_m``
    is a function of the block measures alone.
    """
    if space.n_atoms > 10:
        raise ContractError("witness search is exhaustive; at most 10 atoms")
    seen: dict = {}
    for blocks in set_partitions(space.n_atoms):
        A = Partition(blocks, space.n_atoms)
        key = tuple(sorted(space.measure(b) for b in blocks))
        val = eval_Lm(space, m, A)
        prev = seen.get(key)
        if prev is None:
            seen[key] = (A, val)
        elif prev[1] != val:
            return prev[0], A
    return None


# -- fixtures ------------------------------------------------------------------


def product_space(s1: FiniteSpace, s2: FiniteSpace) -> FiniteSpace:
    """Atoms ``(i, j)`` numbered ``i * len(s2) + j`` with mass ``p_i q_j``."""
    return FiniteSpace(tuple(p * q for p in s1.probs for q in s2.probs))


def lift_partition(A: Partition, n_other: int, first: bool) -> Partition:
    """Pull a partition of one factor back to the product space."""
    if first:
        blocks = [frozenset(i * n_other + j for i in b for j in range(n_other)) for b in A.blocks]
    else:
        blocks = [frozenset(i * A.n_atoms + j for j in b for i in range(n_other)) for b in A.blocks]
    return Partition(tuple(blocks), A.n_atoms * n_other)


def random_space(n_atoms: int, denom: int, rng: random.Random, allow_null: bool = True) -> FiniteSpace:
    """Masses ``k_i / denom`` from a random composition of ``denom``."""
    if n_atoms < 1 or denom < 1:
        raise ContractError("need at least one atom and a positive denominator")
    if not allow_null and denom < n_atoms:
        raise ContractError("denominator too small for positive masses")
    while True:
        cuts = sorted(rng.randint(0, denom) for _ in range(n_atoms - 1))
        parts = [b - a for a, b in zip([0] + cuts, cuts + [denom])]
        if allow_null or all(parts):
            return FiniteSpace(tuple(Q(k, denom) for k in parts))


def random_partition(n: int, rng: random.Random, max_blocks: Optional[int] = None) -> Partition:
    k = rng.randint(1, max_blocks or n)
    labels = [rng.randrange(k) for _ in range(n)]
    blocks: dict = {}
    for i, lab in enumerate(labels):
        blocks.setdefault(lab, set()).add(i)
    return Partition(tuple(frozenset(b) for _, b in sorted(blocks.items())), n)


def random_atom_function(space: FiniteSpace, out_dim: int, rng: random.Random) -> AtomSetFunction:
    mats = []
    for p in space.probs:
        if p == 0:
            mats.append(QMatrix.zeros(out_dim, space.log_dim))
        else:
            mats.append(QMatrix([[Q(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(space.log_dim)]
                                 for _ in range(out_dim)]))
    return AtomSetFunction(space, mats)


def random_atom_vectors(space: FiniteSpace, out_dim: int, rng: random.Random) -> list[QVector]:
    return [QVector.zeros(out_dim) if p == 0 else
            QVector([Q(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(out_dim)])
            for p in space.probs]
