"""Symmetric 2-cocycles on a cone domain and their n-ary extensions.

A cocycle here is any callable ``f(a, b) -> QVector`` with ``f(a, b) ==
f(b, a)`` and ``f(a, b + c) + f(b, c) == f(a + b, c) + f(a, b)`` whenever
``a + b + c`` lies in ``M``.  Four built-in families serialize to JSON:

``bilinear``   ``f(a, b)_k = a^T B_k b`` with one d x d matrix per output
``potential``  ``f(a, b) = phi(a + b) - phi(a) - phi(b)`` for a polynomial phi
``shift``      ``f(a, b) = base(a, b) + z`` for a constant vector ``z``
``sum``        rational linear combinations of other cocycles

User code may wrap any pure function with :class:`FunctionCocycle`; such
evaluators are only ever sample-validated.
"""

from __future__ import annotations

import itertools
import random
from abc import ABC, abstractmethod
from typing import Callable, Optional, Sequence

from .conedomain import ConeDomain, sample_tuple
from .errors import ContractError, DomainError, EvaluationError
from .exactq import Q, QMatrix, QVector, format_q, to_q, vsum
from .report import Report

DEFAULT_SAMPLES = 1000
DEFAULT_MAX_DENOM = 60
MAX_POTENTIAL_DEGREE = 4


class Cocycle2(ABC):
    dim: int
    out_dim: int

    @abstractmethod
    def __call__(self, a: QVector, b: QVector) -> QVector:
        ...

    def to_json(self) -> dict:
        raise ContractError(f"{type(self).__name__} has no JSON form")

    def zero(self) -> QVector:
        return QVector.zeros(self.out_dim)


class Bilinear(Cocycle2):
    """``f(a, b)_k = a^T B_k b``.

    Symmetry of each ``B_k`` is not enforced here, so that an asymmetric
    form can be fed to the validators and rejected there.
    """

    def __init__(self, matrices: Sequence):
        mats = [m if isinstance(m, QMatrix) else QMatrix(m) for m in matrices]
        if not mats:
            raise ContractError("bilinear cocycle needs at least one matrix")
        d = mats[0].shape[0]
        for m in mats:
            if m.shape != (d, d):
                raise ContractError(f"bilinear matrices must all be {d}x{d}")
        self.matrices = tuple(mats)
        self.dim = d
        self.out_dim = len(mats)
        self._rows = tuple(tuple(tuple(r) for r in m.rows) for m in mats)

    def __call__(self, a, b):
        out = []
        for rows in self._rows:
            acc = 0
            for ai, row in zip(a, rows):
                if ai:
                    s = 0
                    for mij, bj in zip(row, b):
                        if mij and bj:
                            s += mij * bj
                    if s:
                        acc += ai * s
            out.append(Q(acc))
        return QVector._raw(out)

    def is_symmetric(self) -> bool:
        return all(m == m.transpose() for m in self.matrices)

    def to_json(self):
        return {
            "family": "bilinear",
            "dim": self.dim,
            "matrices": [m.to_json() for m in self.matrices],
        }


class Polynomial:
    """Vector of polynomials in ``dim`` variables with rational coefficients.

    Each component is a list of ``(coef, exponents)`` terms.  Total degree
    is limited to 4, which covers the monomials ``x_i^k``, the products
    ``x_i x_j`` and their rational linear combinations.
    """

    def __init__(self, dim: int, components: Sequence[Sequence[tuple]]):
        self.dim = dim
        comps = []
        for comp in components:
            terms = []
            for coef, exps in comp:
                exps = tuple(int(e) for e in exps)
                if len(exps) != dim or any(e < 0 for e in exps):
                    raise ContractError(f"bad exponent vector {list(exps)} for dimension {dim}")
                if sum(exps) > MAX_POTENTIAL_DEGREE:
                    raise ContractError(f"degree {sum(exps)} exceeds {MAX_POTENTIAL_DEGREE}")
                coef = to_q(coef)
                if coef:
                    terms.append((coef, exps))
            comps.append(tuple(terms))
        if not comps:
            raise ContractError("potential needs at least one component")
        self.components = tuple(comps)
        self.out_dim = len(comps)

    def __call__(self, x) -> QVector:
        out = []
        for terms in self.components:
            acc = Q(0)
            for coef, exps in terms:
                t = coef
                for xi, e in zip(x, exps):
                    if e:
                        t = t * xi ** e
                        if not t:
                            break
                acc += t
            out.append(acc)
        return QVector._raw(out)

    def to_json(self):
        return [
            [{"coef": format_q(c), "exp": list(e)} for c, e in terms]
            for terms in self.components
        ]

    @classmethod
    def from_json(cls, dim: int, data) -> "Polynomial":
        try:
            comps = [[(t["coef"], t["exp"]) for t in comp] for comp in data]
        except (KeyError, TypeError) as exc:
            raise ContractError(f"malformed potential term: {exc}") from exc
        return cls(dim, comps)


class Potential(Cocycle2):
    """The coboundary ``phi(a + b) - phi(a) - phi(b)`` of a polynomial."""

    def __init__(self, phi: Polynomial):
        self.phi = phi
        self.dim = phi.dim
        self.out_dim = phi.out_dim

    def __call__(self, a, b):
        phi = self.phi
        return phi(a + b) - phi(a) - phi(b)

    def to_json(self):
        return {"family": "potential", "dim": self.dim, "components": self.phi.to_json()}


class ConstantShift(Cocycle2):
    def __init__(self, base: Cocycle2, z):
        z = z if isinstance(z, QVector) else QVector(z)
        if len(z) != base.out_dim:
            raise ContractError("shift vector length must match the cocycle output dimension")
        self.base = base
        self.z = z
        self.dim = base.dim
        self.out_dim = base.out_dim

    def __call__(self, a, b):
        return self.base(a, b) + self.z

    def to_json(self):
        return {"family": "shift", "z": self.z.to_json(), "base": self.base.to_json()}


class LinearCombination(Cocycle2):
    def __init__(self, terms: Sequence[tuple]):
        terms = [(to_q(c), f) for c, f in terms]
        if not terms:
            raise ContractError("empty linear combination")
        dims = {(f.dim, f.out_dim) for _, f in terms}
        if len(dims) != 1:
            raise ContractError("combined cocycles must share input and output dimensions")
        self.terms = tuple(terms)
        self.dim, self.out_dim = dims.pop()

    def __call__(self, a, b):
        return vsum((f(a, b) * c for c, f in self.terms), self.out_dim)

    def to_json(self):
        return {
            "family": "sum",
            "terms": [{"coef": format_q(c), "cocycle": f.to_json()} for c, f in self.terms],
        }


class FunctionCocycle(Cocycle2):
    """Wrap an arbitrary pure function ``fn(a, b) -> QVector``."""

    def __init__(self, fn: Callable, dim: int, out_dim: int, name: str = "custom"):
        self.fn = fn
        self.dim = dim
        self.out_dim = out_dim
        self.name = name

    def __call__(self, a, b):
        v = self.fn(a, b)
        return v if isinstance(v, QVector) else QVector(v)

    def __repr__(self):
        return f"FunctionCocycle({self.name!r})"


def shifted(f: Cocycle2, w) -> Cocycle2:
    """``f + w`` with nested shifts merged and zero shifts dropped."""
    w = w if isinstance(w, QVector) else QVector(w)
    if isinstance(f, ConstantShift):
        f, w = f.base, f.z + w
    if w.is_zero():
        return f
    return ConstantShift(f, w)


def cocycle_from_json(data) -> Cocycle2:
    if not isinstance(data, dict) or "family" not in data:
        raise ContractError("cocycle description must be an object with a 'family' key")
    family = data["family"]
    try:
        if family == "bilinear":
            f = Bilinear([QMatrix(m) for m in data["matrices"]])
            if "dim" in data and data["dim"] != f.dim:
                raise ContractError("declared dim does not match matrix size")
            return f
        if family == "potential":
            return Potential(Polynomial.from_json(data["dim"], data["components"]))
        if family == "shift":
            return ConstantShift(cocycle_from_json(data["base"]), QVector.from_json(data["z"]))
        if family == "sum":
            return LinearCombination(
                [(t["coef"], cocycle_from_json(t["cocycle"])) for t in data["terms"]]
            )
    except (KeyError, TypeError) as exc:
        raise ContractError(f"malformed {family} cocycle: missing or bad field {exc}") from exc
    raise ContractError(f"unknown cocycle family {family!r}")


# -- n-ary extension --------------------------------------------------------


class CocycleN:
    """Arity-generic extension of a binary cocycle.

    ``F(a) = 0`` and ``F(a, b, ..., c) = F(a + b, ..., c) + f(a, b)``, which
    unrolls to the left fold ``f(a1, a2) + f(a1 + a2, a3) + ...``.
    """

    def __init__(self, base: Cocycle2, domain: Optional[ConeDomain] = None):
        self.base = base
        self.domain = domain
        self.out_dim = base.out_dim

    def __call__(self, *points) -> QVector:
        if not points:
            raise ContractError("the n-ary extension needs at least one argument")
        points = [p if isinstance(p, QVector) else QVector(p) for p in points]
        if self.domain is not None and not self.domain.tuple_in_domain(points):
            raise DomainError("tuple is outside the cocycle's domain")
        f = self.base
        total = QVector.zeros(self.out_dim)
        acc = points[0]
        for x in points[1:]:
            total = total + f(acc, x)
            acc = acc + x
        return total

    def repeated(self, x: QVector, p: int) -> QVector:
        """``F(x, x, ..., x)`` with ``p >= 1`` copies, in O(log p) evaluations.

        Uses ``F(x : k + l) = F(x : k) + F(x : l) + f(k x, l x)``, the
        grouping law for two blocks of equal points; every queried sum is at
        most ``p x``.
        """
        if p < 1:
            raise ContractError("repetition count must be positive")
        f = self.base
        zero = QVector.zeros(self.out_dim)
        acc_val, acc_n = None, 0
        pow_val, pow_n = zero, 1
        while True:
            if p & pow_n:
                if acc_val is None:
                    acc_val, acc_n = pow_val, pow_n
                else:
                    acc_val = acc_val + pow_val + f(x * acc_n, x * pow_n)
                    acc_n += pow_n
            if 2 * pow_n > p:
                break
            pow_val = pow_val + pow_val + f(x * pow_n, x * pow_n)
            pow_n *= 2
        return acc_val

    def repeated_fold(self, x: QVector, p: int) -> QVector:
        """Same value as :meth:`repeated` via the plain p-1 step fold."""
        if p < 1:
            raise ContractError("repetition count must be positive")
        f = self.base
        total = QVector.zeros(self.out_dim)
        for j in range(1, p):
            total = total + f(x * j, x)
        return total


def extend_nary(f: Cocycle2, domain: Optional[ConeDomain] = None) -> CocycleN:
    return CocycleN(f, domain)


# -- validation -------------------------------------------------------------


def _call(fn, *points):
    try:
        return fn(*points)
    except (DomainError, ContractError):
        raise
    except Exception as exc:
        raise EvaluationError(
            f"evaluator failed at {[p.to_json() for p in points]}: {exc}", point=points
        ) from exc


def cocycle_offset(f: Cocycle2) -> QVector:
    """The constant ``z = f(0, 0)``; any solution has ``h(0) = -z``."""
    zero = QVector.zeros(f.dim)
    return _call(f, zero, zero)


def normalize(f: Cocycle2) -> tuple[Cocycle2, QVector]:
    """Return ``(f - z, z)`` so that the first component vanishes at (0, 0).

    A potential ``h0`` for ``f - z`` gives ``h0 - z`` for ``f``.
    """
    z = cocycle_offset(f)
    return shifted(f, -z), z


def check_cocycle2(
    f: Cocycle2,
    domain: ConeDomain,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    max_denom: int = DEFAULT_MAX_DENOM,
) -> Report:
    """Symmetry and the binary cocycle identity on sampled triples."""
    rng = random.Random(seed)
    for i in range(samples):
        a, b, c = sample_tuple(domain, 3, rng, max_denom)
        fab, fba = _call(f, a, b), _call(f, b, a)
        if fab != fba:
            return Report("cocycle2", False, i, {
                "law": "symmetry", "a": a, "b": b, "f(a,b)": fab, "f(b,a)": fba,
            })
        lhs = _call(f, a, b + c) + _call(f, b, c)
        rhs = _call(f, a + b, c) + fab
        if lhs != rhs:
            return Report("cocycle2", False, i, {
                "law": "cocycle", "a": a, "b": b, "c": c, "lhs": lhs, "rhs": rhs,
            })
    return Report("cocycle2", True, samples)


def check_offset_laws(
    f: Cocycle2,
    domain: ConeDomain,
    samples: int = 100,
    seed: int = 0,
    n_max: int = 6,
    max_denom: int = DEFAULT_MAX_DENOM,
) -> Report:
    """``F(0 : n) == (n - 1) z`` for ``n <= n_max`` and ``f(a, 0) == z``."""
    z = cocycle_offset(f)
    fn = extend_nary(f)
    zero = QVector.zeros(f.dim)
    for n in range(1, n_max + 1):
        got = _call(fn, *([zero] * n))
        if got != z * (n - 1):
            return Report("offset", False, n - 1, {
                "law": "zero-repeat", "n": n, "got": got, "expected": z * (n - 1),
            }, {"z": z})
    rng = random.Random(seed)
    for i in range(samples):
        a = sample_tuple(domain, 1, rng, max_denom)[0]
        got = _call(f, a, zero)
        if got != z:
            return Report("offset", False, n_max + i, {
                "law": "f(a,0)=z", "a": a, "got": got, "expected": z,
            }, {"z": z})
    return Report("offset", True, n_max + samples, None, {"z": z})


def check_symmetry_nary(
    fn: CocycleN,
    domain: ConeDomain,
    n: int,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    max_denom: int = DEFAULT_MAX_DENOM,
) -> Report:
    """Permutation invariance of ``fn`` on sampled in-domain n-tuples."""
    if not 2 <= n <= 8:
        raise ContractError("arity must be between 2 and 8")
    rng = random.Random(seed)
    name = f"symmetry-n{n}"
    for i in range(samples):
        pts = sample_tuple(domain, n, rng, max_denom)
        perm = list(range(n))
        rng.shuffle(perm)
        v1 = _call(fn, *pts)
        v2 = _call(fn, *[pts[j] for j in perm])
        if v1 != v2:
            return Report(name, False, i, {
                "tuple": pts, "permutation": perm, "value": v1, "permuted_value": v2,
            })
    return Report(name, True, samples)


def check_grouping(
    fn: CocycleN,
    domain: ConeDomain,
    shape: Sequence[int],
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    max_denom: int = DEFAULT_MAX_DENOM,
) -> Report:
    """The grouping law: ``F(all) == F(group sums) + sum F(group)``."""
    shape = list(shape)
    if not shape or any(k < 1 for k in shape) or sum(shape) > 8:
        raise ContractError("shape entries must be >= 1 with total arity <= 8")
    total = sum(shape)
    bounds = list(itertools.accumulate([0] + shape))
    rng = random.Random(seed)
    name = "grouping-" + "x".join(map(str, shape))
    for i in range(samples):
        pts = sample_tuple(domain, total, rng, max_denom)
        groups = [pts[bounds[j]:bounds[j + 1]] for j in range(len(shape))]
        lhs = _call(fn, *pts)
        rhs = _call(fn, *[vsum(g, domain.dim) for g in groups])
        for g in groups:
            rhs = rhs + _call(fn, *g)
        if lhs != rhs:
            return Report(name, False, i, {"tuple": pts, "shape": shape, "lhs": lhs, "rhs": rhs})
    return Report(name, True, samples)


# -- random instances ---------------------------------------------------------


def _small_q(rng: random.Random, bound: int = 4, max_den: int = 3):
    return Q(rng.randint(-bound, bound), rng.randint(1, max_den))


def random_bilinear(dim: int, out_dim: int, rng: random.Random) -> Bilinear:
    mats = []
    for _ in range(out_dim):
        m = [[None] * dim for _ in range(dim)]
        for i in range(dim):
            for j in range(i, dim):
                m[i][j] = m[j][i] = _small_q(rng)
        mats.append(QMatrix(m))
    return Bilinear(mats)


def random_polynomial(dim: int, out_dim: int, rng: random.Random, terms: int = 5) -> Polynomial:
    comps = []
    for _ in range(out_dim):
        comp = [(_small_q(rng), (0,) * dim)]
        for _ in range(terms):
            exps = [0] * dim
            if rng.getrandbits(1):
                exps[rng.randrange(dim)] = rng.randint(1, MAX_POTENTIAL_DEGREE)
            else:
                exps[rng.randrange(dim)] += 1
                exps[rng.randrange(dim)] += 1
            comp.append((_small_q(rng), tuple(exps)))
        comps.append(comp)
    return Polynomial(dim, comps)


def random_cocycle(family: str, dim: int, out_dim: int, rng: random.Random) -> Cocycle2:
    """Seeded instance of one of the four built-in families."""
    if family == "bilinear":
        return random_bilinear(dim, out_dim, rng)
    if family == "potential":
        return Potential(random_polynomial(dim, out_dim, rng))
    if family == "shift":
        z = QVector([_small_q(rng) or Q(1) for _ in range(out_dim)])
        return ConstantShift(random_bilinear(dim, out_dim, rng), z)
    if family == "sum":
        return LinearCombination([
            (_small_q(rng) or Q(1), random_bilinear(dim, out_dim, rng)),
            (_small_q(rng) or Q(1), Potential(random_polynomial(dim, out_dim, rng))),
            (_small_q(rng) or Q(1), ConstantShift(random_bilinear(dim, out_dim, rng),
                                                  QVector([1] * out_dim))),
        ])
    raise ContractError(f"unknown cocycle family {family!r}")


FAMILIES = ("bilinear", "potential", "shift", "sum")
