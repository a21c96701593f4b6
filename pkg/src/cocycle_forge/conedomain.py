"""Pointed rational cones ``P`` with a capped generating subset ``M``.

A :class:`ConeDomain` is the finitely generated cone ``P = cone(generators)``
together with ``M = {x in P : cap . x <= 1}``.  An all-zero cap gives
``M = P``.  Because the cap is nonnegative on every generator, ``M`` is
closed under splitting (``a + b in M`` with ``a, b in P`` forces both into
``M``) and every point of ``P`` has an integer fraction inside ``M``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

from .errors import ContractError, DomainError, RejectedInput
from .exactq import Q, QVector, cone_feasible, combination, in_span


def _ceil(x) -> int:
    return -((-x.numerator) // x.denominator)


@dataclass(frozen=True, eq=False)
class ConeDomain:
    dim: int
    generators: tuple
    cap: QVector
    _lambda_cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        gens = tuple(g if isinstance(g, QVector) else QVector(g) for g in self.generators)
        cap = self.cap if isinstance(self.cap, QVector) else QVector(self.cap)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "cap", cap)
        if self.dim < 1:
            raise ContractError("dimension must be positive")
        if not gens:
            raise RejectedInput("a cone domain needs at least one generator")
        for g in gens + (cap,):
            if len(g) != self.dim:
                raise ContractError(f"expected vectors of length {self.dim}, got {len(g)}")
        for g in gens:
            if g.is_zero():
                raise RejectedInput("zero generator")
            if cap.dot(g) < 0:
                raise RejectedInput(f"cap is negative on generator {g.to_json()}")
        for g in gens:
            if cone_feasible(gens, -g) is not None:
                raise RejectedInput(f"cone is not pointed: -{g.to_json()} lies in it")

    @classmethod
    def simplex(cls, d: int) -> "ConeDomain":
        """Coordinate cone with ``M`` the simplex ``x_1 + ... + x_d <= 1``."""
        return cls(d, tuple(QVector.unit(d, i) for i in range(d)), QVector([1] * d))

    def __eq__(self, other):
        if not isinstance(other, ConeDomain):
            return NotImplemented
        return (self.dim, self.generators, self.cap) == (other.dim, other.generators, other.cap)

    def __hash__(self):
        return hash((self.dim, self.generators, self.cap))

    def reordered(self, order: Sequence[int]) -> "ConeDomain":
        return ConeDomain(self.dim, tuple(self.generators[i] for i in order), self.cap)

    def _vec(self, x) -> QVector:
        x = x if isinstance(x, QVector) else QVector(x)
        if len(x) != self.dim:
            raise ContractError(f"expected a point of dimension {self.dim}, got {len(x)}")
        return x

    def cone_coefficients(self, x) -> Optional[list]:
        x = self._vec(x)
        hit = self._lambda_cache.get(x)
        if hit is None:
            res = cone_feasible(self.generators, x)
            hit = (res[0],) if res is not None else (None,)
            self._lambda_cache[x] = hit
        return hit[0]

    def in_P(self, x) -> bool:
        return self.cone_coefficients(x) is not None

    def level(self, x) -> "Q":
        """The cap functional applied to ``x``."""
        return self.cap.dot(self._vec(x))

    def in_M(self, x) -> bool:
        x = self._vec(x)
        return self.cap.dot(x) <= 1 and self.in_P(x)

    def scale_into_M(self, x) -> "Q":
        """``1/n`` for the least positive integer ``n`` with ``x/n`` in ``M``."""
        x = self._vec(x)
        if not self.in_P(x):
            raise DomainError(f"{x.to_json()} is not in the cone")
        return Q(1, max(1, _ceil(self.cap.dot(x))))

    def tuple_in_domain(self, points: Sequence) -> bool:
        points = [self._vec(p) for p in points]
        if not points:
            return False
        total = points[0]
        for p in points[1:]:
            total = total + p
        return self.in_M(total) and all(self.in_P(p) for p in points)

    @cached_property
    def rank(self) -> int:
        basis: list[QVector] = []
        for g in self.generators:
            if in_span(basis, g) is None:
                basis.append(g)
        return len(basis)

    @cached_property
    def bounded(self) -> bool:
        return all(self.cap.dot(g) > 0 for g in self.generators)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "generators": [g.to_json() for g in self.generators],
            "cap": self.cap.to_json(),
        }

    @classmethod
    def from_json(cls, data) -> "ConeDomain":
        try:
            dim = data["dim"]
            gens = tuple(QVector.from_json(g) for g in data["generators"])
            cap = QVector.from_json(data.get("cap", ["0"] * dim))
        except (KeyError, TypeError) as exc:
            raise ContractError(f"malformed domain: {exc}") from exc
        if not isinstance(dim, int):
            raise ContractError("domain 'dim' must be an integer")
        return cls(dim, gens, cap)


def sample_tuple(
    domain: ConeDomain, n: int, rng: random.Random, max_denom: int = 60
) -> list[QVector]:
    """Draw ``n`` points of ``P`` whose sum lies in ``M``.

    A denominator ``q`` is drawn from ``1..max_denom`` and an integer total
    ``T`` from ``0..q``; ``T`` is split over a random subset of the
    (point, generator) slots by sorted cut points, and point ``i`` becomes
    ``sum_j (k_ij / q) * g_j / c`` where ``c`` is the ceiling of the largest
    generator level.  On the coordinate simplex every coordinate therefore
    has denominator dividing ``q``.
    """
    gens = domain.generators
    k = len(gens)
    scale = Q(1, max(1, max(_ceil(domain.cap.dot(g)) for g in gens)))
    q = rng.randint(1, max_denom)
    total = rng.randint(0, q)
    slots = [s for s in range(n * k) if rng.getrandbits(1)]
    if not slots:
        slots = [rng.randrange(n * k)]
    cuts = sorted(rng.randint(0, total) for _ in range(len(slots) - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [total])]
    weights = [0] * (n * k)
    for s, w in zip(slots, parts):
        weights[s] = w
    points = []
    for i in range(n):
        coeffs = [Q(weights[i * k + j], q) * scale for j in range(k)]
        points.append(combination(coeffs, gens, domain.dim))
    return points


def sample_point(domain: ConeDomain, rng: random.Random, max_denom: int = 60) -> QVector:
    return sample_tuple(domain, 1, rng, max_denom)[0]
