"""Constructive coboundary solver for symmetric 2-cocycles on cone domains.

Given a validated cocycle ``f`` on a :class:`ConeDomain`, :func:`solve`
builds a potential ``h`` on ``M`` with

    f(a, b) == h(a + b) - h(a) - h(b)

one generator at a time.  Each accepted generator ``s`` contributes an
:class:`ExtensionStep`: a ray solution on ``Q+ s`` plus the rule
``h(a + b) = h_lower(a) + h_ray(b) + f(a, b)`` for ``a`` in the cone built
so far and ``b`` on the new ray.  When ``s`` is linearly independent of the
earlier generators (case A) the ray's anchor value is free; when it lies in
their span but outside their cone (case B) the anchor is calibrated so the
new rule agrees with the old potential.

:func:`grid_oracle` solves the same equation by brute force on a finite
grid and serves as an independent check.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence, Union

from .cocycle import (
    DEFAULT_MAX_DENOM,
    DEFAULT_SAMPLES,
    Cocycle2,
    CocycleN,
    check_cocycle2,
    cocycle_from_json,
    cocycle_offset,
)
from .conedomain import ConeDomain, sample_tuple
from .errors import ContractError, DomainError, RejectedInput
from .exactq import (
    LinearSystem,
    Q,
    QVector,
    combination,
    cone_feasible,
    format_q,
    in_span,
    to_q,
    vsum,
)
from .report import Report, merge


class RaySolution:
    """Potential on the ray through ``anchor = anchor_scale * direction``.

    For ``x = (p/q) * anchor`` the value is

        (p/q) * (anchor_value - F(anchor/q : q)) + F(anchor/q : p)

    with ``F(y : k)`` the n-ary extension of ``f`` on ``k`` copies of ``y``.
    ``x = 0`` gives ``-z``.
    """

    def __init__(self, direction, anchor_scale, anchor_value, f: Cocycle2, z: QVector,
                 domain: Optional[ConeDomain] = None):
        self.direction = direction if isinstance(direction, QVector) else QVector(direction)
        self.anchor_scale = to_q(anchor_scale)
        self.anchor_value = anchor_value if isinstance(anchor_value, QVector) else QVector(anchor_value)
        if self.anchor_scale <= 0:
            raise ContractError("anchor scale must be positive")
        if self.direction.is_zero():
            raise ContractError("ray direction must be nonzero")
        self.f = f
        self.z = z
        self.domain = domain
        self.anchor = self.direction * self.anchor_scale
        self._fn = CocycleN(f)
        self._pivot = next(i for i, v in enumerate(self.anchor) if v)
        self._anchor_level = domain.cap.dot(self.anchor) if domain is not None else None
        self._repeat_cache: dict = {}
        self._value_cache: dict = {}

    def coefficient(self, x: QVector):
        """The rational ``t >= 0`` with ``x == t * anchor``."""
        t = x[self._pivot] / self.anchor[self._pivot]
        if t < 0 or self.anchor * t != x:
            raise DomainError(f"{x.to_json()} is not on the ray through {self.anchor.to_json()}")
        if self._anchor_level is not None and t * self._anchor_level > 1:
            raise DomainError(f"{x.to_json()} lies on the ray but outside M")
        return t

    def _repeat(self, q: int, p: int) -> QVector:
        key = (q, p)
        hit = self._repeat_cache.get(key)
        if hit is None:
            hit = self._fn.repeated(self.anchor / q, p)
            self._repeat_cache[key] = hit
        return hit

    def value_pq(self, p: int, q: int) -> QVector:
        """The ray formula evaluated with the literal (not reduced) pair p/q."""
        if q < 1 or p < 0:
            raise ContractError("need p >= 0 and q >= 1")
        if p == 0:
            return -self.z
        t = Q(p, q)
        return (self.anchor_value - self._repeat(q, q)) * t + self._repeat(q, p)

    def value_at(self, t) -> QVector:
        t = to_q(t)
        hit = self._value_cache.get(t)
        if hit is None:
            hit = self.value_pq(int(t.numerator), int(t.denominator))
            self._value_cache[t] = hit
        return hit

    def __call__(self, x) -> QVector:
        x = x if isinstance(x, QVector) else QVector(x)
        return self.value_at(self.coefficient(x))

    def to_json(self) -> dict:
        return {
            "direction": self.direction.to_json(),
            "anchor_scale": format_q(self.anchor_scale),
            "anchor_value": self.anchor_value.to_json(),
        }


def ray_eval(ray: RaySolution, x) -> QVector:
    return ray(x)


@dataclass
class ExtensionStep:
    generator: QVector
    case: str
    ray: RaySolution
    lower: tuple
    witness_r: Optional[QVector] = None
    alpha0: Optional[object] = None

    def to_json(self) -> dict:
        out = {
            "generator": self.generator.to_json(),
            "case": self.case,
            **self.ray.to_json(),
            "lower": [g.to_json() for g in self.lower],
        }
        if self.case == "B":
            out["witness_r"] = self.witness_r.to_json()
            out["alpha0"] = format_q(self.alpha0)
        return out


class ExtensionTower:
    """The potential ``h`` as an ordered stack of ray extensions.

    Evaluation peels the top step: ``x`` is split as ``a + beta * s`` with
    ``a`` in the cone of the earlier generators (exact feasibility with
    Bland pivoting), then ``h(x) = h_lower(a) + h_ray(beta * s) + f(a, beta * s)``.
    Values are memoized per (level, point).
    """

    def __init__(self, domain: ConeDomain, f: Cocycle2, z: QVector, steps=None, skipped=None):
        self.domain = domain
        self.f = f
        self.z = z
        self.steps: list[ExtensionStep] = list(steps or [])
        self.skipped: list[QVector] = list(skipped or [])
        self._memo: dict = {}

    @property
    def generators(self) -> list[QVector]:
        return [s.generator for s in self.steps]

    def case_counts(self) -> dict:
        return {
            "A": sum(s.case == "A" for s in self.steps),
            "B": sum(s.case == "B" for s in self.steps),
            "skipped": len(self.skipped),
        }

    def split(self, x: QVector, level: int):
        """Decompose ``x`` across step ``level`` (1-based) as ``(a, b)``."""
        step = self.steps[level - 1]
        res = cone_feasible(step.lower, x, extra_ray=step.generator)
        if res is None:
            raise DomainError(f"{x.to_json()} is not in the cone of the first {level} generators")
        lam, beta = res
        a = combination(lam, step.lower, self.domain.dim)
        return a, step.generator * beta

    def _value(self, x: QVector, level: int) -> QVector:
        if x.is_zero():
            return -self.z
        if level == 0:
            raise DomainError(f"{x.to_json()} is outside the cone built so far")
        key = (level, x)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        a, b = self.split(x, level)
        val = self._combine(a, b, level)
        self._memo[key] = val
        return val

    def _combine(self, a: QVector, b: QVector, level: int) -> QVector:
        step = self.steps[level - 1]
        return self._value(a, level - 1) + step.ray(b) + self.f(a, b)

    def eval_h(self, x) -> QVector:
        x = x if isinstance(x, QVector) else QVector(x)
        if not self.domain.in_M(x):
            raise DomainError(f"{x.to_json()} is not in M")
        return self._value(x, len(self.steps))

    __call__ = eval_h

    def eval_via(self, a, b, level: Optional[int] = None) -> QVector:
        """``h(a + b)`` computed from an explicit split at ``level``.

        ``a`` must lie in the cone of the generators below ``level`` and
        ``b`` on that step's ray.  Used to test that the value does not
        depend on which split is chosen.
        """
        level = len(self.steps) if level is None else level
        a = a if isinstance(a, QVector) else QVector(a)
        b = b if isinstance(b, QVector) else QVector(b)
        step = self.steps[level - 1]
        if not a.is_zero() and cone_feasible(step.lower, a) is None:
            raise DomainError(f"{a.to_json()} is not in the lower cone")
        return self._combine(a, b, level)

    def to_json(self) -> dict:
        out = {
            "domain": self.domain.to_json(),
            "z": self.z.to_json(),
            "steps": [s.to_json() for s in self.steps],
            "skipped": [g.to_json() for g in self.skipped],
        }
        try:
            out["cocycle"] = self.f.to_json()
        except ContractError:
            pass
        return out

    @classmethod
    def from_json(cls, data: dict, domain: Optional[ConeDomain] = None,
                  f: Optional[Cocycle2] = None) -> "ExtensionTower":
        """Rebuild a tower, trusting the stored anchors (no recalibration)."""
        try:
            domain = domain or ConeDomain.from_json(data["domain"])
            f = f or cocycle_from_json(data["cocycle"])
            z = QVector.from_json(data["z"])
            steps = []
            for s in data["steps"]:
                ray = RaySolution(
                    QVector.from_json(s["direction"]),
                    s["anchor_scale"],
                    QVector.from_json(s["anchor_value"]),
                    f, z, domain,
                )
                steps.append(ExtensionStep(
                    QVector.from_json(s["generator"]),
                    s["case"],
                    ray,
                    tuple(QVector.from_json(g) for g in s["lower"]),
                    QVector.from_json(s["witness_r"]) if s["case"] == "B" else None,
                    to_q(s["alpha0"]) if s["case"] == "B" else None,
                ))
            skipped = [QVector.from_json(g) for g in data.get("skipped", [])]
        except (KeyError, TypeError) as exc:
            raise ContractError(f"malformed tower: {exc}") from exc
        return cls(domain, f, z, steps, skipped)


def solve(
    domain: ConeDomain,
    f: Cocycle2,
    base_values: Optional[Sequence] = None,
    order: Optional[Sequence[int]] = None,
    validate: bool = True,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    max_denom: int = DEFAULT_MAX_DENOM,
) -> ExtensionTower:
    """Build a potential for ``f`` on ``domain``.

    Generators are processed in ``order`` (default: input order); those
    already inside the current cone are skipped.  ``base_values[i]`` is the
    free anchor value for generator ``i`` when it opens a new direction
    (default 0); it is ignored for calibrated or skipped generators.
    """
    if f.dim != domain.dim:
        raise ContractError(f"cocycle dimension {f.dim} does not match domain dimension {domain.dim}")
    if validate:
        report = check_cocycle2(f, domain, samples, seed, max_denom)
        if not report.passed:
            raise RejectedInput("cocycle failed validation", report)
    order = list(range(len(domain.generators))) if order is None else list(order)
    if sorted(order) != list(range(len(domain.generators))):
        raise ContractError("order must be a permutation of the generator indices")
    z = cocycle_offset(f)
    tower = ExtensionTower(domain, f, z)
    accepted: list[QVector] = []
    d = domain.dim

    for idx in order:
        s = domain.generators[idx]
        if s.is_zero():
            raise RejectedInput("degenerate zero generator")
        if accepted and cone_feasible(accepted, s) is not None:
            tower.skipped.append(s)
            continue
        coeffs = in_span(accepted, s) if accepted else None
        level = len(tower.steps)
        if coeffs is None:
            anchor_value = QVector.zeros(f.out_dim)
            if base_values is not None and base_values[idx] is not None:
                anchor_value = QVector(base_values[idx])
                if len(anchor_value) != f.out_dim:
                    raise ContractError("base value length must match the cocycle output dimension")
            ray = RaySolution(s, domain.scale_into_M(s), anchor_value, f, z, domain)
            step = ExtensionStep(s, "A", ray, tuple(accepted))
        else:
            # r + s = sum max(c_i, 0) g_i and r = sum max(-c_i, 0) g_i both lie in the cone.
            r = combination([max(-c, 0) for c in coeffs], accepted, d)
            r_plus_s = combination([max(c, 0) for c in coeffs], accepted, d)
            alpha0 = domain.scale_into_M(r_plus_s)
            ar, as_ = r * alpha0, s * alpha0
            anchor_value = (tower._value(r_plus_s * alpha0, level)
                            - tower._value(ar, level) - f(ar, as_))
            ray = RaySolution(s, alpha0, anchor_value, f, z, domain)
            step = ExtensionStep(s, "B", ray, tuple(accepted), r, alpha0)
        tower.steps.append(step)
        accepted.append(s)
    return tower


def eval_h(tower: ExtensionTower, x) -> QVector:
    return tower.eval_h(x)


def _edge_pairs(domain: ConeDomain) -> list[tuple[QVector, QVector]]:
    zero = QVector.zeros(domain.dim)
    pairs = [(zero, zero)]
    for g in domain.generators:
        u = g * domain.scale_into_M(g)
        pairs += [(zero, u), (u, zero), (u / 2, u / 2), (u / 3, u * Q(2, 3))]
    return pairs


def verify_coboundary(
    tower: ExtensionTower,
    n_max: int = 6,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    max_denom: int = DEFAULT_MAX_DENOM,
    nary_samples: Optional[int] = None,
) -> Report:
    """Check the coboundary identity on pairs, n-tuples and a regrouping law.

    Pairs: ``f(a, b) == h(a + b) - h(a) - h(b)`` on fixed edge pairs plus
    ``samples`` random ones.  Tuples: ``F(a_1..a_n) == h(sum) - sum h(a_i)``
    for ``2 <= n <= n_max``.  Regrouping: for random ``r, s`` and
    ``alpha, beta`` the four-point value ``F(alpha r, beta r, alpha s,
    beta s)`` agrees across its two natural groupings.
    """
    domain, f = tower.domain, tower.f
    fn = CocycleN(f)
    h = tower.eval_h
    nary_samples = samples if nary_samples is None else nary_samples
    rng = random.Random(seed)
    reports = []

    pairs = _edge_pairs(domain) + [
        tuple(sample_tuple(domain, 2, rng, max_denom)) for _ in range(samples)
    ]
    rep = Report("coboundary-pairs", True, len(pairs))
    for i, (a, b) in enumerate(pairs):
        lhs = f(a, b)
        rhs = h(a + b) - h(a) - h(b)
        if lhs != rhs:
            rep = Report("coboundary-pairs", False, i, {"a": a, "b": b, "f(a,b)": lhs, "dh(a,b)": rhs})
            break
    reports.append(rep)

    for n in range(2, n_max + 1):
        name = f"coboundary-n{n}"
        rep = Report(name, True, nary_samples)
        for i in range(nary_samples):
            pts = sample_tuple(domain, n, rng, max_denom)
            lhs = fn(*pts)
            rhs = h(vsum(pts, domain.dim))
            for p in pts:
                rhs = rhs - h(p)
            if lhs != rhs:
                rep = Report(name, False, i, {"tuple": pts, "F": lhs, "dh": rhs})
                break
        reports.append(rep)

    rep = Report("regrouping", True, nary_samples)
    for i in range(nary_samples):
        r, s = sample_tuple(domain, 2, rng, max_denom)
        q = rng.randint(1, max_denom)
        i_alpha = rng.randint(0, q)
        alpha, beta = Q(i_alpha, q), Q(rng.randint(0, q - i_alpha), q)
        v = fn(r * alpha, r * beta, s * alpha, s * beta)
        g1 = f((r + s) * alpha, (r + s) * beta) + f(r * alpha, s * alpha) + f(r * beta, s * beta)
        g2 = f(r * (alpha + beta), s * (alpha + beta)) + f(s * alpha, s * beta) + f(r * alpha, r * beta)
        if not v == g1 == g2:
            rep = Report("regrouping", False, i, {
                "r": r, "s": s, "alpha": alpha, "beta": beta, "values": [v, g1, g2],
            })
            break
    reports.append(rep)
    return merge("verify-coboundary", reports)


# -- brute-force oracle ------------------------------------------------------


@dataclass
class GridOracleResult:
    points: list
    consistent: bool
    values: Optional[dict] = None
    kernel_dim: int = 0
    n_equations: int = 0
    witness: Optional[dict] = None

    def to_json(self) -> dict:
        out = {
            "consistent": self.consistent,
            "n_points": len(self.points),
            "n_equations": self.n_equations,
            "kernel_dim": self.kernel_dim,
        }
        if self.values is not None:
            out["values"] = [
                {"point": p.to_json(), "h": self.values[p].to_json()} for p in self.points
            ]
        if self.witness is not None:
            out["witness"] = {k: v.to_json() for k, v in self.witness.items()}
        return out


def grid_points(domain: ConeDomain, q: int) -> list[QVector]:
    """All points of ``M`` whose coordinates are multiples of ``1/q``, sorted."""
    if q < 1:
        raise ContractError("grid denominator must be positive")
    if not domain.bounded:
        raise ContractError("grid oracle needs a bounded M (cap positive on every generator)")
    bounds = []
    for j in range(domain.dim):
        b = max(abs(g[j]) / domain.cap.dot(g) for g in domain.generators)
        bounds.append(int((b * q).numerator // (b * q).denominator))
    pts = []
    for ks in itertools.product(*[range(-b, b + 1) for b in bounds]):
        x = QVector._raw([Q(k, q) for k in ks])
        if domain.in_M(x):
            pts.append(x)
    return sorted(pts)


def grid_oracle(domain: ConeDomain, f: Cocycle2, q: int) -> GridOracleResult:
    """Solve ``h(a+b) - h(a) - h(b) = f(a, b)`` on the 1/q grid of ``M``.

    Every ordered pair of grid points with grid sum contributes one
    equation.  Gauge rows ``h(0) = -z`` and ``h(u_i) = 0`` at the scaled
    generator of each independent ray are added afterwards and only where
    they remove freedom; any remaining free unknowns are set to zero.
    """
    points = grid_points(domain, q)
    if not points:
        raise ContractError("empty grid")
    index = {p: i for i, p in enumerate(points)}
    system = LinearSystem(len(points), rhs_zero=QVector.zeros(f.out_dim))
    seen = set()
    pairs = []
    for a in points:
        for b in points:
            c = a + b
            if c not in index:
                continue
            rhs = f(a, b)
            row: dict = {}
            for p, coef in ((c, 1), (a, -1), (b, -1)):
                row[index[p]] = row.get(index[p], 0) + coef
            key = (tuple(sorted(row.items())), rhs)
            if key in seen:
                continue
            seen.add(key)
            pairs.append((a, b))
            if not system.add(row, rhs):
                return GridOracleResult(points, False, n_equations=len(pairs),
                                        witness={"a": a, "b": b, "f(a,b)": rhs})
    z = f(points[0] * 0, points[0] * 0)
    system.add({index[QVector.zeros(domain.dim)]: 1}, -z, soft=True)
    basis: list[QVector] = []
    for g in domain.generators:
        if in_span(basis, g) is not None:
            continue
        basis.append(g)
        u = g * domain.scale_into_M(g)
        if u in index:
            system.add({index[u]: 1}, QVector.zeros(f.out_dim), soft=True)
    sol = system.solution()
    values = dict(zip(points, sol))
    return GridOracleResult(points, True, values, len(system.free_columns()), len(pairs))


PointFunction = Union[Mapping, Callable]


def _lookup(h: PointFunction, x):
    if callable(h) and not isinstance(h, Mapping):
        return h(x)
    try:
        return h[x]
    except KeyError:
        raise ContractError(f"point {x.to_json()} missing from mapping") from None


def grid_triples(points: Sequence[QVector]) -> list[tuple]:
    pts = set(points)
    return [(a, b, a + b) for a in points for b in points if a + b in pts]


def gauge_violation(h1: PointFunction, h2: PointFunction, triples) -> Optional[dict]:
    """First triple on which ``h1 - h2`` fails to be additive, or None."""
    for t in triples:
        a, b = t[0], t[1]
        c = t[2] if len(t) > 2 else a + b
        da = _lookup(h1, a) - _lookup(h2, a)
        db = _lookup(h1, b) - _lookup(h2, b)
        dc = _lookup(h1, c) - _lookup(h2, c)
        if dc != da + db:
            return {"a": a, "b": b, "d(a)": da, "d(b)": db, "d(a+b)": dc}
    return None


def gauge_compare(h1: PointFunction, h2: PointFunction, triples) -> bool:
    """True iff ``h1 - h2`` is additive on every ``(a, b[, a + b])`` given."""
    return gauge_violation(h1, h2, triples) is None


def sampled_triples(domain: ConeDomain, count: int, seed: int = 0,
                    max_denom: int = DEFAULT_MAX_DENOM) -> list[tuple]:
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        a, b = sample_tuple(domain, 2, rng, max_denom)
        out.append((a, b, a + b))
    return out
