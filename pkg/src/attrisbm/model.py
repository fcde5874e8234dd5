"""Model parameters for the stochastic block model with categorical node attributes.

A model is specified by the node count ``n``, the community count ``K``, the
attribute-category count ``R``, per-category group sizes ``n_r``, a prior
``q[k][r]`` (probability of community k given attribute category r), and a
rescaled affinity matrix ``c`` of shape (K*R, K*R): ``c`` is n times the
Bernoulli edge probability between two (community, attribute) cells.

Conventions: community/attribute indices are 0-based everywhere in code and
1-based in file formats and CLI output; the flat cell index of (k, r) is
``k * R + r``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConstraintViolation, ModelError


@dataclass(frozen=True)
class AttributeEncoder:
    """Bijection between m raw categorical attributes and one category index.

    The map is mixed-radix, row-major: the last raw attribute varies fastest.
    Raw values and the encoded index are 1-based, matching the file formats.
    """

    cardinalities: tuple[int, ...]

    def __post_init__(self):
        cards = tuple(int(c) for c in self.cardinalities)
        if len(cards) == 0:
            raise ConstraintViolation("need at least one attribute dimension")
        if any(c < 1 for c in cards):
            raise ConstraintViolation(f"cardinalities must be positive, got {cards}")
        object.__setattr__(self, "cardinalities", cards)

    @property
    def R(self) -> int:
        out = 1
        for c in self.cardinalities:
            out *= c
        return out

    def encode(self, raw) -> int:
        raw = tuple(int(x) for x in raw)
        if len(raw) != len(self.cardinalities):
            raise ModelError(
                f"expected {len(self.cardinalities)} raw attributes, got {len(raw)}"
            )
        r = 0
        for pos, (x, card) in enumerate(zip(raw, self.cardinalities)):
            if not 1 <= x <= card:
                raise ModelError(
                    f"raw attribute at position {pos} out of range: "
                    f"got {x}, valid range 1..{card}"
                )
            r = r * card + (x - 1)
        return r + 1

    def decode(self, r: int) -> tuple[int, ...]:
        r = int(r)
        if not 1 <= r <= self.R:
            raise ModelError(f"category index {r} out of range 1..{self.R}")
        rem = r - 1
        out = []
        for card in reversed(self.cardinalities):
            out.append(rem % card + 1)
            rem //= card
        return tuple(reversed(out))


def encode_attributes(raw, enc: AttributeEncoder) -> int:
    """Encode a tuple of 1-based raw categories into the 1-based category index."""
    return enc.encode(raw)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ModelParams:
    """Full parameter set of the attributed block model.

    ``affinity[(k1*R + r1), (k2*R + r2)]`` holds the rescaled value
    n * P((k1,r1),(k2,r2)); it must be symmetric with entries in [0, n].
    ``prior`` columns (one per attribute category) must each sum to 1.
    """

    n: int
    K: int
    R: int
    group_sizes: np.ndarray
    prior: np.ndarray
    affinity: np.ndarray

    def __post_init__(self):
        n, K, R = int(self.n), int(self.K), int(self.R)
        if n < 1 or K < 1 or R < 1:
            raise ConstraintViolation(f"n, K, R must be positive, got {(n, K, R)}")
        sizes = np.asarray(self.group_sizes, dtype=np.int64)
        prior = np.asarray(self.prior, dtype=np.float64)
        aff = np.asarray(self.affinity, dtype=np.float64)
        if sizes.shape != (R,):
            raise ConstraintViolation(f"group_sizes must have shape ({R},)")
        if sizes.min(initial=0) < 0 or sizes.sum() != n:
            raise ConstraintViolation(
                f"group sizes must be nonnegative and sum to n={n}, got {sizes.tolist()}"
            )
        if prior.shape != (K, R):
            raise ConstraintViolation(f"prior must have shape ({K}, {R})")
        if prior.min() < 0:
            raise ConstraintViolation("prior entries must be nonnegative")
        colsums = prior.sum(axis=0)
        if not np.allclose(colsums, 1.0, rtol=0, atol=1e-9):
            raise ConstraintViolation(
                f"each prior column must sum to 1, got sums {colsums.tolist()}"
            )
        if aff.shape != (K * R, K * R):
            raise ConstraintViolation(f"affinity must have shape ({K * R}, {K * R})")
        if not np.allclose(aff, aff.T, rtol=0, atol=1e-12):
            raise ConstraintViolation("affinity must be symmetric in its (k, r) cells")
        if aff.min() < 0 or aff.max() > n:
            raise ConstraintViolation(
                f"affinity entries must lie in [0, n={n}], got range "
                f"[{aff.min()}, {aff.max()}]"
            )
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "group_sizes", _frozen(sizes))
        object.__setattr__(self, "prior", _frozen(prior))
        object.__setattr__(self, "affinity", _frozen(aff))

    def cell(self, k: int, r: int) -> int:
        return k * self.R + r

    def affinity_4d(self) -> np.ndarray:
        """Affinity reshaped to [k1, r1, k2, r2]."""
        K, R = self.K, self.R
        return self.affinity.reshape(K, R, K, R)

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "K": self.K,
                "R": self.R,
                "group_sizes": self.group_sizes.tolist(),
                "prior": self.prior.tolist(),
                "affinity": self.affinity.tolist(),
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "ModelParams":
        doc = json.loads(text)
        if "symmetric" in doc:
            sym = doc["symmetric"]
            return expand_symmetric(
                SymmetricSpec(
                    K=sym["K"], R=sym["R"], a=sym["a"], b=sym["b"], c=sym["c"], n=sym["n"]
                )
            )
        return cls(
            n=doc["n"],
            K=doc["K"],
            R=doc["R"],
            group_sizes=np.asarray(doc["group_sizes"]),
            prior=np.asarray(doc["prior"]),
            affinity=np.asarray(doc["affinity"]),
        )


@dataclass(frozen=True)
class SymmetricSpec:
    """Symmetric model: affinity a within a (community, attribute) cell, b within
    a community across attributes, c across communities; uniform prior and equal
    group sizes. Requires a >= b >= c >= 0 and R | n."""

    K: int
    R: int
    a: float
    b: float
    c: float
    n: int

    def __post_init__(self):
        K, R, n = int(self.K), int(self.R), int(self.n)
        a, b, c = float(self.a), float(self.b), float(self.c)
        if K < 1 or R < 1 or n < 1:
            raise ConstraintViolation(f"K, R, n must be positive, got {(K, R, n)}")
        if c < 0:
            raise ConstraintViolation(f"affinities must be nonnegative, got c={c}")
        if not a >= b >= c:
            raise ConstraintViolation(f"need a >= b >= c, got a={a}, b={b}, c={c}")
        if n % R != 0:
            raise ModelError(f"n={n} must be divisible by R={R} for equal group sizes")
        for name, v in (("a", a), ("b", b), ("c", c)):
            if v > n:
                raise ConstraintViolation(f"{name}={v} exceeds n={n}; probability > 1")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)


def expand_symmetric(spec: SymmetricSpec) -> ModelParams:
    """Expand a symmetric spec into explicit ModelParams."""
    K, R = spec.K, spec.R
    aff = np.full((K * R, K * R), spec.c)
    for k in range(K):
        block = slice(k * R, (k + 1) * R)
        aff[block, block] = spec.b
        for r in range(R):
            aff[k * R + r, k * R + r] = spec.a
    prior = np.full((K, R), 1.0 / K)
    sizes = np.full(R, spec.n // R, dtype=np.int64)
    return ModelParams(n=spec.n, K=K, R=R, group_sizes=sizes, prior=prior, affinity=aff)


def average_degree(params: ModelParams) -> float:
    """Expected average degree: twice the expected edge count over n.

    Cell populations are taken in expectation over the prior, so for the
    symmetric K=2, R=2 model this is exactly (a + b + 2c) / 4.
    """
    pop = (params.prior * params.group_sizes[None, :]).reshape(params.K * params.R)
    return float(pop @ params.affinity @ pop) / params.n**2


def check_equal_degree(params: ModelParams, tol: float = 1e-9) -> bool:
    """True iff, for every attribute pair (a, b), the aggregated degree
    (n_b / (n K)) * sum_k2 c[(k1,a),(k2,b)] does not depend on k1 within tol."""
    aff4 = params.affinity_4d()
    # sums[k1, a, b] = sum over k2 of c[(k1, a), (k2, b)]
    sums = aff4.sum(axis=2)
    scaled = sums * (params.group_sizes[None, None, :] / (params.n * params.K))
    spread = scaled.max(axis=0) - scaled.min(axis=0)
    return bool(spread.max() <= tol)


def aggregated_degrees(params: ModelParams) -> np.ndarray:
    """R x R matrix of aggregated degrees c_ab (assumes check_equal_degree)."""
    aff4 = params.affinity_4d()
    sums = aff4[0].sum(axis=1)  # [a, b]: sum over k2 with k1 = 0
    return sums * (params.group_sizes[None, :] / (params.n * params.K))


def resolve_abc(
    eta: float, epsilon: float, avg_degree: float, K: int, R: int
) -> tuple[float, float, float]:
    """Solve for (a, b, c) with a = eta*b, c = epsilon*b at the given average degree.

    The symmetric model's average degree is (a + (R-1)b + (K-1)Rc) / (KR), so
    b = KR * avg_degree / (eta + R - 1 + (K-1)R*epsilon). For K=2, R=2 this is
    the constraint a + b + 2c = 4 * avg_degree.
    """
    if eta < 1:
        raise ConstraintViolation(f"eta must be >= 1 (a >= b), got {eta}")
    if not 0 <= epsilon <= 1:
        raise ConstraintViolation(f"epsilon must lie in [0, 1] (b >= c >= 0), got {epsilon}")
    if avg_degree <= 0:
        raise ConstraintViolation(f"average degree must be positive, got {avg_degree}")
    b = K * R * avg_degree / (eta + (R - 1) + (K - 1) * R * epsilon)
    return eta * b, b, epsilon * b
