"""Issue domains, weighted-constraint utilities, and scenario generation.

A scenario is two agents' private utility functions over a shared discrete
issue space. Each utility is a set of weighted hyper-rectangular constraints:
an offer's raw score is the sum of the values of every constraint whose
per-issue intervals it satisfies, and utilities are normalized to [0, 1] by
the exact global maximum of the raw score (found by exhaustive enumeration,
which is why domains are capped at ``ENUMERATION_CAP`` cells unless the
caller supplies ``max_raw`` explicitly).

Scenario files are JSON with canonical key order: generating, saving, and
re-loading with the same seed is byte-stable.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import (
    CapabilityError,
    ConfigError,
    GenerationError,
    OfferDomainError,
    ScenarioFormatError,
)

Offer = tuple[int, ...]

#: Hard cap on exhaustive enumeration (max_raw, Pareto front).
ENUMERATION_CAP = 10_000_000


@dataclass(frozen=True)
class IssueDomain:
    """A shared space of ``issue_count`` integer issues, each in [lower, upper]."""

    issue_count: int
    lower: int = 0
    upper: int = 9

    def __post_init__(self):
        if self.issue_count < 1:
            raise ConfigError(f"issue_count must be >= 1, got {self.issue_count}")
        if self.upper <= self.lower:
            raise ConfigError(
                f"domain needs upper > lower, got [{self.lower}, {self.upper}]"
            )

    @property
    def size(self) -> int:
        """Values per issue."""
        return self.upper - self.lower + 1

    @property
    def width(self) -> int:
        """Span of one issue (used to normalize distances)."""
        return self.upper - self.lower

    @property
    def cardinality(self) -> int:
        return self.size ** self.issue_count

    def contains(self, offer: Sequence[int]) -> bool:
        if len(offer) != self.issue_count:
            return False
        return all(self.lower <= v <= self.upper for v in offer)

    def check_offer(self, offer: Sequence[int]) -> Offer:
        """Validate and canonicalize an offer, or raise ``OfferDomainError``."""
        if len(offer) != self.issue_count:
            raise OfferDomainError(
                f"offer has {len(offer)} issues, domain has {self.issue_count}"
            )
        out = tuple(int(v) for v in offer)
        for i, v in enumerate(out):
            if not self.lower <= v <= self.upper:
                raise OfferDomainError(
                    f"issue {i} value {v} outside [{self.lower}, {self.upper}]"
                )
        return out

    def offer_from_flat(self, flat: int) -> Offer:
        """Offer at position ``flat`` of the C-order (lexicographic) grid."""
        digits = []
        rem = int(flat)
        for _ in range(self.issue_count):
            digits.append(self.lower + rem % self.size)
            rem //= self.size
        return tuple(reversed(digits))


@dataclass(frozen=True)
class Constraint:
    """One weighted box constraint.

    ``bounds`` has one entry per issue: an (lo, hi) pair, or None when the
    constraint does not mention that issue. ``value`` is the (real, >= 0)
    weight added to the raw score when every mentioned interval is satisfied.
    """

    bounds: tuple[Optional[tuple[int, int]], ...]
    value: float

    def __post_init__(self):
        if not any(b is not None for b in self.bounds):
            raise ConfigError("constraint mentions no issues")
        for i, b in enumerate(self.bounds):
            if b is not None and b[0] > b[1]:
                raise ConfigError(
                    f"bounds[{i}]: lower {b[0]} exceeds upper {b[1]}"
                )
        if self.value < 0:
            raise ConfigError(f"constraint value must be >= 0, got {self.value}")

    @property
    def cardinality(self) -> int:
        """Number of issues the constraint mentions (its arity)."""
        return sum(1 for b in self.bounds if b is not None)

    def satisfied(self, offer: Sequence[int]) -> bool:
        return all(
            b is None or (b[0] <= v <= b[1]) for b, v in zip(self.bounds, offer)
        )


class WeightedConstraintUtility:
    """Sum-of-satisfied-constraint-values utility, normalized by ``max_raw``.

    ``max_raw`` may be given (it is stored in scenario files); when omitted it
    is computed exactly by enumerating the whole grid, provided the domain is
    within ``ENUMERATION_CAP``.
    """

    def __init__(self, domain: IssueDomain,
                 constraints: Sequence[Constraint],
                 max_raw: float | None = None):
        if not constraints:
            raise ConfigError("utility needs at least one constraint")
        for c in constraints:
            if len(c.bounds) != domain.issue_count:
                raise ConfigError(
                    f"constraint bounds cover {len(c.bounds)} issues, "
                    f"domain has {domain.issue_count}"
                )
        self.domain = domain
        self.constraints = tuple(constraints)
        if max_raw is None:
            max_raw = float(self.raw_grid().max())
        if max_raw <= 0:
            raise ConfigError(f"max_raw must be > 0, got {max_raw}")
        self.max_raw = float(max_raw)

    # -- dense constraint table (absent interval == full domain) ------------

    @cached_property
    def _table(self):
        n = self.domain.issue_count
        L = len(self.constraints)
        lo = np.empty((L, n), dtype=np.int64)
        hi = np.empty((L, n), dtype=np.int64)
        values = np.empty(L, dtype=np.float64)
        for l, c in enumerate(self.constraints):
            values[l] = c.value
            for i, b in enumerate(c.bounds):
                if b is None:
                    lo[l, i] = self.domain.lower
                    hi[l, i] = self.domain.upper
                else:
                    lo[l, i], hi[l, i] = b
        return lo, hi, values

    # -- scoring ------------------------------------------------------------

    def raw_value(self, offer: Sequence[int]) -> float:
        offer = self.domain.check_offer(offer)
        lo, hi, values = self._table
        return float(kernels.eval_batch(
            np.asarray([offer], dtype=np.int64), lo, hi, values)[0])

    def evaluate(self, offer: Sequence[int]) -> float:
        """Normalized utility in [0, 1]."""
        return self.raw_value(offer) / self.max_raw

    def raw_many(self, offers: np.ndarray) -> np.ndarray:
        """Raw scores for an (n, issue_count) int array. No per-row validation."""
        lo, hi, values = self._table
        return kernels.eval_batch(offers, lo, hi, values)

    def evaluate_many(self, offers: np.ndarray) -> np.ndarray:
        return self.raw_many(offers) / self.max_raw

    def raw_grid(self) -> np.ndarray:
        """Raw score of every offer, flat in C (lexicographic) order."""
        if self.domain.cardinality > ENUMERATION_CAP:
            raise CapabilityError(
                f"domain has {self.domain.cardinality} offers, over the "
                f"exhaustive-enumeration cap of {ENUMERATION_CAP}; "
                "pass max_raw explicitly to skip the exact normalization"
            )
        lo, hi, values = self._table
        return kernels.raw_grid(lo, hi, values, self.domain.issue_count,
                                self.domain.lower, self.domain.upper)


@dataclass(frozen=True)
class ScenarioSpec:
    """Knobs for random scenario generation.

    Per agent and per constraint arity n in 1..issue_count,
    ``constraints_per_cardinality`` constraints are drawn: n distinct issues,
    an interval of span ``width_range`` per chosen issue placed uniformly, and
    a value uniform on [0, value_range_scale * n].
    """

    issue_count: int
    constraints_per_cardinality: int = 5
    value_range_scale: float = 100.0
    width_range: tuple[int, int] = (2, 4)
    lower: int = 0
    upper: int = 9
    seed: Optional[int] = None

    def __post_init__(self):
        if self.constraints_per_cardinality < 1:
            raise ConfigError("constraints_per_cardinality must be >= 1")
        if self.value_range_scale <= 0:
            raise ConfigError("value_range_scale must be > 0")
        w_lo, w_hi = self.width_range
        if not (1 <= w_lo <= w_hi):
            raise ConfigError(f"bad width_range {self.width_range}")

    @property
    def domain(self) -> IssueDomain:
        return IssueDomain(self.issue_count, self.lower, self.upper)


@dataclass(frozen=True)
class Scenario:
    """Two private utilities over one shared domain."""

    domain: IssueDomain
    agent_a: WeightedConstraintUtility
    agent_b: WeightedConstraintUtility
    seed: Optional[int] = None

    @property
    def utilities(self) -> tuple[WeightedConstraintUtility, WeightedConstraintUtility]:
        return (self.agent_a, self.agent_b)


def _draw_constraints(rng: np.random.Generator, spec: ScenarioSpec):
    """One agent's constraint set, in a fixed documented draw order.

    For each arity n (ascending), then each of the constraints_per_cardinality
    constraints: issue subset (without replacement, then sorted), then per
    chosen issue a width and a placement, then the value.
    """
    domain = spec.domain
    span = domain.upper - domain.lower
    w_lo, w_hi = spec.width_range
    if w_hi > span:
        raise GenerationError(
            f"constraint width up to {w_hi} exceeds domain span {span}"
        )
    constraints = []
    for n in range(1, spec.issue_count + 1):
        for _ in range(spec.constraints_per_cardinality):
            issues = np.sort(rng.choice(spec.issue_count, size=n, replace=False))
            bounds: list[Optional[tuple[int, int]]] = [None] * spec.issue_count
            for issue in issues:
                width = int(rng.integers(w_lo, w_hi + 1))
                start = int(rng.integers(domain.lower, domain.upper - width + 1))
                bounds[int(issue)] = (start, start + width)
            value = float(rng.uniform(0.0, spec.value_range_scale * n))
            constraints.append(Constraint(tuple(bounds), value))
    return constraints


def generate_scenario(spec: ScenarioSpec) -> Scenario:
    """Draw both agents' utilities (agent a first, then agent b)."""
    rng = np.random.default_rng(spec.seed)
    domain = spec.domain
    agent_a = WeightedConstraintUtility(domain, _draw_constraints(rng, spec))
    agent_b = WeightedConstraintUtility(domain, _draw_constraints(rng, spec))
    return Scenario(domain, agent_a, agent_b, seed=spec.seed)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _scenario_payload(scenario: Scenario) -> dict:
    def agent(u: WeightedConstraintUtility) -> dict:
        return {
            "max_raw": u.max_raw,
            "constraints": [
                {
                    "bounds": [list(b) if b is not None else None
                               for b in c.bounds],
                    "value": c.value,
                }
                for c in u.constraints
            ],
        }

    return {
        "domain": {
            "issue_count": scenario.domain.issue_count,
            "lower": scenario.domain.lower,
            "upper": scenario.domain.upper,
        },
        "agents": [agent(scenario.agent_a), agent(scenario.agent_b)],
        "seed": scenario.seed,
    }


def dumps_scenario(scenario: Scenario) -> str:
    """Canonical JSON text (sorted keys, 2-space indent, trailing newline)."""
    return json.dumps(_scenario_payload(scenario), sort_keys=True, indent=2) + "\n"


def save_scenario(scenario: Scenario, path) -> None:
    Path(path).write_text(dumps_scenario(scenario))


def _require(mapping, key, kind, where):
    if not isinstance(mapping, dict) or key not in mapping:
        raise ScenarioFormatError(f"{where}: missing {key!r}")
    value = mapping[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ScenarioFormatError(f"{where}.{key}: expected a number")
        return float(value)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ScenarioFormatError(f"{where}.{key}: expected {kind.__name__}")
    return value


def _parse_agent(payload, domain: IssueDomain, where: str) -> WeightedConstraintUtility:
    raw_constraints = _require(payload, "constraints", list, where)
    constraints = []
    for j, item in enumerate(raw_constraints):
        c_where = f"{where}.constraints[{j}]"
        bounds_raw = _require(item, "bounds", list, c_where)
        if len(bounds_raw) != domain.issue_count:
            raise ScenarioFormatError(
                f"{c_where}.bounds: {len(bounds_raw)} entries for "
                f"{domain.issue_count} issues"
            )
        bounds: list[Optional[tuple[int, int]]] = []
        for i, b in enumerate(bounds_raw):
            if b is None:
                bounds.append(None)
                continue
            if (not isinstance(b, list) or len(b) != 2
                    or not all(isinstance(v, int) for v in b)):
                raise ScenarioFormatError(
                    f"{c_where}.bounds[{i}]: expected [lo, hi] or null"
                )
            lo, hi = b
            if lo > hi:
                raise ScenarioFormatError(
                    f"{c_where}.bounds[{i}]: lower {lo} exceeds upper {hi}"
                )
            if lo < domain.lower or hi > domain.upper:
                raise ScenarioFormatError(
                    f"{c_where}.bounds[{i}]: [{lo}, {hi}] outside domain "
                    f"[{domain.lower}, {domain.upper}]"
                )
            bounds.append((lo, hi))
        value = _require(item, "value", float, c_where)
        if value < 0:
            raise ScenarioFormatError(f"{c_where}.value: negative value {value}")
        try:
            constraints.append(Constraint(tuple(bounds), value))
        except ConfigError as exc:
            raise ScenarioFormatError(f"{c_where}: {exc}") from exc

    max_raw = payload.get("max_raw") if isinstance(payload, dict) else None
    if max_raw is None:
        warnings.warn(
            f"{where}: max_raw missing, recomputing by exhaustive enumeration",
            stacklevel=3,
        )
    else:
        max_raw = _require(payload, "max_raw", float, where)
    try:
        return WeightedConstraintUtility(domain, constraints, max_raw=max_raw)
    except ConfigError as exc:
        raise ScenarioFormatError(f"{where}: {exc}") from exc


def loads_scenario(text: str) -> Scenario:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(
            f"not valid JSON (line {exc.lineno}, column {exc.colno}): {exc.msg}"
        ) from exc
    dom = _require(payload, "domain", dict, "$")
    try:
        domain = IssueDomain(
            _require(dom, "issue_count", int, "$.domain"),
            _require(dom, "lower", int, "$.domain"),
            _require(dom, "upper", int, "$.domain"),
        )
    except ConfigError as exc:
        raise ScenarioFormatError(f"$.domain: {exc}") from exc
    agents = _require(payload, "agents", list, "$")
    if len(agents) != 2:
        raise ScenarioFormatError(f"$.agents: expected 2 agents, got {len(agents)}")
    agent_a = _parse_agent(agents[0], domain, "$.agents[0]")
    agent_b = _parse_agent(agents[1], domain, "$.agents[1]")
    seed = payload.get("seed")
    if seed is not None and not isinstance(seed, int):
        raise ScenarioFormatError("$.seed: expected an integer or null")
    return Scenario(domain, agent_a, agent_b, seed=seed)


def load_scenario(path) -> Scenario:
    return loads_scenario(Path(path).read_text())
