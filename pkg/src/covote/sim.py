"""Desk-scale behavioral and protocol simulation.

A logistic utility drives each synthetic voter's decision to register
as a secret holder; a per-voter reliability parameter drives whether
they release their key on time.  Scenario runs can stop at the
behavioral layer (opt-in and release sampling only) or execute the full
protocol: identifiers, registration, freezing, encrypted ballots,
releases, tally, and a plaintext cross-check.

Everything is a pure function of (config, seed).
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field, replace
from typing import Any

from .ballots import BallotFormat, encode_choice
from .encoding import canonical_json
from .errors import ConfigError
from .group import DeterministicRandomness, keygen
from .hashing import HashSuite
from .identifiers import eligibility_digests, issue_identifiers
from .ledger import Ledger, SessionConfig, ThresholdPolicy
from .tally import DEFAULT_RULES, RULE_FORMATS, VALID, DecryptedBallot, apply_rule, tally_ledger
from .timed_release import encrypt_ballot

FACTORS = ("reward", "goodwill", "obligation", "deposit")

# fitted logistic coefficients: goodwill and reward encourage opting in,
# obligation and deposit discourage it
DEFAULT_WEIGHTS = {
    "reward": 0.35,
    "goodwill": 0.88,
    "obligation": -0.1174,
    "deposit": -0.3463,
}


def sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def logit(p: float) -> float:
    if not 0 < p < 1:
        raise ConfigError("rate must be strictly between 0 and 1")
    return math.log(p / (1.0 - p))


@dataclass(frozen=True)
class OptInModel:
    reward: float = DEFAULT_WEIGHTS["reward"]
    goodwill: float = DEFAULT_WEIGHTS["goodwill"]
    obligation: float = DEFAULT_WEIGHTS["obligation"]
    deposit: float = DEFAULT_WEIGHTS["deposit"]
    intercept: float = 0.0

    def weight(self, factor: str) -> float:
        return getattr(self, factor)

    def to_json(self) -> dict:
        return {f: getattr(self, f) for f in FACTORS} | {"intercept": self.intercept}

    @classmethod
    def from_json(cls, data: dict) -> "OptInModel":
        return cls(**{k: data[k] for k in (*FACTORS, "intercept") if k in data})


@dataclass(frozen=True)
class VoterProfile:
    reward: float
    goodwill: float
    obligation: float
    deposit: float
    release_reliability: float = 1.0

    def __post_init__(self):
        for factor in FACTORS:
            if not 0.0 <= getattr(self, factor) <= 1.0:
                raise ConfigError(f"{factor} score must be in [0, 1]")
        if not 0.0 <= self.release_reliability <= 1.0:
            raise ConfigError("release_reliability must be in [0, 1]")

    def score(self, factor: str) -> float:
        return getattr(self, factor)


def opt_in_probability(model: OptInModel, profile: VoterProfile) -> float:
    z = model.intercept + sum(model.weight(f) * profile.score(f) for f in FACTORS)
    return sigmoid(z)


def calibrate_intercept(model: OptInModel, profile: VoterProfile, target_rate: float) -> OptInModel:
    """Intercept such that this profile opts in at target_rate."""
    z = sum(model.weight(f) * profile.score(f) for f in FACTORS)
    return replace(model, intercept=logit(target_rate) - z)


def saturation(tokens: int, half: float) -> float:
    """Map a non-negative token amount into [0, 1); half gives 0.5."""
    if tokens < 0:
        raise ConfigError("token amounts must be non-negative")
    if half <= 0:
        raise ConfigError("saturation half-point must be positive")
    return tokens / (tokens + half)


Bound = float | tuple[float, float]


@dataclass(frozen=True)
class ProfileDistribution:
    """Per-factor sampling spec: a fixed value or a uniform [lo, hi] pair."""

    reward: Bound = 0.5
    goodwill: Bound = 0.5
    obligation: Bound = 0.5
    deposit: Bound = 0.5
    release_reliability: Bound = 1.0

    def sample(self, rng: random.Random) -> VoterProfile:
        def draw(bound: Bound) -> float:
            if isinstance(bound, (int, float)):
                return float(bound)
            lo, hi = bound
            return rng.uniform(lo, hi)

        return VoterProfile(
            reward=draw(self.reward),
            goodwill=draw(self.goodwill),
            obligation=draw(self.obligation),
            deposit=draw(self.deposit),
            release_reliability=draw(self.release_reliability),
        )

    def to_json(self) -> dict:
        def enc(b: Bound):
            return list(b) if isinstance(b, tuple) else b

        return {
            "reward": enc(self.reward),
            "goodwill": enc(self.goodwill),
            "obligation": enc(self.obligation),
            "deposit": enc(self.deposit),
            "release_reliability": enc(self.release_reliability),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ProfileDistribution":
        def dec(v):
            return tuple(v) if isinstance(v, list) else v

        return cls(**{k: dec(v) for k, v in data.items()})


@dataclass(frozen=True)
class ScenarioConfig:
    population: int
    model: OptInModel = field(default_factory=OptInModel)
    profiles: ProfileDistribution = field(default_factory=ProfileDistribution)
    threshold_policy: ThresholdPolicy = field(default_factory=lambda: ThresholdPolicy(fraction=0.5))
    deposit: int = 0
    reward: int = 0
    reward_half: float = 10.0
    deposit_half: float = 10.0
    ballot_format: BallotFormat = field(
        default_factory=lambda: BallotFormat(kind="single_choice", options=("A", "B", "C"))
    )
    rule: str | None = None
    protocol: str = "full"  # "full" | "behavioral"

    def __post_init__(self):
        if self.population < 1:
            raise ConfigError("population must be at least 1")
        if self.protocol not in ("full", "behavioral"):
            raise ConfigError("protocol must be 'full' or 'behavioral'")
        if self.rule is not None and RULE_FORMATS.get(self.rule) != self.ballot_format.kind:
            raise ConfigError(
                f"rule {self.rule!r} does not apply to {self.ballot_format.kind!r} ballots"
            )

    def effective_profile(self, profile: VoterProfile) -> VoterProfile:
        """Session incentives scale the reward and deposit inputs; zero
        tokens mean the factor exerts no pull either way."""
        return replace(
            profile,
            reward=profile.reward * saturation(self.reward, self.reward_half),
            deposit=profile.deposit * saturation(self.deposit, self.deposit_half),
        )

    def to_json(self) -> dict:
        return {
            "population": self.population,
            "model": self.model.to_json(),
            "profiles": self.profiles.to_json(),
            "threshold_policy": self.threshold_policy.to_json(),
            "incentives": {"deposit": self.deposit, "reward": self.reward},
            "incentive_scaling": {"reward_half": self.reward_half, "deposit_half": self.deposit_half},
            "ballot_format": self.ballot_format.to_json(),
            "rule": self.rule,
            "protocol": self.protocol,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ScenarioConfig":
        incentives = data.get("incentives", {})
        scaling = data.get("incentive_scaling", {})
        return cls(
            population=data["population"],
            model=OptInModel.from_json(data.get("model", {})),
            profiles=ProfileDistribution.from_json(data.get("profiles", {})),
            threshold_policy=ThresholdPolicy.from_json(
                data.get("threshold_policy", {"fraction": 0.5})
            ),
            deposit=incentives.get("deposit", 0),
            reward=incentives.get("reward", 0),
            reward_half=scaling.get("reward_half", 10.0),
            deposit_half=scaling.get("deposit_half", 10.0),
            ballot_format=BallotFormat.from_json(
                data.get("ballot_format", {"kind": "single_choice", "options": ["A", "B", "C"]})
            ),
            rule=data.get("rule"),
            protocol=data.get("protocol", "full"),
        )


@dataclass
class ScenarioReport:
    population: int
    opted_in: int
    resolved_t: int | None
    releases: int
    threshold_met: bool
    aborted: bool
    tally: dict | None
    reference: dict | None
    seed: str

    def to_json(self) -> dict:
        return {
            "population": self.population,
            "opted_in": self.opted_in,
            "resolved_t": self.resolved_t,
            "releases": self.releases,
            "threshold_met": self.threshold_met,
            "aborted": self.aborted,
            "tally": self.tally,
            "reference": self.reference,
            "seed": self.seed,
        }


def _substream(seed: int | str, label: str) -> int:
    digest = hashlib.sha256(f"{seed}/{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass
class _Behavior:
    profiles: list[VoterProfile]
    opted_in: list[int]  # voter positions, in registration order
    releasers: list[int]  # subset of opted_in that shows up on time
    choices: list[Any]  # one choice per voter, in voter order
    resolved_t: int | None
    aborted: bool

    @property
    def threshold_met(self) -> bool:
        return self.resolved_t is not None and len(self.releasers) >= self.resolved_t


def _sample_choice(fmt: BallotFormat, rng: random.Random) -> Any:
    if fmt.kind == "single_choice":
        return rng.choice(fmt.options)
    if fmt.kind == "approval":
        return sorted(o for o in fmt.options if rng.random() < 0.5)
    if fmt.kind == "ranked":
        return rng.sample(list(fmt.options), len(fmt.options))
    lo, hi = fmt.numeric_range
    return rng.randint(lo, hi)


def _sample_behavior(config: ScenarioConfig, seed: int | str) -> _Behavior:
    """Fixed draw order (profiles, opt-in, release, choices) so matched
    seeds stay matched when only incentives or thresholds change."""
    rng = random.Random(_substream(seed, "behavior"))
    profiles = [config.profiles.sample(rng) for _ in range(config.population)]
    effective = [config.effective_profile(p) for p in profiles]
    probabilities = [opt_in_probability(config.model, p) for p in effective]
    opt_draws = [rng.random() for _ in range(config.population)]
    release_draws = [rng.random() for _ in range(config.population)]
    choices = [_sample_choice(config.ballot_format, rng) for _ in range(config.population)]

    opted_in = [v for v in range(config.population) if opt_draws[v] < probabilities[v]]
    releasers = [v for v in opted_in if release_draws[v] < profiles[v].release_reliability]

    n = len(opted_in)
    resolved_t: int | None = None
    aborted = True
    if n > 0:
        t = config.threshold_policy.resolve(n)
        if 1 <= t <= n:
            resolved_t = t
            aborted = False
    return _Behavior(
        profiles=profiles,
        opted_in=opted_in,
        releasers=releasers,
        choices=choices,
        resolved_t=resolved_t,
        aborted=aborted,
    )


def reference_tally(choices: list[tuple[int, Any]], fmt: BallotFormat, rule: str) -> dict:
    """Plaintext-side reference: last choice per voter wins, then the
    rule is applied.  No cryptography anywhere on this path."""
    latest: dict[int, Any] = {}
    for voter, choice in choices:
        latest[voter] = choice
    ballots = [
        DecryptedBallot(seq=i + 1, received_at=0, validity=VALID, choice=choice)
        for i, (_, choice) in enumerate(sorted(latest.items()))
    ]
    result = apply_rule(rule, ballots, fmt)
    return {"aggregates": result.aggregates, "winners": list(result.winners)}


def run_scenario(config: ScenarioConfig, seed: int | str) -> ScenarioReport:
    """Sample behavior, then (in full mode) drive the real protocol end
    to end; deterministic given (config, seed)."""
    behavior = _sample_behavior(config, seed)
    report = ScenarioReport(
        population=config.population,
        opted_in=len(behavior.opted_in),
        resolved_t=behavior.resolved_t,
        releases=len(behavior.releasers),
        threshold_met=behavior.threshold_met,
        aborted=behavior.aborted,
        tally=None,
        reference=None,
        seed=str(seed),
    )
    if config.protocol == "behavioral":
        return report

    rule = config.rule or DEFAULT_RULES[config.ballot_format.kind]
    crypto_rng = DeterministicRandomness(f"{seed}/crypto")
    suite = HashSuite()
    session_config = SessionConfig(
        session_id=f"sim-{_substream(seed, 'session-id'):016x}",
        registration_window=(10, 20),
        voting_window=(20, 30),
        release_deadline=40,
        threshold_policy=config.threshold_policy,
        ballot_format=config.ballot_format,
        deposit=config.deposit,
        reward=config.reward,
    )
    batch = issue_identifiers(config.population, crypto_rng, suite)
    ledger = Ledger.create(session_config, batch.eligibility)

    holder_index: dict[int, tuple[int, Any]] = {}
    for voter in behavior.opted_in:
        pair = keygen(crypto_rng)
        once = eligibility_digests(batch.identifiers[voter], suite).once
        index = ledger.register_holder(once, pair.pk, 10)
        holder_index[voter] = (index, pair)

    if behavior.aborted:
        return report

    n, t = ledger.freeze_holder_set(20)
    assert (n, t) == (len(behavior.opted_in), behavior.resolved_t)

    holder_pks = ledger.state.holder_pks()
    for voter in range(config.population):
        payload = encode_choice(config.ballot_format, behavior.choices[voter])
        ballot = encrypt_ballot(
            payload, batch.identifiers[voter], holder_pks, t,
            session_config.session_id, crypto_rng, suite,
        )
        ledger.submit_ballot(ballot, 21)

    for voter in behavior.releasers:
        index, pair = holder_index[voter]
        ledger.release_key(index, pair.sk, 30)

    if report.threshold_met:
        transcript = tally_ledger(ledger, rule=rule)
        report.tally = {
            "aggregates": transcript["result"]["aggregates"],
            "winners": transcript["result"]["winners"],
            "validity_counts": transcript["result"]["validity_counts"],
        }
        report.reference = reference_tally(
            [(v, behavior.choices[v]) for v in range(config.population)],
            config.ballot_format,
            rule,
        )
    return report


def sweep(
    base_config: ScenarioConfig,
    deposits: list[int],
    rewards: list[int],
    fractions: list[float],
    runs: int,
    seed: int | str,
) -> list[dict]:
    """Monte-Carlo threshold-success frequency per (deposit, reward, phi)
    cell; run seeds are shared across cells so comparisons are matched."""
    if not deposits or not rewards or not fractions or runs < 1:
        raise ConfigError("sweep grid must be non-empty and runs >= 1")
    rows = []
    for deposit in deposits:
        for reward in rewards:
            for phi in fractions:
                cell = replace(
                    base_config,
                    deposit=deposit,
                    reward=reward,
                    threshold_policy=ThresholdPolicy(fraction=phi),
                    protocol="behavioral",
                )
                successes = sum(
                    run_scenario(cell, seed=f"{seed}/run-{j}").threshold_met
                    for j in range(runs)
                )
                rows.append(
                    {
                        "deposit": deposit,
                        "reward": reward,
                        "phi": phi,
                        "success_rate": successes / runs,
                        "runs": runs,
                    }
                )
    return rows


def sweep_csv(rows: list[dict]) -> str:
    lines = ["deposit,reward,phi,success_rate,runs"]
    for row in rows:
        lines.append(
            f"{row['deposit']},{row['reward']},{row['phi']},{row['success_rate']},{row['runs']}"
        )
    return "\n".join(lines) + "\n"
