"""Deterministic synthetic corpora with planted homophily.

Each topic gets a population of users; each user draws a latent stance and
six network profile sets. Profile items come from an account universe
(shared by the four account families) and a domain universe (shared by the
two domain families): with probability ``homophily`` an item is drawn from
the user's stance-community pool, otherwise from a pool common to everyone.
None-stance users draw from the common pool only. Tweets are generic-token
noise, optionally salted with a stance-indicative token with probability
``text_signal``; silent users keep full profiles but post empty texts.

Train/test splits are 70/30 by user, so no author appears on both sides.
All randomness flows from one seed: identical configs give byte-identical
output files.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import (
    CANONICAL_LABELS,
    Dataset,
    LabeledInstance,
    StanceLabel,
    UserNetworkProfile,
    write_network_profiles,
    write_semeval_tsv,
)

TRAIN_FRACTION = 0.7

ACCOUNT_FIELDS = ("in_mentions", "pn_mentions", "cn_friends", "cn_followers")
DOMAIN_FIELDS = ("in_domains", "pn_domains")

# Prior tuples follow the canonical label order: (against, favor, none).
Prior = tuple[float, float, float]


def _slug(topic: str) -> str:
    return re.sub(r"[^a-z0-9]+", "", topic.lower()) or "topic"


@dataclass(frozen=True)
class SynthConfig:
    topics: tuple[str, ...]
    users_per_topic: int = 200
    tweets_per_user: int = 3
    stance_prior: Prior = (0.4, 0.4, 0.2)
    topic_priors: Mapping[str, Prior] | None = None
    homophily: float = 0.9
    text_signal: float = 0.5
    community_pool_size: int = 60
    shared_pool_size: int = 120
    items_per_set: int = 12
    silent_fraction: float = 0.0
    tokens_per_tweet: int = 8
    generic_vocab_size: int = 200
    stance_token_count: int = 6
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.topics:
            raise ValueError("need at least one topic")
        if self.users_per_topic < 1 or self.tweets_per_user < 1:
            raise ValueError("users_per_topic and tweets_per_user must be >= 1")
        for name in ("homophily", "text_signal", "silent_fraction"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if min(self.community_pool_size, self.shared_pool_size) < 1:
            raise ValueError("pool sizes must be >= 1")
        if self.items_per_set < 1:
            raise ValueError("items_per_set must be >= 1")
        for prior in [self.stance_prior] + list((self.topic_priors or {}).values()):
            if len(prior) != 3 or any(p < 0 for p in prior) or sum(prior) <= 0:
                raise ValueError(f"invalid stance prior {prior!r}")
        if self.topic_priors:
            unknown = set(self.topic_priors) - set(self.topics)
            if unknown:
                raise ValueError(f"priors for unknown topics: {sorted(unknown)}")

    def prior_for(self, topic: str) -> np.ndarray:
        prior = (self.topic_priors or {}).get(topic, self.stance_prior)
        arr = np.asarray(prior, dtype=np.float64)
        return arr / arr.sum()


_COMMUNITY_TAG = {
    StanceLabel.FAVOR: "fav",
    StanceLabel.AGAINST: "agn",
}


def _account_pool(slug: str, tag: str, size: int) -> list[str]:
    return [f"{slug}_{tag}_acct{i:03d}" for i in range(size)]


def _domain_pool(slug: str, tag: str, size: int) -> list[str]:
    return [f"{slug}-{tag}-{i:03d}.example" for i in range(size)]


def _draw_set(
    rng: np.random.Generator,
    community_pool: Sequence[str] | None,
    shared_pool: Sequence[str],
    count: int,
    homophily: float,
) -> frozenset[str]:
    items: set[str] = set()
    from_community = (
        rng.random(count) < homophily
        if community_pool is not None
        else np.zeros(count, dtype=bool)
    )
    for take_community in from_community:
        pool = community_pool if take_community else shared_pool
        items.add(pool[int(rng.integers(len(pool)))])
    return frozenset(items)


def generate(config: SynthConfig) -> tuple[Dataset, Dataset]:
    """Generate (train, test) datasets; deterministic per config.seed."""
    rng = np.random.default_rng(config.seed)
    vocab = [f"word{i:03d}" for i in range(config.generic_vocab_size)]
    train_instances: list[LabeledInstance] = []
    test_instances: list[LabeledInstance] = []
    train_profiles: dict[str, UserNetworkProfile] = {}
    test_profiles: dict[str, UserNetworkProfile] = {}
    topics_seen: list[str] = []
    for topic in config.topics:
        slug = _slug(topic)
        topics_seen.append(topic)
        prior = config.prior_for(topic)
        account_pools = {
            tag: _account_pool(slug, tag, size)
            for tag, size in (
                ("fav", config.community_pool_size),
                ("agn", config.community_pool_size),
                ("shared", config.shared_pool_size),
            )
        }
        domain_pools = {
            tag: _domain_pool(slug, tag, size)
            for tag, size in (
                ("fav", config.community_pool_size),
                ("agn", config.community_pool_size),
                ("shared", config.shared_pool_size),
            )
        }
        stance_tokens = {
            label: [f"{slug}_{tag}_term{i}" for i in range(config.stance_token_count)]
            for label, tag in _COMMUNITY_TAG.items()
        }
        n_users = config.users_per_topic
        n_train = int(round(n_users * TRAIN_FRACTION))
        in_train = np.zeros(n_users, dtype=bool)
        in_train[rng.permutation(n_users)[:n_train]] = True
        for u in range(n_users):
            user_id = f"{slug}_u{u:04d}"
            stance = CANONICAL_LABELS[int(rng.choice(3, p=prior))]
            silent = bool(rng.random() < config.silent_fraction)
            tag = _COMMUNITY_TAG.get(stance)
            sets: dict[str, frozenset[str]] = {}
            for field in ACCOUNT_FIELDS:
                sets[field] = _draw_set(
                    rng,
                    account_pools[tag] if tag else None,
                    account_pools["shared"],
                    config.items_per_set,
                    config.homophily,
                )
            for field in DOMAIN_FIELDS:
                sets[field] = _draw_set(
                    rng,
                    domain_pools[tag] if tag else None,
                    domain_pools["shared"],
                    config.items_per_set,
                    config.homophily,
                )
            profile = UserNetworkProfile(user_id=user_id, **sets)
            instances = train_instances if in_train[u] else test_instances
            profiles = train_profiles if in_train[u] else test_profiles
            profiles[user_id] = profile
            for k in range(config.tweets_per_user):
                token_ids = rng.integers(len(vocab), size=config.tokens_per_tweet)
                tokens = [vocab[int(i)] for i in token_ids]
                if tag is not None and rng.random() < config.text_signal:
                    term = stance_tokens[stance][
                        int(rng.integers(config.stance_token_count))
                    ]
                    tokens.insert(int(rng.integers(len(tokens) + 1)), term)
                text = "" if silent else " ".join(tokens)
                instances.append(
                    LabeledInstance(
                        tweet_id=f"{user_id}-t{k}",
                        author_id=user_id,
                        topic=topic,
                        text=text,
                        label=stance,
                    )
                )
    topics = tuple(topics_seen)
    train = Dataset(tuple(train_instances), train_profiles, topics)
    test = Dataset(tuple(test_instances), test_profiles, topics)
    return train, test


def write_corpus(config: SynthConfig, out_dir: str | Path) -> dict[str, Path]:
    """Write train.tsv, test.tsv, profiles.jsonl, and manifest.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    train, test = generate(config)
    paths = {
        "train": out / "train.tsv",
        "test": out / "test.tsv",
        "profiles": out / "profiles.jsonl",
        "manifest": out / "manifest.csv",
    }
    write_semeval_tsv(paths["train"], train.instances)
    write_semeval_tsv(paths["test"], test.instances)
    all_profiles = {**train.profiles, **test.profiles}
    write_network_profiles(paths["profiles"], all_profiles)
    truth: dict[tuple[str, str], StanceLabel] = {}
    for inst in train.instances + test.instances:
        truth[(inst.topic, inst.author_id)] = inst.label
    with paths["manifest"].open("w", encoding="utf-8") as fh:
        fh.write("user_id,topic,latent_stance\n")
        for (topic, user_id), label in sorted(truth.items()):
            fh.write(f"{user_id},{topic},{label.value}\n")
    return paths
