"""Corpus ingestion: labeled tweets, user network profiles, and their join.

Two file formats are owned by this module:

* Tweets file: UTF-8 TSV with a header line and columns
  ``ID, Target, Tweet, Stance[, AuthorID]``.  Tabs inside the tweet text are
  not supported (they terminate the field).  When the optional AuthorID
  column is absent each tweet is treated as its own author.
* Profiles file: UTF-8, one JSON object per line with a ``user_id`` key and
  up to six array-of-string keys (``in_mentions``, ``in_domains``,
  ``pn_mentions``, ``pn_domains``, ``cn_friends``, ``cn_followers``).
  Absent keys mean empty sets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping
from urllib.parse import urlsplit


class CorpusError(ValueError):
    """Raised for malformed corpus files or inconsistent records."""


class StanceLabel(Enum):
    AGAINST = "AGAINST"
    FAVOR = "FAVOR"
    NONE = "NONE"

    @classmethod
    def parse(cls, raw: str) -> "StanceLabel":
        """Parse a stance string, case-insensitively and whitespace-trimmed."""
        name = raw.strip().upper()
        try:
            return cls[name]
        except KeyError:
            raise CorpusError(f"unknown stance {raw.strip()!r}") from None

    def __str__(self) -> str:
        return self.value


# Tie-breaking and confusion-matrix axis order everywhere in the package.
CANONICAL_LABELS: tuple[StanceLabel, ...] = (
    StanceLabel.AGAINST,
    StanceLabel.FAVOR,
    StanceLabel.NONE,
)

# Profile set fields, in serialization order.
NETWORK_FIELDS: tuple[str, ...] = (
    "in_mentions",
    "in_domains",
    "pn_mentions",
    "pn_domains",
    "cn_friends",
    "cn_followers",
)


@dataclass(frozen=True)
class LabeledInstance:
    """One (tweet, topic, stance) record keyed by tweet id and author id."""

    tweet_id: str
    author_id: str
    topic: str
    text: str
    label: StanceLabel


def normalize_account(raw: str) -> str:
    """Lowercase an account handle and strip any leading '@'."""
    return raw.strip().lstrip("@").lower()


def normalize_domain(raw: str) -> str:
    """Reduce a domain or URL to a lowercase hostname.

    Scheme, path, port, and userinfo are dropped; a single leading "www."
    is stripped; remaining subdomains are kept ("news.bbc.co.uk" stays
    distinct from "bbc.co.uk").
    """
    s = raw.strip().lower()
    if "://" in s:
        s = urlsplit(s).netloc
    else:
        s = s.split("/", 1)[0]
    s = s.rsplit("@", 1)[-1].split(":", 1)[0]
    if s.startswith("www."):
        s = s[4:]
    return s


def _normalized_set(values: Iterable[str], normalize) -> frozenset[str]:
    return frozenset(v for v in (normalize(x) for x in values) if v)


@dataclass(frozen=True)
class UserNetworkProfile:
    """The six account/domain sets describing one user's networks.

    Sets may be empty (silent or passive users). Account strings are
    lowercase with no leading '@'; domain strings are lowercase hostnames
    with no scheme, path, or port.
    """

    user_id: str
    in_mentions: frozenset[str] = frozenset()
    in_domains: frozenset[str] = frozenset()
    pn_mentions: frozenset[str] = frozenset()
    pn_domains: frozenset[str] = frozenset()
    cn_friends: frozenset[str] = frozenset()
    cn_followers: frozenset[str] = frozenset()

    @classmethod
    def from_raw(
        cls,
        user_id: str,
        *,
        in_mentions: Iterable[str] = (),
        in_domains: Iterable[str] = (),
        pn_mentions: Iterable[str] = (),
        pn_domains: Iterable[str] = (),
        cn_friends: Iterable[str] = (),
        cn_followers: Iterable[str] = (),
    ) -> "UserNetworkProfile":
        """Build a profile, normalizing every account and domain string."""
        return cls(
            user_id=user_id,
            in_mentions=_normalized_set(in_mentions, normalize_account),
            in_domains=_normalized_set(in_domains, normalize_domain),
            pn_mentions=_normalized_set(pn_mentions, normalize_account),
            pn_domains=_normalized_set(pn_domains, normalize_domain),
            cn_friends=_normalized_set(cn_friends, normalize_account),
            cn_followers=_normalized_set(cn_followers, normalize_account),
        )

    @classmethod
    def empty(cls, user_id: str) -> "UserNetworkProfile":
        return cls(user_id=user_id)

    def set_for(self, field_name: str) -> frozenset[str]:
        if field_name not in NETWORK_FIELDS:
            raise ValueError(f"unknown network field {field_name!r}")
        return getattr(self, field_name)


@dataclass(frozen=True)
class Dataset:
    """Immutable joined corpus: instances plus a profile for every author."""

    instances: tuple[LabeledInstance, ...]
    profiles: Mapping[str, UserNetworkProfile]
    topics: tuple[str, ...]

    def profile_for(self, author_id: str) -> UserNetworkProfile:
        profile = self.profiles.get(author_id)
        if profile is None:
            return UserNetworkProfile.empty(author_id)
        return profile


def load_semeval_tsv(path: str | Path) -> list[LabeledInstance]:
    """Read a tweets TSV into instances.

    The first line is a header. Each data line must have 4 or 5
    tab-separated fields: ID, Target, Tweet, Stance[, AuthorID]. When the
    author column is absent the tweet id doubles as the author id.
    """
    path = Path(path)
    instances: list[LabeledInstance] = []
    seen_ids: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if lineno == 1:
                continue
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) not in (4, 5):
                raise CorpusError(
                    f"{path.name}: expected 4 or 5 tab-separated fields, "
                    f"got {len(fields)} at line {lineno}"
                )
            tweet_id, topic, text = fields[0].strip(), fields[1].strip(), fields[2]
            if not topic:
                raise CorpusError(f"{path.name}: empty topic at line {lineno}")
            if tweet_id in seen_ids:
                raise CorpusError(
                    f"{path.name}: duplicate tweet id {tweet_id!r} at line {lineno}"
                )
            seen_ids.add(tweet_id)
            try:
                label = StanceLabel.parse(fields[3])
            except CorpusError as exc:
                raise CorpusError(f"{path.name}: {exc} at line {lineno}") from None
            author_id = fields[4].strip() if len(fields) == 5 else tweet_id
            instances.append(
                LabeledInstance(
                    tweet_id=tweet_id,
                    author_id=author_id or tweet_id,
                    topic=topic,
                    text=text,
                    label=label,
                )
            )
    return instances


def load_network_profiles(
    path: str | Path,
) -> tuple[dict[str, UserNetworkProfile], int]:
    """Read a profiles JSONL file.

    Returns the user_id -> profile mapping plus the number of duplicate
    user_id records encountered (last record wins).
    """
    path = Path(path)
    profiles: dict[str, UserNetworkProfile] = {}
    duplicates = 0
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(
                    f"{path.name}: unparseable record at line {lineno}: {exc.msg}"
                ) from None
            if not isinstance(record, dict):
                raise CorpusError(
                    f"{path.name}: record at line {lineno} is not an object"
                )
            user_id = record.get("user_id")
            if not isinstance(user_id, str) or not user_id:
                raise CorpusError(
                    f"{path.name}: missing user_id at line {lineno}"
                )
            sets: dict[str, list[str]] = {}
            for name in NETWORK_FIELDS:
                values = record.get(name, [])
                if not isinstance(values, list) or not all(
                    isinstance(v, str) for v in values
                ):
                    raise CorpusError(
                        f"{path.name}: field {name!r} at line {lineno} "
                        "is not an array of strings"
                    )
                sets[name] = values
            if user_id in profiles:
                duplicates += 1
            profiles[user_id] = UserNetworkProfile.from_raw(user_id, **sets)
    return profiles, duplicates


def join(
    instances: Iterable[LabeledInstance],
    profiles: Mapping[str, UserNetworkProfile],
    require_profile: bool = False,
) -> tuple[Dataset, int]:
    """Join instances with author profiles into a Dataset.

    With ``require_profile`` set, instances whose author has no profile are
    dropped (the paper's treatment of deleted users); the drop count is
    returned. Otherwise missing authors get all-empty profiles.
    """
    kept: list[LabeledInstance] = []
    joined: dict[str, UserNetworkProfile] = dict(profiles)
    dropped = 0
    for inst in instances:
        if inst.author_id not in joined:
            if require_profile:
                dropped += 1
                continue
            joined[inst.author_id] = UserNetworkProfile.empty(inst.author_id)
        kept.append(inst)
    topics: list[str] = []
    for inst in kept:
        if inst.topic not in topics:
            topics.append(inst.topic)
    return Dataset(tuple(kept), joined, tuple(topics)), dropped


def write_semeval_tsv(path: str | Path, instances: Iterable[LabeledInstance]) -> None:
    """Write instances in the tweets TSV format (with the AuthorID column)."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("ID\tTarget\tTweet\tStance\tAuthorID\n")
        for inst in instances:
            fh.write(
                f"{inst.tweet_id}\t{inst.topic}\t{inst.text}\t"
                f"{inst.label.value}\t{inst.author_id}\n"
            )


def write_network_profiles(
    path: str | Path, profiles: Mapping[str, UserNetworkProfile]
) -> None:
    """Write profiles as JSONL, one user per line, set members sorted."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for user_id in sorted(profiles):
            profile = profiles[user_id]
            record: dict[str, object] = {"user_id": user_id}
            for name in NETWORK_FIELDS:
                record[name] = sorted(getattr(profile, name))
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
