import pytest
from hypothesis import given
from hypothesis import strategies as st

from stancelab.corpus import (
    CorpusError,
    LabeledInstance,
    StanceLabel,
    UserNetworkProfile,
    join,
    load_network_profiles,
    load_semeval_tsv,
    normalize_account,
    normalize_domain,
    write_network_profiles,
    write_semeval_tsv,
)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestStanceLabel:
    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("FAVOR", StanceLabel.FAVOR),
            ("against", StanceLabel.AGAINST),
            ("  None ", StanceLabel.NONE),
            ("Favor", StanceLabel.FAVOR),
        ],
    )
    def test_parse(self, raw, expected):
        assert StanceLabel.parse(raw) is expected

    def test_unknown_rejected(self):
        with pytest.raises(CorpusError, match="MAYBE"):
            StanceLabel.parse("MAYBE")


class TestLoadTweets:
    def test_basic_line(self, tmp_path):
        path = write(
            tmp_path, "t.tsv",
            "ID\tTarget\tTweet\tStance\tAuthorID\n"
            "101\tAtheism\tgod is a myth\tFAVOR\tu1\n",
        )
        (inst,) = load_semeval_tsv(path)
        assert inst == LabeledInstance("101", "u1", "Atheism", "god is a myth",
                                       StanceLabel.FAVOR)

    def test_author_defaults_to_tweet_id(self, tmp_path):
        path = write(
            tmp_path, "t.tsv",
            "ID\tTarget\tTweet\tStance\n101\tAtheism\thello\tNONE\n",
        )
        (inst,) = load_semeval_tsv(path)
        assert inst.author_id == "101"

    def test_header_only_gives_empty_list(self, tmp_path):
        path = write(tmp_path, "t.tsv", "ID\tTarget\tTweet\tStance\n")
        assert load_semeval_tsv(path) == []

    def test_unknown_stance_names_value_and_line(self, tmp_path):
        path = write(
            tmp_path, "t.tsv",
            "ID\tTarget\tTweet\tStance\n1\tA\thi\tMAYBE\n",
        )
        with pytest.raises(CorpusError, match="'MAYBE' at line 2"):
            load_semeval_tsv(path)

    def test_wrong_field_count_names_line(self, tmp_path):
        path = write(
            tmp_path, "t.tsv",
            "ID\tTarget\tTweet\tStance\n1\tA\thi\n",
        )
        with pytest.raises(CorpusError, match="line 2"):
            load_semeval_tsv(path)

    def test_duplicate_tweet_id_rejected(self, tmp_path):
        path = write(
            tmp_path, "t.tsv",
            "ID\tTarget\tTweet\tStance\n1\tA\thi\tNONE\n1\tA\tyo\tFAVOR\n",
        )
        with pytest.raises(CorpusError, match="duplicate tweet id"):
            load_semeval_tsv(path)

    def test_empty_topic_rejected(self, tmp_path):
        path = write(
            tmp_path, "t.tsv",
            "ID\tTarget\tTweet\tStance\n1\t\thi\tNONE\n",
        )
        with pytest.raises(CorpusError, match="empty topic"):
            load_semeval_tsv(path)

    def test_empty_text_allowed(self, tmp_path):
        path = write(
            tmp_path, "t.tsv",
            "ID\tTarget\tTweet\tStance\n1\tA\t\tNONE\n",
        )
        (inst,) = load_semeval_tsv(path)
        assert inst.text == ""

    def test_round_trip(self, tmp_path):
        instances = [
            LabeledInstance("1", "u1", "A", "hello world", StanceLabel.FAVOR),
            LabeledInstance("2", "u2", "B", "", StanceLabel.NONE),
        ]
        path = tmp_path / "out.tsv"
        write_semeval_tsv(path, instances)
        assert load_semeval_tsv(path) == instances


class TestNormalization:
    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("@FoxNews", "foxnews"),
            ("foxnews", "foxnews"),
            ("@@Shout", "shout"),
            (" @Mixed_Case ", "mixed_case"),
        ],
    )
    def test_account(self, raw, expected):
        assert normalize_account(raw) == expected

    @pytest.mark.parametrize(
        "raw,expected",
        [
            ("https://www.bbc.co.uk/news/x", "bbc.co.uk"),
            ("http://News.BBC.co.uk:8080/a", "news.bbc.co.uk"),
            ("www.example.com", "example.com"),
            ("example.com/path", "example.com"),
            ("Example.COM", "example.com"),
        ],
    )
    def test_domain(self, raw, expected):
        assert normalize_domain(raw) == expected

    @given(st.text(min_size=1, max_size=30))
    def test_account_normalization_idempotent(self, raw):
        once = normalize_account(raw)
        assert normalize_account(once) == once

    @given(st.text(min_size=1, max_size=30))
    def test_domain_normalization_idempotent(self, raw):
        once = normalize_domain(raw)
        assert normalize_domain(once) == once


class TestLoadProfiles:
    def test_normalizes_and_collapses(self, tmp_path):
        path = write(
            tmp_path, "p.jsonl",
            '{"user_id": "u1", "in_mentions": ["@FoxNews", "foxnews"], '
            '"in_domains": ["https://www.bbc.co.uk/news/x"]}\n',
        )
        profiles, dupes = load_network_profiles(path)
        assert dupes == 0
        assert profiles["u1"].in_mentions == {"foxnews"}
        assert profiles["u1"].in_domains == {"bbc.co.uk"}
        assert profiles["u1"].cn_friends == frozenset()

    def test_empty_file(self, tmp_path):
        path = write(tmp_path, "p.jsonl", "")
        profiles, dupes = load_network_profiles(path)
        assert profiles == {} and dupes == 0

    def test_duplicate_user_last_wins_and_counted(self, tmp_path):
        path = write(
            tmp_path, "p.jsonl",
            '{"user_id": "u1", "in_mentions": ["a"]}\n'
            '{"user_id": "u1", "in_mentions": ["b"]}\n',
        )
        profiles, dupes = load_network_profiles(path)
        assert dupes == 1
        assert profiles["u1"].in_mentions == {"b"}

    def test_unparseable_line_names_line(self, tmp_path):
        path = write(tmp_path, "p.jsonl", '{"user_id": "u1"}\nnot json\n')
        with pytest.raises(CorpusError, match="line 2"):
            load_network_profiles(path)

    def test_missing_user_id(self, tmp_path):
        path = write(tmp_path, "p.jsonl", '{"in_mentions": ["a"]}\n')
        with pytest.raises(CorpusError, match="user_id"):
            load_network_profiles(path)

    def test_bad_field_type(self, tmp_path):
        path = write(
            tmp_path, "p.jsonl", '{"user_id": "u1", "in_mentions": "a"}\n'
        )
        with pytest.raises(CorpusError, match="in_mentions"):
            load_network_profiles(path)

    def test_round_trip(self, tmp_path):
        profiles = {
            "u1": UserNetworkProfile.from_raw(
                "u1", in_mentions=["@A", "b"], pn_domains=["x.example"]
            ),
            "u2": UserNetworkProfile.empty("u2"),
        }
        path = tmp_path / "out.jsonl"
        write_network_profiles(path, profiles)
        loaded, _ = load_network_profiles(path)
        assert loaded == profiles


class TestJoin:
    def _instances(self):
        return [
            LabeledInstance(str(i), f"u{i}", "A", "t", StanceLabel.NONE)
            for i in range(3)
        ]

    def _profiles(self):
        return {
            "u0": UserNetworkProfile.empty("u0"),
            "u1": UserNetworkProfile.empty("u1"),
        }

    def test_require_profile_drops_and_counts(self):
        dataset, dropped = join(self._instances(), self._profiles(),
                                require_profile=True)
        assert len(dataset.instances) == 2
        assert dropped == 1
        assert all(i.author_id in dataset.profiles for i in dataset.instances)

    def test_missing_profiles_filled_with_empty_sets(self):
        dataset, dropped = join(self._instances(), self._profiles(),
                                require_profile=False)
        assert len(dataset.instances) == 3
        assert dropped == 0
        profile = dataset.profiles["u2"]
        assert all(not getattr(profile, f) for f in (
            "in_mentions", "in_domains", "pn_mentions", "pn_domains",
            "cn_friends", "cn_followers"))

    def test_empty_input(self):
        dataset, dropped = join([], {}, require_profile=True)
        assert dataset.instances == ()
        assert dataset.topics == ()
        assert dropped == 0

    def test_topics_in_first_appearance_order(self):
        instances = [
            LabeledInstance("1", "u1", "B", "", StanceLabel.NONE),
            LabeledInstance("2", "u2", "A", "", StanceLabel.NONE),
            LabeledInstance("3", "u3", "B", "", StanceLabel.NONE),
        ]
        dataset, _ = join(instances, {})
        assert dataset.topics == ("B", "A")

    def test_load_join_deterministic(self, tmp_path):
        tweets = write(
            tmp_path, "t.tsv",
            "ID\tTarget\tTweet\tStance\tAuthorID\n"
            "1\tA\thello there\tFAVOR\tu1\n"
            "2\tA\tbye now\tAGAINST\tu2\n",
        )
        profs = write(
            tmp_path, "p.jsonl",
            '{"user_id": "u1", "cn_friends": ["x", "y"]}\n',
        )
        def build():
            profiles, _ = load_network_profiles(profs)
            return join(load_semeval_tsv(tweets), profiles, require_profile=True)
        assert build() == build()
