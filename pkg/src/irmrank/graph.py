"""Heterogeneous retweet/follow network, preference tuples and splits.

The network joins image tweets and users through two binary relations: the
repost matrix H (tweet x user) and the follow matrix S (user x user). N_j is
the set of accounts user j follows, i.e. the sources j sees tweets from.
Training constraints are ordered tuples (j, i, k, N_j): user j reposted tweet
i and not tweet k.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GraphInputError(ValueError):
    """Malformed edge list or id out of range."""


class SamplingExhausted(RuntimeError):
    """No user with both a positive and a candidate negative remains."""


class CapacityError(RuntimeError):
    """Tuple enumeration would exceed the requested cap."""


@dataclass(frozen=True)
class RankTuple:
    """Relative-preference constraint: user prefers `pos` over `neg`."""
    user: int
    pos: int
    neg: int
    neighbors: frozenset

    def __iter__(self):
        return iter((self.user, self.pos, self.neg, self.neighbors))


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.8
    seed: int = 0


@dataclass
class IRMNetwork:
    """Immutable-by-convention store of H, S and the derived neighbor sets."""
    n_tweets: int
    n_users: int
    pos_by_user: list          # user -> set of reposted tweet ids (H columns)
    users_by_tweet: list       # tweet -> set of users who reposted it (H rows)
    followees: list            # user -> N_j, the accounts the user follows
    dropped_self_follows: int = 0

    def h(self, tweet, user):
        return 1 if tweet in self.pos_by_user[user] else 0

    def dense_h(self):
        H = np.zeros((self.n_tweets, self.n_users), dtype=np.int8)
        for u, tweets in enumerate(self.pos_by_user):
            for t in tweets:
                H[t, u] = 1
        return H

    def dense_s(self):
        S = np.zeros((self.n_users, self.n_users), dtype=np.int8)
        for u, fs in enumerate(self.followees):
            for v in fs:
                S[u, v] = 1
        return S

    def retweet_edges(self):
        return sorted((t, u) for u, ts in enumerate(self.pos_by_user) for t in ts)

    def follow_edges(self):
        return sorted((u, v) for u, fs in enumerate(self.followees) for v in fs)

    def n_positives(self):
        return sum(len(ts) for ts in self.pos_by_user)


def build_graph(retweet_edges, follow_edges, n_tweets=None, n_users=None):
    """Build the network from (tweet, user) and (follower, followee) edges.

    Duplicate edges are deduplicated; self-follows are dropped and counted.
    """
    retweet_edges = [(int(t), int(u)) for t, u in retweet_edges]
    follow_edges = [(int(a), int(b)) for a, b in follow_edges]
    if n_tweets is None:
        n_tweets = 1 + max((t for t, _ in retweet_edges), default=-1)
    if n_users is None:
        ids = [u for _, u in retweet_edges] + [x for e in follow_edges for x in e]
        n_users = 1 + max(ids, default=-1)

    pos_by_user = [set() for _ in range(n_users)]
    users_by_tweet = [set() for _ in range(n_tweets)]
    for t, u in retweet_edges:
        if not (0 <= t < n_tweets and 0 <= u < n_users):
            raise GraphInputError(f"retweet edge out of range: ({t}, {u})")
        pos_by_user[u].add(t)
        users_by_tweet[t].add(u)

    followees = [set() for _ in range(n_users)]
    dropped = 0
    for a, b in follow_edges:
        if not (0 <= a < n_users and 0 <= b < n_users):
            raise GraphInputError(f"follow edge out of range: ({a}, {b})")
        if a == b:
            dropped += 1
            continue
        followees[a].add(b)

    return IRMNetwork(n_tweets, n_users, pos_by_user, users_by_tweet,
                      followees, dropped_self_follows=dropped)


# ---------------------------------------------------------------------------
# graph text format: "R <tweet> <user>" / "F <follower> <followee>" lines

def write_graph(path, net: IRMNetwork):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# tweets={net.n_tweets} users={net.n_users}\n")
        for t, u in net.retweet_edges():
            fh.write(f"R {t} {u}\n")
        for a, b in net.follow_edges():
            fh.write(f"F {a} {b}\n")


def read_graph(path, n_tweets=None, n_users=None):
    retweets, follows = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                if line.startswith("# tweets=") and n_tweets is None:
                    try:
                        parts = dict(p.split("=") for p in line[2:].split())
                        n_tweets = int(parts.get("tweets", 0))
                        n_users = int(parts.get("users", 0))
                    except (ValueError, KeyError):
                        pass
                continue
            parts = line.split()
            if len(parts) != 3 or parts[0] not in ("R", "F"):
                raise GraphInputError(f"{path}:{lineno}: bad record {line!r}")
            try:
                a, b = int(parts[1]), int(parts[2])
            except ValueError:
                raise GraphInputError(f"{path}:{lineno}: non-integer id in {line!r}")
            if a < 0 or b < 0:
                raise GraphInputError(f"{path}:{lineno}: negative id in {line!r}")
            (retweets if parts[0] == "R" else follows).append((a, b))
    return build_graph(retweets, follows, n_tweets=n_tweets, n_users=n_users)


# ---------------------------------------------------------------------------
# tuple sampling / enumeration

def negative_pool(net: IRMNetwork, user):
    """Candidate negatives for a user: neighbor-exposed tweets first.

    Tweets reposted by at least one account the user follows but not by the
    user; when that pool is empty, all tweets with h=0 for the user.
    """
    pos = net.pos_by_user[user]
    exposed = set()
    for q in net.followees[user]:
        exposed |= net.pos_by_user[q]
    exposed -= pos
    if exposed:
        return sorted(exposed)
    return [t for t in range(net.n_tweets) if t not in pos]


def _eligible_users(net, positives):
    out = []
    for j in range(net.n_users):
        if positives[j] and negative_pool(net, j):
            out.append(j)
    return out


def sample_tuple(net: IRMNetwork, rng, positives=None) -> RankTuple:
    """Draw one (j, i, k, N_j) tuple.

    Distribution: j uniform over users with >=1 positive (in `positives`,
    defaulting to all of H) and a nonempty negative pool; i uniform over that
    user's positives; k uniform over the user's negative pool. Negatives are
    always judged against the full H (h_kj = 0).
    """
    if positives is None:
        positives = net.pos_by_user
    eligible = _eligible_users(net, positives)
    if not eligible:
        raise SamplingExhausted("no user with positives and candidate negatives")
    j = eligible[rng.integers(len(eligible))]
    pos = sorted(positives[j])
    i = pos[rng.integers(len(pos))]
    pool = negative_pool(net, j)
    k = pool[rng.integers(len(pool))]
    return RankTuple(j, i, k, frozenset(net.followees[j]))


class TupleSampler:
    """Caches eligibility and negative pools for repeated sampling.

    Draws are identical to `sample_tuple` with the same rng: the pools are
    deterministic per (net, positives), only their recomputation is skipped.
    """

    def __init__(self, net: IRMNetwork, positives=None):
        self.net = net
        self.positives = net.pos_by_user if positives is None else positives
        self.pools = {j: negative_pool(net, j) for j in range(net.n_users)}
        self.eligible = [j for j in range(net.n_users)
                         if self.positives[j] and self.pools[j]]
        self.pos_sorted = {j: sorted(self.positives[j]) for j in self.eligible}
        self.neighbors = {j: frozenset(net.followees[j]) for j in self.eligible}

    def sample(self, rng) -> RankTuple:
        if not self.eligible:
            raise SamplingExhausted("no user with positives and candidate negatives")
        j = self.eligible[rng.integers(len(self.eligible))]
        pos = self.pos_sorted[j]
        i = pos[rng.integers(len(pos))]
        pool = self.pools[j]
        k = pool[rng.integers(len(pool))]
        return RankTuple(j, i, k, self.neighbors[j])


def enumerate_tuples(net: IRMNetwork, cap, positives=None):
    """All valid tuples under the same negative-pool rule, ordered (j, i, k)."""
    if positives is None:
        positives = net.pos_by_user
    out = []
    for j in range(net.n_users):
        if not positives[j]:
            continue
        pool = negative_pool(net, j)
        nbrs = frozenset(net.followees[j])
        for i in sorted(positives[j]):
            for k in pool:
                out.append(RankTuple(j, i, k, nbrs))
                if len(out) > cap:
                    raise CapacityError(f"tuple count exceeds cap={cap}")
    return out


def split(net: IRMNetwork, spec: SplitSpec):
    """Per-user stratified split of positives into train/test sets.

    Users with fewer than two positives keep everything in train. Returns
    (train_pos, test_pos) as per-user lists of sets.
    """
    if not (0 < spec.train_frac < 1):
        raise ValueError("train_frac must be in (0, 1)")
    rng = np.random.default_rng(spec.seed)
    train = [set() for _ in range(net.n_users)]
    test = [set() for _ in range(net.n_users)]
    for j in range(net.n_users):
        items = sorted(net.pos_by_user[j])
        if len(items) < 2:
            train[j] = set(items)
            continue
        n_train = int(round(spec.train_frac * len(items)))
        n_train = min(max(n_train, 1), len(items) - 1)
        perm = rng.permutation(len(items))
        train[j] = {items[p] for p in perm[:n_train]}
        test[j] = {items[p] for p in perm[n_train:]}
    return train, test


def subnetwork(net: IRMNetwork, positives):
    """Network with the same users/follows but H restricted to `positives`."""
    users_by_tweet = [set() for _ in range(net.n_tweets)]
    for u, ts in enumerate(positives):
        for t in ts:
            users_by_tweet[t].add(u)
    return IRMNetwork(net.n_tweets, net.n_users,
                      [set(ts) for ts in positives], users_by_tweet,
                      [set(fs) for fs in net.followees],
                      dropped_self_follows=net.dropped_self_follows)
