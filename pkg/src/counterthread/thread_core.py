"""Posts, threads and per-thread interaction statistics."""
from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Iterable, Mapping

from .annotation import conflate
from .errors import DuplicatePostId, EmptyThread, MissingLabel, MultipleSources
from .labels import ConflatedClass, LabelCode, Strand

__all__ = [
    "Post",
    "Thread",
    "ThreadStats",
    "PREDICTORS",
    "assemble_thread",
    "filter_thread",
    "compute_thread_stats",
    "reply_category",
]


@dataclass(frozen=True)
class Post:
    post_id: str
    author: str
    text: str
    reply_to: str | None = None
    position: int = 0
    dangling: bool = False

    @property
    def is_source(self) -> bool:
        return self.reply_to is None


@dataclass(frozen=True)
class Thread:
    thread_id: str
    strand: Strand
    posts: tuple[Post, ...]

    @property
    def source(self) -> Post:
        return self.posts[0]

    @property
    def replies(self) -> tuple[Post, ...]:
        return self.posts[1:]

    def __len__(self) -> int:
        return len(self.posts)


# Regressor order used by the design matrix.
PREDICTORS = (
    "hatecount",
    "support",
    "disagree",
    "insults",
    "uniqcontributors",
    "origpostertweets",
    "uniqhatefulcontributors",
    "uniqCScontributors",
)


@dataclass(frozen=True)
class ThreadStats:
    length: int
    hatecount: int = 0
    support: int = 0
    disagree: int = 0
    insults: int = 0
    uniqcontributors: int = 1
    origpostertweets: int = 0
    uniqhatefulcontributors: int = 0
    uniqCScontributors: int = 0
    thread_id: str = ""

    def predictors(self) -> tuple[int, ...]:
        return tuple(getattr(self, name) for name in PREDICTORS)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _field(record: Mapping, key: str) -> str:
    value = record.get(key)
    return "" if value is None else str(value)


def assemble_thread(records: Iterable[Mapping], thread_id: str, strand) -> Thread:
    """Build a :class:`Thread` from raw post records in file order.

    Each record needs ``post_id``, ``author`` and ``text``; ``reply_to`` is
    empty or missing for the source. The source is moved to the front and
    every other post keeps its file order. A reply whose target does not
    appear earlier in the thread is kept but flagged ``dangling``.
    """
    records = list(records)
    if not records:
        raise EmptyThread(f"thread {thread_id!r} has no posts")

    sources = [i for i, r in enumerate(records) if not _field(r, "reply_to").strip()]
    if len(sources) > 1:
        ids = [_field(records[i], "post_id") for i in sources]
        raise MultipleSources(f"thread {thread_id!r} has {len(sources)} source posts: {ids}")
    if not sources:
        raise EmptyThread(f"thread {thread_id!r} has no source post")

    order = sources + [i for i in range(len(records)) if i != sources[0]]
    posts = []
    seen: set[str] = set()
    for position, i in enumerate(order):
        rec = records[i]
        pid = _field(rec, "post_id")
        if pid in seen:
            raise DuplicatePostId(f"post id {pid!r} repeated in thread {thread_id!r}")
        reply_to = _field(rec, "reply_to").strip() or None
        posts.append(
            Post(
                post_id=pid,
                author=_field(rec, "author"),
                text=_field(rec, "text"),
                reply_to=reply_to,
                position=position,
                dangling=reply_to is not None and reply_to not in seen,
            )
        )
        seen.add(pid)
    return Thread(thread_id=str(thread_id), strand=Strand.parse(strand), posts=tuple(posts))


def filter_thread(thread: Thread, keep: Iterable[str]) -> Thread:
    """Drop replies not in ``keep``; the source is always retained."""
    keep = set(keep)
    kept = [thread.source] + [p for p in thread.replies if p.post_id in keep]
    return replace(thread, posts=tuple(replace(p, position=i) for i, p in enumerate(kept)))


def reply_category(codes) -> str:
    """Single statistics bucket for a reply: hate, support, disagree, insult or general."""
    cls = conflate(codes)
    if cls is ConflatedClass.CYBER_HATE:
        return "hate"
    if cls is ConflatedClass.SUPPORT_HATE:
        return "support"
    if cls is ConflatedClass.DISAGREE_OR_INSULT:
        codes = set(codes)
        if LabelCode.DISAGREE in codes or LabelCode.DISAGREE_EVIDENCE in codes:
            return "disagree"
        return "insult"
    return "general"


def compute_thread_stats(thread: Thread, labels: Mapping[str, Iterable]) -> ThreadStats:
    """Count reply types and contributor figures for one (already filtered) thread.

    ``labels`` maps reply post ids to their consensus code sets. The source
    post is never counted as a hateful post or as an original-poster
    contribution.
    """
    counts = {"hate": 0, "support": 0, "disagree": 0, "insult": 0, "general": 0}
    source_author = thread.source.author
    hateful_authors: set[str] = set()
    cs_authors: set[str] = set()
    op_replies = 0
    for post in thread.replies:
        if post.post_id not in labels:
            raise MissingLabel(f"reply {post.post_id!r} in thread {thread.thread_id!r} has no label")
        category = reply_category(labels[post.post_id])
        counts[category] += 1
        if category == "hate":
            hateful_authors.add(post.author)
        elif category in ("disagree", "insult"):
            cs_authors.add(post.author)
        if post.author == source_author:
            op_replies += 1

    return ThreadStats(
        length=len(thread.posts),
        hatecount=counts["hate"],
        support=counts["support"],
        disagree=counts["disagree"],
        insults=counts["insult"],
        uniqcontributors=len({p.author for p in thread.posts}),
        origpostertweets=op_replies,
        uniqhatefulcontributors=len(hateful_authors),
        uniqCScontributors=len(cs_authors),
        thread_id=thread.thread_id,
    )
