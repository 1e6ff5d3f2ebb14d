"""In-process publish/subscribe broker that connects the pipeline nodes.

Topics are created once with a fixed payload type and overflow policy.
Every publish gets a per-topic sequence number assigned under a lock, so
each subscriber observes a strictly increasing seq stream. Subscribers own
bounded FIFO queues; what happens on overflow depends on the topic policy:

* ``DROP_OLDEST`` -- stale values are disposable (robot pose, scene
  snapshots). The oldest queued envelope is evicted and counted.
* ``BLOCK`` -- commands must not be lost. The publisher waits until the
  slow subscriber drains, which backpressures the whole topic.
"""

from __future__ import annotations

import threading
import time
import weakref
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Any

DEFAULT_CAPACITY = 64


class QueuePolicy(Enum):
    DROP_OLDEST = "drop_oldest"
    BLOCK = "block"


class BusError(Exception):
    """Base class for broker errors."""


class UnknownTopicError(BusError):
    pass


class DuplicateTopicError(BusError):
    pass


class PayloadKindError(BusError):
    pass


class QueueOverflowError(BusError):
    """A BLOCK-policy publish timed out waiting for queue space."""


@dataclass(frozen=True)
class Envelope:
    """One published message. Payloads are treated as immutable values."""

    topic: str
    seq: int
    publish_time: int  # monotonic ns at publish
    payload: Any


class Subscription:
    """Ordered FIFO stream of envelopes for a single subscriber.

    Yields only envelopes published strictly after the subscription was
    created. Close it (or let it be garbage collected) to detach from the
    topic; a closed subscription never receives further envelopes.
    """

    def __init__(self, topic_name: str, policy: QueuePolicy, capacity: int):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.topic = topic_name
        self.capacity = capacity
        self._policy = policy
        self._queue: deque[Envelope] = deque()
        self._cond = threading.Condition()
        self._closed = False
        self._dropped = 0

    @property
    def dropped(self) -> int:
        """Envelopes evicted by the DROP_OLDEST policy."""
        with self._cond:
            return self._dropped

    @property
    def closed(self) -> bool:
        with self._cond:
            return self._closed

    @property
    def pending(self) -> int:
        """Envelopes queued but not yet consumed."""
        with self._cond:
            return len(self._queue)

    def _offer(self, env: Envelope, timeout: float | None) -> None:
        with self._cond:
            if self._closed:
                return
            if len(self._queue) >= self.capacity:
                if self._policy is QueuePolicy.DROP_OLDEST:
                    self._queue.popleft()
                    self._dropped += 1
                else:
                    deadline = None if timeout is None else time.monotonic() + timeout
                    while len(self._queue) >= self.capacity and not self._closed:
                        remaining = None
                        if deadline is not None:
                            remaining = deadline - time.monotonic()
                            if remaining <= 0:
                                raise QueueOverflowError(
                                    f"subscriber queue full on topic {self.topic!r}"
                                )
                        self._cond.wait(remaining)
                    if self._closed:
                        return
            self._queue.append(env)
            self._cond.notify_all()

    def get(self, timeout: float | None = None) -> Envelope | None:
        """Pop the next envelope, waiting up to ``timeout`` seconds.

        Returns None on timeout or if the subscription is closed and drained.
        """
        with self._cond:
            deadline = None if timeout is None else time.monotonic() + timeout
            while not self._queue:
                if self._closed:
                    return None
                remaining = None
                if deadline is not None:
                    remaining = deadline - time.monotonic()
                    if remaining <= 0:
                        return None
                self._cond.wait(remaining)
            env = self._queue.popleft()
            self._cond.notify_all()
            return env

    def try_get(self) -> Envelope | None:
        """Non-blocking pop."""
        with self._cond:
            if not self._queue:
                return None
            env = self._queue.popleft()
            self._cond.notify_all()
            return env

    def drain(self) -> list[Envelope]:
        """Pop everything currently queued without waiting."""
        with self._cond:
            out = list(self._queue)
            self._queue.clear()
            self._cond.notify_all()
            return out

    def close(self) -> None:
        with self._cond:
            self._closed = True
            self._cond.notify_all()

    def __enter__(self) -> "Subscription":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()


class _TopicState:
    __slots__ = ("name", "payload_kind", "policy", "lock", "seq", "subscribers")

    def __init__(self, name: str, payload_kind: type, policy: QueuePolicy):
        self.name = name
        self.payload_kind = payload_kind
        self.policy = policy
        self.lock = threading.Lock()
        self.seq = 0
        # weak so a dropped handle detaches without an explicit close()
        self.subscribers: weakref.WeakSet[Subscription] = weakref.WeakSet()


class MessageBus:
    """Thread-safe in-process broker. One instance per session."""

    def __init__(self) -> None:
        self._topics: dict[str, _TopicState] = {}
        self._registry_lock = threading.Lock()

    def create_topic(
        self,
        name: str,
        payload_kind: type,
        policy: QueuePolicy = QueuePolicy.BLOCK,
    ) -> None:
        if not name:
            raise ValueError("topic name must be nonempty")
        with self._registry_lock:
            if name in self._topics:
                raise DuplicateTopicError(f"topic {name!r} already exists")
            self._topics[name] = _TopicState(name, payload_kind, policy)

    def topics(self) -> list[str]:
        with self._registry_lock:
            return sorted(self._topics)

    def _topic(self, name: str) -> _TopicState:
        with self._registry_lock:
            try:
                return self._topics[name]
            except KeyError:
                raise UnknownTopicError(f"no such topic: {name!r}") from None

    def publish(self, topic: str, payload: Any, timeout: float | None = None) -> int:
        """Publish ``payload`` and return its per-topic sequence number.

        With BLOCK policy, waits for space in every subscriber queue (the
        topic lock is held while waiting, so later publishes queue behind).
        ``timeout`` bounds that wait; exceeding it raises QueueOverflowError.
        """
        st = self._topic(topic)
        if not isinstance(payload, st.payload_kind):
            raise PayloadKindError(
                f"topic {topic!r} carries {st.payload_kind.__name__}, "
                f"got {type(payload).__name__}"
            )
        with st.lock:
            st.seq += 1
            env = Envelope(topic, st.seq, time.monotonic_ns(), payload)
            for sub in list(st.subscribers):
                sub._offer(env, timeout)
            return env.seq

    def subscribe(self, topic: str, capacity: int = DEFAULT_CAPACITY) -> Subscription:
        """Attach a new subscriber; it sees only subsequent publishes."""
        st = self._topic(topic)
        sub = Subscription(st.name, st.policy, capacity)
        with st.lock:
            st.subscribers.add(sub)
        return sub

    def subscriber_count(self, topic: str) -> int:
        st = self._topic(topic)
        with st.lock:
            return sum(1 for s in st.subscribers if not s.closed)
