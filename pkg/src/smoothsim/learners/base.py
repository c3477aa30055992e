"""The proper-learner protocol.

Each round the harness calls ``commit()``, which fixes the learner's function
for the round and returns it as a :class:`Commitment`.  Only then is the
instance drawn; the prediction is the commitment evaluated there, and the
loss goes back through ``observe``.  Calling these out of order raises
:class:`ProtocolError`.
"""

from __future__ import annotations

from ..errors import ProtocolError
from ..model import as_instance


class Commitment:
    """The function a learner plays in round t."""

    __slots__ = ("_learner", "t")

    def __init__(self, learner, t):
        self._learner = learner
        self.t = t

    def __call__(self, x) -> float:
        self._learner._check_round(self.t)
        return self._learner._value(self.t, as_instance(x))

    def member(self):
        """The committed class member (sampled lazily for randomized learners)."""
        self._learner._check_round(self.t)
        return self._learner._member(self.t)


class OnlineLearner:
    name = "learner"

    def __init__(self, cls, T: int | None = None):
        self.cls = cls
        self.T = T
        self.t = 0
        self._open = False

    def commit(self) -> Commitment:
        if self._open:
            raise ProtocolError("commit() called twice without observe()")
        if self.T is not None and self.t >= self.T:
            raise ProtocolError(f"horizon T={self.T} exhausted")
        self.t += 1
        self._open = True
        self._on_commit(self.t)
        return Commitment(self, self.t)

    def observe(self, x, loss) -> None:
        if not self._open:
            raise ProtocolError("observe() before commit()")
        self._open = False
        self._on_observe(self.t, as_instance(x), loss)

    def _check_round(self, t):
        if not (self._open and t == self.t):
            raise ProtocolError("commitment used outside its round")

    # hooks
    def _on_commit(self, t):
        pass

    def _value(self, t, x) -> float:
        raise NotImplementedError

    def _member(self, t):
        raise NotImplementedError

    def _on_observe(self, t, x, loss):
        pass

    def stats(self) -> dict:
        """Instrumentation counters; empty by default."""
        return {}
