"""Uniform-sampling ring replay buffer."""

import numpy as np


class ReplayBuffer:
    """FIFO ring of transitions with uniform batch sampling."""

    def __init__(self, capacity, state_dim, action_dim):
        self.capacity = int(capacity)
        self.s = np.zeros((capacity, state_dim))
        self.a = np.zeros((capacity, action_dim))
        self.r = np.zeros(capacity)
        self.s2 = np.zeros((capacity, state_dim))
        self.d = np.zeros(capacity)
        self.cursor = 0
        self.size = 0

    def push(self, s, a, r, s2, d):
        if not np.isfinite(r):
            raise ValueError("non-finite reward pushed to replay buffer")
        i = self.cursor
        self.s[i] = s
        self.a[i] = a
        self.r[i] = r
        self.s2[i] = s2
        self.d[i] = float(d)
        self.cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch, rng):
        if self.size < batch:
            raise ValueError(f"buffer holds {self.size} < batch {batch}")
        idx = rng.integers(0, self.size, size=batch)
        return {
            "s": self.s[idx],
            "a": self.a[idx],
            "r": self.r[idx],
            "s2": self.s2[idx],
            "d": self.d[idx],
        }

    def state_arrays(self):
        return {
            "buffer.s": self.s, "buffer.a": self.a, "buffer.r": self.r,
            "buffer.s2": self.s2, "buffer.d": self.d,
            "buffer.meta": np.array([float(self.cursor), float(self.size)]),
        }

    def load_state_arrays(self, arrays):
        self.s[...] = arrays["buffer.s"]
        self.a[...] = arrays["buffer.a"]
        self.r[...] = arrays["buffer.r"]
        self.s2[...] = arrays["buffer.s2"]
        self.d[...] = arrays["buffer.d"]
        self.cursor = int(arrays["buffer.meta"][0])
        self.size = int(arrays["buffer.meta"][1])
