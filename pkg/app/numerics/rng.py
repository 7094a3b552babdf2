"""
Counter-based seeded randomness.

Wraps numpy's Philox bit generator so that an identical seed and an identical
call sequence yield an identical stream on every platform. Normal draws use
the Box-Muller transform over the uniform output.
"""
import numpy as np


class SeededRng:
    """Philox-backed random stream with Box-Muller normals."""

    def __init__(self, seed):
        self.seed = int(seed)
        self._bitgen = np.random.Philox(key=self.seed)
        self._gen = np.random.Generator(self._bitgen)

    def __repr__(self):
        return f'<SeededRng seed={self.seed} counter={self.counter}>'

    @property
    def counter(self):
        """Current 256-bit Philox counter as a tuple of words."""
        return tuple(int(word) for word in self._bitgen.state['state']['counter'])

    def uniform(self, size):
        """Uniform draws on [0, 1)."""
        return self._gen.random(size)

    def integers(self, low, high, size=None):
        """Uniform integers on [low, high)."""
        return self._gen.integers(low, high, size=size)

    def permutation(self, n):
        """Random permutation of range(n)."""
        return self._gen.permutation(n)

    def normal(self, size):
        """Standard normal draws via Box-Muller."""
        count = int(np.prod(size))
        pairs = (count + 1) // 2
        # shift to (0, 1] so the log never sees zero
        u1 = 1.0 - self._gen.random(pairs)
        u2 = self._gen.random(pairs)
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        draws = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])
        return draws[:count].reshape(size)

    def spawn(self, tag):
        """Independent child stream keyed by this seed and an integer tag."""
        child_seed = np.random.SeedSequence([self.seed, int(tag)]).generate_state(1, dtype=np.uint64)[0]
        return SeededRng(int(child_seed))

    def get_state(self):
        """JSON-serializable bit-generator state."""
        state = self._bitgen.state
        return {
            'seed': self.seed,
            'counter': [int(v) for v in state['state']['counter']],
            'key': [int(v) for v in state['state']['key']],
            'buffer': [int(v) for v in state['buffer']],
            'buffer_pos': int(state['buffer_pos']),
            'has_uint32': int(state['has_uint32']),
            'uinteger': int(state['uinteger']),
        }

    @classmethod
    def from_state(cls, state):
        """Rebuild a stream from get_state() output."""
        rng = cls(state['seed'])
        rng._bitgen.state = {
            'bit_generator': 'Philox',
            'state': {
                'counter': np.array(state['counter'], dtype=np.uint64),
                'key': np.array(state['key'], dtype=np.uint64),
            },
            'buffer': np.array(state['buffer'], dtype=np.uint64),
            'buffer_pos': state['buffer_pos'],
            'has_uint32': state['has_uint32'],
            'uinteger': state['uinteger'],
        }
        return rng


def gaussian_sample(rng, rows, cols, dtype=np.float64):
    """rows x cols matrix of i.i.d. standard normal draws."""
    return rng.normal((rows, cols)).astype(dtype, copy=False)
