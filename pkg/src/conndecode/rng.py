"""SplitMix64 stream used for every shuffle in the package.

A fixed, tiny generator keeps fold assignments and permutations identical
across platforms and numpy versions.
"""

MASK64 = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed):
        self.state = int(seed) & MASK64

    def next_u64(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def randbelow(self, n):
        """Uniform integer in [0, n) by rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = MASK64 - (MASK64 + 1) % n
        while True:
            r = self.next_u64()
            if r <= limit:
                return r % n

    def shuffle(self, items):
        """Fisher-Yates, in place, on a list."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]
        return items

    def permutation(self, n):
        return self.shuffle(list(range(n)))


def derive_seed(seed, *keys):
    """Mix a base seed with integer keys into an independent 64-bit seed."""
    gen = SplitMix64(seed)
    value = gen.next_u64()
    for k in keys:
        gen = SplitMix64(value ^ ((int(k) * 0xD1B54A32D192ED03) & MASK64))
        value = gen.next_u64()
    return value
