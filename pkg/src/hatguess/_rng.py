"""SplitMix64 mixing used for pair coins and per-trial seed derivation."""

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def seed_key(seed: int) -> int:
    return mix64(seed + GOLDEN)


def derive_seed(master_seed: int, *path: int) -> int:
    """Child seed for ``path`` (e.g. a trial index); independent of evaluation order."""
    z = seed_key(master_seed)
    for k in path:
        z = mix64(z ^ mix64((k + 1) * GOLDEN))
    return z
