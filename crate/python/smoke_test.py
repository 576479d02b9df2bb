"""Smoke test for the pybosonsim extension.

Build and run from the repository root:

    cargo build -p bosonsim-python --release --features extension-module
    cp target/release/libpybosonsim.so python/pybosonsim.so
    python3 python/smoke_test.py
"""

import math
import sys
from collections import Counter
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import pybosonsim as bs


def main():
    ones = [[1 + 0j] * 3 for _ in range(3)]
    assert abs(bs.permanent(ones) - 6) < 1e-12

    beamsplitter = bs.Interferometer.fourier(2)
    hom = bs.gram_distribution(beamsplitter, 2, 0.5)
    assert abs(hom[(1, 1)] - 0.375) < 1e-12

    u = bs.Interferometer.haar(6, seed=4)
    assert u.modes == 6
    again = bs.Interferometer.from_json(u.to_json())
    assert max(abs(a - b) for ra, rb in zip(u.rows(), again.rows()) for a, b in zip(ra, rb)) < 1e-15

    exact = bs.mixture_distribution(u, 3, x=0.7, eta=0.8, k=2)
    assert abs(sum(exact.values()) - 1) < 1e-9

    sampler = bs.Sampler(u, 3, x=0.7, eta=0.8, k=2, seed=11)
    samples = sampler.sample(20000, threads=2)
    assert samples == sampler.sample(20000, threads=1)
    counts = Counter(tuple(s) for s in samples)
    empirical = {k: c / len(samples) for k, c in counts.items()}
    tvd = bs.total_variation(empirical, exact)
    assert tvd < 0.06, tvd

    assert abs(bs.max_noise_state(90, 89, 0.1) - 0.1 ** (1 / 90)) < 1e-5
    assert abs(bs.max_noise_point(90, 89, 0.1, "eta") - (math.e * 0.01) ** (1 / 90)) < 1e-5
    assert bs.min_k_for_error(4, 0.5, 0.32) == 2
    assert 205 <= bs.crossover_n(0.5, 0.5) <= 255

    try:
        bs.Interferometer([[1, 1], [1, 1]])
    except ValueError:
        pass
    else:
        raise AssertionError("non-unitary matrix accepted")

    print(f"smoke test passed (sampler tvd {tvd:.4f})")


if __name__ == "__main__":
    main()
