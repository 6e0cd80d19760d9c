"""Benchmark the numba kernels against their pure-numpy fallbacks.

Run twice to compare backends:

    python benchmarks/bench_kernels.py            # numba (default)
    NIDSS_NUMBA=0 python benchmarks/bench_kernels.py

The two backends produce bit-identical results; only speed differs.
"""

import time

import numpy as np

from nidss._kernels import backend
from nidss.inference import joint_table
from nidss.network import Cpt, Network, Variable, check_network
from nidss.sampling import sample_codes


def random_chain_net(n_vars: int, seed: int) -> Network:
    """A ladder of binary variables, each hanging off the previous two."""
    rng = np.random.default_rng(seed)
    variables = [Variable(f"x{i}", ("a", "b")) for i in range(n_vars)]
    cpts = []
    for i, v in enumerate(variables):
        parents = [variables[j] for j in (i - 2, i - 1) if j >= 0]
        shape = tuple(p.card for p in parents) + (2,)
        raw = rng.random(shape) + 0.1
        table = raw / raw.sum(axis=-1, keepdims=True)
        cpts.append(Cpt(v.name, v.states, tuple(p.name for p in parents),
                        tuple(p.states for p in parents), table))
    return check_network(Network(variables, cpts))


def timeit(label, fn, repeats=3):
    fn()  # warm-up (includes jit compilation on the numba backend)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    print(f"{label:<44}{min(times) * 1e3:10.2f} ms")
    return min(times)


def main():
    print(f"kernel backend: {backend()}\n")
    net20 = random_chain_net(20, seed=3)
    timeit("joint table, 20 binary vars (2^20 states)", lambda: joint_table(net20))
    net200 = random_chain_net(200, seed=4)
    timeit("ancestral sampling, 200 vars x 20k draws",
           lambda: sample_codes(net200, 20_000, seed=5))
    net12 = random_chain_net(12, seed=6)
    timeit("joint table, 12 binary vars x 50 nets",
           lambda: [joint_table(random_chain_net(12, seed=s)) for s in range(50)])


if __name__ == "__main__":
    main()
