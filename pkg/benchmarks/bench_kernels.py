"""Compare the numba and numpy stepping kernels on growing ring models.

Both backends produce bit-identical trajectories; this script measures the
speed difference so the fallback's cost is a known quantity.  Run:

    python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import os
import random
import time

from cldkit import corpus, engine, kernels
from cldkit.model import Link, Model, Polarity, Sector, Variable
from cldkit.scenario import Form, Integrator, ScenarioSpec


def ring_model(n_vars, extra_links, seed):
    rng = random.Random(seed)
    edges = {(i, i % n_vars + 1) for i in range(1, n_vars + 1)}
    while len(edges) < n_vars + extra_links:
        a, b = rng.randrange(1, n_vars + 1), rng.randrange(1, n_vars + 1)
        if a != b:
            edges.add((a, b))
    return Model(
        name=f"ring-{n_vars}",
        sectors=(Sector("s", "S"),),
        variables=tuple(Variable(i, f"v{i}", "s") for i in range(1, n_vars + 1)),
        links=tuple(
            Link(a, b, Polarity.MINUS if rng.random() < 0.2 else Polarity.PLUS)
            for a, b in sorted(edges)
        ),
    )


def spec_for(model, horizon, dt):
    ids = [v.id for v in model.variables]
    return ScenarioSpec(
        name="bench",
        horizon=horizon,
        dt=dt,
        integrator=Integrator.RK4,
        decay={i: 0.3 for i in ids},
        forms={i: Form("sat", 2.0) for i in ids},
    )


def best_time(system, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        start = time.perf_counter()
        result = engine.integrate(system)
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    cases = [("hei-ai baseline", corpus.canonical_hei_model(), corpus.load_scenario("baseline"))]
    for n_vars, extra in ((50, 100), (200, 400), (1000, 2000)):
        model = ring_model(n_vars, extra, seed=n_vars)
        cases.append((f"ring {n_vars}", model, spec_for(model, horizon=50.0, dt=0.01)))

    header = f"{'case':<16} {'vars':>5} {'links':>6} {'steps':>6} {'numpy ms':>9} {'numba ms':>9} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for label, model, spec in cases:
        system = engine.compile(model, spec)
        timings = {}
        outputs = {}
        for backend in ("numpy", "numba"):
            os.environ["CLDKIT_NO_NUMBA"] = "1" if backend == "numpy" else ""
            if kernels.active_backend() != backend:
                timings[backend] = None
                continue
            engine.integrate(system)  # warm up (numba JIT, allocator)
            timings[backend], traj = best_time(system, args.repeats)
            outputs[backend] = traj.values.tobytes()
        os.environ.pop("CLDKIT_NO_NUMBA", None)

        if len(outputs) == 2 and outputs["numpy"] != outputs["numba"]:
            raise SystemExit(f"{label}: backends disagree; bit-identity contract broken")

        np_ms = timings["numpy"] * 1e3
        if timings["numba"] is None:
            print(f"{label:<16} {len(model.variables):>5} {len(model.links):>6} "
                  f"{system.n_steps:>6} {np_ms:>9.2f} {'n/a':>9} {'n/a':>8}")
        else:
            nb_ms = timings["numba"] * 1e3
            print(f"{label:<16} {len(model.variables):>5} {len(model.links):>6} "
                  f"{system.n_steps:>6} {np_ms:>9.2f} {nb_ms:>9.2f} {np_ms / nb_ms:>7.1f}x")


if __name__ == "__main__":
    main()
