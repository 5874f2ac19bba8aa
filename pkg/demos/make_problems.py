"""Regenerate the problem files in ``demos/problems`` (and the CLI test fixtures).

    python demos/make_problems.py
"""

from pathlib import Path

import numpy as np

from qnp.io import dumps, problem_to_file
from qnp.pick import InterpolationProblem, blaschke_problem, build_system
from qnp.quaternion import qabs

HERE = Path(__file__).resolve().parent
TARGETS = [HERE / "problems", HERE.parent / "tests" / "fixtures"]

I = [0.0, 1.0, 0.0, 0.0]
K1 = [np.cos(1.0), 0.0, 0.0, np.sin(1.0)]
VALUES = np.array([[0.0, 0.0, 1.0, 0.0], [np.cos(0.3), np.sin(0.3), 0.0, 0.0]])


def problems() -> dict[str, InterpolationProblem]:
    s = [0.6, 0.0, 0.8, 0.0]
    dominant = qabs(build_system(InterpolationProblem([I, K1], VALUES, [0.0, 0.0])).P).sum(axis=1) + 0.5
    return {
        "single_node.json": InterpolationProblem([I], [[1.0, 0.0, 0.0, 0.0]], [1.0]),
        "rank0.json": InterpolationProblem([I, K1], [s, s], [0.0, 0.0]),
        "two_nodes.json": InterpolationProblem([I, K1], VALUES, dominant),
        # bounds too small for the off-diagonal coupling: P has a negative eigenvalue
        "infeasible.json": InterpolationProblem([I, K1], VALUES, [0.05, 0.05]),
        # zero bounds with distinct values: not PSD, and inconsistent as rank-0 data
        "zero_bounds.json": InterpolationProblem([I, K1], VALUES, [0.0, 0.0]),
        "blaschke.json": blaschke_problem([0.3, 0.0, 0.4, 0.0], [I, K1, [-0.6, 0.0, 0.8, 0.0]]),
    }


def main() -> None:
    for target in TARGETS:
        target.mkdir(parents=True, exist_ok=True)
        for name, prob in problems().items():
            (target / name).write_text(dumps(problem_to_file(prob).to_dict()), encoding="utf-8")
    print(f"wrote {len(problems())} problems to", ", ".join(str(t) for t in TARGETS))


if __name__ == "__main__":
    main()
