"""Write the reference tuples to fixtures/ as TupleFile JSON."""

from pathlib import Path

import numpy as np

from jspec.io import emit_tuple
from jspec.pencil import make_tuple

OUT = Path(__file__).resolve().parent.parent / "fixtures"

R3 = np.sqrt(3) / 2

TUPLES = {
    "line_conic": (
        "diagonal/rank-one-coupled pair with a line and a conic component",
        [[["1", "0", "0"], ["0", "5", "0"], ["0", "0", "0"]],
         [["1", "2", "1"], ["2", "7", "1"], ["1", "1", "1/2"]]],
    ),
    "reflection_pair": (
        "anticommuting reflection pair, two copies of a 2x2 block (float entries)",
        [np.diag([1.0, -1.0, 1.0, -1.0]),
         np.array([[-0.5, R3, 0, 0], [R3, 0.5, 0, 0], [0, 0, -0.5, R3], [0, 0, R3, 0.5]])],
    ),
    "reflection_triple": (
        "reflection triple whose spectrum is a product of two distinct conics",
        [np.diag([1.0, -1.0, 1.0, -1.0]),
         np.array([[-0.5, R3, 0, 0], [R3, 0.5, 0, 0], [0, 0, -0.5, R3], [0, 0, R3, 0.5]]),
         np.array([[-0.5, R3, 0, 0], [R3, 0.5, 0, 0], [0, 0, -0.5, -R3], [0, 0, -R3, 0.5]])],
    ),
    "reflection_pair_rational": (
        "rational pair similar to reflection_pair by diag(1, sqrt3, 1, sqrt3)",
        [[["1", "0", "0", "0"], ["0", "-1", "0", "0"], ["0", "0", "1", "0"], ["0", "0", "0", "-1"]],
         [["-1/2", "3/2", "0", "0"], ["1/2", "1/2", "0", "0"],
          ["0", "0", "-1/2", "3/2"], ["0", "0", "1/2", "1/2"]]],
    ),
    "idempotent_pair": (
        "2x2 idempotent pair",
        [[["1", "1"], ["0", "0"]], [["0", "0"], ["1", "1"]]],
    ),
    "block_idempotent_pair": (
        "4x4 idempotent pair with invariant span(e1, e2)",
        [[["1", "0", "1", "0"], ["0", "1", "0", "1"], ["0", "0", "0", "0"], ["0", "0", "0", "0"]],
         [["1", "0", "0", "1"], ["0", "1", "1", "0"], ["0", "0", "0", "0"], ["0", "0", "0", "0"]]],
    ),
}


def main():
    OUT.mkdir(exist_ok=True)
    for name, (desc, mats) in TUPLES.items():
        t = make_tuple(mats)
        emit_tuple(t, OUT / f"{name}.json", name=name, extra={"description": desc})
        print(f"wrote {name}.json  n={t.n} N={t.N} exact={t.exact} selfadjoint={t.selfadjoint}")


if __name__ == "__main__":
    main()
